#include "polyproj/corpus.hpp"

#include <algorithm>
#include <numeric>

#include "polyproj/errors.hpp"
#include "polyproj/rng.hpp"

namespace polyproj::corpus {

Polyhedron random_polyhedron(std::mt19937_64& rng, int dim, int constraints) {
  const Vector center = random_point(rng, dim, 2.0);
  std::vector<Halfspace> hs;
  for (int i = 0; i < constraints; ++i) {
    Vector a(dim);
    for (int j = 0; j < dim; ++j) a(j) = gaussian(rng);
    if (a.norm() < 1e-3) a(0) += 1.0;
    const double margin = unit_uniform(rng) < 0.2 ? 0.0 : uniform(rng, 0.1, 1.5);
    hs.emplace_back(a, a.dot(center) + margin * a.norm());
  }
  return Polyhedron(dim, std::move(hs));
}

Polyhedron unit_square() { return box(2, 0.0, 1.0); }

Polyhedron unit_simplex() {
  std::vector<Halfspace> hs;
  hs.emplace_back(Vector{{-1.0, 0.0}}, 0.0);
  hs.emplace_back(Vector{{0.0, -1.0}}, 0.0);
  hs.emplace_back(Vector{{1.0, 1.0}}, 1.0);
  return Polyhedron(2, std::move(hs));
}

Polyhedron box(int dim, double lo, double hi) {
  std::vector<Halfspace> hs;
  for (int j = 0; j < dim; ++j) {
    hs.emplace_back(-Vector::Unit(dim, j), -lo);
    hs.emplace_back(Vector::Unit(dim, j), hi);
  }
  return Polyhedron(dim, std::move(hs));
}

Polyhedron orthant(int dim) {
  std::vector<Halfspace> hs;
  for (int j = 0; j < dim; ++j) hs.emplace_back(-Vector::Unit(dim, j), 0.0);
  return Polyhedron(dim, std::move(hs));
}

std::vector<Polyhedron> standard_corpus(std::uint64_t seed, std::size_t count, int max_dim, int max_constraints) {
  std::mt19937_64 rng(seed);
  std::vector<Polyhedron> out;
  std::vector<Polyhedron> fixed{unit_square(), unit_simplex(), box(3, -1.0, 1.0), orthant(std::min(4, max_dim))};
  for (auto& p : fixed) {
    if (out.size() < count && p.size() <= max_constraints && p.ambient_dim() <= max_dim) out.push_back(std::move(p));
  }
  while (out.size() < count) {
    const int dim = uniform_int(rng, 2, max_dim);
    const int m = uniform_int(rng, 1, max_constraints);
    out.push_back(random_polyhedron(rng, dim, m));
  }
  return out;
}

Polyhedron embed(const Polyhedron& c, int dim, const std::vector<int>& coords) {
  if (static_cast<int>(coords.size()) != c.ambient_dim()) {
    throw DimensionMismatch("corpus", "embedding needs one target coordinate per source dimension");
  }
  std::vector<Halfspace> hs;
  for (const auto& h : c.halfspaces()) {
    Vector a = Vector::Zero(dim);
    for (std::size_t j = 0; j < coords.size(); ++j) a(coords[j]) = h.normal()(static_cast<Eigen::Index>(j));
    hs.emplace_back(std::move(a), h.offset());
  }
  return Polyhedron(dim, std::move(hs));
}

std::vector<int> random_support(std::mt19937_64& rng, int dim, int count) {
  std::vector<int> all(static_cast<std::size_t>(dim));
  std::iota(all.begin(), all.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < count; ++i) {
    const int j = uniform_int(rng, i, dim - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

Vector random_point(std::mt19937_64& rng, int dim, double radius) {
  Vector v(dim);
  for (int j = 0; j < dim; ++j) v(j) = uniform(rng, -radius, radius);
  return v;
}

}  // namespace polyproj::corpus
