#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "polyproj/geometry.hpp"

namespace polyproj::corpus {

/// Nonempty by construction: every constraint passes through or above a
/// random center point. About a fifth of the constraints pass exactly
/// through the center, which produces degenerate vertices.
Polyhedron random_polyhedron(std::mt19937_64& rng, int dim, int constraints);

/// Unit square [0,1]^2.
Polyhedron unit_square();
/// {x >= 0, y >= 0, x + y <= 1}.
Polyhedron unit_simplex();
/// [lo, hi]^dim.
Polyhedron box(int dim, double lo, double hi);
/// Nonnegative orthant.
Polyhedron orthant(int dim);

/// `count` test polyhedra with dim in [2, max_dim] and at most
/// `max_constraints` constraints: the fixed shapes above first, then random ones.
std::vector<Polyhedron> standard_corpus(std::uint64_t seed, std::size_t count, int max_dim = 6,
                                        int max_constraints = 10);

/// Same constraints on a `coords` subset of a `dim`-dimensional space.
Polyhedron embed(const Polyhedron& c, int dim, const std::vector<int>& coords);

/// `count` distinct coordinates of [0, dim), sorted.
std::vector<int> random_support(std::mt19937_64& rng, int dim, int count);

/// Uniform point of [-radius, radius]^dim.
Vector random_point(std::mt19937_64& rng, int dim, double radius);

}  // namespace polyproj::corpus
