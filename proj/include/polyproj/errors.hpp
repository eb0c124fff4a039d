#pragma once

#include <stdexcept>
#include <string>

namespace polyproj {

/// Base of every library error. `module()` names the component that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

#define POLYPROJ_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                               \
   public:                                                                  \
    Name(std::string module, const std::string& what)                       \
        : Error(std::move(module), what) {}                                 \
  };

POLYPROJ_DEFINE_ERROR(DimensionMismatch)
POLYPROJ_DEFINE_ERROR(InvalidArgument)
POLYPROJ_DEFINE_ERROR(EmptyPolyhedron)
POLYPROJ_DEFINE_ERROR(CapExceeded)
POLYPROJ_DEFINE_ERROR(PointNotInSet)
POLYPROJ_DEFINE_ERROR(KNotInKernel)
POLYPROJ_DEFINE_ERROR(NotApplicable)
POLYPROJ_DEFINE_ERROR(EpsOutOfRange)
POLYPROJ_DEFINE_ERROR(NumericalFailure)
POLYPROJ_DEFINE_ERROR(ConfigInvalid)

#undef POLYPROJ_DEFINE_ERROR

}  // namespace polyproj
