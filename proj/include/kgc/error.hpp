#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgc {

enum class ErrorKind {
    RejectedMotion,
    NoConvergence,
    DegenerateMap,
    NeutralPoint,
    NoAttractor,
    AmbiguousResonance,
    NotHyperbolic,
    IncompatibleData,
    BumpOutOfRange,
    MissingAnalysis,
    OutsideDomain,
    NotConverged,
    SliceUnavailable,
    Unstable,
    NoOverlap,
    TooFewWindows,
    NonpositiveEnergy,
    InvalidArgument,
    ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` carries the failure class
/// and `module()` the component that raised it.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " [" + module + "]: " + what),
          kind_(kind),
          module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace kgc
