#pragma once

#include <stdexcept>
#include <string>

namespace odlab {

// Bad sizes, bad coefficients, malformed files, unknown config keys.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A probe was asked below the resolved scale (r < 2h and friends).
struct UnresolvedScaleError : InputError {
    explicit UnresolvedScaleError(const std::string& what) : InputError(what) {}
};

// A probe found nothing to measure (no curve samples in the ball, ...).
struct DegenerateProbeError : std::runtime_error {
    explicit DegenerateProbeError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solve did not reach the requested tolerance within its cap.
struct SolverFailure : std::runtime_error {
    double last_residual;
    SolverFailure(const std::string& what, double residual)
        : std::runtime_error(what), last_residual(residual) {}
};

// A quantitative claim that is supposed to hold unconditionally was violated.
struct ClaimViolation : std::runtime_error {
    explicit ClaimViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace odlab
