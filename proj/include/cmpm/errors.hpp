// errors.hpp
// Exception types shared across the simulator modules.

#pragma once

#include <stdexcept>
#include <string>

namespace cmpm {

// Basis too small: probability weight stuck in the top Fock levels.
class TruncationError : public std::runtime_error {
public:
    explicit TruncationError(const std::string& what) : std::runtime_error(what) {}
};

// Fixed-step propagation lost more norm than the unitarity budget allows.
class NormDriftError : public std::runtime_error {
public:
    explicit NormDriftError(const std::string& what) : std::runtime_error(what) {}
};

// A quantity that must be real came out with a non-negligible imaginary part.
class NonHermitianError : public std::runtime_error {
public:
    explicit NonHermitianError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative refinement (integrator step, quadrature) hit its retry cap.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cmpm
