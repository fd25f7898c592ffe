// fock.hpp
// Truncated Fock-space pure states: coherent-state construction, ladder
// expectation values, overlaps and number-diagonal phase application.
//
// States are immutable values; every operation returns a fresh vector.
// The quadrature convention is x = Re<a>, p = Im<a>.

#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "cmpm/errors.hpp"

namespace cmpm {

using Complex = std::complex<double>;

// Probability weight allowed in the top kTailLevels Fock levels before a
// state is rejected as under-resolved.
inline constexpr double kTailMassLimit = 1e-10;
inline constexpr int kTailLevels = 8;
inline constexpr int kMinDim = 16;

struct StateVector {
    Eigen::VectorXcd amp;

    int dim() const { return static_cast<int>(amp.size()); }
};

inline double norm_sq(const StateVector& psi) { return psi.amp.squaredNorm(); }

// Weight of the top kTailLevels amplitudes; the truncation-artifact guard.
inline double tail_mass(const StateVector& psi) {
    const int d = psi.dim();
    const int lo = d > kTailLevels ? d - kTailLevels : 0;
    return psi.amp.segment(lo, d - lo).squaredNorm();
}

inline void require_well_represented(const StateVector& psi, const char* where) {
    const double tail = tail_mass(psi);
    if (!(tail < kTailMassLimit)) {
        throw TruncationError(std::string(where) + ": tail mass " + std::to_string(tail) +
                              " at dim " + std::to_string(psi.dim()) +
                              " (basis too small)");
    }
}

// Upper Poisson tail sum_{n >= n0} e^{-mu} mu^n / n!, by direct summation.
inline double poisson_tail_beyond(double mu, int n0) {
    if (n0 <= 0) return 1.0;
    if (mu <= 0.0) return 0.0;
    // First term via log-gamma, then the upward recurrence.
    double term = std::exp(-mu + n0 * std::log(mu) - std::lgamma(n0 + 1.0));
    double sum = 0.0;
    int n = n0;
    while (term > 1e-30 * (sum + 1e-300) || n < n0 + 8) {
        sum += term;
        ++n;
        term *= mu / n;
        if (n > n0 + 100000) break;
    }
    return sum;
}

// Coherent state |alpha> truncated to `dim` levels.
// Amplitudes follow c_{n+1} = c_n * alpha / sqrt(n+1) from
// c_0 = e^{-|alpha|^2/2}; the result is renormalized so the truncated
// vector has unit norm.
inline StateVector coherent_state(Complex alpha, int dim) {
    if (dim < kMinDim) {
        throw std::invalid_argument("coherent_state: dim must be >= " + std::to_string(kMinDim));
    }
    const double mu = std::norm(alpha);
    const double tail = poisson_tail_beyond(mu, dim - kTailLevels);
    if (!(tail < kTailMassLimit)) {
        throw TruncationError("coherent_state: Poisson tail " + std::to_string(tail) +
                              " beyond n=" + std::to_string(dim - kTailLevels) +
                              " for |alpha|^2=" + std::to_string(mu));
    }
    StateVector psi;
    psi.amp.resize(dim);
    Complex c = std::exp(Complex(-0.5 * mu, 0.0));
    for (int n = 0; n < dim; ++n) {
        psi.amp[n] = c;
        c *= alpha / std::sqrt(double(n + 1));
    }
    psi.amp /= std::sqrt(psi.amp.squaredNorm());
    return psi;
}

inline StateVector fock_state(int n, int dim) {
    if (dim < kMinDim || n < 0 || n >= dim) {
        throw std::invalid_argument("fock_state: need 0 <= n < dim, dim >= 16");
    }
    StateVector psi;
    psi.amp = Eigen::VectorXcd::Zero(dim);
    psi.amp[n] = 1.0;
    return psi;
}

// <a> = sum_n conj(c_n) c_{n+1} sqrt(n+1); x = Re, p = Im.
inline Complex expect_a(const StateVector& psi) {
    Complex s = 0.0;
    for (int n = 0; n + 1 < psi.dim(); ++n) {
        s += std::conj(psi.amp[n]) * psi.amp[n + 1] * std::sqrt(double(n + 1));
    }
    return s;
}

// <n> = sum_n n |c_n|^2.
inline double expect_n(const StateVector& psi) {
    double s = 0.0;
    for (int n = 0; n < psi.dim(); ++n) s += n * std::norm(psi.amp[n]);
    return s;
}

inline Complex overlap(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("overlap: dimension mismatch");
    }
    return a.amp.dot(b.amp); // Eigen's dot conjugates the left argument
}

inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(overlap(a, b));
}

// |<alpha|psi>|^2 against the truncated coherent state at the same dim.
inline double fidelity_with_coherent(const StateVector& psi, Complex alpha) {
    return fidelity(coherent_state(alpha, psi.dim()), psi);
}

// c_n -> e^{-i phi_n} c_n. Norm is preserved exactly.
inline StateVector apply_number_diagonal_phase(const StateVector& psi,
                                               const Eigen::VectorXd& phases) {
    if (phases.size() != psi.amp.size()) {
        throw std::invalid_argument("apply_number_diagonal_phase: phases length mismatch");
    }
    StateVector out;
    out.amp.resize(psi.dim());
    for (int n = 0; n < psi.dim(); ++n) {
        out.amp[n] = psi.amp[n] * std::polar(1.0, -phases[n]);
    }
    return out;
}

inline Complex expectation(const StateVector& psi, const Eigen::MatrixXcd& op) {
    if (op.rows() != psi.amp.size() || op.cols() != psi.amp.size()) {
        throw std::invalid_argument("expectation: operator dimension mismatch");
    }
    return psi.amp.dot(op * psi.amp);
}

inline double state_distance(const StateVector& a, const StateVector& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("state_distance: dimension mismatch");
    }
    return (a.amp - b.amp).norm();
}

} // namespace cmpm
