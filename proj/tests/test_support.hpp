// test_support.hpp
// Independent oracles shared by the test suites. Everything here is
// computed from first principles (log-gamma amplitudes, direct finite
// sums) and never calls the code paths it is used to check.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "cmpm/hamiltonian.hpp"
#include "cmpm/rng.hpp"

namespace testsupport {

using cmpm::Complex;

// e^{-|a|^2/2} a^n / sqrt(n!) via log-gamma, no recurrences.
inline Complex coherent_amp(Complex alpha, int n) {
    if (alpha == Complex(0.0)) return n == 0 ? 1.0 : 0.0;
    const double mu = std::norm(alpha);
    const double mag = std::exp(-0.5 * mu + 0.5 * n * std::log(mu) - 0.5 * std::lgamma(n + 1.0));
    return mag * std::polar(1.0, n * std::arg(alpha));
}

// <a> of a quartic-oscillator evolution of |alpha0>, by brute-force finite
// summation of conj(c_n) c_{n+1} sqrt(n+1) e^{-i (E_{n+1}-E_n) t / hbar}
// with E_n = hbar w n + hbar^2 l n^2.
inline Complex kerr_centroid_brute_force(Complex alpha0, double hbar, double omega, double lambda,
                                         double t, int terms) {
    Complex s = 0.0;
    for (int n = 0; n + 1 < terms; ++n) {
        const double en = hbar * omega * n + hbar * hbar * lambda * double(n) * double(n);
        const double en1 =
            hbar * omega * (n + 1) + hbar * hbar * lambda * double(n + 1) * double(n + 1);
        s += std::conj(coherent_amp(alpha0, n)) * coherent_amp(alpha0, n + 1) *
             std::sqrt(double(n + 1)) * std::polar(1.0, -(en1 - en) * t / hbar);
    }
    return s;
}

// Closed form of the same sum: alpha0 e^{-i(w + hbar l)t} exp(|alpha0|^2 (e^{-2 i hbar l t} - 1)).
inline Complex kerr_centroid_closed_form(Complex alpha0, double hbar, double omega, double lambda,
                                         double t) {
    const Complex rotation = std::polar(1.0, -(omega + hbar * lambda) * t);
    const Complex spread = std::exp(std::norm(alpha0) *
                                    (std::polar(1.0, -2.0 * hbar * lambda * t) - Complex(1.0)));
    return alpha0 * rotation * spread;
}

// Random Hermitian coefficient table with support up to the quartic cap.
inline cmpm::HamiltonianSpec random_hermitian_spec(cmpm::RngStream& rng) {
    cmpm::CoeffMap coeffs;
    const int n_terms = 1 + static_cast<int>(rng.unit() * 4.0);
    for (int k = 0; k < n_terms; ++k) {
        const int m = static_cast<int>(rng.unit() * 5.0);
        const int n = static_cast<int>(rng.unit() * 5.0);
        if (m + n < 1) continue;
        if (m == n) {
            coeffs[{m, n}] = Complex(rng.symmetric(0.5), 0.0);
        } else {
            const Complex z(rng.symmetric(0.5), rng.symmetric(0.5));
            coeffs[{m, n}] = z;
            coeffs[{n, m}] = std::conj(z);
        }
    }
    if (coeffs.empty()) coeffs[{1, 1}] = Complex(0.25, 0.0);
    const double hbar = 0.5 + rng.unit();
    const double omega = rng.symmetric(1.0);
    return cmpm::HamiltonianSpec(hbar, omega, std::move(coeffs));
}

inline Complex random_alpha(cmpm::RngStream& rng, double rmax) {
    return std::polar(rmax * std::sqrt(rng.unit()), 2.0 * cmpm::RngStream::pi() * rng.unit());
}

} // namespace testsupport
