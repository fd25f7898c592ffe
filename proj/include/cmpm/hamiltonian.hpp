// hamiltonian.hpp
// Polynomial oscillator Hamiltonians stored as hbar*omega*n + a table of
// normally ordered ladder monomials A_{m,n} (a^dag)^m a^n. One spec yields
// the truncated quantum matrix, the classical symbol H_cls(alpha) and its
// gradient dH/d(conj alpha), which drives the classical centroid flow.

#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "cmpm/errors.hpp"
#include "cmpm/fock.hpp"

namespace cmpm {

using CoeffMap = std::map<std::pair<int, int>, Complex>;

inline constexpr int kMaxLadderOrder = 4;

// integer power by repeated multiplication (n is small)
inline Complex powi(Complex z, int n) {
    Complex r = 1.0;
    for (int i = 0; i < n; ++i) r *= z;
    return r;
}

class HamiltonianSpec {
public:
    HamiltonianSpec(double hbar, double omega, CoeffMap coeffs)
        : hbar_(hbar), omega_(omega), coeffs_(std::move(coeffs)) {
        if (!(hbar_ > 0.0)) throw std::invalid_argument("HamiltonianSpec: hbar must be positive");
        for (const auto& [mn, value] : coeffs_) {
            const auto [m, n] = mn;
            if (m < 0 || n < 0 || m + n < 1) {
                throw std::invalid_argument("HamiltonianSpec: need m,n >= 0 and m+n >= 1");
            }
            if (m > kMaxLadderOrder || n > kMaxLadderOrder) {
                throw std::invalid_argument("HamiltonianSpec: ladder order beyond quartic rejected");
            }
            const auto partner = coeffs_.find({n, m});
            const Complex want = partner == coeffs_.end() ? Complex(0.0) : partner->second;
            if (std::abs(value - std::conj(want)) >
                1e-12 * std::max(1.0, std::abs(value))) {
                throw NonHermitianError("HamiltonianSpec: A(" + std::to_string(m) + "," +
                                        std::to_string(n) + ") has no conjugate partner");
            }
        }
    }

    double hbar() const { return hbar_; }
    double omega() const { return omega_; }
    const CoeffMap& coeffs() const { return coeffs_; }

    // True when every stored monomial is (a^dag)^m a^m, i.e. a function of n.
    bool number_diagonal() const {
        for (const auto& [mn, value] : coeffs_) {
            (void)value;
            if (mn.first != mn.second) return false;
        }
        return true;
    }

private:
    double hbar_;
    double omega_;
    CoeffMap coeffs_;
};

// H = hbar*omega*n + hbar^2*lambda*n^2, stored normally ordered:
// n^2 = (a^dag)^2 a^2 + n, so the table is {(1,1), (2,2)} with weight
// hbar^2*lambda each. lambda = 0 gives a pure harmonic spec.
inline HamiltonianSpec kerr_spec(double hbar, double omega, double lambda) {
    CoeffMap coeffs;
    if (lambda != 0.0) {
        const double w = hbar * hbar * lambda;
        coeffs[{1, 1}] = w;
        coeffs[{2, 2}] = w;
    }
    return HamiltonianSpec(hbar, omega, std::move(coeffs));
}

// Companion spec whose classical symbol is the naive substitution
// n -> |alpha|^2 applied to the Kerr form (drops the ordering shift);
// used only as a classical reference convention toggle.
inline HamiltonianSpec kerr_spec_naive_symbol(double hbar, double omega, double lambda) {
    CoeffMap coeffs;
    if (lambda != 0.0) coeffs[{2, 2}] = hbar * hbar * lambda;
    return HamiltonianSpec(hbar, omega, std::move(coeffs));
}

// Truncated matrix of hbar*omega*n + sum A_{m,n} (a^dag)^m a^n.
// Elements come from <l-n+m|(a^dag)^m a^n|l> = sqrt(l! (l-n+m)!)/(l-n)!,
// evaluated by an upward recurrence, which is the row-truncation of the
// exact infinite matrix (no ladder-product edge artifacts).
inline Eigen::MatrixXcd matrix(const HamiltonianSpec& spec, int dim) {
    if (dim < kMinDim) {
        throw std::invalid_argument("matrix: dim must be >= " + std::to_string(kMinDim));
    }
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) h(n, n) = spec.hbar() * spec.omega() * n;
    for (const auto& [mn, value] : spec.coeffs()) {
        const auto [m, n] = mn;
        // f(l) = sqrt(l! (l-n+m)!)/(l-n)!, starting at l = n.
        double f = 1.0;
        for (int i = 1; i <= n; ++i) f *= std::sqrt(double(i));
        for (int i = 1; i <= m; ++i) f *= std::sqrt(double(i));
        for (int l = n; l < dim; ++l) {
            const int k = l - n + m;
            if (k < dim) h(k, l) += value * f;
            f *= std::sqrt(double(l + 1) * double(l - n + m + 1)) / double(l - n + 1);
        }
    }
    return h;
}

// Diagonal energies E_j for number-diagonal specs:
// E_j = hbar*omega*j + sum_m A_{m,m} * j!/(j-m)!.
inline Eigen::VectorXd diagonal_energies(const HamiltonianSpec& spec, int dim) {
    if (!spec.number_diagonal()) {
        throw std::invalid_argument("diagonal_energies: spec is not number-diagonal");
    }
    Eigen::VectorXd e(dim);
    for (int j = 0; j < dim; ++j) {
        double v = spec.hbar() * spec.omega() * j;
        for (const auto& [mn, value] : spec.coeffs()) {
            const int m = mn.first;
            double fall = 1.0; // j (j-1) ... (j-m+1)
            for (int i = 0; i < m; ++i) fall *= double(j - i);
            if (j >= m) v += value.real() * fall;
        }
        e[j] = v;
    }
    return e;
}

// H_cls(alpha) = hbar*omega*|alpha|^2 + sum A_{m,n} conj(alpha)^m alpha^n.
// Hermitian tables give a real value; the residual imaginary part is
// checked and discarded.
inline double classical_symbol(const HamiltonianSpec& spec, Complex alpha) {
    Complex s = spec.hbar() * spec.omega() * std::norm(alpha);
    for (const auto& [mn, value] : spec.coeffs()) {
        s += value * powi(std::conj(alpha), mn.first) * powi(alpha, mn.second);
    }
    if (std::abs(s.imag()) >= 1e-9) {
        throw NonHermitianError("classical_symbol: imaginary residue " +
                                std::to_string(s.imag()));
    }
    return s.real();
}

// dH_cls/d(conj alpha) = hbar*omega*alpha + sum m A_{m,n} conj(alpha)^{m-1} alpha^n.
inline Complex classical_gradient(const HamiltonianSpec& spec, Complex alpha) {
    Complex g = spec.hbar() * spec.omega() * alpha;
    for (const auto& [mn, value] : spec.coeffs()) {
        const auto [m, n] = mn;
        if (m >= 1) {
            g += double(m) * value * powi(std::conj(alpha), m - 1) * powi(alpha, n);
        }
    }
    return g;
}

} // namespace cmpm
