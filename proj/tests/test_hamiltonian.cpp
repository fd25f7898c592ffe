#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cmpm/fock.hpp"
#include "cmpm/hamiltonian.hpp"
#include "cmpm/rng.hpp"
#include "test_support.hpp"

using cmpm::Complex;

TEST_CASE("kerr spec stores the normal-ordered table", "[hamiltonian]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    REQUIRE(spec.coeffs().size() == 2);
    CHECK(spec.coeffs().at({1, 1}) == Complex(1.0));
    CHECK(spec.coeffs().at({2, 2}) == Complex(1.0));
    CHECK(spec.omega() == 0.0);
    CHECK(spec.number_diagonal());

    const auto harmonic = cmpm::kerr_spec(1.0, 1.0, 0.0);
    CHECK(harmonic.coeffs().empty());
    CHECK(harmonic.number_diagonal());
}

TEST_CASE("kerr matrix is diagonal with E_n = hbar w n + hbar^2 l n^2", "[hamiltonian]") {
    const double hbar = 0.7, omega = 0.4, lambda = 1.3;
    const auto spec = cmpm::kerr_spec(hbar, omega, lambda);
    const auto h = cmpm::matrix(spec, 32);
    for (int n = 0; n < 32; ++n) {
        const double expected = hbar * omega * n + hbar * hbar * lambda * double(n) * double(n);
        CHECK(std::abs(h(n, n) - Complex(expected)) < 1e-12 * std::max(1.0, expected));
        for (int k = 0; k < 32; ++k) {
            if (k != n) CHECK(std::abs(h(k, n)) == 0.0);
        }
    }
    // |3> under (hbar=1, w=0, l=1): energy 9
    const auto kerr = cmpm::matrix(cmpm::kerr_spec(1.0, 0.0, 1.0), 16);
    CHECK(std::abs(kerr(3, 3) - Complex(9.0)) < 1e-12);
    CHECK(std::abs(cmpm::diagonal_energies(cmpm::kerr_spec(1.0, 0.0, 1.0), 16)[3] - 9.0) < 1e-12);
}

TEST_CASE("displacement drive fills the first off-diagonals", "[hamiltonian]") {
    const Complex g(0.3, -0.2);
    cmpm::CoeffMap coeffs;
    coeffs[{1, 0}] = g;
    coeffs[{0, 1}] = std::conj(g);
    const cmpm::HamiltonianSpec spec(1.0, 0.0, coeffs);
    CHECK_FALSE(spec.number_diagonal());
    const auto h = cmpm::matrix(spec, 24);
    for (int n = 0; n + 1 < 24; ++n) {
        CHECK(std::abs(h(n + 1, n) - g * std::sqrt(double(n + 1))) < 1e-12);
        CHECK(std::abs(h(n, n + 1) - std::conj(g) * std::sqrt(double(n + 1))) < 1e-12);
    }
    CHECK(std::abs(h(0, 0)) == 0.0);
    CHECK(std::abs(h(5, 2)) == 0.0);

    const cmpm::HamiltonianSpec empty(1.0, 0.0, {});
    CHECK(cmpm::matrix(empty, 16).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spec validation", "[hamiltonian]") {
    cmpm::CoeffMap missing_partner;
    missing_partner[{2, 1}] = Complex(0.5, 0.1);
    CHECK_THROWS_AS(cmpm::HamiltonianSpec(1.0, 0.0, missing_partner), cmpm::NonHermitianError);

    cmpm::CoeffMap complex_diagonal;
    complex_diagonal[{1, 1}] = Complex(0.5, 0.1);
    CHECK_THROWS_AS(cmpm::HamiltonianSpec(1.0, 0.0, complex_diagonal), cmpm::NonHermitianError);

    cmpm::CoeffMap too_high;
    too_high[{5, 5}] = Complex(1.0, 0.0);
    CHECK_THROWS_AS(cmpm::HamiltonianSpec(1.0, 0.0, too_high), std::invalid_argument);

    cmpm::CoeffMap constant_term;
    constant_term[{0, 0}] = Complex(1.0, 0.0);
    CHECK_THROWS_AS(cmpm::HamiltonianSpec(1.0, 0.0, constant_term), std::invalid_argument);

    CHECK_THROWS_AS(cmpm::HamiltonianSpec(0.0, 0.0, cmpm::CoeffMap{}), std::invalid_argument);
}

TEST_CASE("matrix is Hermitian for random Hermitian tables", "[hamiltonian]") {
    cmpm::RngStream rng(77, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto spec = testsupport::random_hermitian_spec(rng);
        const auto h = cmpm::matrix(spec, 48);
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("classical symbol values", "[hamiltonian]") {
    const auto kerr = cmpm::kerr_spec(1.0, 0.0, 1.0);
    CHECK(std::abs(cmpm::classical_symbol(kerr, 5.0) - 650.0) < 1e-9);
    CHECK(cmpm::classical_symbol(kerr, 0.0) == 0.0);
    const auto harmonic = cmpm::kerr_spec(1.0, 1.0, 0.0);
    CHECK(std::abs(cmpm::classical_symbol(harmonic, Complex(1.0, 1.0)) - 2.0) < 1e-12);
}

TEST_CASE("coherent expectation of the matrix equals the classical symbol", "[hamiltonian]") {
    cmpm::RngStream rng(4242, 1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = testsupport::random_hermitian_spec(rng);
        const Complex alpha = testsupport::random_alpha(rng, 4.0);
        const auto psi = cmpm::coherent_state(alpha, 128);
        const auto h = cmpm::matrix(spec, 128);
        const Complex quantum = cmpm::expectation(psi, h);
        CHECK(std::abs(quantum.real() - cmpm::classical_symbol(spec, alpha)) < 1e-8);
        CHECK(std::abs(quantum.imag()) < 1e-10);
    }
}

TEST_CASE("classical gradient", "[hamiltonian]") {
    const auto kerr = cmpm::kerr_spec(1.0, 0.0, 1.0);
    // 5 + 2*25*5
    CHECK(std::abs(cmpm::classical_gradient(kerr, 5.0) - Complex(255.0)) < 1e-10);
    CHECK(std::abs(cmpm::classical_gradient(kerr, 0.0)) == 0.0);
    const auto harmonic = cmpm::kerr_spec(1.0, 1.0, 0.0);
    const Complex a(0.3, -1.1);
    CHECK(std::abs(cmpm::classical_gradient(harmonic, a) - a) < 1e-14);

    // central finite differences of the symbol in (x, p):
    // dH/d(conj a) = (dH/dx + i dH/dp) / 2
    cmpm::RngStream rng(90210, 5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto spec = testsupport::random_hermitian_spec(rng);
        const Complex alpha = testsupport::random_alpha(rng, 3.0);
        const double eps = 1e-6;
        const double dx = (cmpm::classical_symbol(spec, alpha + eps) -
                           cmpm::classical_symbol(spec, alpha - eps)) /
                          (2.0 * eps);
        const double dp = (cmpm::classical_symbol(spec, alpha + Complex(0.0, eps)) -
                           cmpm::classical_symbol(spec, alpha - Complex(0.0, eps))) /
                          (2.0 * eps);
        const Complex expected = 0.5 * Complex(dx, dp);
        const Complex got = cmpm::classical_gradient(spec, alpha);
        CHECK(std::abs(got - expected) <= 1e-6 * std::max(1.0, std::abs(expected)));
    }
}
