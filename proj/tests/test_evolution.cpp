#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "cmpm/evolution.hpp"
#include "cmpm/fock.hpp"
#include "cmpm/hamiltonian.hpp"
#include "test_support.hpp"

using cmpm::Complex;

namespace {
const double kPi = cmpm::RngStream::pi();
}

TEST_CASE("harmonic evolution rotates coherent states", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 1.0, 0.0);
    const cmpm::Propagator prop(spec, 64);
    REQUIRE(prop.mode() == cmpm::Propagator::Mode::DiagonalPhase);
    const auto psi0 = cmpm::coherent_state(2.0, 64);
    const auto psi = prop.evolve(psi0, kPi / 2.0);
    CHECK(cmpm::fidelity_with_coherent(psi, Complex(0.0, -2.0)) >= 1.0 - 1e-10);
    CHECK(std::abs(cmpm::expect_a(psi) - Complex(0.0, -2.0)) < 1e-10);
}

TEST_CASE("t = 0 is the identity and t < 0 is rejected", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.3, 0.9);
    const cmpm::Propagator prop(spec, 32);
    const auto psi0 = cmpm::coherent_state(Complex(1.0, -0.5), 32);
    const auto same = prop.evolve(psi0, 0.0);
    CHECK(cmpm::state_distance(same, psi0) == 0.0);
    CHECK_THROWS_AS(prop.evolve(psi0, -0.1), std::invalid_argument);
}

TEST_CASE("quartic centroid follows the eigenphase sum", "[evolution]") {
    // closed form cross-checked against the brute-force finite sum first
    const Complex alpha0(2.0, 0.0);
    for (double t : {0.0, 0.17, 0.5, 0.93}) {
        const Complex brute = testsupport::kerr_centroid_brute_force(alpha0, 1.0, 0.0, 1.0, t, 64);
        const Complex closed = testsupport::kerr_centroid_closed_form(alpha0, 1.0, 0.0, 1.0, t);
        CHECK(std::abs(brute - closed) < 1e-12);
    }

    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    const cmpm::Propagator prop(spec, 64);
    const auto psi0 = cmpm::coherent_state(alpha0, 64);
    double worst = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double t = 0.01 * k;
        const auto psi = prop.evolve(psi0, t);
        const Complex expected = testsupport::kerr_centroid_closed_form(alpha0, 1.0, 0.0, 1.0, t);
        worst = std::max(worst, std::abs(cmpm::expect_a(psi) - expected));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("unitarity, composition, energy conservation", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    const cmpm::Propagator prop(spec, 96);
    const auto psi0 = cmpm::coherent_state(Complex(2.5, 1.0), 96);
    const auto h = cmpm::matrix(spec, 96);
    const double e0 = cmpm::expectation(psi0, h).real();

    const auto a = prop.evolve(psi0, 0.31);
    const auto b = prop.evolve(a, 0.12);
    const auto direct = prop.evolve(psi0, 0.43);
    CHECK(std::abs(cmpm::norm_sq(a) - 1.0) < 1e-9);
    CHECK(cmpm::state_distance(b, direct) < 1e-9);
    CHECK(std::abs(cmpm::expectation(b, h).real() - e0) <= 1e-8 * std::abs(e0));
}

TEST_CASE("diagonal and dense paths agree on the quartic spec", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    const int dim = 32;
    const cmpm::Propagator diag(spec, dim);
    const cmpm::Propagator dense(spec, dim, cmpm::Propagator::Mode::Dense);
    REQUIRE(dense.mode() == cmpm::Propagator::Mode::Dense);
    const auto psi0 = cmpm::coherent_state(Complex(1.2, -0.6), dim);
    const double t = 0.06;
    const auto via_diag = diag.evolve(psi0, t);
    const auto via_dense = dense.evolve(psi0, t);
    CHECK(cmpm::state_distance(via_diag, via_dense) < 1e-8);
}

TEST_CASE("dense path on an off-diagonal drive", "[evolution]") {
    cmpm::CoeffMap coeffs;
    coeffs[{1, 0}] = Complex(0.4, 0.1);
    coeffs[{0, 1}] = Complex(0.4, -0.1);
    const cmpm::HamiltonianSpec spec(1.0, 1.0, coeffs);
    const cmpm::Propagator prop(spec, 32);
    REQUIRE(prop.mode() == cmpm::Propagator::Mode::Dense);
    CHECK_THROWS_AS(cmpm::Propagator(spec, 32, cmpm::Propagator::Mode::DiagonalPhase),
                    std::invalid_argument);

    const auto psi0 = cmpm::coherent_state(Complex(0.8, 0.3), 32);
    const auto h = cmpm::matrix(spec, 32);
    const double e0 = cmpm::expectation(psi0, h).real();
    const auto a = prop.evolve(psi0, 0.4);
    const auto b = prop.evolve(a, 0.35);
    const auto direct = prop.evolve(psi0, 0.75);
    CHECK(std::abs(cmpm::norm_sq(a) - 1.0) < 1e-9);
    CHECK(cmpm::state_distance(b, direct) < 1e-9);
    CHECK(std::abs(cmpm::expectation(b, h).real() - e0) <= 1e-8 * std::max(1.0, std::abs(e0)));
}

TEST_CASE("a forced coarse step trips the norm-drift guard", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    const cmpm::Propagator dense(spec, 32, cmpm::Propagator::Mode::Dense);
    const auto psi0 = cmpm::coherent_state(Complex(1.5, 0.0), 32);
    CHECK_THROWS_AS(dense.evolve(psi0, 0.08, 0.08), cmpm::NormDriftError);
}

TEST_CASE("evolve_with_records", "[evolution]") {
    const auto spec = cmpm::kerr_spec(1.0, 0.0, 1.0);
    const cmpm::Propagator prop(spec, 128);
    const auto psi0 = cmpm::coherent_state(5.0, 128);

    SECTION("empty grid records nothing and leaves the state alone") {
        const auto seg = cmpm::evolve_with_records(prop, psi0, {});
        CHECK(seg.t.empty());
        CHECK(cmpm::state_distance(seg.final_state, psi0) == 0.0);
    }

    SECTION("single point equals a plain evolve") {
        const auto seg = cmpm::evolve_with_records(prop, psi0, {0.05});
        REQUIRE(seg.t.size() == 1);
        CHECK(std::abs(seg.centroid[0] - cmpm::expect_a(prop.evolve(psi0, 0.05))) < 1e-13);
    }

    SECTION("centroid magnitude shrinks over the collapse window") {
        std::vector<double> grid;
        for (int k = 1; k <= 100; ++k) grid.push_back(0.001 * k);
        const auto seg = cmpm::evolve_with_records(prop, psi0, grid);
        for (std::size_t k = 1; k < seg.centroid.size(); ++k) {
            CHECK(std::abs(seg.centroid[k]) < std::abs(seg.centroid[k - 1]));
        }
        CHECK(std::abs(seg.centroid.back()) < 5.0);
    }

    SECTION("unsorted grid is rejected") {
        CHECK_THROWS_AS(cmpm::evolve_with_records(prop, psi0, {0.2, 0.1}),
                        std::invalid_argument);
    }
}
