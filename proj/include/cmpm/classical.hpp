// classical.hpp
// Classical centroid flow i*hbar*dalpha/dt = dH_cls/d(conj alpha) and the
// ensemble error band induced by amplitude imprecision delta_alpha and
// sampling-time jitter delta_t.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <thread>
#include <vector>

#include "cmpm/errors.hpp"
#include "cmpm/hamiltonian.hpp"
#include "cmpm/rng.hpp"

namespace cmpm {

struct ClassicalTrajectory {
    std::vector<double> t;
    std::vector<Complex> alpha;
};

struct ClassicalBand {
    std::vector<double> t;
    std::vector<double> x_mean, x_lo, x_hi;
    std::vector<double> p_mean, p_lo, p_hi;
};

enum class BandKind { TwoSigma, Envelope };

namespace detail {

inline Complex centroid_flow(const HamiltonianSpec& spec, Complex a) {
    return Complex(0.0, -1.0 / spec.hbar()) * classical_gradient(spec, a);
}

inline Complex rk4_alpha(const HamiltonianSpec& spec, Complex a, double dt) {
    const Complex k1 = centroid_flow(spec, a);
    const Complex k2 = centroid_flow(spec, a + 0.5 * dt * k1);
    const Complex k3 = centroid_flow(spec, a + 0.5 * dt * k2);
    const Complex k4 = centroid_flow(spec, a + dt * k3);
    return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// March from alpha at time `from` to time `to` with |step| <= h.
inline Complex march(const HamiltonianSpec& spec, Complex a, double from, double to, double h) {
    const double span = to - from;
    if (span == 0.0) return a;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / h - 1e-12)));
    const double dt = span / static_cast<double>(n);
    for (long i = 0; i < n; ++i) a = rk4_alpha(spec, a, dt);
    return a;
}

// Values at a sorted grid (duplicates and negative times allowed); the
// trajectory starts from alpha0 at t = 0 and marches outward both ways.
inline std::vector<Complex> integrate_sorted(const HamiltonianSpec& spec, Complex alpha0,
                                             const std::vector<double>& grid, double h) {
    std::vector<Complex> out(grid.size());
    const auto split = std::lower_bound(grid.begin(), grid.end(), 0.0);
    const auto first_nonneg = static_cast<std::size_t>(split - grid.begin());
    Complex a = alpha0;
    double now = 0.0;
    for (std::size_t i = first_nonneg; i < grid.size(); ++i) {
        a = march(spec, a, now, grid[i], h);
        now = grid[i];
        out[i] = a;
    }
    a = alpha0;
    now = 0.0;
    for (std::size_t i = first_nonneg; i-- > 0;) {
        a = march(spec, a, now, grid[i], h);
        now = grid[i];
        out[i] = a;
    }
    return out;
}

inline double base_step(const std::vector<double>& grid) {
    double min_spacing = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = grid[i] - grid[i - 1];
        if (d > 0.0 && (min_spacing == 0.0 || d < min_spacing)) min_spacing = d;
    }
    if (min_spacing == 0.0) {
        double span = 0.0;
        for (double t : grid) span = std::max(span, std::abs(t));
        min_spacing = span > 0.0 ? span / 16.0 : 1e-3;
    }
    return 0.25 * min_spacing;
}

// Halve the step until energy drift is inside the relative budget; only
// that criterion can fail the call. Phase-only flows keep refining (within
// the same cap) toward |alpha| conservation at the 1e-10 scale, which
// dense grids reach without any extra halving.
inline double refine_step(const HamiltonianSpec& spec, Complex alpha0,
                          const std::vector<double>& grid) {
    double h = base_step(grid);
    const double e0 = classical_symbol(spec, alpha0);
    const double e_budget = 1e-8 * std::max(1.0, std::abs(e0));
    const bool phase_flow = spec.number_diagonal();
    const double r0 = std::abs(alpha0);
    double last_energy_ok = -1.0;
    for (int refinement = 0; refinement <= 3; ++refinement) {
        const auto values = integrate_sorted(spec, alpha0, grid, h);
        double e_drift = 0.0;
        double r_drift = 0.0;
        bool finite = true;
        for (const Complex& a : values) {
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) {
                finite = false; // diverged; a NaN would slip through std::max
                break;
            }
            e_drift = std::max(e_drift, std::abs(classical_symbol(spec, a) - e0));
            if (phase_flow) r_drift = std::max(r_drift, std::abs(std::abs(a) - r0));
        }
        if (finite && std::isfinite(e_drift) && e_drift <= e_budget) {
            last_energy_ok = h;
            if (!phase_flow || r_drift <= 5e-11) return h;
        }
        h *= 0.5;
    }
    if (last_energy_ok > 0.0) return last_energy_ok;
    throw ConvergenceError("integrate_classical: energy drift still above budget "
                           "after 3 step refinements");
}

} // namespace detail

// Fixed-step 4th-order integration of dalpha/dt = -(i/hbar) dH_cls/d(conj alpha),
// sampled at the (sorted) grid. The step starts at min-spacing/4 and is
// refined until the conserved quantities hold.
inline ClassicalTrajectory integrate_classical(const HamiltonianSpec& spec, Complex alpha0,
                                               const std::vector<double>& tgrid) {
    if (!std::is_sorted(tgrid.begin(), tgrid.end())) {
        throw std::invalid_argument("integrate_classical: tgrid must be sorted");
    }
    ClassicalTrajectory traj;
    traj.t = tgrid;
    if (tgrid.empty()) return traj;
    const double h = detail::refine_step(spec, alpha0, tgrid);
    traj.alpha = detail::integrate_sorted(spec, alpha0, tgrid, h);
    return traj;
}

struct BandOptions {
    NoiseKind noise = NoiseKind::Disc;
    BandKind kind = BandKind::TwoSigma;
    int workers = 1;
};

// Monte-Carlo band over M classical trajectories started from
// alpha0 + eta, |eta| <= delta_alpha. With delta_t > 0 each trajectory
// reports the value at t + u, u uniform in [-delta_t, delta_t], drawn per
// trajectory per grid point. Band edges are mean +/- 2 sigma (or the
// min/max envelope). Per-trajectory draws come from streams derived from
// (seed, trajectory index), so the result is bitwise stable for any
// worker count.
inline ClassicalBand ensemble_band(const HamiltonianSpec& spec, Complex alpha0,
                                   double delta_alpha, double delta_t, int M,
                                   const std::vector<double>& tgrid, std::uint64_t seed,
                                   const BandOptions& options = {}) {
    if (M < 100) throw std::invalid_argument("ensemble_band: need M >= 100");
    if (delta_alpha < 0.0 || delta_t < 0.0) {
        throw std::invalid_argument("ensemble_band: imprecisions must be >= 0");
    }
    if (!std::is_sorted(tgrid.begin(), tgrid.end())) {
        throw std::invalid_argument("ensemble_band: tgrid must be sorted");
    }
    const std::size_t K = tgrid.size();
    const double h = detail::refine_step(spec, alpha0, tgrid);

    // moments accumulate as deviations from member 0, which keeps the
    // variance free of large-value cancellation (exactly zero width for a
    // deterministic ensemble)
    std::vector<double> ref_x(K, 0.0), ref_p(K, 0.0);
    std::vector<double> sum_x(K, 0.0), sum_xx(K, 0.0), min_x(K, 0.0), max_x(K, 0.0);
    std::vector<double> sum_p(K, 0.0), sum_pp(K, 0.0), min_p(K, 0.0), max_p(K, 0.0);

    const auto member = [&](int index, std::vector<Complex>& values) {
        RngStream rng(seed, static_cast<std::uint64_t>(index));
        const Complex eta = draw_offset(rng, options.noise, delta_alpha);
        if (delta_t > 0.0) {
            std::vector<double> jittered(K);
            for (std::size_t k = 0; k < K; ++k) jittered[k] = tgrid[k] + rng.symmetric(delta_t);
            std::vector<std::size_t> order(K);
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return jittered[a] < jittered[b]; });
            std::vector<double> sorted(K);
            for (std::size_t k = 0; k < K; ++k) sorted[k] = jittered[order[k]];
            const auto sorted_values = detail::integrate_sorted(spec, alpha0 + eta, sorted, h);
            values.resize(K);
            for (std::size_t k = 0; k < K; ++k) values[order[k]] = sorted_values[k];
        } else {
            values = detail::integrate_sorted(spec, alpha0 + eta, tgrid, h);
        }
    };

    // Fixed-size chunks keep memory flat; reduction always runs in index
    // order, so the summation pattern is independent of the worker count.
    constexpr int kChunk = 16;
    const int workers = std::max(1, options.workers);
    std::vector<std::vector<Complex>> slot(kChunk);
    for (int chunk_begin = 0; chunk_begin < M; chunk_begin += kChunk) {
        const int chunk_size = std::min(kChunk, M - chunk_begin);
        if (workers == 1) {
            for (int s = 0; s < chunk_size; ++s) member(chunk_begin + s, slot[s]);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (int s = w; s < chunk_size; s += workers) member(chunk_begin + s, slot[s]);
                });
            }
            for (auto& th : pool) th.join();
        }
        for (int s = 0; s < chunk_size; ++s) {
            const int index = chunk_begin + s;
            for (std::size_t k = 0; k < K; ++k) {
                const double x = slot[s][k].real();
                const double p = slot[s][k].imag();
                if (index == 0) {
                    ref_x[k] = x;
                    ref_p[k] = p;
                    min_x[k] = max_x[k] = x;
                    min_p[k] = max_p[k] = p;
                } else {
                    min_x[k] = std::min(min_x[k], x);
                    max_x[k] = std::max(max_x[k], x);
                    min_p[k] = std::min(min_p[k], p);
                    max_p[k] = std::max(max_p[k], p);
                }
                const double dx = x - ref_x[k];
                const double dp = p - ref_p[k];
                sum_x[k] += dx;
                sum_xx[k] += dx * dx;
                sum_p[k] += dp;
                sum_pp[k] += dp * dp;
            }
        }
    }

    ClassicalBand band;
    band.t = tgrid;
    band.x_mean.resize(K);
    band.x_lo.resize(K);
    band.x_hi.resize(K);
    band.p_mean.resize(K);
    band.p_lo.resize(K);
    band.p_hi.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double dx_mean = sum_x[k] / M;
        const double dp_mean = sum_p[k] / M;
        const double mx = ref_x[k] + dx_mean;
        const double mp = ref_p[k] + dp_mean;
        band.x_mean[k] = mx;
        band.p_mean[k] = mp;
        if (options.kind == BandKind::TwoSigma) {
            const double sx = std::sqrt(std::max(0.0, sum_xx[k] / M - dx_mean * dx_mean));
            const double sp = std::sqrt(std::max(0.0, sum_pp[k] / M - dp_mean * dp_mean));
            band.x_lo[k] = mx - 2.0 * sx;
            band.x_hi[k] = mx + 2.0 * sx;
            band.p_lo[k] = mp - 2.0 * sp;
            band.p_hi[k] = mp + 2.0 * sp;
        } else {
            band.x_lo[k] = min_x[k];
            band.x_hi[k] = max_x[k];
            band.p_lo[k] = min_p[k];
            band.p_hi[k] = max_p[k];
        }
    }
    return band;
}

inline double mean_half_width(const ClassicalBand& band) {
    if (band.t.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t k = 0; k < band.t.size(); ++k) s += 0.5 * (band.x_hi[k] - band.x_lo[k]);
    return s / static_cast<double>(band.t.size());
}

} // namespace cmpm
