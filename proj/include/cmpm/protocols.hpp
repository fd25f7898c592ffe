// protocols.hpp
// Periodic simultaneous position-momentum monitoring of a pure oscillator
// state: evolve for an interval, read the centroid <a>, collapse to the
// coherent state at the measured amplitude (plus a random offset inside
// the precision disc when the jump variant is on), repeat.
//
// Measurement times carry two consecutive records at the same t: the
// pre-collapse centroid and the post-collapse one. The zero-width pair is
// what makes collapse discontinuities visible in a record stream and
// comparable between a single realization and an ensemble mean.

#pragma once

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "cmpm/classical.hpp"
#include "cmpm/errors.hpp"
#include "cmpm/evolution.hpp"
#include "cmpm/fock.hpp"
#include "cmpm/hamiltonian.hpp"
#include "cmpm/rng.hpp"

namespace cmpm {

struct MeasurementScheme {
    double tau = 0.01;          // inter-measurement interval
    double delta_alpha = 0.0;   // amplitude precision
    bool jump = false;          // false: reset to the read-out, true: offset it randomly
    std::uint64_t seed = 1;
    int record_substeps = 10;   // centroid samples per interval
    NoiseKind noise = NoiseKind::Disc;
    bool poisson_times = false; // exponential intervals with mean tau
};

struct QuantumTrajectory {
    std::vector<double> t;
    std::vector<double> x, p;           // Re<a>, Im<a>
    std::vector<double> collapse_times;
    std::vector<Complex> collapse_pre;     // centroid read at the collapse
    std::vector<Complex> collapse_targets; // coherent label after the collapse
    std::vector<double> collapse_fidelity; // pre-collapse overlap with the read-out label
    StateVector final_state;
};

struct EnsembleResult {
    std::vector<double> t;
    std::vector<double> mean_x, mean_p;
    std::vector<std::uint64_t> member_indices; // per-realization stream indices
    int realizations = 0;
    std::vector<QuantumTrajectory> members;
};

inline void validate_scheme(const MeasurementScheme& scheme) {
    if (!(scheme.tau > 0.0)) throw std::invalid_argument("MeasurementScheme: tau must be > 0");
    if (scheme.delta_alpha < 0.0) {
        throw std::invalid_argument("MeasurementScheme: delta_alpha must be >= 0");
    }
    if (scheme.record_substeps < 1) {
        throw std::invalid_argument("MeasurementScheme: record_substeps must be >= 1");
    }
}

// One monitored realization from the coherent state at alpha0 up to time T.
// All randomness comes from the stream derived from (scheme.seed, stream_index).
inline QuantumTrajectory run_protocol(const HamiltonianSpec& spec, Complex alpha0,
                                      const MeasurementScheme& scheme, double T, int dim,
                                      std::uint64_t stream_index = 0) {
    validate_scheme(scheme);
    if (!(T >= scheme.tau)) throw std::invalid_argument("run_protocol: need T >= tau");

    const Propagator prop(spec, dim);
    RngStream rng(scheme.seed, stream_index);

    QuantumTrajectory traj;
    traj.final_state = coherent_state(alpha0, dim);

    const auto record = [&](double time) {
        const Complex c = expect_a(traj.final_state);
        traj.t.push_back(time);
        traj.x.push_back(c.real());
        traj.p.push_back(c.imag());
    };

    // end_label is the exact time stamp for the last substep so that the
    // pre-collapse record and its post-collapse twin compare bit-equal.
    const auto evolve_span = [&](double start, double span, int substeps, double end_label) {
        const double dt = span / substeps;
        for (int j = 1; j <= substeps; ++j) {
            traj.final_state = prop.evolve(traj.final_state, dt);
            require_well_represented(traj.final_state, "run_protocol");
            record(j == substeps ? end_label : start + dt * j);
        }
    };

    const auto collapse = [&](double time) {
        const Complex measured = expect_a(traj.final_state);
        const Complex offset =
            scheme.jump ? draw_offset(rng, scheme.noise, scheme.delta_alpha) : Complex(0.0);
        const Complex target = measured + offset;
        if (std::abs(target - measured) > scheme.delta_alpha * (1.0 + 1e-12)) {
            throw std::logic_error("run_protocol: collapse target escaped the precision disc");
        }
        traj.collapse_fidelity.push_back(
            fidelity_with_coherent(traj.final_state, measured));
        traj.final_state = coherent_state(target, dim);
        traj.collapse_times.push_back(time);
        traj.collapse_pre.push_back(measured);
        traj.collapse_targets.push_back(target);
        record(time); // post-collapse twin of the record just taken
    };

    record(0.0);
    if (!scheme.poisson_times) {
        const long n_int = static_cast<long>(std::floor(T / scheme.tau + 1e-9));
        for (long k = 0; k < n_int; ++k) {
            evolve_span(k * scheme.tau, scheme.tau, scheme.record_substeps, (k + 1) * scheme.tau);
            collapse((k + 1) * scheme.tau);
        }
        const double remainder = T - n_int * scheme.tau;
        if (remainder > 1e-9 * scheme.tau) {
            const int substeps = std::max(
                1, static_cast<int>(std::ceil(remainder / scheme.tau * scheme.record_substeps)));
            evolve_span(n_int * scheme.tau, remainder, substeps, T);
        }
    } else {
        double now = 0.0;
        while (true) {
            const double interval = rng.exponential(scheme.tau);
            if (now + interval <= T) {
                evolve_span(now, interval, scheme.record_substeps, now + interval);
                now += interval;
                collapse(now);
            } else {
                const double remainder = T - now;
                if (remainder > 0.0) {
                    const int substeps = std::max(
                        1, static_cast<int>(
                               std::ceil(remainder / scheme.tau * scheme.record_substeps)));
                    evolve_span(now, remainder, substeps, T);
                }
                break;
            }
        }
    }
    return traj;
}

// R independent realizations with per-member streams (seed, start_index + i)
// and their arithmetic mean records. Members must share the time grid, so
// Poisson-timed schemes are limited to R = 1.
inline EnsembleResult run_ensemble(const HamiltonianSpec& spec, Complex alpha0,
                                   const MeasurementScheme& scheme, double T, int dim, int R,
                                   std::uint64_t start_index = 0, int workers = 1) {
    validate_scheme(scheme);
    if (R < 1) throw std::invalid_argument("run_ensemble: need R >= 1");
    if (scheme.poisson_times && R > 1) {
        throw std::invalid_argument("run_ensemble: Poisson-timed members have no shared grid");
    }

    EnsembleResult out;
    out.realizations = R;
    out.members.resize(R);
    const auto member = [&](int i) {
        out.members[i] = run_protocol(spec, alpha0, scheme, T, dim, start_index + i);
    };
    const int n_workers = std::max(1, workers);
    if (n_workers == 1) {
        for (int i = 0; i < R; ++i) member(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) {
            pool.emplace_back([&, w] {
                for (int i = w; i < R; i += n_workers) member(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    out.t = out.members.front().t;
    out.mean_x.assign(out.t.size(), 0.0);
    out.mean_p.assign(out.t.size(), 0.0);
    for (int i = 0; i < R; ++i) {
        out.member_indices.push_back(start_index + i);
        if (out.members[i].t != out.t) {
            throw std::logic_error("run_ensemble: member grids diverged");
        }
        for (std::size_t k = 0; k < out.t.size(); ++k) {
            out.mean_x[k] += out.members[i].x[k];
            out.mean_p[k] += out.members[i].p[k];
        }
    }
    for (std::size_t k = 0; k < out.t.size(); ++k) {
        out.mean_x[k] /= R;
        out.mean_p[k] /= R;
    }
    return out;
}

// Fraction of grid points whose x record lies inside [x_lo, x_hi].
inline double coverage_fraction(const std::vector<double>& tgrid, const std::vector<double>& x,
                                const ClassicalBand& band) {
    if (tgrid.size() != x.size() || tgrid.size() != band.t.size()) {
        throw std::invalid_argument("coverage_fraction: grid mismatch");
    }
    for (std::size_t k = 0; k < tgrid.size(); ++k) {
        if (std::abs(tgrid[k] - band.t[k]) > 1e-12) {
            throw std::invalid_argument("coverage_fraction: grids differ");
        }
    }
    if (tgrid.empty()) return 1.0;
    std::size_t inside = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (band.x_lo[k] <= x[k] && x[k] <= band.x_hi[k]) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(x.size());
}

// Largest |x jump| across the zero-width record pairs (collapse
// discontinuities), for a single realization or a mean record stream.
inline double max_zero_width_jump(const std::vector<double>& tgrid, const std::vector<double>& x) {
    if (tgrid.size() != x.size()) {
        throw std::invalid_argument("max_zero_width_jump: grid mismatch");
    }
    double best = 0.0;
    for (std::size_t k = 1; k < tgrid.size(); ++k) {
        if (tgrid[k] == tgrid[k - 1]) best = std::max(best, std::abs(x[k] - x[k - 1]));
    }
    return best;
}

// Largest collapse displacement |target - measured| of one realization.
inline double max_collapse_jump(const QuantumTrajectory& traj) {
    double best = 0.0;
    for (std::size_t k = 0; k < traj.collapse_targets.size(); ++k) {
        best = std::max(best, std::abs(traj.collapse_targets[k] - traj.collapse_pre[k]));
    }
    return best;
}

} // namespace cmpm
