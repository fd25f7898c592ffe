// evolution.hpp
// Exact unitary evolution between measurement events.
//
// Number-diagonal specs (the quartic oscillator included) use exact
// eigenphases, so the headline trajectories carry no integrator error.
// Anything with off-diagonal ladder terms goes through a fixed-step RK4
// integration of the Schroedinger equation with a norm-drift guard.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cmpm/errors.hpp"
#include "cmpm/fock.hpp"
#include "cmpm/hamiltonian.hpp"

namespace cmpm {

inline constexpr double kNormDriftLimit = 1e-9;

class Propagator {
public:
    enum class Mode { DiagonalPhase, Dense };

    // The mode is picked from the spec: exact eigenphases whenever the
    // table is number-diagonal, dense integration otherwise. Forcing Dense
    // on a diagonal spec is allowed (cross-checks); forcing DiagonalPhase
    // on an off-diagonal spec is not.
    explicit Propagator(HamiltonianSpec spec, int dim,
                        std::optional<Mode> forced_mode = std::nullopt)
        : spec_(std::move(spec)), dim_(dim) {
        if (dim_ < kMinDim) {
            throw std::invalid_argument("Propagator: dim must be >= " + std::to_string(kMinDim));
        }
        mode_ = forced_mode.value_or(spec_.number_diagonal() ? Mode::DiagonalPhase : Mode::Dense);
        if (mode_ == Mode::DiagonalPhase) {
            if (!spec_.number_diagonal()) {
                throw std::invalid_argument(
                    "Propagator: diagonal-phase mode needs a number-diagonal spec");
            }
            energies_ = diagonal_energies(spec_, dim_);
        } else {
            generator_ = matrix(spec_, dim_) * Complex(0.0, -1.0 / spec_.hbar());
            scale_ = generator_.cwiseAbs().rowwise().sum().maxCoeff();
        }
    }

    Mode mode() const { return mode_; }
    int dim() const { return dim_; }
    const HamiltonianSpec& spec() const { return spec_; }

    // e^{-i H t / hbar} |psi>. step_hint > 0 forces the initial dense step
    // size (tests use it to drive the drift guard); 0 selects automatically.
    StateVector evolve(const StateVector& psi, double t, double step_hint = 0.0) const {
        if (psi.dim() != dim_) {
            throw std::invalid_argument("evolve: state dimension mismatch");
        }
        if (t < 0.0) throw std::invalid_argument("evolve: t must be >= 0");
        if (t == 0.0) return psi;
        if (mode_ == Mode::DiagonalPhase) {
            return apply_number_diagonal_phase(psi, energies_ * (t / spec_.hbar()));
        }
        return evolve_dense(psi, t, step_hint);
    }

    const Eigen::VectorXd& energies() const { return energies_; }

private:
    StateVector evolve_dense(const StateVector& psi, double t, double step_hint) const {
        double h = step_hint > 0.0 ? std::min(step_hint, t) : pick_step(t);
        const double norm_in = psi.amp.norm();
        for (int attempt = 0; attempt < 2; ++attempt) {
            StateVector out = rk4_run(psi, t, h);
            const double drift = std::abs(out.amp.norm() - norm_in) / norm_in;
            if (drift < kNormDriftLimit) return out;
            h *= 0.5;
        }
        throw NormDriftError("evolve: norm drift above " + std::to_string(kNormDriftLimit) +
                             " after halving retry (step too coarse)");
    }

    double pick_step(double t) const {
        // RK4 contracts the norm by ~(h w)^6/144 per step for a mode of
        // frequency w; keep the summed drift a quarter of the budget and
        // stay well inside the imaginary-axis stability interval.
        const double w = std::max(scale_, 1e-12);
        const double h_acc = std::pow(0.25 * kNormDriftLimit * 144.0 / (t * std::pow(w, 6.0)), 0.2);
        double h = std::min({t, 1.0 / w, h_acc});
        const double h_floor = t / 2e6; // runaway guard; drift check still decides
        return std::max(h, h_floor);
    }

    StateVector rk4_run(const StateVector& psi, double t, double h) const {
        const long n_steps = std::max(1L, static_cast<long>(std::ceil(t / h - 1e-12)));
        const double dt = t / static_cast<double>(n_steps);
        StateVector out = psi;
        Eigen::VectorXcd k1(dim_), k2(dim_), k3(dim_), k4(dim_);
        for (long s = 0; s < n_steps; ++s) {
            k1.noalias() = generator_ * out.amp;
            k2.noalias() = generator_ * (out.amp + (0.5 * dt) * k1);
            k3.noalias() = generator_ * (out.amp + (0.5 * dt) * k2);
            k4.noalias() = generator_ * (out.amp + dt * k3);
            out.amp += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return out;
    }

    HamiltonianSpec spec_;
    int dim_;
    Mode mode_ = Mode::DiagonalPhase;
    Eigen::VectorXd energies_;   // diagonal mode
    Eigen::MatrixXcd generator_; // dense mode: -i H / hbar
    double scale_ = 0.0;
};

struct TrajectorySegment {
    std::vector<double> t;
    std::vector<Complex> centroid;
    StateVector final_state;
};

// Evolve through the sorted in-segment times, recording <a> at each one.
inline TrajectorySegment evolve_with_records(const Propagator& prop, const StateVector& psi,
                                             const std::vector<double>& tgrid) {
    if (!std::is_sorted(tgrid.begin(), tgrid.end())) {
        throw std::invalid_argument("evolve_with_records: tgrid must be sorted");
    }
    TrajectorySegment seg;
    seg.final_state = psi;
    double now = 0.0;
    for (double tk : tgrid) {
        if (tk < 0.0) throw std::invalid_argument("evolve_with_records: negative time");
        seg.final_state = prop.evolve(seg.final_state, tk - now);
        now = tk;
        seg.t.push_back(tk);
        seg.centroid.push_back(expect_a(seg.final_state));
    }
    return seg;
}

} // namespace cmpm
