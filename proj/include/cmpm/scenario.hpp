// scenario.hpp
// Scenario system behind the CLI: flat key=value configs, validation
// against module preconditions, built-in scenario wiring, CSV/summary
// emission. Reruns of the same config produce byte-identical CSVs for
// any worker count.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cmpm/classical.hpp"
#include "cmpm/errors.hpp"
#include "cmpm/hamiltonian.hpp"
#include "cmpm/protocols.hpp"
#include "cmpm/semiclassical.hpp"

namespace cmpm {

// Stream-index ranges per purpose, so quantum realizations, the classical
// band and record jitter never share draws for one seed.
inline constexpr std::uint64_t kBandStreamOffset = 1ull << 32;
inline constexpr std::uint64_t kJitterStreamOffset = 1ull << 33;

struct ScenarioConfig {
    std::string scenario = "fig2a";
    double hbar = 1.0;
    double omega = 0.0;
    double lambda = 1.0;
    double alpha0_re = 5.0;
    double alpha0_im = 0.0;
    double delta_alpha = 0.1;
    double delta_t = 0.0;
    double tau = 0.0025;
    double total_time = 4.0;
    int dim = 128;
    int realizations = 100;
    int classical_ensemble = 1000;
    std::uint64_t seed = 19937;
    std::string outdir;

    // documented extras (option switches)
    int record_substeps = 10;
    int jump = 1;
    double band_delta_alpha = -1.0; // < 0: follow delta_alpha
    std::string band_kind = "two_sigma";
    std::string noise_kind = "disc";
    std::string symbol_convention = "normal_ordered";
    int jitter_quantum = 0;
    int poisson_times = 0;
    int workers = 2;

    Complex alpha0() const { return {alpha0_re, alpha0_im}; }
    double band_delta() const { return band_delta_alpha < 0.0 ? delta_alpha : band_delta_alpha; }
};

inline const std::vector<std::pair<std::string, std::string>>& scenario_catalog() {
    static const std::vector<std::pair<std::string, std::string>> catalog = {
        {"fig2a", "one jump realization plus the R-realization mean"},
        {"fig2b", "one jump realization against the classical band"},
        {"fig2c", "R-realization jump mean against the classical band"},
        {"fig2d", "high-precision single realization against the classical band"},
        {"fig3", "fig2b plus sampling-time jitter on the classical band"},
        {"converge", "interval sweep of the no-jump protocol against the classical trajectory"},
        {"dyson", "interval sweep of the leading correction norm and fidelity gap"},
    };
    return catalog;
}

inline bool known_scenario(const std::string& name) {
    for (const auto& [key, blurb] : scenario_catalog()) {
        (void)blurb;
        if (key == name) return true;
    }
    return false;
}

inline ScenarioConfig scenario_defaults(const std::string& name) {
    ScenarioConfig c;
    c.scenario = name;
    if (name == "fig2a" || name == "fig2b" || name == "fig2c") {
        c.realizations = (name == "fig2b") ? 1 : 100;
    } else if (name == "fig2d") {
        c.realizations = 1;
        c.delta_alpha = 0.01;
        c.band_delta_alpha = 0.1; // measurement precision changes, the plotted error bar does not
    } else if (name == "fig3") {
        c.realizations = 1;
        c.delta_t = 0.05;
    } else if (name == "converge") {
        c.jump = 0;
        c.delta_alpha = 0.0;
        c.tau = 0.0025;
        c.total_time = 0.2;
    } else if (name == "dyson") {
        c.jump = 0;
        c.delta_alpha = 0.0;
        c.tau = 0.0025;
        c.total_time = 0.2;
    }
    return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && !s.empty() && std::isfinite(out);
}

inline bool parse_int(const std::string& s, int& out) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (!end || *end != '\0' || s.empty()) return false;
    out = static_cast<int>(v);
    return static_cast<long>(out) == v;
}

inline bool parse_u64(const std::string& s, std::uint64_t& out) {
    char* end = nullptr;
    out = std::strtoull(s.c_str(), &end, 10);
    return end && *end == '\0' && !s.empty();
}

inline bool parse_flag(const std::string& s, int& out) {
    if (s == "0" || s == "false") { out = 0; return true; }
    if (s == "1" || s == "true") { out = 1; return true; }
    return false;
}

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// short form for metric-key suffixes
inline std::string fmt_key(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace detail

// Raw key=value lines ('#' starts a comment). Unknown keys and malformed
// lines are reported, not ignored.
inline std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                            std::vector<std::string>& problems) {
    std::map<std::string, std::string> raw;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            problems.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty()) {
            problems.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        if (raw.count(key)) {
            problems.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            continue;
        }
        raw[key] = value;
    }
    return raw;
}

// Build a config from raw entries: scenario defaults first, file entries on
// top, CMPM_OUTDIR as the outdir fallback.
inline ScenarioConfig apply_config(const std::map<std::string, std::string>& raw,
                                   std::vector<std::string>& problems) {
    std::string scenario = "fig2a";
    if (auto it = raw.find("scenario"); it != raw.end()) scenario = it->second;
    if (!known_scenario(scenario)) {
        problems.push_back("unknown scenario '" + scenario + "'");
        return ScenarioConfig{};
    }
    ScenarioConfig c = scenario_defaults(scenario);
    for (const auto& [key, value] : raw) {
        bool ok = true;
        if (key == "scenario") { c.scenario = value; }
        else if (key == "hbar") ok = detail::parse_double(value, c.hbar);
        else if (key == "omega") ok = detail::parse_double(value, c.omega);
        else if (key == "lambda") ok = detail::parse_double(value, c.lambda);
        else if (key == "alpha0_re") ok = detail::parse_double(value, c.alpha0_re);
        else if (key == "alpha0_im") ok = detail::parse_double(value, c.alpha0_im);
        else if (key == "delta_alpha") ok = detail::parse_double(value, c.delta_alpha);
        else if (key == "delta_t") ok = detail::parse_double(value, c.delta_t);
        else if (key == "tau") ok = detail::parse_double(value, c.tau);
        else if (key == "total_time") ok = detail::parse_double(value, c.total_time);
        else if (key == "dim") ok = detail::parse_int(value, c.dim);
        else if (key == "realizations") ok = detail::parse_int(value, c.realizations);
        else if (key == "classical_ensemble") ok = detail::parse_int(value, c.classical_ensemble);
        else if (key == "seed") ok = detail::parse_u64(value, c.seed);
        else if (key == "outdir") c.outdir = value;
        else if (key == "record_substeps") ok = detail::parse_int(value, c.record_substeps);
        else if (key == "jump") ok = detail::parse_flag(value, c.jump);
        else if (key == "band_delta_alpha") ok = detail::parse_double(value, c.band_delta_alpha);
        else if (key == "band_kind") c.band_kind = value;
        else if (key == "noise_kind") c.noise_kind = value;
        else if (key == "symbol_convention") c.symbol_convention = value;
        else if (key == "jitter_quantum") ok = detail::parse_flag(value, c.jitter_quantum);
        else if (key == "poisson_times") ok = detail::parse_flag(value, c.poisson_times);
        else if (key == "workers") ok = detail::parse_int(value, c.workers);
        else {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        if (!ok) problems.push_back("bad value for '" + key + "': " + value);
    }
    if (c.outdir.empty()) {
        if (const char* env = std::getenv("CMPM_OUTDIR")) c.outdir = env;
        if (c.outdir.empty()) c.outdir = "out_" + c.scenario;
    }
    return c;
}

inline ScenarioConfig load_config_file(const std::string& path, std::vector<std::string>& problems) {
    std::ifstream in(path);
    if (!in) {
        problems.push_back("cannot read config file: " + path);
        return ScenarioConfig{};
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto raw = parse_config_text(buffer.str(), problems);
    return apply_config(raw, problems);
}

// Empty result means every module precondition is satisfiable.
inline std::vector<std::string> validate_config(const ScenarioConfig& c) {
    std::vector<std::string> violations;
    if (!known_scenario(c.scenario)) violations.push_back("unknown scenario '" + c.scenario + "'");
    if (!(c.hbar > 0.0)) violations.push_back("hbar must be > 0");
    if (!(c.tau > 0.0)) violations.push_back("tau must be > 0");
    if (c.scenario != "dyson" && !(c.total_time >= c.tau)) {
        violations.push_back("total_time must be >= tau");
    }
    if (c.dim < kMinDim) violations.push_back("dim must be >= " + std::to_string(kMinDim));
    if (c.dim > 4096) violations.push_back("dim above 4096 is not supported");
    if (c.dim >= kMinDim && c.dim <= 4096) {
        const double mu = std::norm(c.alpha0());
        const double tail = poisson_tail_beyond(mu, c.dim - kTailLevels);
        if (!(tail < kTailMassLimit)) {
            violations.push_back("dim too small for alpha0: coherent tail mass " +
                                 detail::fmt17(tail) + " beyond n=" +
                                 std::to_string(c.dim - kTailLevels));
        }
    }
    if (c.delta_alpha < 0.0) violations.push_back("delta_alpha must be >= 0");
    if (c.delta_t < 0.0) violations.push_back("delta_t must be >= 0");
    if (c.realizations < 1) violations.push_back("realizations must be >= 1");
    if (c.classical_ensemble < 100) violations.push_back("classical_ensemble must be >= 100");
    if (c.record_substeps < 1) violations.push_back("record_substeps must be >= 1");
    if (c.workers < 1) violations.push_back("workers must be >= 1");
    if (c.band_kind != "two_sigma" && c.band_kind != "envelope") {
        violations.push_back("band_kind must be two_sigma or envelope");
    }
    if (c.noise_kind != "disc" && c.noise_kind != "gauss") {
        violations.push_back("noise_kind must be disc or gauss");
    }
    if (c.symbol_convention != "normal_ordered" && c.symbol_convention != "naive") {
        violations.push_back("symbol_convention must be normal_ordered or naive");
    }
    if (c.poisson_times && c.realizations > 1) {
        violations.push_back("poisson_times requires realizations = 1 (no shared grid)");
    }
    return violations;
}

struct RunSummary {
    std::map<std::string, std::string> entries; // config echo + metrics, sorted keys
    std::map<std::string, double> metrics;      // typed view of the numeric metrics
    std::vector<std::string> files;
    double wall_seconds = 0.0;
};

namespace detail {

inline void echo_config(const ScenarioConfig& c, RunSummary& s) {
    s.entries["scenario"] = c.scenario;
    s.entries["hbar"] = fmt17(c.hbar);
    s.entries["omega"] = fmt17(c.omega);
    s.entries["lambda"] = fmt17(c.lambda);
    s.entries["alpha0_re"] = fmt17(c.alpha0_re);
    s.entries["alpha0_im"] = fmt17(c.alpha0_im);
    s.entries["delta_alpha"] = fmt17(c.delta_alpha);
    s.entries["delta_t"] = fmt17(c.delta_t);
    s.entries["tau"] = fmt17(c.tau);
    s.entries["total_time"] = fmt17(c.total_time);
    s.entries["dim"] = std::to_string(c.dim);
    s.entries["realizations"] = std::to_string(c.realizations);
    s.entries["classical_ensemble"] = std::to_string(c.classical_ensemble);
    s.entries["seed"] = std::to_string(c.seed);
    s.entries["outdir"] = c.outdir;
    s.entries["record_substeps"] = std::to_string(c.record_substeps);
    s.entries["jump"] = std::to_string(c.jump);
    s.entries["band_delta_alpha"] = fmt17(c.band_delta());
    s.entries["band_kind"] = c.band_kind;
    s.entries["noise_kind"] = c.noise_kind;
    s.entries["symbol_convention"] = c.symbol_convention;
    s.entries["jitter_quantum"] = std::to_string(c.jitter_quantum);
    s.entries["poisson_times"] = std::to_string(c.poisson_times);
    s.entries["workers"] = std::to_string(c.workers);
}

inline void put_metric(RunSummary& s, const std::string& key, double value) {
    s.entries[key] = fmt17(value);
    s.metrics[key] = value;
}

class OutputTracker {
public:
    explicit OutputTracker(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path dir() const { return dir_; }

    std::filesystem::path claim(const std::string& name) {
        written_.push_back(dir_ / name);
        return written_.back();
    }

    void discard_all() {
        std::error_code ec;
        for (const auto& p : written_) std::filesystem::remove(p, ec);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : written_) out.push_back(p.filename().string());
        return out;
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
};

// Shared CSV schema: t,x_q,p_q,x_cl,x_lo,x_hi at 17 significant digits.
inline void write_curve_csv(const std::filesystem::path& path, const std::vector<double>& t,
                            const std::vector<double>& xq, const std::vector<double>& pq,
                            const ClassicalTrajectory& reference, const ClassicalBand& band) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "t,x_q,p_q,x_cl,x_lo,x_hi\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        out << fmt17(t[k]) << ',' << fmt17(xq[k]) << ',' << fmt17(pq[k]) << ','
            << fmt17(reference.alpha[k].real()) << ',' << fmt17(band.x_lo[k]) << ','
            << fmt17(band.x_hi[k]) << '\n';
    }
    if (!out) throw std::runtime_error("short write on " + path.string());
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::string& header,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << header << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << fmt17(row[i]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("short write on " + path.string());
}

inline void write_summary(const std::filesystem::path& path, const RunSummary& s) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "# wall_ms = " << static_cast<long>(s.wall_seconds * 1000.0) << '\n';
    for (const auto& [key, value] : s.entries) out << key << " = " << value << '\n';
    if (!out) throw std::runtime_error("short write on " + path.string());
}

// Resample records at jittered times by nearest grid record; the record
// grid is much denser than the jitter scale, which is what makes this an
// adequate stand-in for re-evolving to the jittered instants.
inline void jitter_records(std::vector<double>& x, std::vector<double>& p,
                           const std::vector<double>& t, double delta_t, RngStream& rng) {
    const std::vector<double> x0 = x;
    const std::vector<double> p0 = p;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double target = t[k] + rng.symmetric(delta_t);
        const auto it = std::lower_bound(t.begin(), t.end(), target);
        std::size_t j = static_cast<std::size_t>(it - t.begin());
        if (j >= t.size()) j = t.size() - 1;
        if (j > 0 && std::abs(t[j - 1] - target) <= std::abs(t[j] - target)) --j;
        x[k] = x0[j];
        p[k] = p0[j];
    }
}

inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(xs[i]);
        const double ly = std::log(std::max(ys[i], 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace detail

inline RunSummary run_scenario(const ScenarioConfig& config) {
    const auto violations = validate_config(config);
    if (!violations.empty()) {
        std::string what = "invalid config:";
        for (const auto& v : violations) what += "\n  " + v;
        throw std::invalid_argument(what);
    }

    const auto t_start = std::chrono::steady_clock::now();
    std::filesystem::create_directories(config.outdir);
    detail::OutputTracker tracker{std::filesystem::path(config.outdir)};

    RunSummary summary;
    detail::echo_config(config, summary);

    const HamiltonianSpec quantum_spec = kerr_spec(config.hbar, config.omega, config.lambda);
    const HamiltonianSpec classical_spec =
        config.symbol_convention == "naive"
            ? kerr_spec_naive_symbol(config.hbar, config.omega, config.lambda)
            : quantum_spec;

    try {
        if (config.scenario == "converge") {
            std::vector<double> taus, deviations;
            std::vector<std::vector<double>> rows;
            for (int scale : {8, 4, 2, 1}) {
                const double tau_k = config.tau * scale;
                MeasurementScheme scheme;
                scheme.tau = tau_k;
                scheme.delta_alpha = 0.0;
                scheme.jump = false;
                scheme.seed = config.seed;
                scheme.record_substeps = config.record_substeps;
                const auto traj = run_protocol(quantum_spec, config.alpha0(), scheme,
                                               config.total_time, config.dim);
                const auto reference = integrate_classical(classical_spec, config.alpha0(), traj.t);
                double dev = 0.0;
                for (std::size_t k = 0; k < traj.t.size(); ++k) {
                    dev = std::max(dev, std::abs(Complex(traj.x[k], traj.p[k]) -
                                                 reference.alpha[k]));
                }
                taus.push_back(tau_k);
                deviations.push_back(dev);
                rows.push_back({tau_k, dev});
                ClassicalBand zero_band;
                zero_band.t = traj.t;
                for (const Complex& a : reference.alpha) {
                    zero_band.x_mean.push_back(a.real());
                    zero_band.x_lo.push_back(a.real());
                    zero_band.x_hi.push_back(a.real());
                    zero_band.p_mean.push_back(a.imag());
                    zero_band.p_lo.push_back(a.imag());
                    zero_band.p_hi.push_back(a.imag());
                }
                detail::write_curve_csv(tracker.claim("tau_" + std::to_string(scale) + ".csv"),
                                        traj.t, traj.x, traj.p, reference, zero_band);
            }
            detail::write_sweep_csv(tracker.claim("sweep.csv"), "tau,max_deviation", rows);
            bool decreasing = true;
            for (std::size_t i = 1; i < deviations.size(); ++i) {
                decreasing = decreasing && deviations[i] < deviations[i - 1];
            }
            for (std::size_t i = 0; i < taus.size(); ++i) {
                detail::put_metric(summary, "deviation_tau_" + detail::fmt_key(taus[i]),
                                   deviations[i]);
            }
            detail::put_metric(summary, "strictly_decreasing", decreasing ? 1.0 : 0.0);
            detail::put_metric(summary, "loglog_slope", detail::loglog_slope(taus, deviations));
            // observed convergence order from the finest interval pair; the
            // coarsest deviations saturate once the accumulated phase error
            // wraps, so the fitted slope understates the vanishing rate
            const std::size_t last = deviations.size() - 1;
            detail::put_metric(summary, "observed_order",
                               std::log2(deviations[last - 1] / deviations[last]));
        } else if (config.scenario == "dyson") {
            const double horizon = config.tau * 8;
            const SemiclassicalFrame frame(quantum_spec, config.alpha0(), config.dim, horizon);
            std::vector<double> taus, norms, gaps;
            std::vector<std::vector<double>> rows;
            for (int scale : {8, 4, 2, 1}) {
                const double tau_k = config.tau * scale;
                const auto report = first_order_correction_norm(frame, tau_k);
                taus.push_back(tau_k);
                norms.push_back(report.first_order_norm);
                gaps.push_back(report.fidelity_gap);
                rows.push_back({tau_k, report.first_order_norm, report.fidelity_gap});
            }
            detail::write_sweep_csv(tracker.claim("sweep.csv"),
                                    "tau,first_order_norm,fidelity_gap", rows);
            double min_ratio = 1e300;
            for (std::size_t i = 1; i < norms.size(); ++i) {
                min_ratio = std::min(min_ratio, norms[i - 1] / norms[i]);
            }
            bool gaps_decreasing = true;
            for (std::size_t i = 1; i < gaps.size(); ++i) {
                gaps_decreasing = gaps_decreasing && gaps[i] < gaps[i - 1];
            }
            for (std::size_t i = 0; i < taus.size(); ++i) {
                detail::put_metric(summary, "first_order_norm_tau_" + detail::fmt_key(taus[i]),
                                   norms[i]);
                detail::put_metric(summary, "fidelity_gap_tau_" + detail::fmt_key(taus[i]), gaps[i]);
            }
            detail::put_metric(summary, "min_halving_ratio", min_ratio);
            detail::put_metric(summary, "fidelity_gap_decreasing", gaps_decreasing ? 1.0 : 0.0);
        } else {
            // fig2a / fig2b / fig2c / fig2d / fig3
            MeasurementScheme scheme;
            scheme.tau = config.tau;
            scheme.delta_alpha = config.delta_alpha;
            scheme.jump = config.jump != 0;
            scheme.seed = config.seed;
            scheme.record_substeps = config.record_substeps;
            scheme.noise = config.noise_kind == "gauss" ? NoiseKind::Gauss : NoiseKind::Disc;
            scheme.poisson_times = config.poisson_times != 0;

            auto ensemble = run_ensemble(quantum_spec, config.alpha0(), scheme,
                                         config.total_time, config.dim, config.realizations, 0,
                                         config.workers);
            if (config.jitter_quantum && config.delta_t > 0.0) {
                for (int i = 0; i < config.realizations; ++i) {
                    RngStream rng(config.seed, kJitterStreamOffset + i);
                    detail::jitter_records(ensemble.members[i].x, ensemble.members[i].p,
                                           ensemble.t, config.delta_t, rng);
                }
                // refresh the mean from the jittered members
                std::fill(ensemble.mean_x.begin(), ensemble.mean_x.end(), 0.0);
                std::fill(ensemble.mean_p.begin(), ensemble.mean_p.end(), 0.0);
                for (const auto& m : ensemble.members) {
                    for (std::size_t k = 0; k < ensemble.t.size(); ++k) {
                        ensemble.mean_x[k] += m.x[k];
                        ensemble.mean_p[k] += m.p[k];
                    }
                }
                for (std::size_t k = 0; k < ensemble.t.size(); ++k) {
                    ensemble.mean_x[k] /= config.realizations;
                    ensemble.mean_p[k] /= config.realizations;
                }
            }

            const auto reference =
                integrate_classical(classical_spec, config.alpha0(), ensemble.t);

            BandOptions band_options;
            band_options.noise = scheme.noise;
            band_options.kind =
                config.band_kind == "envelope" ? BandKind::Envelope : BandKind::TwoSigma;
            band_options.workers = config.workers;
            const auto band = ensemble_band(classical_spec, config.alpha0(), config.band_delta(),
                                            config.delta_t, config.classical_ensemble, ensemble.t,
                                            config.seed + kBandStreamOffset, band_options);

            for (int i = 0; i < config.realizations; ++i) {
                detail::write_curve_csv(tracker.claim("real_" + std::to_string(i) + ".csv"),
                                        ensemble.t, ensemble.members[i].x, ensemble.members[i].p,
                                        reference, band);
            }
            if (config.realizations > 1) {
                detail::write_curve_csv(tracker.claim("mean.csv"), ensemble.t, ensemble.mean_x,
                                        ensemble.mean_p, reference, band);
            }
            detail::write_curve_csv(tracker.claim("band.csv"), ensemble.t, band.x_mean,
                                    band.p_mean, reference, band);

            detail::put_metric(summary, "delta_alpha_over_alpha",
                               config.delta_alpha / std::abs(config.alpha0()));
            detail::put_metric(summary, "coverage_real0",
                               coverage_fraction(ensemble.t, ensemble.members[0].x, band));
            if (config.realizations > 1) {
                detail::put_metric(summary, "coverage_mean",
                                   coverage_fraction(ensemble.t, ensemble.mean_x, band));
                double max_single = 0.0;
                for (const auto& m : ensemble.members) {
                    max_single = std::max(max_single, max_zero_width_jump(m.t, m.x));
                }
                const double mean_jump = max_zero_width_jump(ensemble.t, ensemble.mean_x);
                detail::put_metric(summary, "max_single_jump", max_single);
                detail::put_metric(summary, "max_mean_jump", mean_jump);
                detail::put_metric(summary, "jump_ratio",
                                   max_single > 0.0 ? mean_jump / max_single : 0.0);
            }
            detail::put_metric(summary, "band_mean_half_width", mean_half_width(band));

            if (config.scenario == "fig3") {
                const auto band_dt0 = ensemble_band(
                    classical_spec, config.alpha0(), config.band_delta(), 0.0,
                    config.classical_ensemble, ensemble.t, config.seed + kBandStreamOffset,
                    band_options);
                detail::write_curve_csv(tracker.claim("band_dt0.csv"), ensemble.t,
                                        band_dt0.x_mean, band_dt0.p_mean, reference, band_dt0);
                detail::put_metric(summary, "band_mean_half_width_dt0",
                                   mean_half_width(band_dt0));
                detail::put_metric(summary, "coverage_real0_dt0",
                                   coverage_fraction(ensemble.t, ensemble.members[0].x,
                                                     band_dt0));
            }
        }

        summary.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        detail::write_summary(tracker.claim("summary.txt"), summary);
        summary.files = tracker.names();
    } catch (...) {
        tracker.discard_all();
        throw;
    }
    return summary;
}

} // namespace cmpm
