#ifndef PFMA_EXPERIMENT_HPP
#define PFMA_EXPERIMENT_HPP

// Seeded Monte Carlo harness: sweeps one axis (SNR, path count, region size,
// Rician factor) or records convergence traces, evaluating every configured
// scheme on the same channel realizations (paired comparison). Trial k of
// master seed s always uses RandomStream::for_trial(s, k), so results are
// independent of the trial execution schedule and thread count.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfma/channel.hpp"
#include "pfma/parallel.hpp"
#include "pfma/schemes.hpp"
#include "pfma/svg.hpp"

namespace pfma {

enum class SweepAxis { snr, num_paths, region_size, rician_db, convergence };

inline std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::snr: return "snr";
        case SweepAxis::num_paths: return "num_paths";
        case SweepAxis::region_size: return "region_size";
        case SweepAxis::rician_db: return "rician_db";
        case SweepAxis::convergence: return "convergence";
    }
    return "?";
}

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "snr") return SweepAxis::snr;
    if (s == "num_paths") return SweepAxis::num_paths;
    if (s == "region_size") return SweepAxis::region_size;
    if (s == "rician_db") return SweepAxis::rician_db;
    if (s == "convergence") return SweepAxis::convergence;
    throw std::invalid_argument("unknown sweep axis: " + s);
}

struct ExperimentConfig {
    SweepAxis sweep_axis = SweepAxis::snr;
    std::vector<double> axis_values;     // ignored for convergence
    double snr_db = 5.0;                 // P_t / sigma^2 in dB; P_t is fixed at 1
    ChannelSpec channel{};               // defaults: lambda 1, L 6, chi 1, kappa 0 dB, A 1
    std::vector<SchemeSpec> schemes{SchemeSpec{PositionMode::movable,
                                               PolarizationMode::polarforming}};
    int trials = 500;
    std::uint64_t master_seed = 1;
    ScaConfig sca{};
    GridSpec dpa_grid{20, 360};
    double linear_phase = 0.0;
    double circular_phase = 0.5 * pi;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1");
        channel.validate();
        sca.validate();
        if (sweep_axis != SweepAxis::convergence) {
            if (axis_values.empty())
                throw std::invalid_argument("ExperimentConfig: axis_values must be non-empty");
            for (std::size_t i = 1; i < axis_values.size(); ++i)
                if (axis_values[i] <= axis_values[i - 1])
                    throw std::invalid_argument(
                        "ExperimentConfig: axis_values must be strictly increasing");
        }
    }
};

struct CellStats {
    double mean_rate = 0.0;
    double std_error = 0.0;  // sample stddev / sqrt(trials)
    int trials = 0;
};

struct AggregateResult {
    std::string axis_label;
    std::vector<double> axis_values;
    std::vector<SchemeSpec> schemes;
    std::vector<CellStats> cells;  // axis-major: cells[a * schemes.size() + s]

    const CellStats& cell(std::size_t axis_index, std::size_t scheme_index) const {
        return cells.at(axis_index * schemes.size() + scheme_index);
    }
};

/// Per-evaluation scheme parameters for a given channel spec and budget.
inline SchemeParams scheme_params(const ExperimentConfig& cfg, const ChannelSpec& ch,
                                  const LinkBudget& budget) {
    SchemeParams p;
    p.wavelength = ch.wavelength;
    p.region_size = ch.region_size;
    p.budget = budget;
    p.sca = cfg.sca;
    p.dpa_grid = cfg.dpa_grid;
    p.linear_phase = cfg.linear_phase;
    p.circular_phase = cfg.circular_phase;
    return p;
}

namespace detail {

/// Channel spec and budget for one cell of the sweep.
inline std::pair<ChannelSpec, LinkBudget> cell_parameters(const ExperimentConfig& cfg,
                                                          double axis_value) {
    ChannelSpec ch = cfg.channel;
    double snr_db = cfg.snr_db;
    switch (cfg.sweep_axis) {
        case SweepAxis::snr: snr_db = axis_value; break;
        case SweepAxis::num_paths: ch.num_paths = static_cast<int>(std::lround(axis_value)); break;
        case SweepAxis::region_size: ch.region_size = axis_value * ch.wavelength; break;
        case SweepAxis::rician_db: ch.rician_factor_db = axis_value; break;
        case SweepAxis::convergence: break;
    }
    ch.validate();
    return {ch, LinkBudget{1.0, db_to_linear(-snr_db)}};
}

inline CellStats aggregate(const double* samples, int n) {
    CellStats st;
    st.trials = n;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += samples[i];
    st.mean_rate = sum / n;
    if (n >= 2) {
        double ss = 0.0;
        for (int i = 0; i < n; ++i) {
            const double d = samples[i] - st.mean_rate;
            ss += d * d;
        }
        st.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
    return st;
}

}  // namespace detail

/// Run the configured sweep. Each trial evaluates every scheme on the same
/// realization; the realization for a cell is drawn from a fresh copy of the
/// trial's stream, so cells that share channel parameters (e.g. an SNR sweep)
/// see identical channels. Deterministic given (config, master_seed),
/// regardless of the number of threads.
inline AggregateResult run_experiment(const ExperimentConfig& cfg, int threads = 0) {
    cfg.validate();
    if (cfg.sweep_axis == SweepAxis::convergence)
        throw std::invalid_argument("run_experiment: use run_convergence_trace for the convergence axis");
    const std::size_t A = cfg.axis_values.size();
    const std::size_t S = cfg.schemes.size();
    const std::size_t T = static_cast<std::size_t>(cfg.trials);

    std::vector<double> rates(A * S * T, 0.0);
    parallel_for(T, threads, [&](std::size_t trial) {
        for (std::size_t a = 0; a < A; ++a) {
            const auto [ch, budget] = detail::cell_parameters(cfg, cfg.axis_values[a]);
            RandomStream rng = RandomStream::for_trial(cfg.master_seed, trial);
            const Realization real = make_realization(ch, rng);
            const SchemeParams params = scheme_params(cfg, ch, budget);
            for (std::size_t s = 0; s < S; ++s)
                rates[(a * S + s) * T + trial] =
                    evaluate_scheme(cfg.schemes[s], real, params).final_rate;
        }
    });

    AggregateResult out;
    out.axis_label = axis_name(cfg.sweep_axis);
    out.axis_values = cfg.axis_values;
    out.schemes = cfg.schemes;
    out.cells.resize(A * S);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < S; ++s)
            out.cells[a * S + s] = detail::aggregate(&rates[(a * S + s) * T], cfg.trials);
    return out;
}

/// Average per-outer-iteration rate traces (Algorithm convergence study).
/// Traces of runs that converged early are padded with their final value.
/// The result reuses AggregateResult with the outer-iteration index as the
/// axis (0 = initial point).
inline AggregateResult run_convergence_trace(const ExperimentConfig& cfg, int threads = 0) {
    cfg.validate();
    for (const SchemeSpec& s : cfg.schemes)
        if (!s.uses_sca())
            throw std::invalid_argument("run_convergence_trace: scheme " + s.label() +
                                        " has no iteration trace");
    const std::size_t iters = static_cast<std::size_t>(cfg.sca.max_outer_iterations) + 1;
    const std::size_t S = cfg.schemes.size();
    const std::size_t T = static_cast<std::size_t>(cfg.trials);
    const auto [ch, budget] = detail::cell_parameters(cfg, 0.0);

    std::vector<double> traces(iters * S * T, 0.0);
    parallel_for(T, threads, [&](std::size_t trial) {
        RandomStream rng = RandomStream::for_trial(cfg.master_seed, trial);
        const Realization real = make_realization(ch, rng);
        const SchemeParams params = scheme_params(cfg, ch, budget);
        for (std::size_t s = 0; s < S; ++s) {
            const SolveReport report = evaluate_scheme(cfg.schemes[s], real, params);
            for (std::size_t k = 0; k < iters; ++k) {
                const double v = k < report.outer_trace.size() ? report.outer_trace[k]
                                                               : report.outer_trace.back();
                traces[(k * S + s) * T + trial] = v;
            }
        }
    });

    AggregateResult out;
    out.axis_label = "iteration";
    out.axis_values.resize(iters);
    for (std::size_t k = 0; k < iters; ++k) out.axis_values[k] = static_cast<double>(k);
    out.schemes = cfg.schemes;
    out.cells.resize(iters * S);
    for (std::size_t k = 0; k < iters; ++k)
        for (std::size_t s = 0; s < S; ++s)
            out.cells[k * S + s] = detail::aggregate(&traces[(k * S + s) * T], cfg.trials);
    return out;
}

/// CSV emission: header `axis,scheme,mean_rate_bps_hz,stderr,trials`, one row
/// per (axis value, scheme) in configured order, 12 significant digits.
inline void emit_csv(const AggregateResult& result, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "axis,scheme,mean_rate_bps_hz,stderr,trials\n";
    char buf[128];
    for (std::size_t a = 0; a < result.axis_values.size(); ++a)
        for (std::size_t s = 0; s < result.schemes.size(); ++s) {
            const CellStats& c = result.cell(a, s);
            std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g,%.12g,%d\n", result.axis_values[a],
                          result.schemes[s].label().c_str(), c.mean_rate, c.std_error, c.trials);
            os << buf;
        }
    if (!os) throw std::runtime_error("write failed: " + path);
}

/// SVG line chart: one line per scheme over the sweep axis, legend labels in
/// configured order.
inline void emit_plot(const AggregateResult& result, const std::string& path) {
    if (result.schemes.empty() || result.axis_values.empty())
        throw std::invalid_argument("emit_plot: empty result");
    std::vector<SvgSeries> series(result.schemes.size());
    for (std::size_t s = 0; s < result.schemes.size(); ++s) {
        series[s].label = result.schemes[s].label();
        for (std::size_t a = 0; a < result.axis_values.size(); ++a)
            series[s].points.emplace_back(result.axis_values[a], result.cell(a, s).mean_rate);
    }
    write_svg_chart(path, result.axis_label, "rate (bps/Hz)", series);
}

}  // namespace pfma

#endif  // PFMA_EXPERIMENT_HPP
