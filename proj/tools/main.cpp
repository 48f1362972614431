// pfma command-line interface: single-instance solves, Monte Carlo sweeps,
// convergence studies and oracle verification. Every subcommand is a
// deterministic function of (config file, seed); output files never contain
// timestamps.
//
// Exit codes: 0 success, 1 failed check, 2 configuration error,
// 3 numerical failure, 4 oracle size cap exceeded.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfma/config.hpp"
#include "pfma/experiment.hpp"
#include "pfma/parallel.hpp"
#include "pfma/schemes.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
    int threads = 0;
    bool verbose = false;
};

std::string config_keys_footer() {
    std::string s = "Config keys (key = value, '#' comments):\n";
    for (const auto& doc : pfma::config_key_docs()) {
        s += "  ";
        s += doc.key;
        for (std::size_t i = std::string(doc.key).size(); i < 22; ++i) s += ' ';
        s += doc.doc;
        s += '\n';
    }
    return s;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "configuration file")->required();
    cmd->add_option("--seed", o.seed, "override master_seed from the config");
    cmd->add_option("--out", o.out_dir, "output directory (created if missing)");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = available parallelism");
    cmd->add_flag("--verbose", o.verbose, "print per-item progress details");
    cmd->footer(config_keys_footer());
}

pfma::RunConfig load(const CommonOpts& o) {
    pfma::RunConfig cfg = pfma::load_config(o.config_path);
    if (o.seed) cfg.experiment.master_seed = *o.seed;
    return cfg;
}

std::filesystem::path prepare_out_dir(const CommonOpts& o) {
    std::filesystem::path dir(o.out_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void check_finite(const pfma::AggregateResult& result) {
    for (const auto& c : result.cells)
        if (!std::isfinite(c.mean_rate) || !std::isfinite(c.std_error))
            throw std::domain_error("non-finite rate in aggregate result");
}

std::string format_report(const std::string& scheme, const pfma::SolveReport& r) {
    char buf[256];
    std::string s;
    s += "scheme: " + scheme + "\n";
    std::snprintf(buf, sizeof buf, "rate_bps_hz: %.12g\n", r.final_rate);
    s += buf;
    std::snprintf(buf, sizeof buf, "tx_position: %.12g %.12g\n", r.tx.position.x(),
                  r.tx.position.y());
    s += buf;
    std::snprintf(buf, sizeof buf, "tx_phase: %.12g\n", r.tx.phase);
    s += buf;
    std::snprintf(buf, sizeof buf, "rx_position: %.12g %.12g\n", r.rx.position.x(),
                  r.rx.position.y());
    s += buf;
    std::snprintf(buf, sizeof buf, "rx_phase: %.12g\n", r.rx.phase);
    s += buf;
    s += std::string("termination: ") +
         (r.termination == pfma::Termination::converged ? "converged" : "iteration_cap") + "\n";
    s += "start_index: " + std::to_string(r.start_index) + "\n";
    s += "outer_trace:";
    for (double v : r.outer_trace) {
        std::snprintf(buf, sizeof buf, " %.12g", v);
        s += buf;
    }
    s += "\n";
    return s;
}

int run_solve(const CommonOpts& o) {
    const pfma::RunConfig cfg = load(o);
    const auto& exp = cfg.experiment;
    const auto dir = prepare_out_dir(o);

    pfma::RandomStream rng = pfma::RandomStream::for_trial(exp.master_seed, 0);
    const pfma::Realization real = pfma::make_realization(exp.channel, rng);
    const pfma::LinkBudget budget{1.0, pfma::db_to_linear(-exp.snr_db)};
    const pfma::SchemeSpec scheme = exp.schemes.front();
    const pfma::SchemeParams params =
        pfma::scheme_params(exp, exp.channel, budget);

    const pfma::SolveReport report = pfma::evaluate_scheme(scheme, real, params);
    if (!std::isfinite(report.final_rate))
        throw std::domain_error("solve produced a non-finite rate");

    const std::string text = format_report(scheme.label(), report);
    std::fputs(text.c_str(), stdout);
    const auto report_path = dir / "solve_report.txt";
    std::ofstream os(report_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + report_path.string());
    os << text;
    pfma::write_realization_csv(real, (dir / "realization.csv").string());
    if (o.verbose)
        std::printf("wrote %s and %s\n", report_path.string().c_str(),
                    (dir / "realization.csv").string().c_str());
    return 0;
}

int run_sweep(const CommonOpts& o) {
    const pfma::RunConfig cfg = load(o);
    const auto dir = prepare_out_dir(o);
    const pfma::AggregateResult result = pfma::run_experiment(cfg.experiment, o.threads);
    check_finite(result);
    const std::string stem = "sweep_" + pfma::axis_name(cfg.experiment.sweep_axis);
    pfma::emit_csv(result, (dir / (stem + ".csv")).string());
    if (!result.schemes.empty() && !result.axis_values.empty())
        pfma::emit_plot(result, (dir / (stem + ".svg")).string());
    std::printf("wrote %s.csv (%zu axis values x %zu schemes, %d trials)\n",
                (dir / stem).string().c_str(), result.axis_values.size(), result.schemes.size(),
                cfg.experiment.trials);
    return 0;
}

int run_convergence(const CommonOpts& o) {
    pfma::RunConfig cfg = load(o);
    cfg.experiment.sweep_axis = pfma::SweepAxis::convergence;
    const auto dir = prepare_out_dir(o);
    const pfma::AggregateResult result = pfma::run_convergence_trace(cfg.experiment, o.threads);
    check_finite(result);
    pfma::emit_csv(result, (dir / "convergence.csv").string());
    pfma::emit_plot(result, (dir / "convergence.svg").string());
    std::printf("wrote %s (%zu iterations x %zu schemes, %d trials)\n",
                (dir / "convergence.csv").string().c_str(), result.axis_values.size(),
                result.schemes.size(), cfg.experiment.trials);
    return 0;
}

int run_oracle_check(const CommonOpts& o) {
    const pfma::RunConfig cfg = load(o);
    const auto& exp = cfg.experiment;
    const auto& oc = cfg.oracle;
    const auto dir = prepare_out_dir(o);
    const pfma::LinkBudget budget{1.0, pfma::db_to_linear(-exp.snr_db)};

    // Refuse oversized oracles before doing any work.
    {
        const double npos = static_cast<double>(oc.grid_points) * oc.grid_points;
        const double evals = npos * npos * oc.phase_points;
        if (evals > oc.eval_cap)
            throw pfma::OracleCapError("oracle needs " + std::to_string(evals) +
                                       " evaluations, cap is " + std::to_string(oc.eval_cap));
    }

    struct Row {
        double sca = 0.0, oracle = 0.0;
    };
    std::vector<Row> rows(oc.instances);
    pfma::parallel_for(static_cast<std::size_t>(oc.instances), o.threads, [&](std::size_t i) {
        pfma::RandomStream rng = pfma::RandomStream::for_trial(exp.master_seed, i);
        const pfma::Realization real = pfma::make_realization(exp.channel, rng);
        pfma::SolveConstraints constraints;
        constraints.tx = {pfma::MovingRegion{exp.channel.region_size}, pfma::PhaseInterval{}};
        constraints.rx = {pfma::MovingRegion{exp.channel.region_size}, pfma::PhaseInterval{}};
        rows[i].sca = pfma::solve(real.pprm, real.geometry, exp.channel.wavelength, constraints,
                                  budget, exp.sca)
                          .final_rate;
        rows[i].oracle = pfma::exhaustive_oracle(real, exp.channel.region_size,
                                                 pfma::GridSpec{oc.grid_points, oc.phase_points},
                                                 budget, exp.channel.wavelength, oc.eval_cap);
    });

    int within = 0;
    const auto csv_path = dir / "oracle_check.csv";
    std::ofstream os(csv_path);
    if (!os) throw std::runtime_error("cannot open for writing: " + csv_path.string());
    os << "instance,sca_rate,oracle_rate,gap,within_tolerance\n";
    char buf[160];
    for (int i = 0; i < oc.instances; ++i) {
        const double gap = rows[i].oracle - rows[i].sca;
        const bool ok = gap <= oc.tolerance_bps;
        within += ok;
        std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%d\n", i, rows[i].sca, rows[i].oracle,
                      gap, ok ? 1 : 0);
        os << buf;
        if (o.verbose) std::fputs(buf, stdout);
        if (!std::isfinite(rows[i].sca) || !std::isfinite(rows[i].oracle))
            throw std::domain_error("non-finite rate in oracle check");
    }
    const double fraction = static_cast<double>(within) / oc.instances;
    std::printf("oracle-check: %d/%d instances within %.4g bps/Hz (fraction %.4g, required %.4g)\n",
                within, oc.instances, oc.tolerance_bps, fraction, oc.pass_fraction);
    return fraction >= oc.pass_fraction ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pfma: polarforming + movable-antenna link simulator"};
    app.require_subcommand(1);

    CommonOpts solve_opts, sweep_opts, conv_opts, oracle_opts;
    CLI::App* solve_cmd =
        app.add_subcommand("solve", "optimize one seeded instance and report (t, r, theta, phi)");
    add_common(solve_cmd, solve_opts);
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Monte Carlo sweep over the configured axis");
    add_common(sweep_cmd, sweep_opts);
    CLI::App* conv_cmd =
        app.add_subcommand("convergence", "average per-iteration rate traces");
    add_common(conv_cmd, conv_opts);
    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-check", "compare the SCA solver against the exhaustive oracle");
    add_common(oracle_cmd, oracle_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) return run_solve(solve_opts);
        if (sweep_cmd->parsed()) return run_sweep(sweep_opts);
        if (conv_cmd->parsed()) return run_convergence(conv_opts);
        if (oracle_cmd->parsed()) return run_oracle_check(oracle_opts);
    } catch (const pfma::OracleCapError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const pfma::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
