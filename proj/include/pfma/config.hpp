#ifndef PFMA_CONFIG_HPP
#define PFMA_CONFIG_HPP

// Flat key-value configuration files:
//
//   # comment
//   sweep_axis  = snr
//   axis_values = -5, 0, 5, 10, 15
//   schemes     = fpa-lpa, ma-pf
//   region_size = 1.0 lambda
//   rician      = 0 dB
//
// Unknown and duplicate keys are errors; all diagnostics carry the line
// number and key.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfma/experiment.hpp"

namespace pfma {

struct ConfigError : std::runtime_error {
    int line;
    std::string key;

    ConfigError(int line_, std::string key_, const std::string& message)
        : std::runtime_error("config line " + std::to_string(line_) +
                             (key_.empty() ? "" : " (key '" + key_ + "')") + ": " + message),
          line(line_),
          key(std::move(key_)) {}
};

/// Parameters of the `oracle-check` verification run.
struct OracleCheckConfig {
    int grid_points = 26;
    int phase_points = 360;
    int instances = 100;
    double tolerance_bps = 0.01;
    double pass_fraction = 0.9;
    double eval_cap = 2.0e8;
};

struct RunConfig {
    ExperimentConfig experiment;
    OracleCheckConfig oracle;
};

struct ConfigKeyDoc {
    const char* key;
    const char* doc;
};

inline std::span<const ConfigKeyDoc> config_key_docs() {
    static constexpr ConfigKeyDoc docs[] = {
        {"sweep_axis", "snr | num_paths | region_size | rician_db | convergence"},
        {"axis_values", "comma-separated sweep values, strictly increasing"},
        {"schemes", "comma-separated: fpa-lpa fpa-cpa fpa-dpa fpa-pf ma-lpa ma-cpa ma-dpa ma-pf"},
        {"trials", "Monte Carlo trials per cell (default 500)"},
        {"master_seed", "u64 seed; trial k uses stream for_trial(seed, k)"},
        {"snr", "fixed SNR when not swept, e.g. '5 dB' (P_t = 1, sigma^2 = 10^(-snr/10))"},
        {"num_paths", "L (= L_t = L_r), default 6"},
        {"region_size", "A, e.g. '1.0 lambda' (default unit) or '0.5 m'"},
        {"rician", "Rician factor kappa, e.g. '0 dB'"},
        {"inverse_xpd", "chi >= 0, default 1"},
        {"wavelength", "lambda in meters, default 1"},
        {"linear_phase", "frozen phase of the LPA benchmark, radians (default 0)"},
        {"circular_phase", "frozen phase of the CPA benchmark, radians (default pi/2)"},
        {"rate_tolerance", "epsilon_1, outer-loop rate gain stop (default 1e-6)"},
        {"surrogate_tolerance", "epsilon_2, inner-loop objective gain stop (default 1e-6)"},
        {"max_outer_iterations", "T_max (default 20)"},
        {"max_inner_iterations", "I_max (default 800)"},
        {"num_starts", "zeta, or 'auto' for 4*ceil(A/lambda)^2"},
        {"update_order", "rx-first (default) | tx-first"},
        {"dpa_grid_points", "MA-DPA position lattice points per axis (default 20)"},
        {"oracle_grid_points", "oracle position lattice points per axis (default 26)"},
        {"oracle_phase_points", "oracle theta lattice size (default 360)"},
        {"oracle_instances", "instances for oracle-check (default 100)"},
        {"oracle_tolerance_bps", "allowed SCA-vs-oracle gap in bps/Hz (default 0.01)"},
        {"oracle_pass_fraction", "required fraction of instances within tolerance (default 0.9)"},
        {"oracle_eval_cap", "refuse oracles larger than this many evaluations (default 2e8)"},
    };
    return docs;
}

namespace detail {

struct RawValue {
    std::string text;
    int line;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

/// "3.5", "3.5 dB", "1.0 lambda" -> (value, unit-lowercased-or-empty)
inline std::pair<double, std::string> parse_number_unit(const std::string& text, int line,
                                                        const std::string& key) {
    std::istringstream ss(text);
    double v;
    if (!(ss >> v)) throw ConfigError(line, key, "expected a number, got '" + text + "'");
    std::string unit;
    ss >> unit;
    std::string rest;
    if (ss >> rest) throw ConfigError(line, key, "trailing content after value: '" + text + "'");
    return {v, lower(unit)};
}

class ConfigReader {
public:
    ConfigReader(std::map<std::string, RawValue> values) : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const RawValue* find(const std::string& key) {
        auto it = values_.find(key);
        if (it == values_.end()) return nullptr;
        return &it->second;
    }

    double number(const std::string& key, double fallback,
                  std::span<const char* const> allowed_units = {}) {
        const RawValue* raw = find(key);
        if (!raw) return fallback;
        auto [v, unit] = parse_number_unit(raw->text, raw->line, key);
        if (!unit.empty()) {
            const bool ok = std::any_of(allowed_units.begin(), allowed_units.end(),
                                        [&unit](const char* u) { return unit == u; });
            if (!ok) throw ConfigError(raw->line, key, "unsupported unit '" + unit + "'");
        }
        return v;
    }

    long long integer(const std::string& key, long long fallback, long long lo, long long hi) {
        const RawValue* raw = find(key);
        if (!raw) return fallback;
        auto [v, unit] = parse_number_unit(raw->text, raw->line, key);
        if (!unit.empty()) throw ConfigError(raw->line, key, "unexpected unit '" + unit + "'");
        const auto n = static_cast<long long>(v);
        if (static_cast<double>(n) != v || n < lo || n > hi)
            throw ConfigError(raw->line, key,
                              "expected an integer in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
        return n;
    }

private:
    std::map<std::string, RawValue> values_;
};

}  // namespace detail

/// Parse a configuration stream. `origin` is used in diagnostics only.
inline RunConfig parse_config(std::istream& is, const std::string& origin = "<stream>") {
    (void)origin;
    std::map<std::string, detail::RawValue> values;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(lineno, "", "expected 'key = value', got '" + line + "'");
        const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(lineno, "", "empty key");
        bool known = false;
        for (const auto& doc : config_key_docs())
            if (key == doc.key) known = true;
        if (!known) throw ConfigError(lineno, key, "unrecognized key");
        if (values.count(key)) throw ConfigError(lineno, key, "duplicate key");
        if (value.empty()) throw ConfigError(lineno, key, "empty value");
        values.emplace(key, detail::RawValue{value, lineno});
    }

    detail::ConfigReader reader(std::move(values));
    RunConfig cfg;
    ExperimentConfig& exp = cfg.experiment;

    static constexpr const char* db_units[] = {"db"};
    static constexpr const char* meter_units[] = {"m"};

    exp.channel.wavelength = reader.number("wavelength", 1.0, meter_units);
    if (const auto* raw = reader.find("sweep_axis")) {
        try {
            exp.sweep_axis = parse_axis(detail::lower(raw->text));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(raw->line, "sweep_axis", e.what());
        }
    }
    if (const auto* raw = reader.find("axis_values")) {
        exp.axis_values.clear();
        for (const std::string& tok : detail::split_csv(raw->text)) {
            try {
                exp.axis_values.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError(raw->line, "axis_values", "bad number '" + tok + "'");
            }
        }
    }
    if (const auto* raw = reader.find("schemes")) {
        exp.schemes.clear();
        for (const std::string& tok : detail::split_csv(raw->text)) {
            try {
                exp.schemes.push_back(parse_scheme(tok));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(raw->line, "schemes", e.what());
            }
        }
    }
    exp.trials = static_cast<int>(reader.integer("trials", exp.trials, 1, 1'000'000'000));
    if (const auto* raw = reader.find("master_seed")) {
        try {
            exp.master_seed = std::stoull(raw->text);
        } catch (const std::exception&) {
            throw ConfigError(raw->line, "master_seed", "expected an unsigned integer");
        }
    }
    exp.snr_db = reader.number("snr", exp.snr_db, db_units);
    exp.channel.num_paths =
        static_cast<int>(reader.integer("num_paths", exp.channel.num_paths, 1, 1'000'000));
    if (const auto* raw = reader.find("region_size")) {
        auto [v, unit] = detail::parse_number_unit(raw->text, raw->line, "region_size");
        if (unit.empty() || unit == "lambda") exp.channel.region_size = v * exp.channel.wavelength;
        else if (unit == "m") exp.channel.region_size = v;
        else throw ConfigError(raw->line, "region_size", "unsupported unit '" + unit + "'");
    }
    exp.channel.rician_factor_db = reader.number("rician", exp.channel.rician_factor_db, db_units);
    exp.channel.inverse_xpd = reader.number("inverse_xpd", exp.channel.inverse_xpd);
    exp.linear_phase = reader.number("linear_phase", exp.linear_phase);
    exp.circular_phase = reader.number("circular_phase", exp.circular_phase);
    exp.sca.rate_tolerance = reader.number("rate_tolerance", exp.sca.rate_tolerance);
    exp.sca.surrogate_tolerance =
        reader.number("surrogate_tolerance", exp.sca.surrogate_tolerance);
    exp.sca.max_outer_iterations = static_cast<int>(
        reader.integer("max_outer_iterations", exp.sca.max_outer_iterations, 1, 1'000'000));
    exp.sca.max_inner_iterations = static_cast<int>(
        reader.integer("max_inner_iterations", exp.sca.max_inner_iterations, 1, 100'000'000));
    if (const auto* raw = reader.find("num_starts")) {
        if (detail::lower(raw->text) == "auto") {
            exp.sca.num_starts = 0;
        } else {
            auto [v, unit] = detail::parse_number_unit(raw->text, raw->line, "num_starts");
            if (!unit.empty() || v != std::floor(v) || v < 1)
                throw ConfigError(raw->line, "num_starts", "expected 'auto' or a positive integer");
            exp.sca.num_starts = static_cast<int>(v);
        }
    }
    if (const auto* raw = reader.find("update_order")) {
        const std::string v = detail::lower(raw->text);
        if (v == "rx-first") exp.sca.tx_first = false;
        else if (v == "tx-first") exp.sca.tx_first = true;
        else throw ConfigError(raw->line, "update_order", "expected rx-first or tx-first");
    }
    exp.dpa_grid.points_per_axis = static_cast<int>(
        reader.integer("dpa_grid_points", exp.dpa_grid.points_per_axis, 1, 100'000));

    cfg.oracle.grid_points =
        static_cast<int>(reader.integer("oracle_grid_points", cfg.oracle.grid_points, 1, 100'000));
    cfg.oracle.phase_points = static_cast<int>(
        reader.integer("oracle_phase_points", cfg.oracle.phase_points, 1, 10'000'000));
    cfg.oracle.instances =
        static_cast<int>(reader.integer("oracle_instances", cfg.oracle.instances, 1, 1'000'000));
    cfg.oracle.tolerance_bps = reader.number("oracle_tolerance_bps", cfg.oracle.tolerance_bps);
    cfg.oracle.pass_fraction = reader.number("oracle_pass_fraction", cfg.oracle.pass_fraction);
    cfg.oracle.eval_cap = reader.number("oracle_eval_cap", cfg.oracle.eval_cap);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    return parse_config(is, path);
}

}  // namespace pfma

#endif  // PFMA_CONFIG_HPP
