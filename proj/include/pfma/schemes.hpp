#ifndef PFMA_SCHEMES_HPP
#define PFMA_SCHEMES_HPP

// Benchmark schemes: {fixed, movable} positions x {linear, circular,
// dual-polarized, polarforming} polarization. LPA/CPA freeze the phase
// shifters, PF optimizes them, DPA drives both polarization ports as
// independent RF chains (2x2 MIMO with water-filling, exhaustive position
// grid in the movable case). Also hosts the brute-force oracle used to
// validate the SCA solver.

#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfma/channel.hpp"
#include "pfma/sca.hpp"

namespace pfma {

enum class PositionMode { fixed, movable };
enum class PolarizationMode { linear, circular, dual_polarized, polarforming };

struct SchemeSpec {
    PositionMode position_mode = PositionMode::fixed;
    PolarizationMode polarization_mode = PolarizationMode::polarforming;

    std::string label() const {
        std::string s = position_mode == PositionMode::fixed ? "FPA-" : "MA-";
        switch (polarization_mode) {
            case PolarizationMode::linear: return s + "LPA";
            case PolarizationMode::circular: return s + "CPA";
            case PolarizationMode::dual_polarized: return s + "DPA";
            case PolarizationMode::polarforming: return s + "PF";
        }
        return s + "?";
    }

    bool uses_sca() const { return polarization_mode != PolarizationMode::dual_polarized; }

    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

inline SchemeSpec parse_scheme(const std::string& name) {
    std::string s;
    for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    SchemeSpec spec;
    std::string rest;
    if (s.rfind("fpa-", 0) == 0) {
        spec.position_mode = PositionMode::fixed;
        rest = s.substr(4);
    } else if (s.rfind("ma-", 0) == 0) {
        spec.position_mode = PositionMode::movable;
        rest = s.substr(3);
    } else {
        throw std::invalid_argument("unknown scheme (want fpa-/ma- prefix): " + name);
    }
    if (rest == "lpa") spec.polarization_mode = PolarizationMode::linear;
    else if (rest == "cpa") spec.polarization_mode = PolarizationMode::circular;
    else if (rest == "dpa") spec.polarization_mode = PolarizationMode::dual_polarized;
    else if (rest == "pf") spec.polarization_mode = PolarizationMode::polarforming;
    else throw std::invalid_argument("unknown polarization in scheme: " + name);
    return spec;
}

/// Position lattice resolution for grid-based schemes and oracles.
struct GridSpec {
    int points_per_axis = 20;
    int phase_points = 360;

    void validate(double region_size) const {
        if (phase_points < 1) throw std::invalid_argument("GridSpec: phase_points must be >= 1");
        if (region_size > 0.0 && points_per_axis < 2)
            throw std::invalid_argument("GridSpec: points_per_axis must be >= 2 for a region of positive size");
    }
};

/// Everything an individual scheme evaluation needs besides the realization.
struct SchemeParams {
    double wavelength = 1.0;
    double region_size = 1.0;  // A, both link ends
    LinkBudget budget;
    ScaConfig sca;
    GridSpec dpa_grid{20, 360};
    double linear_phase = 0.0;          // theta = phi for the LPA benchmark
    double circular_phase = 0.5 * pi;   // theta = phi for the CPA benchmark
};

namespace detail {

inline std::vector<double> position_lattice(double region_size, int points_per_axis) {
    if (region_size <= 0.0) return {0.0};
    std::vector<double> pts(points_per_axis);
    const double h = 0.5 * region_size;
    for (int i = 0; i < points_per_axis; ++i)
        pts[i] = -h + region_size * static_cast<double>(i) / (points_per_axis - 1);
    return pts;
}

struct NonzeroBlock {
    Eigen::Index rx_path;
    Eigen::Index tx_path;
    Eigen::Matrix2cd value;
};

inline std::vector<NonzeroBlock> nonzero_blocks(const Pprm& pprm) {
    std::vector<NonzeroBlock> blocks;
    for (Eigen::Index l = 0; l < pprm.num_rx_paths(); ++l)
        for (Eigen::Index i = 0; i < pprm.num_tx_paths(); ++i) {
            Eigen::Matrix2cd b = pprm.block(l, i);
            if (b.cwiseAbs().sum() > 0.0) blocks.push_back({l, i, b});
        }
    return blocks;
}

}  // namespace detail

/// 2x2 polarized MIMO channel with no polarforming applied:
/// H(t, r) = sum_{i,l} e^{-j k0 rho_rl} Lambda_{li} e^{j k0 rho_ti}.
inline Eigen::Matrix2cd dpa_channel(const Eigen::Vector2d& t, const Eigen::Vector2d& r,
                                    const Pprm& pprm, const PathGeometry& geometry,
                                    double wavelength) {
    check_pprm_geometry(pprm, geometry);
    const double k0 = two_pi / wavelength;
    Eigen::Matrix2cd H = Eigen::Matrix2cd::Zero();
    for (Eigen::Index l = 0; l < pprm.num_rx_paths(); ++l) {
        const double wr = k0 * path_projection(r, geometry.rx_elevation[l], geometry.rx_azimuth[l]);
        const cd er = std::polar(1.0, -wr);
        for (Eigen::Index i = 0; i < pprm.num_tx_paths(); ++i) {
            const double wt =
                k0 * path_projection(t, geometry.tx_elevation[i], geometry.tx_azimuth[i]);
            H += (er * std::polar(1.0, wt)) * pprm.block(l, i);
        }
    }
    return H;
}

/// Squared singular values of a 2x2 complex matrix, descending (closed form
/// from the eigenvalues of H^H H).
inline std::array<double, 2> squared_singular_values(const Eigen::Matrix2cd& H) {
    const Eigen::Matrix2cd G = H.adjoint() * H;
    const double a = G(0, 0).real();
    const double c = G(1, 1).real();
    const double off = std::abs(G(0, 1));
    const double tr = a + c;
    const double disc = std::sqrt(std::max(0.0, (a - c) * (a - c) + 4.0 * off * off));
    return {0.5 * (tr + disc), std::max(0.0, 0.5 * (tr - disc))};
}

struct WaterfillingAllocation {
    std::array<double, 2> power{0.0, 0.0};  // per eigenmode
    std::array<double, 2> mode_gain{0.0, 0.0};  // squared singular values
    double water_level = 0.0;
};

/// Water-filling over the <= 2 eigenmodes of H: p_i = max(0, mu - sigma^2/s_i^2)
/// with sum p_i = P_t.
inline WaterfillingAllocation waterfilling_allocation(const Eigen::Matrix2cd& H,
                                                      const LinkBudget& budget) {
    budget.validate();
    WaterfillingAllocation out;
    out.mode_gain = squared_singular_values(H);
    const double P = budget.transmit_power;
    const double n0 = budget.noise_power;
    if (out.mode_gain[0] <= 0.0) return out;  // null channel: nothing to allocate
    const double inv1 = n0 / out.mode_gain[0];
    if (out.mode_gain[1] > 0.0) {
        const double inv2 = n0 / out.mode_gain[1];
        const double mu = 0.5 * (P + inv1 + inv2);
        if (mu - inv2 >= 0.0) {
            out.water_level = mu;
            out.power = {mu - inv1, mu - inv2};
            return out;
        }
    }
    out.water_level = P + inv1;
    out.power = {P, 0.0};
    return out;
}

/// Rate of the water-filling allocation, sum_i log2(1 + p_i s_i^2 / sigma^2).
inline double waterfilling_rate(const Eigen::Matrix2cd& H, const LinkBudget& budget) {
    const WaterfillingAllocation a = waterfilling_allocation(H, budget);
    double rate = 0.0;
    for (int i = 0; i < 2; ++i)
        rate += std::log2(1.0 + a.power[i] * a.mode_gain[i] / budget.noise_power);
    return rate;
}

struct DpaGridResult {
    double rate = 0.0;
    Eigen::Vector2d tx_position{0.0, 0.0};
    Eigen::Vector2d rx_position{0.0, 0.0};
};

/// Exhaustive search of waterfilling_rate(dpa_channel(t, r)) over independent
/// position lattices in each moving region.
inline DpaGridResult dpa_grid_search(const Realization& real, double region_size,
                                     const GridSpec& grid, const LinkBudget& budget,
                                     double wavelength) {
    grid.validate(region_size);
    budget.validate();
    const auto lattice = detail::position_lattice(region_size, grid.points_per_axis);
    const auto blocks = detail::nonzero_blocks(real.pprm);
    const double k0 = two_pi / wavelength;
    const Eigen::Index lt = real.pprm.num_tx_paths();
    const Eigen::Index lr = real.pprm.num_rx_paths();
    const auto n = static_cast<Eigen::Index>(lattice.size());

    // Per-lattice-point path phasors; grid positions enumerate (x, y) pairs.
    const Eigen::Index npos = n * n;
    Eigen::MatrixXcd et(npos, lt), er(npos, lr);
    for (Eigen::Index ix = 0; ix < n; ++ix)
        for (Eigen::Index iy = 0; iy < n; ++iy) {
            const Eigen::Vector2d pos(lattice[ix], lattice[iy]);
            const Eigen::Index row = ix * n + iy;
            for (Eigen::Index p = 0; p < lt; ++p)
                et(row, p) = std::polar(1.0, k0 * path_projection(pos, real.geometry.tx_elevation[p],
                                                                  real.geometry.tx_azimuth[p]));
            for (Eigen::Index p = 0; p < lr; ++p)
                er(row, p) = std::polar(1.0, -k0 * path_projection(pos, real.geometry.rx_elevation[p],
                                                                   real.geometry.rx_azimuth[p]));
        }

    DpaGridResult best;
    best.rate = -1.0;
    for (Eigen::Index ti = 0; ti < npos; ++ti) {
        for (Eigen::Index ri = 0; ri < npos; ++ri) {
            Eigen::Matrix2cd H = Eigen::Matrix2cd::Zero();
            for (const auto& b : blocks) H += (er(ri, b.rx_path) * et(ti, b.tx_path)) * b.value;
            const double rate = waterfilling_rate(H, budget);
            if (rate > best.rate) {
                best.rate = rate;
                best.tx_position = {lattice[ti / n], lattice[ti % n]};
                best.rx_position = {lattice[ri / n], lattice[ri % n]};
            }
        }
    }
    return best;
}

struct OracleCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Brute-force maximum of the achievable rate over position lattices in t and
/// r, a uniform lattice of phase_points values of theta, and the exact
/// maximizer over phi (for fixed t, r, theta the best phi aligns the two
/// receive ports, giving |h| = |(Hp)_1| + |(Hp)_2|). The result therefore
/// dominates a phi-lattice oracle of any resolution. Intended for small
/// instances; refuses when t_points^2 * r_points^2 * phase_points exceeds
/// eval_cap.
inline double exhaustive_oracle(const Realization& real, double region_size, const GridSpec& grid,
                                const LinkBudget& budget, double wavelength,
                                double eval_cap = 1e8) {
    grid.validate(region_size);
    budget.validate();
    const auto lattice = detail::position_lattice(region_size, grid.points_per_axis);
    const auto npos = static_cast<double>(lattice.size() * lattice.size());
    const double evals = npos * npos * grid.phase_points;
    if (evals > eval_cap)
        throw OracleCapError("exhaustive_oracle: " + std::to_string(evals) +
                             " evaluations exceed cap " + std::to_string(eval_cap));

    const auto blocks = detail::nonzero_blocks(real.pprm);
    const double k0 = two_pi / wavelength;
    const Eigen::Index lt = real.pprm.num_tx_paths();
    const Eigen::Index lr = real.pprm.num_rx_paths();
    const auto n = static_cast<Eigen::Index>(lattice.size());
    const Eigen::Index np = n * n;

    Eigen::MatrixXcd et(np, lt), er(np, lr);
    for (Eigen::Index ix = 0; ix < n; ++ix)
        for (Eigen::Index iy = 0; iy < n; ++iy) {
            const Eigen::Vector2d pos(lattice[ix], lattice[iy]);
            const Eigen::Index row = ix * n + iy;
            for (Eigen::Index p = 0; p < lt; ++p)
                et(row, p) = std::polar(1.0, k0 * path_projection(pos, real.geometry.tx_elevation[p],
                                                                  real.geometry.tx_azimuth[p]));
            for (Eigen::Index p = 0; p < lr; ++p)
                er(row, p) = std::polar(1.0, -k0 * path_projection(pos, real.geometry.rx_elevation[p],
                                                                   real.geometry.rx_azimuth[p]));
        }

    std::vector<cd> theta_phasor(grid.phase_points);
    for (int k = 0; k < grid.phase_points; ++k)
        theta_phasor[k] = std::polar(1.0, two_pi * k / grid.phase_points);

    double best_gain = 0.0;
    for (Eigen::Index ti = 0; ti < np; ++ti) {
        for (Eigen::Index ri = 0; ri < np; ++ri) {
            Eigen::Matrix2cd H = Eigen::Matrix2cd::Zero();
            for (const auto& b : blocks) H += (er(ri, b.rx_path) * et(ti, b.tx_path)) * b.value;
            const cd h00 = H(0, 0), h01 = H(0, 1), h10 = H(1, 0), h11 = H(1, 1);
            for (const cd& e : theta_phasor) {
                const cd a = h00 + h01 * e;
                const cd b = h10 + h11 * e;
                const double mag = std::abs(a) + std::abs(b);
                const double gain = 0.5 * mag * mag;  // 1/2 from the tx PFV normalization
                if (gain > best_gain) best_gain = gain;
            }
        }
    }
    return std::log2(1.0 + best_gain * budget.snr());
}

/// SCA with the phase shifters frozen at the scheme's fixed value. The fixed
/// position variant evaluates the origin directly; the movable one optimizes
/// positions from the multi-start lattice plus the origin (so it can never
/// fall below its fixed-position counterpart).
inline SolveReport fixed_polarization_rate(const SchemeSpec& scheme, const Realization& real,
                                           const SchemeParams& params) {
    if (scheme.polarization_mode != PolarizationMode::linear &&
        scheme.polarization_mode != PolarizationMode::circular)
        throw std::invalid_argument("fixed_polarization_rate: scheme is not fixed-polarization");
    const double fixed_phase = scheme.polarization_mode == PolarizationMode::linear
                                   ? params.linear_phase
                                   : params.circular_phase;
    if (scheme.position_mode == PositionMode::fixed) {
        SolveReport report;
        report.tx = {Eigen::Vector2d::Zero(), fixed_phase};
        report.rx = {Eigen::Vector2d::Zero(), fixed_phase};
        report.final_rate = achievable_rate(
            effective_channel(report.tx, report.rx, real.pprm, real.geometry, params.wavelength),
            params.budget);
        report.outer_trace = {report.final_rate};
        return report;
    }
    SolveConstraints constraints;
    constraints.tx = {MovingRegion{params.region_size}, PhaseInterval::frozen(fixed_phase)};
    constraints.rx = {MovingRegion{params.region_size}, PhaseInterval::frozen(fixed_phase)};
    const StartPair origin{{Eigen::Vector2d::Zero(), fixed_phase},
                           {Eigen::Vector2d::Zero(), fixed_phase}};
    return solve(real.pprm, real.geometry, params.wavelength, constraints, params.budget,
                 params.sca, std::span<const StartPair>(&origin, 1));
}

/// Polarforming scheme. Warm-started from both fixed-phase schemes of the
/// same position mode (and, when movable, from the fixed-position PF
/// solution), so its rate is never below any of them for the same instance.
inline SolveReport polarforming_rate(PositionMode position_mode, const Realization& real,
                                     const SchemeParams& params) {
    std::vector<StartPair> extra;
    const SolveReport lpa =
        fixed_polarization_rate({position_mode, PolarizationMode::linear}, real, params);
    const SolveReport cpa =
        fixed_polarization_rate({position_mode, PolarizationMode::circular}, real, params);
    extra.push_back({lpa.tx, lpa.rx});
    extra.push_back({cpa.tx, cpa.rx});
    const double region = position_mode == PositionMode::fixed ? 0.0 : params.region_size;
    if (position_mode == PositionMode::movable) {
        const SolveReport pinned = polarforming_rate(PositionMode::fixed, real, params);
        extra.push_back({pinned.tx, pinned.rx});
    }
    SolveConstraints constraints;
    constraints.tx = {MovingRegion{region}, PhaseInterval{}};
    constraints.rx = {MovingRegion{region}, PhaseInterval{}};
    return solve(real.pprm, real.geometry, params.wavelength, constraints, params.budget,
                 params.sca, extra);
}

/// Evaluate any of the eight benchmark schemes on one realization.
inline SolveReport evaluate_scheme(const SchemeSpec& scheme, const Realization& real,
                                   const SchemeParams& params) {
    switch (scheme.polarization_mode) {
        case PolarizationMode::linear:
        case PolarizationMode::circular:
            return fixed_polarization_rate(scheme, real, params);
        case PolarizationMode::polarforming:
            return polarforming_rate(scheme.position_mode, real, params);
        case PolarizationMode::dual_polarized: {
            SolveReport report;
            if (scheme.position_mode == PositionMode::fixed) {
                const Eigen::Matrix2cd H =
                    dpa_channel(Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), real.pprm,
                                real.geometry, params.wavelength);
                report.final_rate = waterfilling_rate(H, params.budget);
            } else {
                const DpaGridResult res = dpa_grid_search(real, params.region_size,
                                                          params.dpa_grid, params.budget,
                                                          params.wavelength);
                report.final_rate = res.rate;
                report.tx.position = res.tx_position;
                report.rx.position = res.rx_position;
            }
            report.outer_trace = {report.final_rate};
            return report;
        }
    }
    throw std::logic_error("evaluate_scheme: unreachable");
}

}  // namespace pfma

#endif  // PFMA_SCHEMES_HPP
