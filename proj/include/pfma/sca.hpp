#ifndef PFMA_SCA_HPP
#define PFMA_SCA_HPP

// Alternating successive convex approximation for the joint antenna-position /
// polarforming-phase rate maximization. Each side's subproblem maximizes a
// quadratic form s^H Q s over the augmented variable (x, y, phase), where
// Q = Lambda f f^H Lambda^H (receive side, B) or Lambda^H g g^H Lambda
// (transmit side, D) is held fixed. The surrogate is the usual
// gradient/curvature minorant; its box-constrained maximizer is the
// coordinatewise clamp of point + grad/delta, so no QP solver is involved.
//
// solve() exploits that its Q is rank one (Q = w w^H) and evaluates the same
// objective and gradient in O(L) per iteration; the general-matrix operations
// below are the reference path and handle arbitrary Hermitian Q.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfma/channel.hpp"

namespace pfma {

struct PhaseInterval {
    double lo = 0.0;
    double hi = two_pi;

    static PhaseInterval frozen(double value) { return {value, value}; }
    double clamp(double v) const { return std::clamp(v, lo, hi); }
};

/// Feasible box of one side's augmented variable: the moving region for the
/// position and an interval for the phase shift (degenerate when frozen).
struct StateBox {
    MovingRegion region;
    PhaseInterval phase;

    AntennaState clamp(const AntennaState& s) const {
        AntennaState out = s;
        out.position.x() = std::clamp(s.position.x(), -region.half(), region.half());
        out.position.y() = std::clamp(s.position.y(), -region.half(), region.half());
        out.phase = phase.clamp(s.phase);
        return out;
    }
};

struct ScaConfig {
    double rate_tolerance = 1e-6;       // epsilon_1, outer loop, bps/Hz
    double surrogate_tolerance = 1e-6;  // epsilon_2, inner loop, channel gain
    int max_outer_iterations = 20;      // T_max
    int max_inner_iterations = 800;     // I_max
    int num_starts = 0;                 // zeta; 0 = auto, 4 ceil(A/lambda)^2
    bool tx_first = false;              // update order within an outer iteration

    void validate() const {
        if (!(rate_tolerance > 0.0) || !(surrogate_tolerance > 0.0))
            throw std::invalid_argument("ScaConfig: tolerances must be > 0");
        if (max_outer_iterations < 1 || max_inner_iterations < 1)
            throw std::invalid_argument("ScaConfig: iteration limits must be >= 1");
        if (num_starts < 0) throw std::invalid_argument("ScaConfig: num_starts must be >= 0");
    }
};

enum class Termination { converged, iteration_cap };

struct SolveReport {
    AntennaState tx;
    AntennaState rx;
    double final_rate = 0.0;
    std::vector<double> outer_trace;  // [0] = initial rate, then one per outer iteration
    Termination termination = Termination::converged;
    int start_index = 0;
};

/// Q = Lambda f f^H Lambda^H when side == rx (f is the transmit steering
/// vector, length 2Lt), or Lambda^H g g^H Lambda when side == tx (g is the
/// receive steering vector, length 2Lr). Hermitian PSD of rank <= 1.
inline Eigen::MatrixXcd build_quadratic_form(const Pprm& pprm,
                                             const Eigen::VectorXcd& fixed_side_steering,
                                             Side side) {
    const Eigen::MatrixXcd& lam = pprm.entries();
    if (side == Side::rx) {
        if (fixed_side_steering.size() != lam.cols())
            throw std::invalid_argument("build_quadratic_form: steering length != 2Lt");
        const Eigen::VectorXcd w = lam * fixed_side_steering;
        return w * w.adjoint();
    }
    if (fixed_side_steering.size() != lam.rows())
        throw std::invalid_argument("build_quadratic_form: steering length != 2Lr");
    const Eigen::VectorXcd w = lam.adjoint() * fixed_side_steering;
    return w * w.adjoint();
}

/// Phase omega_l of steering element l (0-based) at a point: the path
/// projection phase, plus the polarforming phase for H elements (odd l).
inline double element_phase(const AntennaState& point, Eigen::Index element_index,
                            const PathGeometry& geometry, Side side, double wavelength) {
    const Eigen::Index n = 2 * geometry.num_paths(side);
    if (element_index < 0 || element_index >= n)
        throw std::out_of_range("element_phase: element index out of range");
    const Eigen::Index path = element_index / 2;
    const double rho = path_projection(point.position, geometry.elevation(side)[path],
                                       geometry.azimuth(side)[path]);
    double w = two_pi / wavelength * rho;
    if (element_index % 2 == 1) w += point.phase;
    return w;
}

/// Curvature-bound scale factor: 2 m^2 (1 + 16 pi^2 / lambda^2), from the
/// Frobenius-norm chain with |c_pq|^2 + |d_pq|^2 <= 16 pi^2/lambda^2 and
/// Ups_pq^2 <= 1.
inline double curvature_scale(double wavelength, Side side) {
    const double m = element_modulus(side);
    const double k = two_pi / wavelength;
    return 2.0 * m * m * (1.0 + 4.0 * k * k);
}

namespace detail {

/// Per-side constants reused across many evaluations at different points.
struct SideKernel {
    Eigen::ArrayXd dir_x;  // cos(elev) sin(azim) per path
    Eigen::ArrayXd dir_y;  // sin(elev) per path
    double k0 = 0.0;       // 2pi/lambda
    double m2 = 1.0;       // squared element modulus (1 rx, 1/2 tx)

    static SideKernel make(const PathGeometry& geometry, Side side, double wavelength) {
        SideKernel k;
        k.dir_x = geometry.elevation(side).cos() * geometry.azimuth(side).sin();
        k.dir_y = geometry.elevation(side).sin();
        k.k0 = two_pi / wavelength;
        const double m = element_modulus(side);
        k.m2 = m * m;
        return k;
    }

    /// Unit phasors e^{j omega_l} for all 2L elements at a point.
    void element_phasors(const AntennaState& point, Eigen::VectorXcd& out) const {
        const Eigen::Index L = dir_x.size();
        out.resize(2 * L);
        const cd ephase = std::polar(1.0, point.phase);
        for (Eigen::Index path = 0; path < L; ++path) {
            const double w =
                k0 * (point.position.x() * dir_x[path] + point.position.y() * dir_y[path]);
            const cd e = std::polar(1.0, w);
            out[2 * path] = e;
            out[2 * path + 1] = e * ephase;
        }
    }
};

/// Objective m^2 s~^H Q s~ for a general Hermitian Q, via the cosine/pair
/// expansion. Reference path; O((2L)^2) per evaluation.
class PairObjective {
public:
    PairObjective(SideKernel kernel, const Eigen::MatrixXcd& Q)
        : kernel_(std::move(kernel)), Q_(Q) {
        if (Q_.rows() != Q_.cols() || Q_.rows() != 2 * kernel_.dir_x.size())
            throw std::invalid_argument("objective: Q shape does not match geometry");
        double sum_off = 0.0;
        for (Eigen::Index p = 0; p < Q_.rows(); ++p)
            for (Eigen::Index q = p + 1; q < Q_.cols(); ++q) sum_off += std::abs(Q_(p, q));
        const double k = kernel_.k0;
        delta_ = std::max(2.0 * kernel_.m2 * (1.0 + k * k * 4.0) * sum_off, 1e-12);
    }

    double delta() const { return delta_; }

    double gain(const AntennaState& point) const {
        kernel_.element_phasors(point, phasors_);
        const Eigen::Index n = Q_.rows();
        double diag = 0.0, cross = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            diag += Q_(p, p).real();
            for (Eigen::Index q = p + 1; q < n; ++q)
                cross += (Q_(p, q) * phasors_[q] * std::conj(phasors_[p])).real();
        }
        return kernel_.m2 * (diag + 2.0 * cross);
    }

    double gain_and_gradient(const AntennaState& point, Eigen::Vector3d& grad) const {
        kernel_.element_phasors(point, phasors_);
        const Eigen::Index n = Q_.rows();
        double diag = 0.0, cross = 0.0;
        grad.setZero();
        for (Eigen::Index p = 0; p < n; ++p) {
            diag += Q_(p, p).real();
            const Eigen::Index pp = p / 2;
            const double podd = static_cast<double>(p % 2);
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const cd term = Q_(p, q) * phasors_[q] * std::conj(phasors_[p]);
                cross += term.real();
                const double s = term.imag();
                if (s == 0.0) continue;
                const Eigen::Index qq = q / 2;
                grad[0] -= kernel_.k0 * (kernel_.dir_x[qq] - kernel_.dir_x[pp]) * s;
                grad[1] -= kernel_.k0 * (kernel_.dir_y[qq] - kernel_.dir_y[pp]) * s;
                grad[2] -= (static_cast<double>(q % 2) - podd) * s;
            }
        }
        grad *= 2.0 * kernel_.m2;
        return kernel_.m2 * (diag + 2.0 * cross);
    }

private:
    SideKernel kernel_;
    const Eigen::MatrixXcd& Q_;
    double delta_ = 0.0;
    mutable Eigen::VectorXcd phasors_;
};

/// Same objective for the rank-one Q = w w^H arising in solve():
/// gain = m^2 |w^H s~|^2, evaluated in O(L). Uses the per-pair form of the
/// curvature bound, 2 m^2 sum_{p<q} |w_p||w_q| (c_pq^2 + d_pq^2 + Ups_pq^2):
/// the same Frobenius chain as curvature_bound with the actual pair
/// coefficients instead of their worst case, so it still dominates the
/// Hessian everywhere while allowing markedly larger surrogate steps.
class Rank1Objective {
public:
    Rank1Objective(SideKernel kernel, Eigen::VectorXcd w)
        : kernel_(std::move(kernel)), w_(std::move(w)) {
        const Eigen::Index n = w_.size();
        if (n != 2 * kernel_.dir_x.size())
            throw std::invalid_argument("objective: steering length does not match geometry");
        double sum = 0.0;
        for (Eigen::Index p = 0; p < n; ++p) {
            const double ap = std::abs(w_[p]);
            if (ap == 0.0) continue;
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double c =
                    kernel_.k0 * (kernel_.dir_x[q / 2] - kernel_.dir_x[p / 2]);
                const double d =
                    kernel_.k0 * (kernel_.dir_y[q / 2] - kernel_.dir_y[p / 2]);
                const double ups = static_cast<double>(q % 2) - static_cast<double>(p % 2);
                sum += ap * std::abs(w_[q]) * (c * c + d * d + ups * ups);
            }
        }
        delta_ = std::max(2.0 * kernel_.m2 * sum, 1e-12);
    }

    double delta() const { return delta_; }

    double gain(const AntennaState& point) const {
        const Eigen::Index L = kernel_.dir_x.size();
        const cd ephase = std::polar(1.0, point.phase);
        cd z(0.0, 0.0);
        for (Eigen::Index p = 0; p < L; ++p) {
            const double w = kernel_.k0 * (point.position.x() * kernel_.dir_x[p] +
                                           point.position.y() * kernel_.dir_y[p]);
            const cd e = std::polar(1.0, w);
            z += std::conj(w_[2 * p]) * e + std::conj(w_[2 * p + 1]) * e * ephase;
        }
        return kernel_.m2 * std::norm(z);
    }

    double gain_and_gradient(const AntennaState& point, Eigen::Vector3d& grad) const {
        const Eigen::Index L = kernel_.dir_x.size();
        const cd ephase = std::polar(1.0, point.phase);
        cd z(0.0, 0.0), sx(0.0, 0.0), sy(0.0, 0.0), sp(0.0, 0.0);
        for (Eigen::Index p = 0; p < L; ++p) {
            const double w = kernel_.k0 * (point.position.x() * kernel_.dir_x[p] +
                                           point.position.y() * kernel_.dir_y[p]);
            const cd e = std::polar(1.0, w);
            const cd t0 = std::conj(w_[2 * p]) * e;
            const cd t1 = std::conj(w_[2 * p + 1]) * e * ephase;
            const cd t = t0 + t1;
            z += t;
            sx += kernel_.k0 * kernel_.dir_x[p] * t;
            sy += kernel_.k0 * kernel_.dir_y[p] * t;
            sp += t1;
        }
        const cd zc = std::conj(z);
        grad[0] = -2.0 * kernel_.m2 * (zc * sx).imag();
        grad[1] = -2.0 * kernel_.m2 * (zc * sy).imag();
        grad[2] = -2.0 * kernel_.m2 * (zc * sp).imag();
        return kernel_.m2 * std::norm(z);
    }

private:
    SideKernel kernel_;
    Eigen::VectorXcd w_;
    double delta_ = 0.0;
};

/// Shared SCA inner loop: surrogate steps until the true objective improves by
/// less than surrogate_tolerance, the candidate stops improving, or the
/// iteration cap. Never returns a point with a lower objective than the entry.
template <class Objective>
AntennaState inner_loop(const Objective& obj, AntennaState state, const StateBox& box,
                        const ScaConfig& cfg) {
    const double delta = obj.delta();
    Eigen::Vector3d grad;
    double value = obj.gain(state);
    for (int it = 0; it < cfg.max_inner_iterations; ++it) {
        obj.gain_and_gradient(state, grad);
        AntennaState cand;
        cand.position = state.position + grad.head<2>() / delta;
        cand.phase = state.phase + grad[2] / delta;
        cand = box.clamp(cand);
        const double cand_value = obj.gain(cand);
        if (cand_value < value) break;  // cannot happen with a valid delta; keep the old point
        const double gained = cand_value - value;
        state = cand;
        value = cand_value;
        if (gained < cfg.surrogate_tolerance) break;
    }
    return state;
}

}  // namespace detail

/// Channel power gain as the cosine expansion of the quadratic form:
/// m^2 (sum_p Q_pp + 2 sum_{p<q} |Q_pq| cos(varpi_pq)). Equals
/// |effective_channel|^2 when Q was built from the opposite side's state.
inline double gain_expansion(const Eigen::MatrixXcd& Q, const AntennaState& point,
                             const PathGeometry& geometry, Side side, double wavelength) {
    return detail::PairObjective(detail::SideKernel::make(geometry, side, wavelength), Q)
        .gain(point);
}

/// Gradient of gain_expansion with respect to (x, y, phase):
/// -2 m^2 sum_{p<q} |Q_pq| sin(varpi_pq) (c_pq, d_pq, Ups_pq), with
/// c_pq = k0 (dir_x[q'] - dir_x[p']), d_pq = k0 (dir_y[q'] - dir_y[p']) for
/// path indices p' = p/2, q' = q/2, and Ups_pq = [q odd] - [p odd].
inline Eigen::Vector3d gradient(const Eigen::MatrixXcd& Q, const AntennaState& point,
                                const PathGeometry& geometry, Side side, double wavelength) {
    Eigen::Vector3d g;
    detail::PairObjective(detail::SideKernel::make(geometry, side, wavelength), Q)
        .gain_and_gradient(point, g);
    return g;
}

/// Curvature bound delta >= ||Hessian of gain_expansion||_2 everywhere:
/// curvature_scale * sum_{p<q} |Q_pq|, floored at 1e-12 so the surrogate step
/// stays defined for diagonal Q (where the gradient is identically zero).
inline double curvature_bound(const Eigen::MatrixXcd& Q, double wavelength, Side side) {
    const Eigen::Index n = Q.rows();
    double sum_off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
        for (Eigen::Index q = p + 1; q < n; ++q) sum_off += std::abs(Q(p, q));
    return std::max(curvature_scale(wavelength, side) * sum_off, 1e-12);
}

/// Exact maximizer of the quadratic surrogate over the box: the separable
/// Hessian -delta I makes it the coordinatewise clamp of point + grad/delta.
inline AntennaState surrogate_step(const AntennaState& point, const Eigen::Vector3d& grad,
                                   double delta, const StateBox& box) {
    if (!(delta > 0.0)) throw std::invalid_argument("surrogate_step: delta must be > 0");
    AntennaState cand;
    cand.position = point.position + grad.head<2>() / delta;
    cand.phase = point.phase + grad[2] / delta;
    return box.clamp(cand);
}

/// One side's SCA loop at fixed opposite-side state (fixed Q). Iterates
/// surrogate steps, stopping once the true objective improves by less than
/// surrogate_tolerance or after max_inner_iterations. Never returns a point
/// with lower objective than the entry point.
inline AntennaState sca_inner_loop(Side side, AntennaState state, const Eigen::MatrixXcd& Q,
                                   const StateBox& box, const PathGeometry& geometry,
                                   double wavelength, const ScaConfig& cfg) {
    const detail::PairObjective obj(detail::SideKernel::make(geometry, side, wavelength), Q);
    return detail::inner_loop(obj, state, box, cfg);
}

struct SolveConstraints {
    StateBox tx;
    StateBox rx;
};

/// A (tx, rx) state pair used as an extra initialization of solve().
struct StartPair {
    AntennaState tx;
    AntennaState rx;
};

/// Multi-start count zeta = 4 ceil(A/lambda)^2 (at least 1).
inline int default_num_starts(double region_size, double wavelength) {
    const int n = static_cast<int>(std::ceil(region_size / wavelength));
    return std::max(1, 4 * n * n);
}

namespace detail {

/// Cell-center lattice point k of an n x n grid over [-size/2, size/2]^2,
/// row-major.
inline Eigen::Vector2d lattice_point(int k, int n, double size) {
    const int ix = k % n;
    const int iy = k / n;
    const double step = size / n;
    return {-0.5 * size + (ix + 0.5) * step, -0.5 * size + (iy + 0.5) * step};
}

/// Initial phase values tried at every lattice position. The phase feasible
/// set is a clamped box, not a circle, so an ascent started at a single phase
/// can pin against the 0/2pi boundary below the optimum; seeding a few phases
/// removes those spurious boundary optima. Frozen phases get their single
/// value.
inline std::vector<double> phase_seeds(const PhaseInterval& interval) {
    if (interval.hi - interval.lo < 1e-12) return {interval.lo};
    std::vector<double> seeds;
    for (double v : {0.0, 0.5 * pi, pi, 1.5 * pi}) {
        const double c = interval.clamp(v);
        bool dup = false;
        for (double s : seeds) dup = dup || std::abs(s - c) < 1e-12;
        if (!dup) seeds.push_back(c);
    }
    return seeds;
}

}  // namespace detail

/// Alternating SCA (Algorithm-style): per outer iteration run the receive-side
/// inner loop, then the transmit-side one (order switchable), until the rate
/// gain drops below rate_tolerance or max_outer_iterations is hit. The search
/// is repeated from num_starts lattice positions, each paired with a small set
/// of phase seeds (see detail::phase_seeds), plus any extra_starts; the best
/// final rate wins. Fully deterministic.
inline SolveReport solve(const Pprm& pprm, const PathGeometry& geometry, double wavelength,
                         const SolveConstraints& constraints, const LinkBudget& budget,
                         const ScaConfig& cfg, std::span<const StartPair> extra_starts = {}) {
    cfg.validate();
    budget.validate();
    check_pprm_geometry(pprm, geometry);

    const double max_region = std::max(constraints.tx.region.size, constraints.rx.region.size);
    const int zeta =
        cfg.num_starts > 0 ? cfg.num_starts : default_num_starts(max_region, wavelength);
    const int n_axis = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(zeta))));

    std::vector<StartPair> starts;
    {
        const std::vector<double> tx_phases = detail::phase_seeds(constraints.tx.phase);
        const std::vector<double> rx_phases = detail::phase_seeds(constraints.rx.phase);
        starts.reserve(zeta * tx_phases.size() * rx_phases.size() + extra_starts.size());
        for (int k = 0; k < zeta; ++k) {
            const Eigen::Vector2d pt = detail::lattice_point(k, n_axis, constraints.tx.region.size);
            const Eigen::Vector2d pr = detail::lattice_point(k, n_axis, constraints.rx.region.size);
            for (double a : tx_phases)
                for (double b : rx_phases) starts.push_back({{pt, a}, {pr, b}});
        }
        starts.insert(starts.end(), extra_starts.begin(), extra_starts.end());
    }

    const detail::SideKernel rx_kernel = detail::SideKernel::make(geometry, Side::rx, wavelength);
    const detail::SideKernel tx_kernel = detail::SideKernel::make(geometry, Side::tx, wavelength);
    const Eigen::MatrixXcd& lam = pprm.entries();

    auto rate_of = [&](const AntennaState& tx, const AntennaState& rx) {
        return achievable_rate(effective_channel(tx, rx, pprm, geometry, wavelength), budget);
    };

    std::optional<SolveReport> best;
    for (int k = 0; k < static_cast<int>(starts.size()); ++k) {
        AntennaState tx = constraints.tx.clamp(starts[k].tx);
        AntennaState rx = constraints.rx.clamp(starts[k].rx);

        SolveReport report;
        report.start_index = k;
        report.termination = Termination::iteration_cap;
        double rate = rate_of(tx, rx);
        report.outer_trace.push_back(rate);

        for (int t = 0; t < cfg.max_outer_iterations; ++t) {
            const AntennaState prev_tx = tx, prev_rx = rx;
            auto update_rx = [&] {
                const Eigen::VectorXcd f = steering_vector(tx, Side::tx, geometry, wavelength);
                const detail::Rank1Objective obj(rx_kernel, lam * f);
                rx = detail::inner_loop(obj, rx, constraints.rx, cfg);
            };
            auto update_tx = [&] {
                const Eigen::VectorXcd g = steering_vector(rx, Side::rx, geometry, wavelength);
                const detail::Rank1Objective obj(tx_kernel, lam.adjoint() * g);
                tx = detail::inner_loop(obj, tx, constraints.tx, cfg);
            };
            if (cfg.tx_first) {
                update_tx();
                update_rx();
            } else {
                update_rx();
                update_tx();
            }
            const double new_rate = rate_of(tx, rx);
            if (new_rate < rate) {
                // Round-off only: the inner loops never worsen their own
                // objective. Keep the previous point so the trace stays
                // non-decreasing.
                tx = prev_tx;
                rx = prev_rx;
                report.outer_trace.push_back(rate);
                report.termination = Termination::converged;
                break;
            }
            report.outer_trace.push_back(new_rate);
            const double gained = new_rate - rate;
            rate = new_rate;
            if (gained < cfg.rate_tolerance) {
                report.termination = Termination::converged;
                break;
            }
        }

        // Phases are reported canonicalized to [0, 2pi).
        auto canonical = [](AntennaState s) {
            s.phase = std::fmod(s.phase, two_pi);
            if (s.phase < 0.0) s.phase += two_pi;
            return s;
        };
        report.tx = canonical(tx);
        report.rx = canonical(rx);
        report.final_rate = rate;
        if (!best || report.final_rate > best->final_rate) best = std::move(report);
    }
    return *best;
}

}  // namespace pfma

#endif  // PFMA_SCA_HPP
