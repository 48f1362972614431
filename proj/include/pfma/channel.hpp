#ifndef PFMA_CHANNEL_HPP
#define PFMA_CHANNEL_HPP

// Polarized multipath SISO channel model for antennas with reconfigurable
// position (within a planar square region) and polarization (a phase shifter
// between the V and H elements). The effective channel is
//
//   h(t, r, theta, phi) = g(r, phi)^H * Lambda * f(t, theta)
//
// with f = u(t) kron p(theta), g = v(r) kron q(phi), u/v the per-path
// field-response vectors, p/q the polarforming vectors and Lambda the
// 2Lr x 2Lt path polarization response matrix (PPRM).

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pfma/rng.hpp"

namespace pfma {

using cd = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class Side { tx, rx };

/// Elevation/azimuth angles of departure (tx) and arrival (rx) for every
/// propagation path. All angles in radians, within [-pi/2, pi/2].
struct PathGeometry {
    Eigen::ArrayXd tx_elevation;
    Eigen::ArrayXd tx_azimuth;
    Eigen::ArrayXd rx_elevation;
    Eigen::ArrayXd rx_azimuth;

    Eigen::Index num_paths(Side side) const {
        return side == Side::tx ? tx_elevation.size() : rx_elevation.size();
    }
    const Eigen::ArrayXd& elevation(Side side) const {
        return side == Side::tx ? tx_elevation : rx_elevation;
    }
    const Eigen::ArrayXd& azimuth(Side side) const {
        return side == Side::tx ? tx_azimuth : rx_azimuth;
    }

    void validate() const {
        if (tx_elevation.size() < 1 || rx_elevation.size() < 1)
            throw std::invalid_argument("PathGeometry: need at least one path per side");
        if (tx_elevation.size() != tx_azimuth.size() || rx_elevation.size() != rx_azimuth.size())
            throw std::invalid_argument("PathGeometry: elevation/azimuth length mismatch");
        auto in_range = [](const Eigen::ArrayXd& a) {
            return (a.abs() <= pi / 2 + 1e-12).all();
        };
        if (!in_range(tx_elevation) || !in_range(tx_azimuth) || !in_range(rx_elevation) ||
            !in_range(rx_azimuth))
            throw std::invalid_argument("PathGeometry: angle outside [-pi/2, pi/2]");
    }
};

/// Square moving region [-size/2, size/2]^2. size = 0 degenerates to a
/// fixed-position antenna.
struct MovingRegion {
    double size = 0.0;

    double half() const { return 0.5 * size; }
    bool contains(const Eigen::Vector2d& p, double tol = 1e-12) const {
        return std::abs(p.x()) <= half() + tol && std::abs(p.y()) <= half() + tol;
    }
};

/// Position plus polarforming phase shift of one link end. Also serves as the
/// augmented optimization variable [x, y, phase].
struct AntennaState {
    Eigen::Vector2d position{0.0, 0.0};
    double phase = 0.0;
};

using TxState = AntennaState;
using RxState = AntennaState;

struct LinkBudget {
    double transmit_power = 1.0;  // P_t, linear
    double noise_power = 1.0;     // sigma^2, linear

    double snr() const { return transmit_power / noise_power; }
    void validate() const {
        if (!(transmit_power > 0.0) || !(noise_power > 0.0))
            throw std::invalid_argument("LinkBudget: powers must be strictly positive");
    }
};

/// Parameters of the geometric polarized channel generator. region_size is in
/// the same length unit as wavelength (meters); configuration files may give
/// it in wavelength multiples.
struct ChannelSpec {
    double wavelength = 1.0;
    int num_paths = 6;             // L, with L_t = L_r = L
    double inverse_xpd = 1.0;      // chi
    double rician_factor_db = 0.0; // kappa in dB
    double region_size = 1.0;      // A

    void validate() const {
        if (!(wavelength > 0.0)) throw std::invalid_argument("ChannelSpec: wavelength must be > 0");
        if (num_paths < 1) throw std::invalid_argument("ChannelSpec: num_paths must be >= 1");
        if (inverse_xpd < 0.0) throw std::invalid_argument("ChannelSpec: inverse_xpd must be >= 0");
        if (region_size < 0.0) throw std::invalid_argument("ChannelSpec: region_size must be >= 0");
    }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Path polarization response matrix: 2Lr x 2Lt complex, viewed as Lr x Lt
/// blocks of 2x2 polarized gains.
class Pprm {
public:
    explicit Pprm(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
        if (entries_.rows() % 2 != 0 || entries_.cols() % 2 != 0 || entries_.rows() == 0 ||
            entries_.cols() == 0)
            throw std::invalid_argument("Pprm: shape must be (2Lr, 2Lt) with Lr, Lt >= 1");
    }

    static Pprm Zero(Eigen::Index num_rx_paths, Eigen::Index num_tx_paths) {
        return Pprm(Eigen::MatrixXcd::Zero(2 * num_rx_paths, 2 * num_tx_paths));
    }

    const Eigen::MatrixXcd& entries() const { return entries_; }
    Eigen::Index num_tx_paths() const { return entries_.cols() / 2; }
    Eigen::Index num_rx_paths() const { return entries_.rows() / 2; }

    Eigen::Matrix2cd block(Eigen::Index rx_path, Eigen::Index tx_path) const {
        return entries_.block<2, 2>(2 * rx_path, 2 * tx_path);
    }
    void set_block(Eigen::Index rx_path, Eigen::Index tx_path, const Eigen::Matrix2cd& b) {
        entries_.block<2, 2>(2 * rx_path, 2 * tx_path) = b;
    }

private:
    Eigen::MatrixXcd entries_;
};

/// Projection of an antenna position onto one path's direction:
/// x cos(elevation) sin(azimuth) + y sin(elevation).
inline double path_projection(const Eigen::Vector2d& position, double elevation, double azimuth) {
    return position.x() * std::cos(elevation) * std::sin(azimuth) +
           position.y() * std::sin(elevation);
}

/// Field-response vector u(t) (tx) or v(r) (rx): per-path unit phasors
/// exp(j 2pi/lambda rho_k(position)).
inline Eigen::VectorXcd field_response(const Eigen::Vector2d& position, Side side,
                                       const PathGeometry& geometry, double wavelength) {
    const Eigen::ArrayXd& elev = geometry.elevation(side);
    const Eigen::ArrayXd& azim = geometry.azimuth(side);
    const double k0 = two_pi / wavelength;
    Eigen::VectorXcd out(elev.size());
    for (Eigen::Index i = 0; i < elev.size(); ++i) {
        const double w = k0 * path_projection(position, elev[i], azim[i]);
        out[i] = cd(std::cos(w), std::sin(w));
    }
    return out;
}

/// Polarforming vector. tx: p(theta) = (1/sqrt(2)) [1, e^{j theta}];
/// rx: q(phi) = [1, e^{j phi}]. The asymmetric normalization matches the
/// system definition and is relied upon throughout.
inline Eigen::Vector2cd polarforming_vector(double phase, Side side) {
    const cd e = std::polar(1.0, phase);
    Eigen::Vector2cd v;
    v << cd(1.0, 0.0), e;
    if (side == Side::tx) v *= 1.0 / std::numbers::sqrt2;
    return v;
}

/// Per-element amplitude of the composite steering vector on one side.
inline double element_modulus(Side side) {
    return side == Side::tx ? 1.0 / std::numbers::sqrt2 : 1.0;
}

/// Composite steering vector f(t, theta) = u kron p (tx) or
/// g(r, phi) = v kron q (rx), length 2L.
inline Eigen::VectorXcd steering_vector(const AntennaState& state, Side side,
                                        const PathGeometry& geometry, double wavelength) {
    const Eigen::VectorXcd frv = field_response(state.position, side, geometry, wavelength);
    const Eigen::Vector2cd pfv = polarforming_vector(state.phase, side);
    Eigen::VectorXcd out(2 * frv.size());
    for (Eigen::Index i = 0; i < frv.size(); ++i) {
        out[2 * i] = frv[i] * pfv[0];
        out[2 * i + 1] = frv[i] * pfv[1];
    }
    return out;
}

inline void check_pprm_geometry(const Pprm& pprm, const PathGeometry& geometry) {
    if (pprm.num_tx_paths() != geometry.num_paths(Side::tx) ||
        pprm.num_rx_paths() != geometry.num_paths(Side::rx))
        throw std::invalid_argument("Pprm dimensions do not match PathGeometry path counts");
}

/// Effective channel h = g(r, phi)^H Lambda f(t, theta).
inline cd effective_channel(const AntennaState& tx, const AntennaState& rx, const Pprm& pprm,
                            const PathGeometry& geometry, double wavelength) {
    check_pprm_geometry(pprm, geometry);
    const Eigen::VectorXcd f = steering_vector(tx, Side::tx, geometry, wavelength);
    const Eigen::VectorXcd g = steering_vector(rx, Side::rx, geometry, wavelength);
    return g.adjoint() * pprm.entries() * f;
}

/// Same channel as a double sum over path pairs,
/// sum_{i,l} e^{-j2pi rho_rl/lambda} q^H Lambda_{li} p e^{j2pi rho_ti/lambda}.
inline cd effective_channel_path_sum(const AntennaState& tx, const AntennaState& rx,
                                     const Pprm& pprm, const PathGeometry& geometry,
                                     double wavelength) {
    check_pprm_geometry(pprm, geometry);
    const double k0 = two_pi / wavelength;
    const Eigen::Vector2cd p = polarforming_vector(tx.phase, Side::tx);
    const Eigen::Vector2cd q = polarforming_vector(rx.phase, Side::rx);
    cd acc(0.0, 0.0);
    for (Eigen::Index l = 0; l < pprm.num_rx_paths(); ++l) {
        const double wr =
            k0 * path_projection(rx.position, geometry.rx_elevation[l], geometry.rx_azimuth[l]);
        const cd er = std::polar(1.0, -wr);
        for (Eigen::Index i = 0; i < pprm.num_tx_paths(); ++i) {
            const double wt = k0 * path_projection(tx.position, geometry.tx_elevation[i],
                                                   geometry.tx_azimuth[i]);
            const cd et = std::polar(1.0, wt);
            acc += er * (q.adjoint() * pprm.block(l, i) * p)(0, 0) * et;
        }
    }
    return acc;
}

/// Achievable rate log2(1 + |h|^2 P_t / sigma^2) in bps/Hz.
inline double achievable_rate(cd h, const LinkBudget& budget) {
    budget.validate();
    return std::log2(1.0 + std::norm(h) * budget.snr());
}

/// One 2x2 polarized block Psi (Hadamard) H with
/// Psi = (1/sqrt(chi+1)) [[1, sqrt(chi)], [sqrt(chi), 1]] and H i.i.d.
/// circularly symmetric complex Gaussian of unit variance per entry.
inline Eigen::Matrix2cd sample_polarized_block(double inverse_xpd, RandomStream& rng) {
    if (inverse_xpd < 0.0) throw std::invalid_argument("inverse_xpd must be >= 0");
    const double co = 1.0 / std::sqrt(inverse_xpd + 1.0);
    const double cross = std::sqrt(inverse_xpd) * co;
    Eigen::Matrix2cd out;
    // Row-major draw order is part of the reproducibility contract.
    out(0, 0) = co * rng.complex_normal();
    out(0, 1) = cross * rng.complex_normal();
    out(1, 0) = cross * rng.complex_normal();
    out(1, 1) = co * rng.complex_normal();
    return out;
}

namespace detail {
inline void warn_single_path_rician() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        std::fprintf(stderr,
                     "pfma: build_pprm with num_paths = 1 uses the dominant block only; "
                     "the Rician factor is ignored\n");
    });
}
}  // namespace detail

/// Geometric block-diagonal PPRM with a Rician dominant path:
/// Lambda = (1/sqrt(kappa+1)) blkdiag{sqrt(kappa) B_1,
///          (1/sqrt(L-1)) B_2, ..., (1/sqrt(L-1)) B_L}.
/// kappa is given in dB. For L = 1 the 1/sqrt(L-1) factor is undefined and
/// the single block is emitted with unit scale (kappa ignored, warned once).
inline Pprm build_pprm(const ChannelSpec& spec, RandomStream& rng) {
    spec.validate();
    const Eigen::Index L = spec.num_paths;
    Pprm pprm = Pprm::Zero(L, L);
    if (L == 1) {
        detail::warn_single_path_rician();
        pprm.set_block(0, 0, sample_polarized_block(spec.inverse_xpd, rng));
        return pprm;
    }
    const double kappa = db_to_linear(spec.rician_factor_db);
    const double dominant = std::sqrt(kappa / (kappa + 1.0));
    const double diffuse = 1.0 / std::sqrt((kappa + 1.0) * static_cast<double>(L - 1));
    for (Eigen::Index l = 0; l < L; ++l) {
        const double scale = (l == 0) ? dominant : diffuse;
        pprm.set_block(l, l, scale * sample_polarized_block(spec.inverse_xpd, rng));
    }
    return pprm;
}

/// All four angle families drawn i.i.d. uniform over [-pi/2, pi/2].
inline PathGeometry sample_geometry(int num_paths, RandomStream& rng) {
    if (num_paths < 1) throw std::invalid_argument("sample_geometry: num_paths must be >= 1");
    auto draw = [&rng, num_paths] {
        Eigen::ArrayXd a(num_paths);
        for (int i = 0; i < num_paths; ++i) a[i] = rng.uniform(-pi / 2, pi / 2);
        return a;
    };
    PathGeometry g;
    g.tx_elevation = draw();
    g.tx_azimuth = draw();
    g.rx_elevation = draw();
    g.rx_azimuth = draw();
    return g;
}

/// One immutable channel realization: path angles plus PPRM.
struct Realization {
    PathGeometry geometry;
    Pprm pprm;
};

inline Realization make_realization(const ChannelSpec& spec, RandomStream& rng) {
    PathGeometry geometry = sample_geometry(spec.num_paths, rng);
    Pprm pprm = build_pprm(spec, rng);
    return {std::move(geometry), std::move(pprm)};
}

// --- serialization ---------------------------------------------------------
// Text format, one realization per file:
//   line 1: "lt,lr"
//   lines 2-5: tx_elevation, tx_azimuth, rx_elevation, rx_azimuth (CSV)
//   then 2Lr lines of 2Lt "re,im" pairs, row-major.
// Values printed with %.17g so doubles round-trip exactly.

namespace detail {
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

inline void write_realization_csv(const Realization& real, std::ostream& os) {
    const Eigen::Index lt = real.pprm.num_tx_paths();
    const Eigen::Index lr = real.pprm.num_rx_paths();
    os << lt << "," << lr << "\n";
    auto row = [&os](const Eigen::ArrayXd& a) {
        for (Eigen::Index i = 0; i < a.size(); ++i)
            os << (i ? "," : "") << detail::fmt_double(a[i]);
        os << "\n";
    };
    row(real.geometry.tx_elevation);
    row(real.geometry.tx_azimuth);
    row(real.geometry.rx_elevation);
    row(real.geometry.rx_azimuth);
    const Eigen::MatrixXcd& m = real.pprm.entries();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            os << (c ? "," : "") << detail::fmt_double(m(r, c).real()) << ","
               << detail::fmt_double(m(r, c).imag());
        os << "\n";
    }
}

inline void write_realization_csv(const Realization& real, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_realization_csv(real, os);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Realization read_realization_csv(std::istream& is) {
    auto next_fields = [&is](const char* what) {
        std::string line;
        if (!std::getline(is, line))
            throw std::runtime_error(std::string("realization csv: missing ") + what);
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
    };
    const auto dims = next_fields("dimension line");
    if (dims.size() != 2) throw std::runtime_error("realization csv: bad dimension line");
    const auto lt = static_cast<Eigen::Index>(dims[0]);
    const auto lr = static_cast<Eigen::Index>(dims[1]);
    if (lt < 1 || lr < 1) throw std::runtime_error("realization csv: bad path counts");
    auto angle_row = [&next_fields](const char* what, Eigen::Index n) {
        const auto v = next_fields(what);
        if (static_cast<Eigen::Index>(v.size()) != n)
            throw std::runtime_error(std::string("realization csv: bad length for ") + what);
        return Eigen::ArrayXd(Eigen::Map<const Eigen::ArrayXd>(v.data(), n));
    };
    PathGeometry g;
    g.tx_elevation = angle_row("tx_elevation", lt);
    g.tx_azimuth = angle_row("tx_azimuth", lt);
    g.rx_elevation = angle_row("rx_elevation", lr);
    g.rx_azimuth = angle_row("rx_azimuth", lr);
    Eigen::MatrixXcd m(2 * lr, 2 * lt);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const auto v = next_fields("pprm row");
        if (static_cast<Eigen::Index>(v.size()) != 2 * m.cols())
            throw std::runtime_error("realization csv: bad pprm row length");
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = cd(v[2 * c], v[2 * c + 1]);
    }
    return {std::move(g), Pprm(std::move(m))};
}

inline Realization read_realization_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_realization_csv(is);
}

}  // namespace pfma

#endif  // PFMA_CHANNEL_HPP
