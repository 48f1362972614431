#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pfma/channel.hpp"
#include "test_support.hpp"

using namespace pfma;
using Catch::Approx;

namespace {
PathGeometry tiny_geometry() {
    PathGeometry g;
    g.tx_elevation = Eigen::ArrayXd::Zero(1);
    g.tx_azimuth = Eigen::ArrayXd::Zero(1);
    g.rx_elevation = Eigen::ArrayXd::Zero(1);
    g.rx_azimuth = Eigen::ArrayXd::Zero(1);
    return g;
}
}  // namespace

TEST_CASE("path_projection matches the direct formula") {
    REQUIRE(path_projection({0.0, 0.0}, 0.7, -1.1) == 0.0);
    REQUIRE(path_projection({1.0, 0.0}, 0.0, pi / 2) == Approx(1.0).epsilon(1e-15));
    const double expected = 0.3 * std::cos(0.5) * std::sin(-0.4) + (-0.2) * std::sin(0.5);
    REQUIRE(path_projection({0.3, -0.2}, 0.5, -0.4) == Approx(expected).epsilon(1e-15));
}

TEST_CASE("path_projection is linear in the position") {
    RandomStream rng(1);
    for (int i = 0; i < 200; ++i) {
        const double el = rng.uniform(-pi / 2, pi / 2);
        const double az = rng.uniform(-pi / 2, pi / 2);
        const Eigen::Vector2d u(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const Eigen::Vector2d v(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        const double lhs = path_projection(a * u + b * v, el, az);
        const double rhs = a * path_projection(u, el, az) + b * path_projection(v, el, az);
        REQUIRE(lhs == Approx(rhs).margin(1e-12));
    }
}

TEST_CASE("field_response phases and unit modulus") {
    RandomStream rng(2);
    PathGeometry g = sample_geometry(3, rng);
    // Unequal path counts are supported by the response itself.
    g.rx_elevation = g.rx_elevation.head(2).eval();
    g.rx_azimuth = g.rx_azimuth.head(2).eval();

    const Eigen::VectorXcd at_origin = field_response({0.0, 0.0}, Side::tx, g, 0.25);
    REQUIRE(at_origin.size() == 3);
    for (Eigen::Index i = 0; i < 3; ++i) REQUIRE(std::abs(at_origin[i] - cd(1, 0)) < 1e-15);

    const Eigen::Vector2d pos(0.13, -0.21);
    const double lambda = 0.5;
    const Eigen::VectorXcd tx = field_response(pos, Side::tx, g, lambda);
    const Eigen::VectorXcd rx = field_response(pos, Side::rx, g, lambda);
    REQUIRE(tx.size() == 3);
    REQUIRE(rx.size() == 2);
    for (Eigen::Index i = 0; i < tx.size(); ++i) {
        const double rho = pos.x() * std::cos(g.tx_elevation[i]) * std::sin(g.tx_azimuth[i]) +
                           pos.y() * std::sin(g.tx_elevation[i]);
        const cd expected = std::polar(1.0, 2 * pi / lambda * rho);
        REQUIRE(std::abs(tx[i] - expected) < 1e-14);
        REQUIRE(std::abs(tx[i]) == Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("polarforming_vector states") {
    const Eigen::Vector2cd lin = polarforming_vector(0.0, Side::tx);
    REQUIRE(std::abs(lin[0] - cd(1 / std::numbers::sqrt2, 0)) < 1e-15);
    REQUIRE(std::abs(lin[1] - cd(1 / std::numbers::sqrt2, 0)) < 1e-15);

    const Eigen::Vector2cd rx_pi = polarforming_vector(pi, Side::rx);
    REQUIRE(std::abs(rx_pi[0] - cd(1, 0)) < 1e-15);
    REQUIRE(std::abs(rx_pi[1] - cd(-1, 0)) < 1e-12);

    const Eigen::Vector2cd circ = polarforming_vector(pi / 2, Side::tx);
    REQUIRE(std::abs(circ[1] - cd(0, 1 / std::numbers::sqrt2)) < 1e-12);
}

TEST_CASE("effective_channel: unit block at the origin gives sqrt(2)") {
    const PathGeometry g = tiny_geometry();
    Pprm pprm = Pprm::Zero(1, 1);
    pprm.set_block(0, 0, Eigen::Matrix2cd::Identity());
    const cd h = effective_channel({}, {}, pprm, g, 1.0);
    REQUIRE(std::abs(h - cd(std::numbers::sqrt2, 0)) < 1e-14);
}

TEST_CASE("effective_channel: Kronecker form equals the path double sum") {
    RandomStream rng(3);
    for (int L : {1, 2, 3, 6}) {
        for (int rep = 0; rep < 25; ++rep) {
            const Realization real = pfma::test::random_realization(L, rng);
            const AntennaState tx = pfma::test::random_state(rng, 1.0);
            const AntennaState rx = pfma::test::random_state(rng, 1.0);
            const cd hk = effective_channel(tx, rx, real.pprm, real.geometry, 1.0);
            const cd hs = effective_channel_path_sum(tx, rx, real.pprm, real.geometry, 1.0);
            REQUIRE(std::abs(hk - hs) <= 1e-12 * std::max(1.0, std::abs(hk)));
        }
    }
}

TEST_CASE("effective_channel: null channel and dimension mismatch") {
    RandomStream rng(4);
    const PathGeometry g = sample_geometry(2, rng);
    const Pprm zero = Pprm::Zero(2, 2);
    REQUIRE(std::abs(effective_channel({}, {}, zero, g, 1.0)) == 0.0);
    const Pprm wrong = Pprm::Zero(3, 2);
    REQUIRE_THROWS_AS(effective_channel({}, {}, wrong, g, 1.0), std::invalid_argument);
}

TEST_CASE("achievable_rate values and monotonicity") {
    const LinkBudget unit{1.0, 1.0};
    REQUIRE(achievable_rate(cd(0, 0), unit) == 0.0);
    REQUIRE(achievable_rate(cd(1, 0), unit) == Approx(1.0).epsilon(1e-15));
    REQUIRE(achievable_rate(cd(std::sqrt(3.0), 0), unit) == Approx(2.0).epsilon(1e-14));
    RandomStream rng(5);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(0, 3), b = rng.uniform(0, 3);
        const double ra = achievable_rate(cd(a, 0), unit);
        const double rb = achievable_rate(cd(b, 0), unit);
        if (a * a < b * b) REQUIRE(ra < rb);
    }
    REQUIRE_THROWS_AS(achievable_rate(cd(1, 0), LinkBudget{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("sample_polarized_block: XPD scaling") {
    RandomStream a(6), b(6);
    const Eigen::Matrix2cd no_mix = sample_polarized_block(0.0, a);
    const Eigen::Matrix2cd full_mix = sample_polarized_block(1.0, b);
    REQUIRE(no_mix(0, 1) == cd(0, 0));  // exactly zero cross-polarization
    REQUIRE(no_mix(1, 0) == cd(0, 0));
    // Same draws, so chi = 1 rescales each entry by 1/sqrt(2) relative to the
    // chi = 0 diagonal (and reveals the consumed off-diagonal draws).
    REQUIRE(std::abs(full_mix(0, 0) - no_mix(0, 0) / std::numbers::sqrt2) < 1e-15);
    REQUIRE(std::abs(full_mix(1, 1) - no_mix(1, 1) / std::numbers::sqrt2) < 1e-15);
}

TEST_CASE("sample_polarized_block: per-entry second moments match Psi^2") {
    const double chi = 0.7;
    RandomStream rng(7);
    Eigen::Matrix2d second = Eigen::Matrix2d::Zero();
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Eigen::Matrix2cd blk = sample_polarized_block(chi, rng);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) second(r, c) += std::norm(blk(r, c));
    }
    second /= n;
    const double co = 1.0 / (chi + 1.0);
    const double cross = chi / (chi + 1.0);
    REQUIRE(second(0, 0) == Approx(co).epsilon(0.02));
    REQUIRE(second(1, 1) == Approx(co).epsilon(0.02));
    REQUIRE(second(0, 1) == Approx(cross).epsilon(0.02));
    REQUIRE(second(1, 0) == Approx(cross).epsilon(0.02));
}

TEST_CASE("build_pprm: Rician block scaling") {
    ChannelSpec spec;
    spec.num_paths = 2;
    spec.rician_factor_db = 0.0;

    RandomStream a(8), b(8);
    const Pprm pprm = build_pprm(spec, a);
    const Eigen::Matrix2cd raw1 = sample_polarized_block(spec.inverse_xpd, b);
    const Eigen::Matrix2cd raw2 = sample_polarized_block(spec.inverse_xpd, b);
    const double s = 1.0 / std::numbers::sqrt2;  // kappa = 1: both scales are 1/sqrt(2)
    REQUIRE((pprm.block(0, 0) - s * raw1).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE((pprm.block(1, 1) - s * raw2).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(pprm.block(0, 1).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(pprm.block(1, 0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_pprm: large Rician factor suppresses diffuse blocks") {
    ChannelSpec spec;
    spec.num_paths = 4;
    spec.rician_factor_db = 300.0;
    RandomStream rng(9);
    const Pprm pprm = build_pprm(spec, rng);
    for (int l = 1; l < 4; ++l) REQUIRE(pprm.block(l, l).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(pprm.block(0, 0).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("build_pprm: expected Frobenius power is 2") {
    // Psi is normalized so each block carries E||Psi had H||_F^2 = 2, and the
    // Rician scaling preserves the total.
    ChannelSpec spec;
    spec.num_paths = 6;
    RandomStream rng(10);
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) acc += build_pprm(spec, rng).entries().squaredNorm();
    REQUIRE(acc / n == Approx(2.0).epsilon(0.02));
}

TEST_CASE("build_pprm: single-path degenerate case ignores kappa") {
    ChannelSpec a, b;
    a.num_paths = b.num_paths = 1;
    a.rician_factor_db = -20.0;
    b.rician_factor_db = 40.0;
    RandomStream ra(11), rb(11);
    const Pprm pa = build_pprm(a, ra);
    const Pprm pb = build_pprm(b, rb);
    REQUIRE((pa.entries() - pb.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_geometry: ranges, determinism, centering") {
    RandomStream rng(12);
    const PathGeometry one = sample_geometry(1, rng);
    REQUIRE(one.tx_elevation.size() == 1);
    one.validate();

    RandomStream s1(13), s2(13);
    const PathGeometry a = sample_geometry(5, s1);
    const PathGeometry b = sample_geometry(5, s2);
    REQUIRE((a.tx_elevation == b.tx_elevation).all());
    REQUIRE((a.rx_azimuth == b.rx_azimuth).all());

    RandomStream big(14);
    double sums[4] = {0, 0, 0, 0};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const PathGeometry g = sample_geometry(1, big);
        sums[0] += g.tx_elevation[0];
        sums[1] += g.tx_azimuth[0];
        sums[2] += g.rx_elevation[0];
        sums[3] += g.rx_azimuth[0];
    }
    for (double s : sums) REQUIRE(std::abs(s / n) < 0.01);
}

TEST_CASE("realization csv round-trips exactly") {
    RandomStream rng(15);
    const Realization real = pfma::test::random_realization(3, rng);
    std::stringstream ss;
    write_realization_csv(real, ss);
    const Realization back = read_realization_csv(ss);
    REQUIRE((back.geometry.tx_elevation == real.geometry.tx_elevation).all());
    REQUIRE((back.geometry.tx_azimuth == real.geometry.tx_azimuth).all());
    REQUIRE((back.geometry.rx_elevation == real.geometry.rx_elevation).all());
    REQUIRE((back.geometry.rx_azimuth == real.geometry.rx_azimuth).all());
    REQUIRE(back.pprm.entries() == real.pprm.entries());
}
