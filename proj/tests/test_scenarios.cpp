#include <catch_amalgamated.hpp>

#include "epflow/scenarios.hpp"
#include "test_util.hpp"

using namespace epflow;

namespace {
const double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("blow-up builder: mode search oracle") {
    const Grid g = Grid::uniform(2, 128, 1.0);
    const DirectionSpec z({1, 0});
    // brute-force oracle over K with the measured margin of each candidate
    const auto measured_margin = [&](int K) {
        ProfileSpec pr{K, 1.0};
        VectorField u(g);
        u[0] = sample(g, [&](const Point& x) {
            double s = x[0];
            return pr.eval(s - std::floor(s));
        });
        const double g0 = directional_slope_field(u, z).values[0];
        return blowup_margin(g0, h1_norm(u));
    };
    const auto smallest_k = [&](double lambda) {
        for (int K = 1; K <= 64; K++)
            if (measured_margin(K) >= lambda) return K;
        return -1;
    };
    CHECK(measured_margin(1) < 1.0);  // one mode can never satisfy the hypothesis
    CHECK(smallest_k(1.2) == 2);
    CHECK(smallest_k(2.0) == 5);

    CHECK(build_blowup(g, z, 1.2).K == 2);
    CHECK(build_blowup(g, z, 2.0).K == 5);
    CHECK_THROWS_AS(build_blowup(g, z, 5.0, 16), MarginUnreachableError);
    CHECK_THROWS_AS(build_blowup(Grid::uniform(3, 16, 1.0), DirectionSpec({1, 0, 0}), 1.2),
                    std::invalid_argument);
}

TEST_CASE("blow-up builder: certificate is self-consistent") {
    const Grid g = Grid::uniform(2, 128, 1.0);
    const DirectionSpec z({1, 0});
    const BlowupBuild b = build_blowup(g, z, 1.5);
    CHECK(b.cert.margin >= 1.5);
    // recompute the certificate from the returned field
    const double g0 = directional_slope_field(b.u0, z).values[0];
    const double E = h1_norm(b.u0);
    CHECK(g0 == Catch::Approx(b.cert.g0).epsilon(1e-10));
    CHECK(E == Catch::Approx(b.cert.E).epsilon(1e-10));
    CHECK(riccati_bound(g0, E).T_bound == Catch::Approx(b.cert.T_bound).epsilon(1e-10));
    // invariance along the orthogonal direction holds to spectral accuracy
    for (const auto& od : orthogonal_directions(z))
        CHECK(directional_residual(b.u0, od) <= 1e-12 * E);
    // margin is amplitude-invariant
    const BlowupBuild b10 = build_blowup(g, z, 1.5, 64, 10.0);
    CHECK(b10.cert.margin == Catch::Approx(b.cert.margin).epsilon(1e-12));
    CHECK(b10.cert.E == Catch::Approx(10.0 * b.cert.E).epsilon(1e-12));
}

TEST_CASE("blow-up builder: oblique direction and d = 3") {
    const Grid g = Grid::uniform(2, 128, 1.0);
    const BlowupBuild b = build_blowup(g, DirectionSpec({1, 1}), 1.2);
    for (const auto& od : orthogonal_directions(DirectionSpec({1, 1})))
        CHECK(directional_residual(b.u0, od) <= 1e-11 * b.cert.E);

    const Grid g3 = Grid::uniform(3, 32, 1.0);
    const DirectionSpec z3({1, 0, 0});
    const BlowupBuild b3 = build_blowup_nd(g3, z3, 1.2);
    CHECK(b3.K == 2);  // transverse dimensions enter symmetrically
    CHECK(b3.cert.margin >= 1.2);
    for (const auto& od : orthogonal_directions(z3))
        CHECK(directional_residual(b3.u0, od) <= 1e-12 * b3.cert.E);
    CHECK_THROWS_AS(build_blowup_nd(Grid::uniform(2, 32, 1.0), DirectionSpec({1, 0}), 1.2),
                    std::invalid_argument);
}

TEST_CASE("w_series coefficients") {
    InflationSpec sp;
    sp.p = 2.0;
    sp.r = 2.0;
    sp.K_max = 64;
    const auto w = w_series(2, sp);
    CHECK(w[2] == Catch::Approx(-1.0 / (4.0 * std::pow(std::log(2.0), 2.0 / 3.0))).epsilon(1e-12));
    CHECK(w[2] == Catch::Approx(-0.31919).margin(1e-5));
    InflationSpec sp3 = sp;
    sp3.r = 3.0;
    const auto w3 = w_series(2, sp3);
    CHECK(w3[3] == Catch::Approx(-1.0 / (9.0 * std::sqrt(std::log(3.0)))).epsilon(1e-12));
    CHECK(w3[3] == Catch::Approx(-0.10601).margin(1e-5));
    // strictly decreasing magnitudes
    for (int k = 3; k < int(w.size()); k++) CHECK(std::abs(w[std::size_t(k)]) < std::abs(w[std::size_t(k - 1)]));
    CHECK_THROWS_AS(w_series(2, InflationSpec{0.5, 1.5, 2.0, 10, 64, 0}), std::invalid_argument);
}

TEST_CASE("w_series slope divergence follows the cube-root-log trend") {
    InflationSpec sp;
    sp.p = 2.0;  // p = d case
    sp.r = 2.0;
    sp.K_max = 1 << 12;
    const auto w = w_series(2, sp);
    // strictly decreasing partial slopes
    double prev = 0.0;
    for (int K = 4; K <= sp.K_max; K *= 2) {
        const double s = w_slope_partial(w, K);
        CHECK(s < prev);
        prev = s;
    }
    // fit the normalization of -3 (ln K)^(1/3) on the top decade, then check
    // the K >= 2^10 partial sums stay within 15 percent of the trend
    double num = 0.0, den = 0.0;
    for (int
             K = 1 << 9;
         K <= sp.K_max; K *= 2) {
        const double model = -3.0 * std::cbrt(std::log(double(K)));
        num += model * w_slope_partial(w, K);
        den += model * model;
    }
    const double alpha = num / den;
    for (int K = 1 << 10; K <= sp.K_max; K *= 2) {
        const double model = alpha * -3.0 * std::cbrt(std::log(double(K)));
        CHECK(std::abs(w_slope_partial(w, K) - model) <= 0.15 * std::abs(model));
    }
}

TEST_CASE("inflation data: norms, transverse component, slope trend") {
    const Grid g(2, {512, 8, 1}, {two_pi, two_pi, two_pi});
    InflationSpec sp;
    sp.epsilon = 0.5;
    sp.p = 2.0;
    sp.r = 2.0;
    sp.N = 10;
    sp.K_max = 1 << 12;
    const InflationBuild b = build_inflation(g, sp);

    // component 2 is exactly eps * f(x1) on the grid: a pure sine scaled
    // just inside the unit Besov ball
    const BesovParams params(2.0, 2.0, 2.0);
    std::vector<double> sine(2, 0.0);
    sine[1] = 1.0;
    const double f_amp = sp.epsilon * (1.0 - 1e-12) / besov_norm_axis_profile(sine, 2, params);
    for (int i1 = 0; i1 < 512; i1 += 37) {
        const double x1 = g.coord({i1, 0, 0})[0];
        CHECK(b.u0[1].at({i1, 3, 0}) == Catch::Approx(f_amp * std::sin(x1)).margin(1e-15));
        CHECK(b.u0[1].at({i1, 3, 0}) == b.u0[1].at({i1, 5, 0}));
    }
    // Besov norm of the seed stays within the ball
    CHECK(b.report.besov_u0 <= sp.epsilon * (1.0 + 1e-6));
    CHECK(b.report.certificate.has_value() == b.report.hypothesis_met);
    CHECK_FALSE(b.report.hypothesis_met);  // not reachable at desk scale

    // the slope at zero strictly decreases with the cutoff index while the
    // grid still resolves new blocks
    const Grid wide(2, {1 << 16, 8, 1}, {two_pi, two_pi, two_pi});
    InflationSpec sp2 = sp;
    sp2.K_max = 1 << 14;
    double prev = 0.0;
    for (int N = 4; N <= 12; N++) {
        sp2.N = N;
        const InflationBuild bn = build_inflation(wide, sp2);
        CHECK(bn.report.slope0 < prev);
        prev = bn.report.slope0;
    }

    CHECK_THROWS_AS(build_inflation(Grid::uniform(2, 64, 1.0), sp), std::invalid_argument);
}

TEST_CASE("peakon sampling and speed relation") {
    const Grid g = Grid::uniform(2, 64, 1.0);
    auto [u, pk] = build_peakon(g, 1.0, DirectionSpec({1, 0}), 0.0);
    CHECK(pk.C == Catch::Approx(std::cosh(0.5) / std::sinh(0.5)).epsilon(1e-14));
    CHECK(pk.C == Catch::Approx(2.16395).margin(1e-5));
    // all components identical bit for bit
    for (std::size_t q = 0; q < g.size(); q++) CHECK(u[0].values[q] == u[1].values[q]);
    // value on the crest plane a.x = 0
    CHECK(u[0].at({0, 5, 0}) == Catch::Approx(std::cosh(0.5) / std::sinh(0.5)).epsilon(1e-14));

    // oblique integer direction on a compatible torus
    const Grid g5 = Grid::uniform(2, 160, 5.0);
    auto [u5, pk5] = build_peakon(g5, 1.0, DirectionSpec({3, 4}), 0.0);
    CHECK(pk5.C == Catch::Approx(2.16395 * 1.4).margin(1e-4));
    CHECK(pk5.C == Catch::Approx(std::cosh(0.5) / std::sinh(0.5) * 1.4).epsilon(1e-12));
    // but not on the unit torus, where the profile cannot close up
    CHECK_THROWS_AS(build_peakon(g, 1.0, DirectionSpec({3, 4}), 0.0), std::invalid_argument);

    // mollification preserves the component identity and smooths the crest
    auto [um, pkm] = build_peakon(g, 1.0, DirectionSpec({1, 0}), 0.02);
    CHECK(pkm.sigma == 0.02);
    for (std::size_t q = 0; q < g.size(); q++) CHECK(um[0].values[q] == um[1].values[q]);
    CHECK(um[0].at({0, 0, 0}) < u[0].at({0, 0, 0}));
}
