#include <catch_amalgamated.hpp>

#include "epflow/spectral.hpp"
#include "test_util.hpp"

using namespace epflow;
using test_util::max_abs_diff;
using test_util::random_band_limited;

namespace {
const double inf = std::numeric_limits<double>::infinity();
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(2, {7, 8, 1}, {1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(2, {6, 8, 1}, {1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(2, {8, 8, 1}, {0.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(4, {8, 8, 8}, {1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Grid(3, {4096, 4096, 4096}, {1.0, 1.0, 1.0}), std::invalid_argument);
    const Grid g = Grid::uniform(2, 16, 2.0);
    CHECK(g.size() == 256);
    CHECK(g.cell_volume() == Catch::Approx(0.015625));
    CHECK(g.volume() == Catch::Approx(4.0));
}

TEST_CASE("grad: single-mode derivatives") {
    const Grid g = Grid::uniform(2, 32, 1.0);
    const ScalarField f = sample(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    const ScalarField df = grad(f, 0);
    const ScalarField expect =
        sample(g, [](const Point& x) { return two_pi * std::cos(two_pi * x[0]); });
    CHECK(max_abs_diff(df, expect) < 1e-11);

    const ScalarField c(g, 4.2);
    const ScalarField dc = grad(c, 0);
    for (double v : dc.values) CHECK(v == 0.0);  // exactly zero

    const Grid g2 = Grid::uniform(2, 32, two_pi);
    const ScalarField h = sample(g2, [](const Point& x) { return std::sin(x[0] + x[1]); });
    const ScalarField expect2 = sample(g2, [](const Point& x) { return std::cos(x[0] + x[1]); });
    CHECK(max_abs_diff(grad(h, 0), expect2) < 1e-12);
    CHECK(max_abs_diff(grad(h, 1), expect2) < 1e-12);
}

TEST_CASE("helmholtz: multiplier and inverse") {
    const Grid g = Grid::uniform(2, 32, two_pi);
    const ScalarField c(g, 3.25);
    CHECK(max_abs_diff(helmholtz_apply(c), c) < 1e-13);
    CHECK(max_abs_diff(helmholtz_invert(c), c) < 1e-13);

    const ScalarField f = sample(g, [](const Point& x) { return std::sin(x[0]); });
    ScalarField two_f = f;
    for (auto& v : two_f.values) v *= 2.0;
    CHECK(max_abs_diff(helmholtz_apply(f), two_f) < 1e-12);
    CHECK(max_abs_diff(helmholtz_invert(two_f), f) < 1e-13);

    const Grid gu = Grid::uniform(1, 64, 1.0);
    const ScalarField s = sample(gu, [](const Point& x) { return std::sin(two_pi * x[0]); });
    const double factor = helmholtz_apply(s).values[5] / s.values[5];
    CHECK(factor == Catch::Approx(1.0 + two_pi * two_pi).epsilon(1e-12));

    const ScalarField r = random_band_limited(Grid::uniform(2, 32, 1.0), 11, 10);
    const ScalarField round = helmholtz_invert(helmholtz_apply(r));
    CHECK(max_abs_diff(round, r) < 1e-12 * lp_norm(r, inf));
}

TEST_CASE("helmholtz strictly increases the L2 norm of nonconstant fields") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const ScalarField r = random_band_limited(Grid::uniform(2, 32, 1.0), seed, 9);
        CHECK(l2_norm(helmholtz_apply(r)) > l2_norm(r));
    }
}

TEST_CASE("grad and helmholtz commute on band-limited fields") {
    const Grid g = Grid::uniform(2, 32, 1.0);
    for (std::uint64_t seed : {3, 7}) {
        const ScalarField r = random_band_limited(g, seed, 9);
        const ScalarField a = grad(helmholtz_apply(r), 0);
        const ScalarField b = helmholtz_apply(grad(r, 0));
        CHECK(max_abs_diff(a, b) < 1e-10 * std::max(1.0, lp_norm(a, inf)));
    }
}

TEST_CASE("dealias: 2/3 mask") {
    const Grid g = Grid::uniform(1, 32, two_pi);
    // modes <= n/3 pass untouched
    const ScalarField low = sample(g, [](const Point& x) { return std::sin(8.0 * x[0]); });
    CHECK(max_abs_diff(dealias(low), low) < 1e-13);
    // Nyquist dies
    const ScalarField nyq = sample(g, [](const Point& x) { return std::cos(16.0 * x[0]); });
    CHECK(lp_norm(dealias(nyq), inf) < 1e-13);
    // mask is idempotent bitwise on the spectrum, to roundoff on samples
    const ScalarField r = random_band_limited(Grid::uniform(2, 32, 1.0), 5, 15);
    Spectrum s = fft_forward(r);
    dealias_in_place(s);
    Spectrum s2 = s;
    dealias_in_place(s2);
    for (std::size_t q = 0; q < s.c.size(); q++) CHECK(s.c[q] == s2.c[q]);
    const ScalarField d1 = dealias(r);
    const ScalarField d2 = dealias(d1);
    CHECK(max_abs_diff(d1, d2) < 1e-14);
}

TEST_CASE("lp_norm examples") {
    const Grid g = Grid::uniform(2, 64, 1.0);
    const ScalarField f = sample(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    CHECK(lp_norm(f, 2.0) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(lp_norm(f, inf) == Catch::Approx(1.0).epsilon(1e-12));
    // analytic oracle: int sin^4 over the unit torus = 3/8
    CHECK(lp_norm(f, 4.0) == Catch::Approx(std::pow(3.0 / 8.0, 0.25)).epsilon(1e-12));
    // |sin| has kinks, so the equal-weight quadrature is only second order
    CHECK(lp_norm(f, 1.0) == Catch::Approx(2.0 / M_PI).epsilon(1e-3));
    const ScalarField pos =
        sample(g, [](const Point& x) { return 1.0 + 0.5 * std::sin(two_pi * x[0]); });
    CHECK(lp_norm(pos, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(lp_norm(f, 0.5), std::invalid_argument);
}

TEST_CASE("parseval") {
    for (std::uint64_t seed : {1, 2, 3}) {
        const Grid g = Grid::uniform(2, 32, 1.5);
        const ScalarField r = random_band_limited(g, seed, 10);
        const double phys = lp_norm(r, 2.0);
        const double spec = std::sqrt(spectral_l2_squared(fft_forward(r)));
        CHECK(std::abs(phys * phys - spec * spec) <= 1e-10 * phys * phys);
    }
}

TEST_CASE("eval_at: trigonometric interpolation") {
    const Grid g = Grid::uniform(2, 32, 1.0);
    const ScalarField f = sample(g, [](const Point& x) { return std::sin(two_pi * x[0]); });
    CHECK(eval_at(f, {0.25, 0.0, 0.0}) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(eval_at(f, {std::nan(""), 0.0, 0.0}), std::invalid_argument);

    // grid nodes reproduce stored samples
    const ScalarField r = random_band_limited(g, 9, 10);
    const TrigInterpolant ti(r);
    double worst = 0.0;
    for_each_index(g, [&](std::size_t flat, int i1, int i2, int i3) {
        worst = std::max(worst, std::abs(ti(g.coord({i1, i2, i3})) - r.values[flat]));
    });
    CHECK(worst < 1e-12 * std::max(1.0, lp_norm(r, inf)));

    // doubled-resolution resampling agrees off-grid
    const Grid fine = Grid::uniform(2, 64, 1.0);
    ScalarField rf(fine);
    for_each_index(fine, [&](std::size_t flat, int i1, int i2, int i3) {
        rf.values[flat] = ti(fine.coord({i1, i2, i3}));
    });
    const TrigInterpolant tif(rf);
    test_util::Rng rng(21);
    double emax = 0.0;
    for (int q = 0; q < 100; q++) {
        const Point x{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.0};
        emax = std::max(emax, std::abs(ti(x) - tif(x)));
    }
    CHECK(emax < 1e-10);
}

TEST_CASE("eval_at handles d = 1 and d = 3") {
    const Grid g1 = Grid::uniform(1, 16, 1.0);
    const ScalarField f1 = sample(g1, [](const Point& x) { return std::cos(two_pi * 3.0 * x[0]); });
    CHECK(eval_at(f1, {1.0 / 12.0, 0.0, 0.0}) == Catch::Approx(std::cos(M_PI / 2.0)).margin(1e-12));
    const Grid g3 = Grid::uniform(3, 16, 1.0);
    const ScalarField f3 = random_band_limited(g3, 4, 5);
    const TrigInterpolant t3(f3);
    CHECK(t3(g3.coord({3, 5, 7})) == Catch::Approx(f3.at({3, 5, 7})).margin(1e-11));
}
