#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "epflow/cli.hpp"
#include "epflow/config.hpp"
#include "epflow/io.hpp"
#include "test_util.hpp"

using namespace epflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int dispatch(std::initializer_list<const char*> args) {
    std::vector<const char*> argv{"epflow"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli_dispatch(int(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config: parse and canonical emit") {
    const std::string text =
        "# grid section\n"
        "grid.n = 64,64\n"
        "grid.d = 2   # two dimensions\n"
        "\n"
        "sim.t_end = 0.5\n"
        "sim.rhs_form = convective\n";
    const ConfigDoc doc = parse_config(text);
    CHECK(doc.get_int("grid.d") == 2);
    CHECK(doc.get_ivec("grid.n") == std::vector<int>{64, 64});
    CHECK(doc.get_real("sim.t_end") == 0.5);
    CHECK(doc.get_string("sim.rhs_form") == "convective");
    CHECK(doc.get_real("sim.cfl", 0.25) == 0.25);

    const std::string canon = emit_config(doc);
    CHECK(emit_config(parse_config(canon)) == canon);  // byte-identical re-emit
    // full-precision reals survive the round trip
    ConfigDoc d2;
    d2.set_real("sim.t_end", 0.1234567890123456789);
    const ConfigDoc back = parse_config(emit_config(d2));
    CHECK(back.get_real("sim.t_end") == d2.get_real("sim.t_end"));
}

TEST_CASE("config: errors carry line numbers") {
    try {
        parse_config("grid.d = 2\nsim.cfl = fast\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 2);
    }
    try {
        parse_config("grid.d = 2\n\nnot.a.key = 1\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_config("grid.d 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.d = 2\ngrid.d = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("grid.n = 64,,64\n"), ConfigError);
    // missing required key surfaces on access
    const ConfigDoc doc = parse_config("grid.d = 2\n");
    CHECK_THROWS_AS(doc.get_real("sim.t_end"), ConfigError);
}

TEST_CASE("snapshot: bit-exact round trip") {
    const auto dir = test_util::scratch_dir("snap");
    const Grid g = Grid::uniform(2, 16, 1.0);
    SimState st;
    st.t = 0.3125;
    st.m = test_util::random_band_limited_vec(g, 5, 6);
    st.u = velocity_of(st.m);
    const auto path = (dir / "state.snap").string();
    write_snapshot(st, path);
    const SimState back = read_snapshot(path);
    CHECK(back.t == st.t);
    for (int i = 0; i < 2; i++)
        for (std::size_t q = 0; q < g.size(); q++)
            CHECK(back.m[i].values[q] == st.m[i].values[q]);
    // the derived velocity satisfies the momentum relation
    CHECK(test_util::max_abs_diff(back.u, velocity_of(st.m)) == 0.0);

    // header arithmetic: payload is d * prod(n) doubles
    const std::string raw = slurp(path);
    const std::size_t header_len = raw.find('\n') + 1;
    CHECK(raw.size() - header_len == 2 * 16 * 16 * sizeof(double));

    // truncation is detected
    std::ofstream trunc(dir / "trunc.snap", std::ios::binary);
    trunc.write(raw.data(), std::streamsize(raw.size() - 9));
    trunc.close();
    CHECK_THROWS_AS(read_snapshot((dir / "trunc.snap").string()), FormatError);
    CHECK_THROWS_AS(read_snapshot((dir / "missing.snap").string()), IoError);
    std::ofstream bad(dir / "bad.snap", std::ios::binary);
    bad << "not json\n";
    bad.close();
    CHECK_THROWS_AS(read_snapshot((dir / "bad.snap").string()), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("series csv round trip at full precision") {
    std::vector<SeriesRow> rows(3);
    test_util::Rng rng(8);
    double t = 0.0;
    for (auto& r : rows) {
        t += 0.1 + 0.01 * rng.uniform(0.0, 1.0);
        r.t = t;
        r.dt = rng.uniform(0.0, 1.0);
        r.H = rng.uniform(0.0, 10.0);
        r.grad_linf = rng.uniform(0.0, 100.0);
        r.besov_1_inf_inf = rng.uniform(0.0, 5.0);
        r.dir_residual = rng.uniform(0.0, 1e-9);
        r.g_char = rng.uniform(-50.0, 0.0);
        r.tail_frac = rng.uniform(0.0, 1.0);
        r.cum_grad_integral = rng.uniform(0.0, 3.0);
    }
    const std::string csv = series_to_csv(rows);
    const std::vector<SeriesRow> back = parse_series_csv(csv);
    REQUIRE(back.size() == rows.size());
    for (std::size_t q = 0; q < rows.size(); q++) {
        CHECK(back[q].t == rows[q].t);
        CHECK(back[q].H == rows[q].H);
        CHECK(back[q].g_char == rows[q].g_char);
        CHECK(back[q].cum_grad_integral == rows[q].cum_grad_integral);
    }
    CHECK(series_to_csv(back) == csv);
}

TEST_CASE("certificate json round trip") {
    BlowupCertificate c;
    c.g0 = -18.849555921538887;
    c.E = 7.7393915757048832;
    c.T_bound = 0.1212327384089727;
    c.margin = 1.7221830274508692;
    c.direction = DirectionSpec({1, 0});
    const BlowupCertificate back = certificate_from_json(certificate_to_json(c));
    CHECK(back.g0 == c.g0);
    CHECK(back.E == c.E);
    CHECK(back.T_bound == c.T_bound);
    CHECK(back.margin == c.margin);
    CHECK(back.direction.z == c.direction.z);
}

TEST_CASE("cli: zero-data simulate completes with exit 0") {
    const auto dir = test_util::scratch_dir("cli0");
    const std::string cfg =
        "grid.d = 2\ngrid.n = 16,16\ngrid.L = 1\nsim.t_end = 0.05\nscenario.kind = zero\n";
    std::ofstream(dir / "c.cfg") << cfg;
    CHECK(dispatch({"simulate", "--config", (dir / "c.cfg").c_str(), "--out",
                    (dir / "out").c_str()}) == 0);
    const auto series = read_series_csv((dir / "out" / "series.csv").string());
    CHECK(series.size() >= 2);
    for (const auto& r : series) CHECK(r.H == 0.0);
    fs::remove_all(dir);
}

TEST_CASE("cli: scenario then simulate detects blow-up with exit 3") {
    const auto dir = test_util::scratch_dir("cli3");
    CHECK(dispatch({"scenario", "blowup2d", "--margin", "1.5", "--grid", "64", "--out",
                    dir.c_str()}) == 0);
    REQUIRE(fs::exists(dir / "certificate.json"));
    REQUIRE(fs::exists(dir / "init.snap"));
    const BlowupCertificate cert = read_certificate((dir / "certificate.json").string());
    CHECK(cert.margin >= 1.5);
    // the stored initial snapshot re-validates the certificate
    const SimState init = read_snapshot((dir / "init.snap").string());
    const double g0 = directional_slope_field(init.u, cert.direction).values[0];
    const double E = h1_norm(init.u);
    CHECK(g0 == Catch::Approx(cert.g0).epsilon(1e-10));
    CHECK(E == Catch::Approx(cert.E).epsilon(1e-10));

    CHECK(dispatch({"simulate", "--config", (dir / "config.cfg").c_str(), "--out",
                    (dir / "run").c_str()}) == 3);
    const auto series = read_series_csv((dir / "run" / "series.csv").string());
    CHECK(series.back().t <= cert.T_bound);
    REQUIRE(fs::exists(dir / "run" / "trace.csv"));
    fs::remove_all(dir);
}

TEST_CASE("cli: usage and config errors") {
    CHECK(dispatch({"frobnicate"}) == 1);
    CHECK(dispatch({}) == 1);
    const auto dir = test_util::scratch_dir("clierr");
    std::ofstream(dir / "bad.cfg") << "grid.d = 2\ngrid.n = 16,16\nsim.cfl = fast\n";
    CHECK(dispatch({"simulate", "--config", (dir / "bad.cfg").c_str(), "--out",
                    (dir / "out").c_str()}) == 2);
    std::ofstream(dir / "miss.cfg") << "grid.d = 2\ngrid.n = 16,16\nscenario.kind = zero\n";
    CHECK(dispatch({"simulate", "--config", (dir / "miss.cfg").c_str(), "--out",
                    (dir / "out").c_str()}) == 2);  // sim.t_end missing
    fs::remove_all(dir);
}

TEST_CASE("cli: determinism of artifacts") {
    const auto dir = test_util::scratch_dir("clidet");
    for (const char* run : {"a", "b"}) {
        CHECK(dispatch({"scenario", "blowup2d", "--margin", "1.2", "--grid", "32", "--out",
                        (dir / run).c_str()}) == 0);
        CHECK(dispatch({"simulate", "--config", (dir / run / "config.cfg").c_str(), "--out",
                        (dir / run / "out").c_str()}) == 3);
    }
    for (const char* f : {"config.cfg", "init.snap", "certificate.json"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    for (const char* f : {"series.csv", "final.snap", "trace.csv"})
        CHECK(slurp(dir / "a" / "out" / f) == slurp(dir / "b" / "out" / f));
    fs::remove_all(dir);
}

TEST_CASE("cli: peakon-check verdict") {
    // small and fast: 2 seeds, coarse cells
    CHECK(dispatch({"peakon-check", "--seeds", "2", "--cells", "8,16,32", "--T", "0.2"}) == 0);
}
