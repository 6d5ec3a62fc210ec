#ifndef EPFLOW_CLI_HPP
#define EPFLOW_CLI_HPP

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "peakon.hpp"
#include "reduced.hpp"
#include "scenarios.hpp"

namespace epflow {

// exit codes of the dispatcher
enum CliExit {
    exit_ok = 0,
    exit_usage = 1,
    exit_config = 2,
    exit_blowup = 3,
    exit_numerical = 4,
};

namespace cli_detail {

inline Grid grid_from_config(const ConfigDoc& cfg) {
    const int d = int(cfg.get_int("grid.d"));
    std::vector<int> n = cfg.get_ivec("grid.n");
    if (n.size() == 1) n.assign(std::size_t(d), n[0]);
    if (int(n.size()) != d) throw ConfigError("grid.n must list one size per axis");
    const double L = cfg.get_real("grid.L", 1.0);
    std::array<int, 3> na{1, 1, 1};
    for (int a = 0; a < d; a++) na[std::size_t(a)] = n[std::size_t(a)];
    return Grid(d, na, {L, L, L});
}

inline SimConfig sim_from_config(const ConfigDoc& cfg, const Grid& g) {
    SimConfig sim;
    sim.grid = g;
    sim.t_end = cfg.get_real("sim.t_end");
    sim.cfl = cfg.get_real("sim.cfl", 0.25);
    sim.dt_min = cfg.get_real("sim.dt_min", 1e-8);
    sim.dt_max = cfg.get_real("sim.dt_max", std::numeric_limits<double>::infinity());
    sim.dealias = cfg.get_int("sim.dealias", 1) != 0;
    sim.detect_grad_factor = cfg.get_real("sim.detect_grad_factor", 50.0);
    sim.detect_tail_frac = cfg.get_real("sim.detect_tail_frac", 0.1);
    const std::string form = cfg.get_string("sim.rhs_form", "convective");
    if (form == "convective")
        sim.rhs_form = RhsForm::convective;
    else if (form == "flux")
        sim.rhs_form = RhsForm::flux;
    else
        throw ConfigError("sim.rhs_form must be 'convective' or 'flux'",
                          cfg.line_of("sim.rhs_form"));
    try {
        sim.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sim;
}

/// Deterministic smooth low-mode data for plain simulation runs.
inline VectorField modes_data(const Grid& g, std::uint64_t seed, int kmax, double amplitude) {
    peakon_detail::SplitMix64 rng(seed);
    VectorField u(g);
    for (int i = 0; i < g.dim(); i++) {
        struct Mode {
            std::array<int, 3> k;
            double c, s;
        };
        std::vector<Mode> modes;
        std::array<int, 3> k{0, 0, 0};
        const int k2 = g.dim() > 1 ? kmax : 0, k3 = g.dim() > 2 ? kmax : 0;
        for (k[0] = -kmax; k[0] <= kmax; k[0]++)
            for (k[1] = -k2; k[1] <= k2; k[1]++)
                for (k[2] = -k3; k[2] <= k3; k[2]++) {
                    if (k[0] == 0 && k[1] == 0 && k[2] == 0) continue;
                    double kk = 0;
                    for (int a = 0; a < g.dim(); a++) kk += double(k[std::size_t(a)]) * k[std::size_t(a)];
                    modes.push_back({k, rng.uniform() / (1.0 + kk), rng.uniform() / (1.0 + kk)});
                }
        u[i] = sample(g, [&](const Point& x) {
            double acc = 0.0;
            for (const auto& m : modes) {
                double theta = 0.0;
                for (int a = 0; a < g.dim(); a++)
                    theta += two_pi * m.k[std::size_t(a)] * x[std::size_t(a)] / g.length(a);
                acc += m.c * std::cos(theta) + m.s * std::sin(theta);
            }
            return amplitude * acc;
        });
    }
    return u;
}

struct ScenarioData {
    VectorField u0;
    std::optional<BlowupCertificate> cert;
    std::optional<DirectionSpec> direction;
    std::optional<InflationReport> inflation;
};

inline DirectionSpec direction_from(const ConfigDoc& cfg, int d) {
    if (cfg.has("scenario.direction")) return DirectionSpec(cfg.get_ivec("scenario.direction"));
    std::vector<int> z(std::size_t(d), 0);
    z[0] = 1;
    return DirectionSpec(z);
}

inline ScenarioData build_scenario(const ConfigDoc& cfg, const Grid& g) {
    const std::string kind = cfg.get_string("scenario.kind", "zero");
    ScenarioData out;
    if (kind == "zero") {
        out.u0 = VectorField(g);
    } else if (kind == "modes") {
        out.u0 = modes_data(g, std::uint64_t(cfg.get_int("scenario.seed", 1)),
                            int(cfg.get_int("scenario.modes", 2)),
                            cfg.get_real("scenario.amplitude", 0.2));
    } else if (kind == "blowup2d" || kind == "blowup_nd") {
        const DirectionSpec dir = direction_from(cfg, g.dim());
        const double margin = cfg.get_real("scenario.margin", 1.5);
        const int kmax = int(cfg.get_int("scenario.kmax", 64));
        const double amp = cfg.get_real("scenario.amplitude", 1.0);
        const BlowupBuild b = kind == "blowup2d" ? build_blowup(g, dir, margin, kmax, amp)
                                                 : build_blowup_nd(g, dir, margin, kmax, amp);
        out.u0 = b.u0;
        out.cert = b.cert;
        out.direction = dir;
    } else if (kind == "inflation") {
        InflationSpec spec;
        spec.epsilon = cfg.get_real("scenario.epsilon", 0.5);
        spec.p = cfg.get_real("scenario.p", 2.0);
        spec.r = cfg.get_real("scenario.r", 2.0);
        spec.N = int(cfg.get_int("scenario.N", 10));
        spec.K_max = int(cfg.get_int("scenario.series_kmax", 1 << 14));
        InflationBuild b = build_inflation(g, spec);
        out.u0 = b.u0;
        out.inflation = b.report;
        out.cert = b.report.certificate;
        out.direction = direction_from(cfg, g.dim());
    } else if (kind == "peakon") {
        const DirectionSpec dir = direction_from(cfg, g.dim());
        auto [u0, params] = build_peakon(g, cfg.get_real("scenario.M", 1.0), dir,
                                         cfg.get_real("scenario.sigma", 0.0));
        out.u0 = std::move(u0);
        (void)params;
    } else {
        throw ConfigError("unknown scenario.kind '" + kind + "'", cfg.line_of("scenario.kind"));
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
}

inline Point parse_point(const std::string& text, int d) {
    Point p{0.0, 0.0, 0.0};
    std::size_t start = 0;
    int idx = 0;
    for (std::size_t q = 0; q <= text.size(); q++) {
        if (q == text.size() || text[q] == ',') {
            double v = 0.0;
            if (!detail::parse_real_token(detail::trim(text.substr(start, q - start)), v))
                throw ConfigError("bad point component in '" + text + "'");
            if (idx >= d) throw ConfigError("too many point components in '" + text + "'");
            p[std::size_t(idx++)] = v;
            start = q + 1;
        }
    }
    if (idx != d) throw ConfigError("expected " + std::to_string(d) + " point components");
    return p;
}

// ---- subcommand bodies ------------------------------------------------------

inline int run_simulate(const std::string& config_path, const std::string& out_dir,
                        const std::string& init_path, bool with_trace,
                        const std::string& trace_x0) {
    namespace fs = std::filesystem;
    const ConfigDoc cfg = parse_config(read_file(config_path));
    const Grid g = grid_from_config(cfg);
    const SimConfig sim = sim_from_config(cfg, g);
    fs::create_directories(out_dir);

    ScenarioData sc;
    if (!init_path.empty()) {
        const SimState st = read_snapshot(init_path);
        if (st.m.grid != g) throw ConfigError("--init snapshot grid does not match the config");
        sc.u0 = st.u;
        if (cfg.has("scenario.direction"))
            sc.direction = DirectionSpec(cfg.get_ivec("scenario.direction"));
    } else {
        sc = build_scenario(cfg, g);
    }

    IntegrateOptions opts;
    if (sc.direction) {
        opts.monitor_dirs = orthogonal_directions(*sc.direction);
        opts.trace_x0 = Point{0.0, 0.0, 0.0};
        opts.trace_dir = *sc.direction;
    }
    if (with_trace) {
        if (!opts.trace_dir) opts.trace_dir = direction_from(cfg, g.dim());
        opts.trace_x0 = trace_x0.empty() ? Point{0.0, 0.0, 0.0} : parse_point(trace_x0, g.dim());
    }

    const long long every = cfg.get_int("output.snapshot_every", 0);
    const std::string prefix = cfg.get_string("output.snapshot_prefix", "snap");
    long long step_no = 0;
    if (every > 0) {
        opts.observers.push_back([&](const SimState& st, const SeriesRow&) {
            if (step_no % every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "%s_%06lld.snap", prefix.c_str(), step_no);
                write_snapshot(st, (fs::path(out_dir) / name).string());
            }
            step_no++;
        });
    }

    SimState final_state;
    opts.observers.push_back([&](const SimState& st, const SeriesRow&) { final_state = st; });

    const RunReport rep = integrate(sc.u0, sim, opts);
    write_series_csv(rep.series, (fs::path(out_dir) / cfg.get_string("output.series", "series.csv")).string());
    write_snapshot(final_state, (fs::path(out_dir) / "final.snap").string());
    if (rep.trace) write_trace_csv(*rep.trace, (fs::path(out_dir) / "trace.csv").string());

    std::printf("outcome: %s\n", to_string(rep.outcome));
    std::printf("reason: %s\n", to_string(rep.reason));
    std::printf("t_final: %s\n", format_g17(rep.t_final).c_str());
    std::printf("steps: %zu\n", rep.series.size() - 1);
    std::printf("cum_grad_integral: %s\n", format_g17(rep.cum_grad_integral).c_str());
    std::printf("final_sym_grad_linf: %s\n", format_g17(rep.final_sym_grad_linf).c_str());
    if (rep.outcome == RunOutcome::completed) return exit_ok;
    if (rep.outcome == RunOutcome::blowup_detected) return exit_blowup;
    return exit_numerical;
}

inline int run_scenario(const std::string& kind, int grid_n, int dim, double margin, double L,
                        double amplitude, int kmax, double epsilon, double p, double r, int N,
                        double M, double sigma, const std::vector<int>& zvec, double t_end_factor,
                        const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    ConfigDoc cfg;
    if (kind == "blowup2d") dim = 2;
    if (kind == "inflation" && L == 1.0) L = two_pi;
    cfg.set_int("grid.d", dim);
    cfg.set_ivec("grid.n", std::vector<int>(std::size_t(dim), grid_n));
    cfg.set_real("grid.L", L);
    cfg.set_string("scenario.kind", kind);
    std::vector<int> z = zvec;
    if (z.empty()) {
        z.assign(std::size_t(dim), 0);
        z[0] = 1;
    }
    cfg.set_ivec("scenario.direction", z);

    const Grid g = grid_from_config(cfg);
    if (kind == "blowup2d" || kind == "blowup_nd") {
        cfg.set_real("scenario.margin", margin);
        cfg.set_int("scenario.kmax", kmax);
        cfg.set_real("scenario.amplitude", amplitude);
    } else if (kind == "inflation") {
        cfg.set_real("scenario.epsilon", epsilon);
        cfg.set_real("scenario.p", p);
        cfg.set_real("scenario.r", r);
        cfg.set_int("scenario.N", N);
    } else if (kind == "peakon") {
        cfg.set_real("scenario.M", M);
        cfg.set_real("scenario.sigma", sigma);
    } else {
        throw ConfigError("unknown scenario kind '" + kind + "'");
    }

    const ScenarioData sc = build_scenario(cfg, g);

    double t_end = 0.25;
    if (sc.cert) t_end = t_end_factor * sc.cert->T_bound;
    cfg.set_real("sim.t_end", t_end);

    SimState st;
    st.t = 0.0;
    st.u = sc.u0;
    st.m = VectorField(g);
    for (int i = 0; i < g.dim(); i++) st.m[i] = helmholtz_apply(sc.u0[i]);
    write_snapshot(st, (fs::path(out_dir) / "init.snap").string());
    write_file((fs::path(out_dir) / "config.cfg").string(), emit_config(cfg));
    if (sc.cert)
        write_certificate(*sc.cert, (fs::path(out_dir) / "certificate.json").string());

    std::printf("kind: %s\n", kind.c_str());
    std::printf("grid: %d^%d, L = %s\n", grid_n, dim, format_g17(L).c_str());
    if (sc.cert) {
        std::printf("g0: %s\n", format_g17(sc.cert->g0).c_str());
        std::printf("E: %s\n", format_g17(sc.cert->E).c_str());
        std::printf("margin: %s\n", format_g17(sc.cert->margin).c_str());
        std::printf("T_bound: %s\n", format_g17(sc.cert->T_bound).c_str());
        std::printf("hypothesis: d_e(e.u0)(x0) < -sqrt(2)||u0||_H1 at x0 = 0\n");
    }
    if (sc.inflation) {
        std::printf("slope0: %s\n", format_g17(sc.inflation->slope0).c_str());
        std::printf("besov_u0: %s\n", format_g17(sc.inflation->besov_u0).c_str());
        std::printf("hypothesis_met: %s\n", sc.inflation->hypothesis_met ? "yes" : "no");
    }
    return exit_ok;
}

inline int run_besov(const std::string& snapshot_path, double s, double p, double r) {
    const SimState st = read_snapshot(snapshot_path);
    const BesovParams params(s, p, r);
    std::printf("besov s=%s p=%s r=%s of u = (1-Laplace)^-1 m\n", format_g17(s).c_str(),
                format_g17(p).c_str(), format_g17(r).c_str());
    double overall = 0.0;
    for (int i = 0; i < st.u.dim(); i++) {
        const std::vector<double> blocks = block_lp_norms(st.u[i], params.p);
        std::printf("component u%d blocks:", i + 1);
        for (int j = -1; j < int(blocks.size()) - 1; j++)
            std::printf(" j=%d:%s", j, format_g17(blocks[std::size_t(j + 1)]).c_str());
        const double norm = besov_norm(st.u[i], params);
        overall = std::max(overall, norm);
        std::printf("\ncomponent u%d norm: %s\n", i + 1, format_g17(norm).c_str());
    }
    std::printf("besov_norm: %s\n", format_g17(overall).c_str());
    return exit_ok;
}

inline int run_peakon_check(double M, const std::vector<int>& z, double T, int seeds,
                            const std::vector<int>& cells, bool literal, int jobs) {
    if (cells.size() != 3) throw ConfigError("--cells needs three comma-separated sizes");
    const DirectionSpec dir(z);
    const PeakonParams good = make_peakon_params(M, dir);
    PeakonParams wrong = good;
    wrong.C = good.C / 2.0;
    WeakFormOptions opts;
    opts.literal_transport = literal;

    struct Row {
        ResidualStudy exact, control;
    };
    std::vector<Row> rows{std::size_t(seeds), Row{}};
    std::vector<std::thread> pool;
    const int nthreads = std::max(1, jobs);
    for (int w = 0; w < nthreads; w++) {
        pool.emplace_back([&, w]() {
            for (int sidx = w; sidx < seeds; sidx += nthreads) {
                const TestField tf = make_test_field(std::uint64_t(sidx + 1), T, dir.d);
                rows[std::size_t(sidx)].exact = residual_study(
                    good, tf, {cells[0], cells[1], cells[2]}, opts);
                rows[std::size_t(sidx)].control = residual_study(
                    wrong, tf, {cells[0], cells[1], cells[2]}, opts);
            }
        });
    }
    for (auto& th : pool) th.join();

    std::printf("peakon weak-form check: M = %s, z = (", format_g17(M).c_str());
    for (int a = 0; a < dir.d; a++) std::printf("%s%d", a ? "," : "", dir.z[std::size_t(a)]);
    std::printf("), C = %s, T = %s\n", format_g17(good.C).c_str(), format_g17(T).c_str());
    std::printf("seed  exact_extrap/scale  order  control_extrap/scale\n");
    int exact_ok = 0, control_ok = 0;
    for (int sidx = 0; sidx < seeds; sidx++) {
        const auto& rw = rows[std::size_t(sidx)];
        const double re = rw.exact.extrapolated / rw.exact.scale;
        const double rc = rw.control.extrapolated / rw.control.scale;
        const bool eok = re <= 1e-6, cok = rc >= 1e-2;
        exact_ok += eok;
        control_ok += cok;
        std::printf("%4d  %.6e %s  %5.2f  %.6e %s\n", sidx + 1, re, eok ? "ok" : "HIGH",
                    rw.exact.order, rc, cok ? "ok" : "LOW");
    }
    const bool verdict = exact_ok == seeds && control_ok >= seeds - 1;
    std::printf("verdict: exact %d/%d within 1e-6, wrong-speed control %d/%d above 1e-2 -> %s\n",
                exact_ok, seeds, control_ok, seeds, verdict ? "pass" : "fail");
    return verdict ? exit_ok : exit_numerical;
}

}  // namespace cli_detail

/// Experiment dispatcher. Exit codes: 0 completed, 1 usage error, 2 config
/// error, 3 blow-up detected (reports written), 4 numerical failure.
inline int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"pseudospectral Euler-Poincare simulator on the torus"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "integrate a configured run");
    std::string sim_config, sim_out, sim_init;
    sim->add_option("--config", sim_config, "config file")->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--init", sim_init, "start from a snapshot instead of scenario data");

    // scenario
    auto* scn = app.add_subcommand("scenario", "emit config + initial snapshot + certificate");
    std::string scn_kind, scn_out;
    int scn_grid = 128, scn_dim = 2, scn_kmax = 64, scn_N = 10;
    double scn_margin = 1.5, scn_L = 1.0, scn_amp = 1.0, scn_eps = 0.5, scn_p = 2.0, scn_r = 2.0;
    double scn_M = 1.0, scn_sigma = 0.0, scn_tf = 1.5;
    std::vector<int> scn_z;
    scn->add_option("kind", scn_kind, "blowup2d | blowup_nd | inflation | peakon")->required();
    scn->add_option("--out", scn_out, "output directory")->required();
    scn->add_option("--grid", scn_grid, "points per axis");
    scn->add_option("--dim", scn_dim, "dimension (blowup_nd, peakon)");
    scn->add_option("--margin", scn_margin, "target blow-up margin");
    scn->add_option("--L", scn_L, "period per axis");
    scn->add_option("--amplitude", scn_amp, "profile amplitude");
    scn->add_option("--kmax", scn_kmax, "profile mode budget");
    scn->add_option("--epsilon", scn_eps, "inflation epsilon");
    scn->add_option("--p", scn_p, "inflation p");
    scn->add_option("--r", scn_r, "inflation r");
    scn->add_option("--N", scn_N, "inflation cutoff index");
    scn->add_option("--M", scn_M, "peakon amplitude");
    scn->add_option("--sigma", scn_sigma, "peakon mollification width");
    scn->add_option("--direction", scn_z, "integer direction vector");
    scn->add_option("--t-end-factor", scn_tf, "t_end as a multiple of T_bound");

    // besov
    auto* bsv = app.add_subcommand("besov", "block norms and Besov norm of a snapshot");
    std::string bsv_snap;
    double bsv_s = 1.0, bsv_p = std::numeric_limits<double>::infinity(),
           bsv_r = std::numeric_limits<double>::infinity();
    bsv->add_option("--snapshot", bsv_snap, "snapshot file")->required();
    bsv->add_option("--s", bsv_s, "regularity");
    bsv->add_option("--p", bsv_p, "integrability");
    bsv->add_option("--r", bsv_r, "summability");

    // peakon-check
    auto* pkc = app.add_subcommand("peakon-check", "weak-form residual verdicts");
    double pkc_M = 1.0, pkc_T = 0.2;
    int pkc_seeds = 5, pkc_jobs = 1;
    std::vector<int> pkc_z{1, 0}, pkc_cells{8, 16, 32};
    bool pkc_literal = false;
    pkc->add_option("--M", pkc_M, "amplitude");
    pkc->add_option("--z", pkc_z, "integer direction")->delimiter(',');
    pkc->add_option("--T", pkc_T, "test-field horizon");
    pkc->add_option("--seeds", pkc_seeds, "number of seeded test fields");
    pkc->add_option("--cells", pkc_cells, "three cell counts")->delimiter(',');
    pkc->add_flag("--literal-transport", pkc_literal,
                  "use the first-derivative transport variant");
    pkc->add_option("--jobs", pkc_jobs, "parallel residual evaluations");

    // trace
    auto* trc = app.add_subcommand("trace", "simulate with a characteristic trace");
    std::string trc_config, trc_out, trc_x0;
    trc->add_option("--config", trc_config, "config file")->required();
    trc->add_option("--out", trc_out, "output directory")->required();
    trc->add_option("--x0", trc_x0, "trace start point, comma separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? exit_ok : exit_usage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_usage;
    }

    try {
        if (sim->parsed())
            return cli_detail::run_simulate(sim_config, sim_out, sim_init, false, "");
        if (scn->parsed())
            return cli_detail::run_scenario(scn_kind, scn_grid, scn_dim, scn_margin, scn_L,
                                            scn_amp, scn_kmax, scn_eps, scn_p, scn_r, scn_N,
                                            scn_M, scn_sigma, scn_z, scn_tf, scn_out);
        if (bsv->parsed()) return cli_detail::run_besov(bsv_snap, bsv_s, bsv_p, bsv_r);
        if (pkc->parsed())
            return cli_detail::run_peakon_check(pkc_M, pkc_z, pkc_T, pkc_seeds, pkc_cells,
                                                pkc_literal, pkc_jobs);
        if (trc->parsed()) return cli_detail::run_simulate(trc_config, trc_out, "", true, trc_x0);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return exit_config;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return exit_config;
    } catch (const MarginUnreachableError& e) {
        std::fprintf(stderr, "scenario error: %s\n", e.what());
        return exit_config;
    } catch (const InvalidHypothesisError& e) {
        std::fprintf(stderr, "scenario error: %s\n", e.what());
        return exit_config;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return exit_numerical;
    }
    return exit_usage;
}

}  // namespace epflow

#endif
