#ifndef EPFLOW_DYNAMICS_HPP
#define EPFLOW_DYNAMICS_HPP

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "besov.hpp"
#include "diagnostics.hpp"
#include "spectral.hpp"

namespace epflow {

enum class RhsForm { convective, flux };

struct SimConfig {
    Grid grid;
    double t_end = 0.0;
    double cfl = 0.25;
    double dt_min = 1e-8;
    double dt_max = std::numeric_limits<double>::infinity();
    bool dealias = true;
    double detect_grad_factor = 50.0;
    double detect_tail_frac = 0.1;
    RhsForm rhs_form = RhsForm::convective;

    void validate() const {
        if (!(t_end >= 0.0)) throw std::invalid_argument("SimConfig: t_end must be >= 0");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw std::invalid_argument("SimConfig: cfl in (0,1]");
        if (!(dt_min > 0.0 && dt_min <= dt_max))
            throw std::invalid_argument("SimConfig: need 0 < dt_min <= dt_max");
        if (!(detect_grad_factor > 1.0))
            throw std::invalid_argument("SimConfig: detect_grad_factor must exceed 1");
        if (!(detect_tail_frac > 0.0 && detect_tail_frac < 1.0))
            throw std::invalid_argument("SimConfig: detect_tail_frac in (0,1)");
    }
};

/// Momentum is the prognostic variable; velocity is derived per stage.
struct SimState {
    double t = 0.0;
    VectorField m;
    VectorField u;
};

enum class RunOutcome { completed, blowup_detected, numerical_failure };
enum class HaltReason { none, grad_threshold, dt_floor, spectral_tail, nan };

inline const char* to_string(RunOutcome o) {
    switch (o) {
        case RunOutcome::completed: return "completed";
        case RunOutcome::blowup_detected: return "blowup_detected";
        default: return "numerical_failure";
    }
}
inline const char* to_string(HaltReason r) {
    switch (r) {
        case HaltReason::none: return "none";
        case HaltReason::grad_threshold: return "grad_threshold";
        case HaltReason::dt_floor: return "dt_floor";
        case HaltReason::spectral_tail: return "spectral_tail";
        default: return "nan";
    }
}

struct SeriesRow {
    double t = 0.0;
    double dt = 0.0;
    double H = 0.0;
    double grad_linf = 0.0;
    double besov_1_inf_inf = 0.0;
    double dir_residual = 0.0;
    double g_char = 0.0;
    double tail_frac = 0.0;
    double cum_grad_integral = 0.0;
};

struct RunReport {
    RunOutcome outcome = RunOutcome::completed;
    HaltReason reason = HaltReason::none;
    double t_final = 0.0;
    std::vector<SeriesRow> series;
    double cum_grad_integral = 0.0;
    double final_sym_grad_linf = 0.0;
    std::optional<CharTrace> trace;
};

// ---- right-hand sides ------------------------------------------------------

inline VectorField velocity_of(const VectorField& m) {
    VectorField u(m.grid);
    for (int i = 0; i < m.dim(); i++) {
        Spectrum s = fft_forward(m[i]);
        helmholtz_invert_in_place(s);
        u[i] = fft_inverse(s);
    }
    return u;
}

namespace detail {

struct StageData {
    VectorField m;
    VectorField u;
    std::vector<Spectrum> sm;
    std::vector<Spectrum> su;
};

inline StageData make_stage(VectorField m_phys) {
    StageData st;
    const int d = m_phys.dim();
    st.sm.reserve(std::size_t(d));
    st.su.reserve(std::size_t(d));
    st.u = VectorField(m_phys.grid);
    for (int i = 0; i < d; i++) {
        st.sm.push_back(fft_forward(m_phys[i]));
        Spectrum su = st.sm.back();
        helmholtz_invert_in_place(su);
        st.u[i] = fft_inverse(su);
        st.su.push_back(std::move(su));
    }
    st.m = std::move(m_phys);
    return st;
}

inline ScalarField derivative_field(const Spectrum& s, int axis) {
    Spectrum ds = s;
    grad_in_place(ds, axis);
    return fft_inverse(ds);
}

inline ScalarField maybe_dealias(ScalarField f, bool on) {
    if (!on) return f;
    Spectrum s = fft_forward(f);
    dealias_in_place(s);
    return fft_inverse(s);
}

/// Convective form of (the momentum equation):
/// dm^i/dt = -[ sum_j u^j d_j m^i + sum_j m^j d_i u^j + m^i div u ].
inline VectorField rhs_convective_stage(const StageData& st, bool dealias_on) {
    const Grid& g = st.m.grid;
    const int d = g.dim();
    const std::size_t n = g.size();

    // du[i][j] = d_i u^j
    const std::size_t nd = std::size_t(d);
    std::vector<std::vector<ScalarField>> du(nd, std::vector<ScalarField>(nd));
    for (int j = 0; j < d; j++)
        for (int i = 0; i < d; i++) du[std::size_t(i)][std::size_t(j)] = derivative_field(st.su[std::size_t(j)], i);

    std::vector<double> divu(n, 0.0);
    for (int j = 0; j < d; j++) {
        const auto& v = du[std::size_t(j)][std::size_t(j)].values;
        for (std::size_t q = 0; q < n; q++) divu[q] += v[q];
    }

    VectorField out(g);
    for (int i = 0; i < d; i++) {
        std::vector<double> acc(n, 0.0);
        for (int j = 0; j < d; j++) {
            const ScalarField dmj = derivative_field(st.sm[std::size_t(i)], j);
            const auto& uj = st.u[j].values;
            const auto& mj = st.m[j].values;
            const auto& duij = du[std::size_t(i)][std::size_t(j)].values;
            for (std::size_t q = 0; q < n; q++)
                acc[q] += uj[q] * dmj.values[q] + mj[q] * duij[q];
        }
        const auto& mi = st.m[i].values;
        for (std::size_t q = 0; q < n; q++) acc[q] = -(acc[q] + mi[q] * divu[q]);
        ScalarField f(g);
        f.values = std::move(acc);
        out[i] = maybe_dealias(std::move(f), dealias_on);
    }
    return out;
}

/// Flux form dm^i/dt = -sum_j d_j T^{ij} with
/// T^{ij} = m^i u^j + delta_ij |u|^2/2 - d_i u . d_j u + delta_ij |grad u|^2/2.
inline VectorField rhs_flux_stage(const StageData& st, bool dealias_on) {
    const Grid& g = st.m.grid;
    const int d = g.dim();
    const std::size_t n = g.size();

    const std::size_t nd = std::size_t(d);
    std::vector<std::vector<ScalarField>> du(nd, std::vector<ScalarField>(nd));
    for (int j = 0; j < d; j++)
        for (int i = 0; i < d; i++) du[std::size_t(i)][std::size_t(j)] = derivative_field(st.su[std::size_t(j)], i);

    std::vector<double> half_usq_plus_gradsq(n, 0.0);
    for (int j = 0; j < d; j++) {
        const auto& uj = st.u[j].values;
        for (std::size_t q = 0; q < n; q++) half_usq_plus_gradsq[q] += uj[q] * uj[q];
        for (int i = 0; i < d; i++) {
            const auto& dv = du[std::size_t(i)][std::size_t(j)].values;
            for (std::size_t q = 0; q < n; q++) half_usq_plus_gradsq[q] += dv[q] * dv[q];
        }
    }
    for (std::size_t q = 0; q < n; q++) half_usq_plus_gradsq[q] *= 0.5;

    VectorField out(g);
    for (int i = 0; i < d; i++) {
        Spectrum acc = st.sm[std::size_t(i)];  // borrow layout
        for (auto& c : acc.c) c = 0.0;
        for (int j = 0; j < d; j++) {
            ScalarField T(g);
            const auto& mi = st.m[i].values;
            const auto& uj = st.u[j].values;
            for (std::size_t q = 0; q < n; q++) T.values[q] = mi[q] * uj[q];
            for (int k = 0; k < d; k++) {
                const auto& a = du[std::size_t(i)][std::size_t(k)].values;
                const auto& b = du[std::size_t(j)][std::size_t(k)].values;
                for (std::size_t q = 0; q < n; q++) T.values[q] -= a[q] * b[q];
            }
            if (i == j)
                for (std::size_t q = 0; q < n; q++) T.values[q] += half_usq_plus_gradsq[q];
            Spectrum sT = fft_forward(T);
            grad_in_place(sT, j);
            for (std::size_t q = 0; q < acc.c.size(); q++) acc.c[q] += sT.c[q];
        }
        for (auto& c : acc.c) c = -c;
        if (dealias_on) dealias_in_place(acc);
        out[i] = fft_inverse(acc);
    }
    return out;
}

inline VectorField rhs_stage(const StageData& st, const SimConfig& cfg) {
    return cfg.rhs_form == RhsForm::convective ? rhs_convective_stage(st, cfg.dealias)
                                               : rhs_flux_stage(st, cfg.dealias);
}

}  // namespace detail

/// Convective-form momentum tendency; pre: u = velocity_of(m).
inline VectorField rhs_convective(const VectorField& u, const VectorField& m,
                                  bool dealias_on = true) {
    detail::StageData st = detail::make_stage(m);
    st.u = u;
    return detail::rhs_convective_stage(st, dealias_on);
}

/// Flux-form momentum tendency; agrees with rhs_convective on dealiased
/// band-limited inputs.
inline VectorField rhs_flux(const VectorField& u, const VectorField& m, bool dealias_on = true) {
    detail::StageData st = detail::make_stage(m);
    st.u = u;
    return detail::rhs_flux_stage(st, dealias_on);
}

struct NanDetectedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void axpy(VectorField& y, double a, const VectorField& x) {
    for (int i = 0; i < y.dim(); i++)
        for (std::size_t q = 0; q < y[i].values.size(); q++)
            y[i].values[q] += a * x[i].values[q];
}

inline VectorField lin_comb(const VectorField& base, double a, const VectorField& x) {
    VectorField out = base;
    axpy(out, a, x);
    return out;
}

inline void require_finite(const VectorField& f, const char* what) {
    if (!f.all_finite()) throw NanDetectedError(std::string("non-finite values in ") + what);
}

inline Point eval_velocity(const StageData& st, const Point& x) {
    Point v{0.0, 0.0, 0.0};
    for (int i = 0; i < st.u.dim(); i++) v[std::size_t(i)] = TrigInterpolant(st.su[std::size_t(i)])(x);
    return v;
}

}  // namespace detail

/// One classical RK4 step of the momentum equation. Tracer points ride the
/// same stages, so characteristics keep the solver's fourth order without
/// sub-stepping.
inline SimState step(const SimState& state, double dt, const SimConfig& cfg,
                     std::vector<Point>* tracers = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    const Grid& g = cfg.grid;

    detail::StageData s0 = detail::make_stage(state.m);
    const VectorField k1 = detail::rhs_stage(s0, cfg);
    detail::require_finite(k1, "RK4 stage 1");

    detail::StageData s1 = detail::make_stage(detail::lin_comb(state.m, 0.5 * dt, k1));
    const VectorField k2 = detail::rhs_stage(s1, cfg);
    detail::require_finite(k2, "RK4 stage 2");

    detail::StageData s2 = detail::make_stage(detail::lin_comb(state.m, 0.5 * dt, k2));
    const VectorField k3 = detail::rhs_stage(s2, cfg);
    detail::require_finite(k3, "RK4 stage 3");

    detail::StageData s3 = detail::make_stage(detail::lin_comb(state.m, dt, k3));
    const VectorField k4 = detail::rhs_stage(s3, cfg);
    detail::require_finite(k4, "RK4 stage 4");

    SimState next;
    next.t = state.t + dt;
    next.m = state.m;
    detail::axpy(next.m, dt / 6.0, k1);
    detail::axpy(next.m, dt / 3.0, k2);
    detail::axpy(next.m, dt / 3.0, k3);
    detail::axpy(next.m, dt / 6.0, k4);
    detail::require_finite(next.m, "RK4 update");
    next.u = velocity_of(next.m);
    detail::require_finite(next.u, "velocity");

    if (tracers) {
        for (Point& x : *tracers) {
            const Point p1 = detail::eval_velocity(s0, x);
            Point x2 = x;
            for (int a = 0; a < g.dim(); a++) x2[std::size_t(a)] += 0.5 * dt * p1[std::size_t(a)];
            const Point p2 = detail::eval_velocity(s1, x2);
            Point x3 = x;
            for (int a = 0; a < g.dim(); a++) x3[std::size_t(a)] += 0.5 * dt * p2[std::size_t(a)];
            const Point p3 = detail::eval_velocity(s2, x3);
            Point x4 = x;
            for (int a = 0; a < g.dim(); a++) x4[std::size_t(a)] += dt * p3[std::size_t(a)];
            const Point p4 = detail::eval_velocity(s3, x4);
            for (int a = 0; a < g.dim(); a++)
                x[std::size_t(a)] += dt / 6.0 *
                                     (p1[std::size_t(a)] + 2.0 * p2[std::size_t(a)] +
                                      2.0 * p3[std::size_t(a)] + p4[std::size_t(a)]);
            x = wrap_point(g, x);
        }
    }
    return next;
}

/// H^1-weighted spectral energy fraction in the top third of the kept band.
inline double h1_tail_fraction(const VectorField& u, bool dealiased) {
    const Grid& g = u.grid;
    double tail = 0.0, total = 0.0;
    for (const auto& c : u.comp) {
        Spectrum s = fft_forward(c);
        const int last = g.dim() - 1;
        const int nlast_half = g.n(last) / 2;
        for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
            const int ks[3] = {k1, k2, k3};
            const int ilast = g.dim() == 1 ? k1 : (g.dim() == 2 ? k2 : k3);
            const double w = (ilast > 0 && ilast < nlast_half) ? 2.0 : 1.0;
            const double e = w * helmholtz_symbol(g, k1, k2, k3) * std::norm(s.c[flat]);
            total += e;
            double frac = 0.0;
            for (int a = 0; a < g.dim(); a++) {
                const double band = dealiased ? g.n(a) / 3.0 : g.n(a) / 2.0;
                frac = std::max(frac, std::abs(ks[a]) / band);
            }
            if (frac > 2.0 / 3.0) tail += e;
        });
    }
    return total > 0.0 ? tail / total : 0.0;
}

using Observer = std::function<void(const SimState&, const SeriesRow&)>;

struct IntegrateOptions {
    std::vector<Observer> observers;
    std::vector<DirectionSpec> monitor_dirs;  // dir_residual column = max over these
    std::optional<Point> trace_x0;
    std::optional<DirectionSpec> trace_dir;
};

/// CFL-limited RK4 integration with triple blow-up detection (gradient
/// factor, dt floor, spectral tail). Deterministic for a fixed config.
inline RunReport integrate(const VectorField& u0, const SimConfig& cfg,
                           const IntegrateOptions& opts = {}) {
    cfg.validate();
    if (u0.grid != cfg.grid) throw std::invalid_argument("integrate: u0 grid mismatch");

    RunReport report;
    const bool tracing = opts.trace_x0.has_value();
    std::vector<Point> tracer_pos;
    DirectionSpec trace_dir;
    if (tracing) {
        if (!opts.trace_dir) throw std::invalid_argument("integrate: tracer needs a direction");
        trace_dir = *opts.trace_dir;
        tracer_pos.push_back(wrap_point(cfg.grid, *opts.trace_x0));
        report.trace = CharTrace{};
        report.trace->x0 = tracer_pos.front();
        report.trace->direction = trace_dir;
    }

    SimState cur;
    cur.t = 0.0;
    cur.u = VectorField(cfg.grid);
    for (int i = 0; i < u0.dim(); i++) {
        Spectrum s = fft_forward(u0[i]);
        if (cfg.dealias) dealias_in_place(s);
        cur.u[i] = fft_inverse(s);
        helmholtz_apply_in_place(s);
        cur.m.comp.push_back(fft_inverse(s));
    }
    cur.m.grid = cfg.grid;

    double cum = 0.0;
    double prev_grad = 0.0;
    const auto emit_row = [&](const SimState& st, double dt_used) -> const SeriesRow& {
        SeriesRow row;
        row.t = st.t;
        row.dt = dt_used;
        row.H = energy_h(st.u);
        row.grad_linf = grad_linf(st.u);
        row.besov_1_inf_inf = besov_norm(
            st.u, BesovParams(1.0, std::numeric_limits<double>::infinity(),
                              std::numeric_limits<double>::infinity()));
        double dres = 0.0;
        for (const auto& dir : opts.monitor_dirs)
            dres = std::max(dres, directional_residual(st.u, dir));
        row.dir_residual = dres;
        row.tail_frac = h1_tail_fraction(st.u, cfg.dealias);
        if (tracing) {
            const ScalarField slope = directional_slope_field(st.u, trace_dir);
            const double gval = TrigInterpolant(slope)(tracer_pos.front());
            row.g_char = gval;
            report.trace->times.push_back(st.t);
            report.trace->positions.push_back(tracer_pos.front());
            report.trace->g_values.push_back(gval);
        }
        if (dt_used > 0.0) cum += 0.5 * dt_used * (prev_grad + row.grad_linf);
        prev_grad = row.grad_linf;
        row.cum_grad_integral = cum;
        report.series.push_back(row);
        for (const auto& ob : opts.observers) ob(st, report.series.back());
        return report.series.back();
    };

    const SeriesRow& row0 = emit_row(cur, 0.0);
    const double grad_threshold = cfg.detect_grad_factor * std::max(1.0, row0.grad_linf);
    const double h_min = cfg.grid.min_spacing();

    const auto finish = [&](RunOutcome oc, HaltReason why) {
        report.outcome = oc;
        report.reason = why;
        report.t_final = cur.t;
        report.cum_grad_integral = cum;
        report.final_sym_grad_linf = sym_grad_linf(cur.u);
        return report;
    };

    const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
    while (cur.t < cfg.t_end - t_eps) {
        const double umax = linf_norm(cur.u);
        const double dt_raw = cfg.cfl * h_min / std::max(umax, 1.0);
        if (dt_raw < cfg.dt_min) return finish(RunOutcome::blowup_detected, HaltReason::dt_floor);
        const double dt = std::min({dt_raw, cfg.dt_max, cfg.t_end - cur.t});
        try {
            cur = step(cur, dt, cfg, tracing ? &tracer_pos : nullptr);
        } catch (const NanDetectedError&) {
            return finish(RunOutcome::numerical_failure, HaltReason::nan);
        }
        const SeriesRow& row = emit_row(cur, dt);
        if (!std::isfinite(row.H) || !std::isfinite(row.grad_linf))
            return finish(RunOutcome::numerical_failure, HaltReason::nan);
        if (row.grad_linf > grad_threshold)
            return finish(RunOutcome::blowup_detected, HaltReason::grad_threshold);
        if (row.tail_frac > cfg.detect_tail_frac)
            return finish(RunOutcome::blowup_detected, HaltReason::spectral_tail);
    }
    return finish(RunOutcome::completed, HaltReason::none);
}

/// Runs integrate with a characteristic tracer attached and returns the
/// trace alongside the report.
inline RunReport characteristic_trace(const VectorField& u0, const SimConfig& cfg,
                                      const Point& x0, const DirectionSpec& dir,
                                      IntegrateOptions opts = {}) {
    opts.trace_x0 = x0;
    opts.trace_dir = dir;
    return integrate(u0, cfg, opts);
}

}  // namespace epflow

#endif
