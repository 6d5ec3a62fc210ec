#ifndef EPFLOW_SCENARIOS_HPP
#define EPFLOW_SCENARIOS_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "besov.hpp"
#include "diagnostics.hpp"
#include "peakon.hpp"
#include "spectral.hpp"

namespace epflow {

// ---- blow-up initial data ----------------------------------------------------

/// Multimode profile F(s) = -sum_{k<=K} (A/k) sin(2 pi k s); K controls the
/// slope-to-energy margin, the amplitude only the time scale.
struct ProfileSpec {
    int K = 1;
    double amplitude = 1.0;

    double eval(double s) const {
        double v = 0.0;
        for (int k = 1; k <= K; k++) v -= amplitude / k * std::sin(two_pi * k * s);
        return v;
    }
};

struct MarginUnreachableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BlowupBuild {
    VectorField u0;
    BlowupCertificate cert;
    int K = 0;
};

namespace detail {

inline void require_uniform(const Grid& g, const char* who) {
    for (int a = 1; a < g.dim(); a++)
        if (g.length(a) != g.length(0))
            throw std::invalid_argument(std::string(who) + ": uniform periods required");
}

/// Analytic margin of the K-mode profile: both g0 and the H^1 norm are exact
/// sums, so the search never touches the grid.
inline double analytic_margin(const Grid& g, const DirectionSpec& dir, int K) {
    const double L = g.length(0);
    const double zn = dir.znorm();
    double sum_inv_k2 = 0.0;
    for (int k = 1; k <= K; k++) sum_inv_k2 += 1.0 / (double(k) * k);
    const double w = two_pi * zn / L;
    const double h_unit = std::pow(L, g.dim()) * 0.5 * (sum_inv_k2 + w * w * K);
    const double slope = two_pi * K * zn / L;
    return slope / (std::sqrt(2.0) * std::sqrt(h_unit));
}

inline BlowupBuild build_blowup_any(const Grid& grid, const DirectionSpec& dir,
                                    double target_margin, int k_max, double amplitude,
                                    const std::optional<ProfileSpec>& transverse) {
    if (dir.d != grid.dim()) throw std::invalid_argument("build_blowup: dimension mismatch");
    if (!(target_margin > 1.0))
        throw std::invalid_argument("build_blowup: target margin must exceed 1");
    require_uniform(grid, "build_blowup");

    int K = 0;
    for (int k = 1; k <= k_max; k++) {
        if (analytic_margin(grid, dir, k) >= target_margin) {
            K = k;
            break;
        }
    }
    if (K == 0)
        throw MarginUnreachableError("build_blowup: no K <= " + std::to_string(k_max) +
                                     " reaches margin " + std::to_string(target_margin));
    for (int a = 0; a < grid.dim(); a++)
        if (3 * K * std::abs(dir.z[std::size_t(a)]) > grid.n(a))
            throw std::invalid_argument("build_blowup: grid too coarse for K = " +
                                        std::to_string(K));

    ProfileSpec profile{K, amplitude};
    std::optional<DirectionSpec> tdir;
    if (transverse) {
        const auto orth = orthogonal_directions(dir);
        if (orth.empty())
            throw std::invalid_argument("build_blowup: no transverse direction in d = 1");
        tdir = orth.front();
        for (int a = 0; a < grid.dim(); a++)
            if (3 * transverse->K * std::abs(dir.z[std::size_t(a)]) > grid.n(a))
                throw std::invalid_argument("build_blowup: grid too coarse for transverse profile");
    }

    BlowupBuild out;
    out.K = K;
    out.u0 = VectorField(grid);
    for_each_index(grid, [&](std::size_t flat, int i1, int i2, int i3) {
        const Point x = grid.coord({i1, i2, i3});
        double s = 0.0;
        for (int a = 0; a < grid.dim(); a++)
            s += dir.z[std::size_t(a)] * x[std::size_t(a)] / grid.length(a);
        s -= std::floor(s);
        const double F = profile.eval(s);
        for (int i = 0; i < grid.dim(); i++)
            out.u0[i].values[flat] = dir.e[std::size_t(i)] * F;
        if (tdir) {
            const double G = transverse->eval(s);
            for (int i = 0; i < grid.dim(); i++)
                out.u0[i].values[flat] += tdir->e[std::size_t(i)] * G;
        }
    });

    // certificate from the grid data itself
    const ScalarField slope = directional_slope_field(out.u0, dir);
    out.cert.g0 = slope.values[0];  // x0 = 0 is the first grid node
    out.cert.E = h1_norm(out.u0);
    out.cert.margin = blowup_margin(out.cert.g0, out.cert.E);
    out.cert.x0 = Point{0.0, 0.0, 0.0};
    out.cert.direction = dir;
    if (out.cert.margin <= 1.0)
        throw MarginUnreachableError("build_blowup: measured margin fell below 1");
    out.cert.T_bound = riccati_bound(out.cert.g0, out.cert.E).T_bound;
    return out;
}

}  // namespace detail

/// Slope-dominated planar data u0 = F(z.x/L) e with the certificate
/// (g0, E, T_bound) measured from the returned field.
inline BlowupBuild build_blowup(const Grid& grid, const DirectionSpec& dir, double target_margin,
                                int k_max = 64, double amplitude = 1.0,
                                const std::optional<ProfileSpec>& transverse = std::nullopt) {
    if (grid.dim() != 2) throw std::invalid_argument("build_blowup: d = 2 required");
    return detail::build_blowup_any(grid, dir, target_margin, k_max, amplitude, transverse);
}

/// d >= 3 variant; the orthogonal frame completing dir.e is never needed
/// explicitly since the data varies along dir.e only.
inline BlowupBuild build_blowup_nd(const Grid& grid, const DirectionSpec& dir,
                                   double target_margin, int k_max = 64, double amplitude = 1.0,
                                   const std::optional<ProfileSpec>& transverse = std::nullopt) {
    if (grid.dim() < 3) throw std::invalid_argument("build_blowup_nd: d >= 3 required");
    return detail::build_blowup_any(grid, dir, target_margin, k_max, amplitude, transverse);
}

// ---- norm-inflation seed -----------------------------------------------------

struct InflationSpec {
    double epsilon = 0.5;
    double p = 2.0;
    double r = 2.0;
    int N = 10;             // low-frequency cutoff index of S_N
    int K_max = 1 << 14;    // series truncation of W
    std::uint64_t seed = 0; // reserved; the default transverse profile is fixed
};

/// w_k = -k^{-(1+d/p)} (ln k)^{-2/(1+r)} for k = 2..K_max (index k).
inline std::vector<double> w_series(int d, const InflationSpec& spec) {
    if (spec.K_max < 2) throw std::invalid_argument("w_series: K_max >= 2 required");
    if (!(spec.p >= d)) throw std::invalid_argument("w_series: need p >= d");
    if (!(spec.r > 1.0)) throw std::invalid_argument("w_series: need r > 1");
    std::vector<double> w(std::size_t(spec.K_max) + 1, 0.0);
    const double a = 1.0 + double(d) / spec.p;
    const double b = 2.0 / (1.0 + spec.r);
    for (int k = 2; k <= spec.K_max; k++)
        w[std::size_t(k)] = -std::pow(double(k), -a) * std::pow(std::log(double(k)), -b);
    return w;
}

/// Sharp truncation of W'(0) = sum k w_k over k <= K.
inline double w_slope_partial(const std::vector<double>& w, int K) {
    double s = 0.0;
    for (int k = 2; k <= K && k < int(w.size()); k++) s += k * w[std::size_t(k)];
    return s;
}

/// Slope of S_N W at zero: the smooth cutoff symbol eta(k / 2^N) applied to
/// the coefficient sum.
inline double sn_slope_at_zero(const std::vector<double>& w, int N) {
    double s = 0.0;
    const double scale = std::ldexp(1.0, N);
    for (int k = 2; k < int(w.size()); k++) s += k * w[std::size_t(k)] * lp::eta(k / scale);
    return s;
}

namespace detail {

/// 1D field on an n-point 2*pi grid from sine coefficients (index = mode).
inline ScalarField sine_series_field(int n, const std::vector<double>& coeff) {
    const Grid line(1, {n, 1, 1}, {two_pi, two_pi, two_pi});
    Spectrum s;
    s.grid = line;
    s.c.assign(std::size_t(n / 2 + 1), 0.0);
    for (int k = 1; k < int(coeff.size()) && k < n / 2; k++)
        s.c[std::size_t(k)] = std::complex<double>(0.0, -0.5 * coeff[std::size_t(k)]);
    return fft_inverse(s);
}

inline int reference_points(int k_max) {
    int n = 256;
    while (n / 2 <= 2 * k_max) n *= 2;
    return n;
}

}  // namespace detail

/// Besov norm over T^d of a profile in x1 alone, computed on a fine 1D
/// reference grid; the transverse axes contribute (2 pi)^((d-1)/p).
inline double besov_norm_axis_profile(const std::vector<double>& coeff, int d,
                                      const BesovParams& params, int n_ref = 0) {
    const int kmax = int(coeff.size()) - 1;
    const int n = n_ref > 0 ? n_ref : detail::reference_points(kmax);
    const ScalarField f = detail::sine_series_field(n, coeff);
    const double transverse =
        std::isinf(params.p) ? 1.0 : std::pow(two_pi, double(d - 1) / params.p);
    const std::vector<double> blocks = block_lp_norms(f, params.p);
    double acc = 0.0;
    for (int j = -1; j < int(blocks.size()) - 1; j++) {
        const double a =
            std::pow(2.0, params.s * j) * transverse * blocks[std::size_t(j + 1)];
        if (std::isinf(params.r))
            acc = std::max(acc, a);
        else
            acc += std::pow(a, params.r);
    }
    return std::isinf(params.r) ? acc : std::pow(acc, 1.0 / params.r);
}

/// Per-block L^p norms of the profile over T^d, for the scaling diagnostics.
inline std::vector<double> block_norms_axis_profile(const std::vector<double>& coeff, int d,
                                                    double p, int n_ref = 0) {
    const int kmax = int(coeff.size()) - 1;
    const int n = n_ref > 0 ? n_ref : detail::reference_points(kmax);
    const ScalarField f = detail::sine_series_field(n, coeff);
    const double transverse = std::isinf(p) ? 1.0 : std::pow(two_pi, double(d - 1) / p);
    std::vector<double> blocks = block_lp_norms(f, p);
    for (double& b : blocks) b *= transverse;
    return blocks;
}

struct InflationReport {
    double slope0 = 0.0;       // d_1 u^1 at x = 0, measured on the grid
    double E = 0.0;            // ||u0||_{H^1}
    double besov_u0 = 0.0;     // ||u0||_{B^{1+d/p}_{p,r}}, max over components
    double w_besov_norm = 0.0; // ||W||_B used for the normalization
    bool hypothesis_met = false;
    std::optional<BlowupCertificate> certificate;
};

struct InflationBuild {
    VectorField u0;
    InflationReport report;
};

/// Seed data u^1 = eps S_N W(x1)/||W||_B, u^i = eps f(x1) (i >= 2) with
/// f = sin(x1)/||sin||_B scaled strictly below 1. Requires the 2*pi torus.
/// The blow-up certificate is attached when the slope hypothesis holds at
/// x0 = 0; otherwise hypothesis_met stays false and the data is returned
/// as built.
inline InflationBuild build_inflation(const Grid& grid, const InflationSpec& spec) {
    detail::require_uniform(grid, "build_inflation");
    if (std::abs(grid.length(0) - two_pi) > 1e-12)
        throw std::invalid_argument("build_inflation: period 2*pi required");
    if (!(spec.epsilon > 0.0)) throw std::invalid_argument("build_inflation: epsilon > 0");
    if (spec.N < 1) throw std::invalid_argument("build_inflation: N >= 1");
    const int d = grid.dim();
    if (d < 2) throw std::invalid_argument("build_inflation: d >= 2 required");

    const BesovParams params(1.0 + double(d) / spec.p, spec.p, spec.r);
    const std::vector<double> w = w_series(d, spec);
    const double w_norm = besov_norm_axis_profile(w, d, params);

    // grid-resolved, smoothly truncated coefficients of u^1
    const int k_grid = grid.n(0) / 3;
    std::vector<double> cu(std::size_t(std::min(k_grid, spec.K_max)) + 1, 0.0);
    const double scale_n = std::ldexp(1.0, spec.N);
    for (int k = 2; k < int(cu.size()); k++)
        cu[std::size_t(k)] = spec.epsilon / w_norm * w[std::size_t(k)] * lp::eta(k / scale_n);

    // transverse profile f = sin(x1)/||sin||_B, kept strictly inside the ball
    std::vector<double> sine(2, 0.0);
    sine[1] = 1.0;
    const double sin_norm = besov_norm_axis_profile(sine, d, params);
    const double f_coeff = (1.0 - 1e-12) / sin_norm;

    const ScalarField prof1 = detail::sine_series_field(grid.n(0), cu);

    InflationBuild out;
    out.u0 = VectorField(grid);
    for_each_index(grid, [&](std::size_t flat, int i1, int i2, int i3) {
        (void)i2;
        (void)i3;
        const double x1 = grid.coord({i1, 0, 0})[0];
        out.u0[0].values[flat] = prof1.values[std::size_t(i1)];
        const double f = spec.epsilon * f_coeff * std::sin(x1);
        for (int i = 1; i < d; i++) out.u0[i].values[flat] = f;
    });

    InflationReport& rep = out.report;
    rep.w_besov_norm = w_norm;
    rep.slope0 = grad(out.u0[0], 0).values[0];
    rep.E = h1_norm(out.u0);
    rep.besov_u0 = besov_norm(out.u0, params);
    const double margin = blowup_margin(rep.slope0, rep.E);
    rep.hypothesis_met = margin > 1.0;
    if (rep.hypothesis_met) {
        BlowupCertificate cert;
        cert.g0 = rep.slope0;
        cert.E = rep.E;
        cert.margin = margin;
        cert.T_bound = riccati_bound(cert.g0, cert.E).T_bound;
        cert.x0 = Point{0.0, 0.0, 0.0};
        std::vector<int> e1(std::size_t(d), 0);
        e1[0] = 1;
        cert.direction = DirectionSpec(e1);
        rep.certificate = cert;
    }
    return out;
}

// ---- peakon sampling -----------------------------------------------------------

/// Samples u^i = M Phi(a.x) at t = 0 on the grid; sigma > 0 applies the
/// Gaussian spectral mollifier exp(-sigma^2 |2 pi k/L|^2 / 2). The profile is
/// torus-periodic only when a_j L_j is an integer on every axis (coordinate
/// axes on the unit torus; general z needs periods that are multiples of |z|).
inline std::pair<VectorField, PeakonParams> build_peakon(const Grid& grid, double M,
                                                         const DirectionSpec& z,
                                                         double sigma = 0.0) {
    if (z.d != grid.dim()) throw std::invalid_argument("build_peakon: dimension mismatch");
    const PeakonParams params = make_peakon_params(M, z, sigma);
    for (int a = 0; a < grid.dim(); a++) {
        const double aL = params.z.e[std::size_t(a)] * grid.length(a);
        if (std::abs(aL - std::round(aL)) > 1e-9)
            throw std::invalid_argument(
                "build_peakon: profile not torus-periodic (a_j L_j must be integer)");
    }
    ScalarField prof = sample(grid, [&](const Point& x) {
        double ax = 0.0;
        for (int a = 0; a < grid.dim(); a++) ax += params.z.e[std::size_t(a)] * x[std::size_t(a)];
        return M * phi_eval(ax);
    });
    if (sigma > 0.0) {
        Spectrum s = fft_forward(prof);
        for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
            double k2sum = 0.0;
            const int ks[3] = {k1, k2, k3};
            for (int a = 0; a < grid.dim(); a++) {
                const double w = wavenumber(grid, a, ks[a]);
                k2sum += w * w;
            }
            s.c[flat] *= std::exp(-0.5 * sigma * sigma * k2sum);
        });
        prof = fft_inverse(s);
    }
    VectorField u(grid);
    for (int i = 0; i < grid.dim(); i++) u[i] = prof;
    return {std::move(u), params};
}

}  // namespace epflow

#endif
