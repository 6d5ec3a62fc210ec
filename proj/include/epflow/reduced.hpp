#ifndef EPFLOW_REDUCED_HPP
#define EPFLOW_REDUCED_HPP

#include <vector>

#include "diagnostics.hpp"
#include "spectral.hpp"

namespace epflow {

struct Snapshot {
    double t = 0.0;
    VectorField u;
};

struct NotInvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReducedResidualPoint {
    double t_mid = 0.0;
    double residual_rel = 0.0;  // relative to max(|d_t profile|, |rhs|) in L^2
    double scale = 0.0;
};

namespace detail {

/// Samples the band-limited interpolants of all components along the line
/// x(s) = s L z / |z|^2, so that z.x/L = s in [0,1).
inline std::vector<std::vector<double>> extract_profiles(const VectorField& u,
                                                         const DirectionSpec& dir, int n_s) {
    const Grid& g = u.grid;
    const double L = g.length(0);
    const double zn2 = dir.znorm() * dir.znorm();
    std::vector<std::vector<double>> profiles(std::size_t(u.dim()));
    for (int i = 0; i < u.dim(); i++) {
        TrigInterpolant interp(u[i]);
        auto& p = profiles[std::size_t(i)];
        p.resize(std::size_t(n_s));
        for (int q = 0; q < n_s; q++) {
            const double s = double(q) / n_s;
            Point x{0.0, 0.0, 0.0};
            for (int a = 0; a < g.dim(); a++) x[std::size_t(a)] = s * L * dir.z[std::size_t(a)] / zn2;
            p[std::size_t(q)] = interp(wrap_point(g, x));
        }
    }
    return profiles;
}

inline int profile_points(const Grid& g, const DirectionSpec& dir) {
    int q_max = 1 << 20;
    for (int a = 0; a < g.dim(); a++)
        if (dir.z[std::size_t(a)] != 0)
            q_max = std::min(q_max, g.n(a) / (2 * std::abs(dir.z[std::size_t(a)])));
    int n = 16;
    while (n < 2 * (q_max + 1)) n *= 2;
    return n;
}

/// Zero 1D modes the d-dimensional 2/3 mask would have zeroed on the z-line.
inline void reduced_dealias(Spectrum& s, const Grid& g2d, const DirectionSpec& dir) {
    const int n = s.grid.n(0);
    for (int i = 0; i <= n / 2; i++) {
        bool kept = true;
        for (int a = 0; a < g2d.dim(); a++)
            if (3 * std::abs(i * dir.z[std::size_t(a)]) > g2d.n(a)) kept = false;
        if (!kept) s.c[std::size_t(i)] = 0.0;
    }
}

}  // namespace detail

/// Residual of the direction-reduced evolution equation
///   v_t + v dv/dy = -d/dy (1 - d^2/dy^2)^{-1} [ v^2/2 + |u|^2/2
///                   - |du/dy|^2/2 + (dv/dy)^2 ],  v = e.u,  y = e.x,
/// measured on consecutive snapshot pairs of a run whose data varies only
/// along dir. Time derivative by central difference, space spectrally on
/// the extracted 1D profile.
inline std::vector<ReducedResidualPoint> reduced_residual(const std::vector<Snapshot>& snaps,
                                                          const DirectionSpec& dir,
                                                          bool dealias_products = true) {
    if (snaps.size() < 2)
        throw std::invalid_argument("reduced_residual: need at least two snapshots");
    const Grid& g = snaps.front().u.grid;
    for (int a = 1; a < g.dim(); a++)
        if (g.length(a) != g.length(0))
            throw std::invalid_argument("reduced_residual: uniform periods required");

    for (const auto& sn : snaps) {
        const double scale = std::max(h1_norm(sn.u), 1e-30);
        for (const auto& od : orthogonal_directions(dir))
            if (directional_residual(sn.u, od) > 1e-8 * scale)
                throw NotInvariantError("reduced_residual: data is not invariant along " +
                                        std::string("the orthogonal directions"));
    }

    const int n_s = detail::profile_points(g, dir);
    const Grid line(1, {n_s, 1, 1}, {1.0, 1.0, 1.0});
    const double beta = dir.znorm() / g.length(0);  // d/dy = beta d/ds
    const int d = g.dim();

    std::vector<ReducedResidualPoint> out;
    std::vector<std::vector<double>> prev = detail::extract_profiles(snaps[0].u, dir, n_s);
    for (std::size_t idx = 1; idx < snaps.size(); idx++) {
        std::vector<std::vector<double>> next =
            detail::extract_profiles(snaps[idx].u, dir, n_s);
        const double dt = snaps[idx].t - snaps[idx - 1].t;
        if (!(dt > 0.0)) throw std::invalid_argument("reduced_residual: times must increase");

        // midpoint profiles and their y-derivatives
        std::vector<ScalarField> mid{std::size_t(d), ScalarField(line)};
        std::vector<ScalarField> dmid{std::size_t(d), ScalarField(line)};
        for (int i = 0; i < d; i++) {
            auto& v = mid[std::size_t(i)].values;
            for (int q = 0; q < n_s; q++)
                v[std::size_t(q)] = 0.5 * (prev[std::size_t(i)][std::size_t(q)] +
                                           next[std::size_t(i)][std::size_t(q)]);
            Spectrum s = fft_forward(mid[std::size_t(i)]);
            grad_in_place(s, 0);
            dmid[std::size_t(i)] = fft_inverse(s);
            for (auto& w : dmid[std::size_t(i)].values) w *= beta;
        }

        ScalarField v(line), dv(line), dpdt(line);
        for (int q = 0; q < n_s; q++) {
            double a = 0.0, b = 0.0, c = 0.0;
            for (int i = 0; i < d; i++) {
                a += dir.e[std::size_t(i)] * mid[std::size_t(i)].values[std::size_t(q)];
                b += dir.e[std::size_t(i)] * dmid[std::size_t(i)].values[std::size_t(q)];
                c += dir.e[std::size_t(i)] *
                     (next[std::size_t(i)][std::size_t(q)] - prev[std::size_t(i)][std::size_t(q)]);
            }
            v.values[std::size_t(q)] = a;
            dv.values[std::size_t(q)] = b;
            dpdt.values[std::size_t(q)] = c / dt;
        }

        // f = v^2/2 + |u|^2/2 - |du/dy|^2/2 + (dv/dy)^2
        ScalarField f(line);
        for (int q = 0; q < n_s; q++) {
            double usq = 0.0, dusq = 0.0;
            for (int i = 0; i < d; i++) {
                const double ui = mid[std::size_t(i)].values[std::size_t(q)];
                const double dui = dmid[std::size_t(i)].values[std::size_t(q)];
                usq += ui * ui;
                dusq += dui * dui;
            }
            const double vv = v.values[std::size_t(q)];
            const double dvv = dv.values[std::size_t(q)];
            f.values[std::size_t(q)] = 0.5 * vv * vv + 0.5 * usq - 0.5 * dusq + dvv * dvv;
        }

        // rhs = -v dv/dy - d/dy (1 - d^2/dy^2)^{-1} f
        Spectrum sf = fft_forward(f);
        for (int q = 0; q <= n_s / 2; q++) {
            const double w = beta * two_pi * q;
            sf.c[std::size_t(q)] /= (1.0 + w * w);
            sf.c[std::size_t(q)] *= std::complex<double>(0.0, q == n_s / 2 ? 0.0 : w);
        }
        ScalarField nonlocal = fft_inverse(sf);

        ScalarField rhs(line);
        for (int q = 0; q < n_s; q++)
            rhs.values[std::size_t(q)] = -v.values[std::size_t(q)] * dv.values[std::size_t(q)] -
                                         nonlocal.values[std::size_t(q)];
        if (dealias_products) {
            Spectrum sr = fft_forward(rhs);
            detail::reduced_dealias(sr, g, dir);
            rhs = fft_inverse(sr);
            Spectrum st = fft_forward(dpdt);
            detail::reduced_dealias(st, g, dir);
            dpdt = fft_inverse(st);
        }

        ScalarField diff(line);
        for (int q = 0; q < n_s; q++)
            diff.values[std::size_t(q)] = dpdt.values[std::size_t(q)] - rhs.values[std::size_t(q)];

        ReducedResidualPoint pt;
        pt.t_mid = 0.5 * (snaps[idx - 1].t + snaps[idx].t);
        pt.scale = std::max(l2_norm(dpdt), l2_norm(rhs));
        pt.residual_rel = pt.scale > 0.0 ? l2_norm(diff) / pt.scale : l2_norm(diff);
        out.push_back(pt);
        prev = std::move(next);
    }
    return out;
}

}  // namespace epflow

#endif
