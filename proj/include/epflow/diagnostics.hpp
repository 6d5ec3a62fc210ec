#ifndef EPFLOW_DIAGNOSTICS_HPP
#define EPFLOW_DIAGNOSTICS_HPP

#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spectral.hpp"

namespace epflow {

// ---- conserved energy ---------------------------------------------------

/// H = int |u|^2 + |grad u|^2 dx, evaluated as the Fourier-side sum
/// sum_k (1 + |2 pi k / L|^2) |u_hat(k)|^2 * vol per component.
inline double energy_h(const VectorField& u) {
    double h = 0.0;
    for (const auto& c : u.comp) {
        Spectrum s = fft_forward(c);
        const Grid& g = s.grid;
        const int last = g.dim() - 1;
        const int nlast_half = g.n(last) / 2;
        const int b1 = s.bins(0);
        const int b2 = g.dim() > 1 ? s.bins(1) : 1;
        const int b3 = g.dim() > 2 ? s.bins(2) : 1;
        double acc = 0.0;
        std::size_t flat = 0;
        for (int i1 = 0; i1 < b1; i1++) {
            const int k1 = g.dim() == 1 ? i1 : signed_mode(i1, g.n(0));
            for (int i2 = 0; i2 < b2; i2++) {
                const int k2 = g.dim() == 2 ? i2 : (g.dim() > 1 ? signed_mode(i2, g.n(1)) : 0);
                for (int i3 = 0; i3 < b3; i3++, flat++) {
                    const int ilast = g.dim() == 1 ? i1 : (g.dim() == 2 ? i2 : i3);
                    const double w = (ilast > 0 && ilast < nlast_half) ? 2.0 : 1.0;
                    acc += w * helmholtz_symbol(g, k1, k2, g.dim() > 2 ? i3 : 0) *
                           std::norm(s.c[flat]);
                }
            }
        }
        h += acc * g.volume();
    }
    return h;
}

inline double h1_norm(const VectorField& u) { return std::sqrt(energy_h(u)); }

// ---- gradient tensor ----------------------------------------------------

/// All first derivatives: jac[i][j] = d u^j / d x_i.
inline std::vector<std::vector<ScalarField>> jacobian(const VectorField& u) {
    const int d = u.dim();
    const std::size_t nd = std::size_t(d);
    std::vector<std::vector<ScalarField>> jac(nd, std::vector<ScalarField>(nd));
    for (int j = 0; j < d; j++) {
        const Spectrum s = fft_forward(u[j]);
        for (int i = 0; i < d; i++) {
            Spectrum ds = s;
            grad_in_place(ds, i);
            jac[std::size_t(i)][std::size_t(j)] = fft_inverse(ds);
        }
    }
    return jac;
}

/// max over the grid and over (i,j) of |d_i u^j|.
inline double grad_linf(const std::vector<std::vector<ScalarField>>& jac) {
    double m = 0.0;
    for (const auto& row : jac)
        for (const auto& f : row)
            for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double grad_linf(const VectorField& u) { return grad_linf(jacobian(u)); }

/// Same max-entry norm for the symmetric part S_ij = (d_i u^j + d_j u^i)/2.
/// Reported alongside grad_linf; detection uses grad_linf only.
inline double sym_grad_linf(const std::vector<std::vector<ScalarField>>& jac) {
    double m = 0.0;
    const int d = int(jac.size());
    for (int i = 0; i < d; i++)
        for (int j = 0; j < d; j++) {
            const auto& a = jac[std::size_t(i)][std::size_t(j)].values;
            const auto& b = jac[std::size_t(j)][std::size_t(i)].values;
            for (std::size_t q = 0; q < a.size(); q++)
                m = std::max(m, 0.5 * std::abs(a[q] + b[q]));
        }
    return m;
}

inline double sym_grad_linf(const VectorField& u) { return sym_grad_linf(jacobian(u)); }

// ---- directions ----------------------------------------------------------

/// A gcd-reduced nonzero integer direction z and its unit vector e = z/|z|.
/// Integer directions keep profiles of z.x exactly periodic on the torus.
struct DirectionSpec {
    std::array<int, 3> z{0, 0, 0};
    int d = 0;
    std::array<double, 3> e{0.0, 0.0, 0.0};

    DirectionSpec() = default;
    DirectionSpec(std::initializer_list<int> zz) : DirectionSpec(std::vector<int>(zz)) {}
    explicit DirectionSpec(const std::vector<int>& zz) {
        if (zz.size() < 1 || zz.size() > 3)
            throw std::invalid_argument("DirectionSpec: dimension must be 1..3");
        d = int(zz.size());
        int g = 0;
        for (int a = 0; a < d; a++) {
            z[std::size_t(a)] = zz[std::size_t(a)];
            g = std::gcd(g, std::abs(zz[std::size_t(a)]));
        }
        if (g == 0) throw std::invalid_argument("DirectionSpec: z must be nonzero");
        double norm2 = 0.0;
        for (int a = 0; a < d; a++) {
            z[std::size_t(a)] /= g;
            norm2 += double(z[std::size_t(a)]) * z[std::size_t(a)];
        }
        const double norm = std::sqrt(norm2);
        for (int a = 0; a < d; a++) e[std::size_t(a)] = z[std::size_t(a)] / norm;
    }

    double znorm() const {
        double n2 = 0.0;
        for (int a = 0; a < d; a++) n2 += double(z[std::size_t(a)]) * z[std::size_t(a)];
        return std::sqrt(n2);
    }
};

/// Integer directions spanning the orthogonal complement of z.
inline std::vector<DirectionSpec> orthogonal_directions(const DirectionSpec& dir) {
    std::vector<DirectionSpec> out;
    if (dir.d == 2) {
        out.emplace_back(std::vector<int>{-dir.z[1], dir.z[0]});
    } else if (dir.d == 3) {
        for (int axis = 0; axis < 3 && out.size() < 2; axis++) {
            std::array<int, 3> unit{0, 0, 0};
            unit[std::size_t(axis)] = 1;
            std::array<int, 3> c{dir.z[1] * unit[2] - dir.z[2] * unit[1],
                                 dir.z[2] * unit[0] - dir.z[0] * unit[2],
                                 dir.z[0] * unit[1] - dir.z[1] * unit[0]};
            if (c[0] == 0 && c[1] == 0 && c[2] == 0) continue;
            if (!out.empty()) {
                // must be independent from the first pick
                const auto& f = out.front().z;
                const std::array<long, 3> cr{long(f[1]) * c[2] - long(f[2]) * c[1],
                                             long(f[2]) * c[0] - long(f[0]) * c[2],
                                             long(f[0]) * c[1] - long(f[1]) * c[0]};
                if (cr[0] == 0 && cr[1] == 0 && cr[2] == 0) continue;
            }
            out.emplace_back(std::vector<int>{c[0], c[1], c[2]});
        }
    }
    return out;
}

/// max_i || du^i/dn ||_{L^2} with n = dir.e, computed spectrally.
inline double directional_residual(const VectorField& u, const DirectionSpec& dir) {
    if (dir.d != u.dim()) throw std::invalid_argument("directional_residual: dimension mismatch");
    double worst = 0.0;
    for (const auto& c : u.comp) {
        Spectrum s = fft_forward(c);
        const Grid& g = s.grid;
        for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
            double dot = dir.e[0] * wavenumber(g, 0, k1);
            if (g.dim() > 1) dot += dir.e[1] * wavenumber(g, 1, k2);
            if (g.dim() > 2) dot += dir.e[2] * wavenumber(g, 2, k3);
            s.c[flat] *= std::complex<double>(0.0, dot);
        });
        worst = std::max(worst, std::sqrt(spectral_l2_squared(s)));
    }
    return worst;
}

/// Scalar field of the slope d_e (e . u) used for g(t) along characteristics.
inline ScalarField directional_slope_field(const VectorField& u, const DirectionSpec& dir) {
    ScalarField out(u.grid);
    const int d = u.dim();
    for (int i = 0; i < d; i++) {
        Spectrum s = fft_forward(u[i]);
        const Grid& g = s.grid;
        for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
            double dot = dir.e[0] * wavenumber(g, 0, k1);
            if (g.dim() > 1) dot += dir.e[1] * wavenumber(g, 1, k2);
            if (g.dim() > 2) dot += dir.e[2] * wavenumber(g, 2, k3);
            s.c[flat] *= std::complex<double>(0.0, dot);
        });
        ScalarField di = fft_inverse(s);
        const double ei = dir.e[std::size_t(i)];
        for (std::size_t q = 0; q < out.values.size(); q++) out.values[q] += ei * di.values[q];
    }
    return out;
}

// ---- Riccati comparison bound --------------------------------------------

struct InvalidHypothesisError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Comparison solution of dG/dt = -G^2/2 + E^2 from G(0) = g0 < -sqrt(2) E,
/// and the finite-time bound it fixes.
struct RiccatiBound {
    double g0 = 0.0;
    double E = 0.0;
    double T_bound = 0.0;

    double operator()(double t) const {
        const double s2e = std::sqrt(2.0) * E;
        const double rho = (g0 + s2e) / (g0 - s2e);
        return s2e + 2.0 * s2e / (rho * std::exp(s2e * t) - 1.0);
    }
};

inline RiccatiBound riccati_bound(double g0, double E) {
    if (!(E > 0.0)) throw InvalidHypothesisError("riccati_bound: need E > 0");
    const double s2e = std::sqrt(2.0) * E;
    if (!(g0 < -s2e))
        throw InvalidHypothesisError("riccati_bound: hypothesis g0 < -sqrt(2) E not met");
    RiccatiBound b;
    b.g0 = g0;
    b.E = E;
    b.T_bound = (std::sqrt(2.0) / (2.0 * E)) * std::log((g0 - s2e) / (g0 + s2e));
    return b;
}

/// Data certifying the finite-time bound: margin > 1 iff g0 < -sqrt(2) E.
struct BlowupCertificate {
    double g0 = 0.0;
    double E = 0.0;
    double T_bound = 0.0;
    double margin = 0.0;
    Point x0{0.0, 0.0, 0.0};
    DirectionSpec direction;
};

inline double blowup_margin(double g0, double E) {
    return -g0 / (std::sqrt(2.0) * E);
}

// ---- characteristic traces -------------------------------------------------

/// One traced characteristic: positions of Phi(t, x0) and the slope
/// g(t) = d_e (e . u) (t, Phi(t, x0)) sampled at accepted steps.
struct CharTrace {
    Point x0{0.0, 0.0, 0.0};
    DirectionSpec direction;
    std::vector<double> times;
    std::vector<Point> positions;
    std::vector<double> g_values;
};

inline Point wrap_point(const Grid& g, Point x) {
    for (int a = 0; a < g.dim(); a++) {
        const double L = g.length(a);
        x[std::size_t(a)] -= L * std::floor(x[std::size_t(a)] / L);
    }
    return x;
}

}  // namespace epflow

#endif
