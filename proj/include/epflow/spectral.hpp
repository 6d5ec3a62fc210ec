#ifndef EPFLOW_SPECTRAL_HPP
#define EPFLOW_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "fft.hpp"
#include "grid.hpp"

namespace epflow {

/// Physical wavenumber of signed mode k on axis `axis`.
inline double wavenumber(const Grid& g, int axis, int k) {
    return two_pi * double(k) / g.length(axis);
}

// ---- spectrum-level operators ----------------------------------------

/// d/dx_axis as the multiplier i*(2*pi*k/L). The Nyquist mode is zeroed:
/// an odd symbol has no real-valued representative there.
inline void grad_in_place(Spectrum& s, int axis) {
    const Grid& g = s.grid;
    const int nyq = g.n(axis) / 2;
    for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        const int k = axis == 0 ? k1 : (axis == 1 ? k2 : k3);
        if (k == nyq || k == -nyq) {
            s.c[flat] = 0.0;
        } else {
            s.c[flat] *= std::complex<double>(0.0, wavenumber(g, axis, k));
        }
    });
}

inline double helmholtz_symbol(const Grid& g, int k1, int k2, int k3) {
    double sym = 1.0;
    const int ks[3] = {k1, k2, k3};
    for (int a = 0; a < g.dim(); a++) {
        const double w = wavenumber(g, a, ks[a]);
        sym += w * w;
    }
    return sym;
}

inline void helmholtz_apply_in_place(Spectrum& s) {
    for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        s.c[flat] *= helmholtz_symbol(s.grid, k1, k2, k3);
    });
}

inline void helmholtz_invert_in_place(Spectrum& s) {
    for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        s.c[flat] /= helmholtz_symbol(s.grid, k1, k2, k3);
    });
}

inline bool mode_kept_by_dealias(const Grid& g, int k1, int k2, int k3) {
    const int ks[3] = {k1, k2, k3};
    for (int a = 0; a < g.dim(); a++)
        if (3 * std::abs(ks[a]) > g.n(a)) return false;
    return true;
}

/// 2/3-rule mask: zero every mode with |k_a| > n_a/3 on any axis.
inline void dealias_in_place(Spectrum& s) {
    for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        if (!mode_kept_by_dealias(s.grid, k1, k2, k3)) s.c[flat] = 0.0;
    });
}

// ---- field-level operators --------------------------------------------

inline ScalarField grad(const ScalarField& f, int axis) {
    if (axis < 0 || axis >= f.grid.dim()) throw std::invalid_argument("grad: axis out of range");
    Spectrum s = fft_forward(f);
    grad_in_place(s, axis);
    return fft_inverse(s);
}

inline ScalarField helmholtz_apply(const ScalarField& f) {
    Spectrum s = fft_forward(f);
    helmholtz_apply_in_place(s);
    return fft_inverse(s);
}

inline ScalarField helmholtz_invert(const ScalarField& f) {
    Spectrum s = fft_forward(f);
    helmholtz_invert_in_place(s);
    return fft_inverse(s);
}

inline ScalarField dealias(const ScalarField& f) {
    Spectrum s = fft_forward(f);
    dealias_in_place(s);
    return fft_inverse(s);
}

/// L^p norm by the equal-weight grid quadrature; p = infinity gives the
/// sample max.
inline double lp_norm(const ScalarField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: need p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    const double w = f.grid.cell_volume();
    double acc = 0.0;
    if (p == 2.0) {
        for (double v : f.values) acc += v * v;
    } else if (p == 1.0) {
        for (double v : f.values) acc += std::abs(v);
    } else {
        for (double v : f.values) acc += std::pow(std::abs(v), p);
    }
    return std::pow(acc * w, 1.0 / p);
}

inline double l2_norm(const ScalarField& f) { return lp_norm(f, 2.0); }

inline double linf_norm(const VectorField& u) {
    double m = 0.0;
    for (const auto& c : u.comp)
        for (double v : c.values) m = std::max(m, std::abs(v));
    return m;
}

// ---- trigonometric interpolation ---------------------------------------

/// Exact Fourier-series evaluation of a grid field at arbitrary points.
/// Nyquist modes contribute through the cosine representative, which keeps
/// values real and reproduces the stored samples at grid nodes.
class TrigInterpolant {
  public:
    explicit TrigInterpolant(const ScalarField& f) : spec_(fft_forward(f)) {}
    explicit TrigInterpolant(Spectrum s) : spec_(std::move(s)) {}

    double operator()(const Point& x) const {
        const Grid& g = spec_.grid;
        const int d = g.dim();
        std::array<std::vector<std::complex<double>>, 3> phase;
        for (int a = 0; a < d; a++) {
            const int bins = spec_.bins(a);
            phase[a].resize(std::size_t(bins));
            const int nyq = g.n(a) / 2;
            for (int i = 0; i < bins; i++) {
                const int k = (a == d - 1) ? i : signed_mode(i, g.n(a));
                const double theta = wavenumber(g, a, k) * x[a];
                if (std::abs(k) == nyq)
                    phase[a][std::size_t(i)] = std::complex<double>(std::cos(theta), 0.0);
                else
                    phase[a][std::size_t(i)] = std::polar(1.0, theta);
            }
        }
        // Hermitian half-spectrum: last-axis bins strictly inside (0, n/2)
        // stand for a conjugate pair.
        const int last = d - 1;
        const int nlast_half = g.n(last) / 2;
        std::complex<double> total = 0.0;
        std::size_t flat = 0;
        const int b1 = spec_.bins(0);
        const int b2 = d > 1 ? spec_.bins(1) : 1;
        const int b3 = d > 2 ? spec_.bins(2) : 1;
        for (int i1 = 0; i1 < b1; i1++) {
            const std::complex<double> p1 = phase[0][std::size_t(i1)];
            for (int i2 = 0; i2 < b2; i2++) {
                const std::complex<double> p12 = d > 1 ? p1 * phase[1][std::size_t(i2)] : p1;
                for (int i3 = 0; i3 < b3; i3++, flat++) {
                    const int ilast = d == 1 ? i1 : (d == 2 ? i2 : i3);
                    const double w = (ilast > 0 && ilast < nlast_half) ? 2.0 : 1.0;
                    const std::complex<double> p =
                        d > 2 ? p12 * phase[2][std::size_t(i3)] : p12;
                    total += w * spec_.c[flat] * p;
                }
            }
        }
        return total.real();
    }

    const Spectrum& spectrum() const { return spec_; }

  private:
    Spectrum spec_;
};

/// One-shot band-limited interpolation; prefer TrigInterpolant for many
/// evaluations of the same field.
inline double eval_at(const ScalarField& f, const Point& x) {
    for (int a = 0; a < f.grid.dim(); a++)
        if (!std::isfinite(x[a])) throw std::invalid_argument("eval_at: point must be finite");
    return TrigInterpolant(f)(x);
}

/// Parseval check value: sum_k |c_k|^2 * vol with the Hermitian doubling.
inline double spectral_l2_squared(const Spectrum& s) {
    const Grid& g = s.grid;
    const int last = g.dim() - 1;
    const int nlast_half = g.n(last) / 2;
    double acc = 0.0;
    const int b1 = s.bins(0);
    const int b2 = g.dim() > 1 ? s.bins(1) : 1;
    const int b3 = g.dim() > 2 ? s.bins(2) : 1;
    std::size_t flat = 0;
    for (int i1 = 0; i1 < b1; i1++)
        for (int i2 = 0; i2 < b2; i2++)
            for (int i3 = 0; i3 < b3; i3++, flat++) {
                const int ilast = g.dim() == 1 ? i1 : (g.dim() == 2 ? i2 : i3);
                const double w = (ilast > 0 && ilast < nlast_half) ? 2.0 : 1.0;
                acc += w * std::norm(s.c[flat]);
            }
    return acc * g.volume();
}

}  // namespace epflow

#endif
