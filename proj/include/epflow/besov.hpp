#ifndef EPFLOW_BESOV_HPP
#define EPFLOW_BESOV_HPP

#include <cmath>
#include <vector>

#include "spectral.hpp"

namespace epflow {

// Littlewood-Paley machinery on the integer mode lattice. Frequencies are
// mode indices k in Z^d regardless of the grid period, so the dyadic
// scalings match the 2*pi-convention statements they implement.

namespace lp {

inline double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

/// Smooth step: 1 at t<=0 falling to 0 at t>=1.
inline double smooth_step_down(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = bump(1.0 - t), b = bump(t);
    return a / (a + b);
}

constexpr double eta_plateau = 1.25;  // eta == 1 for |xi| <= 5/4
constexpr double eta_support = 1.6;   // eta == 0 for |xi| >= 8/5

/// Radial cutoff: even, smooth, 1 on [0, 5/4], supported in [0, 8/5].
inline double eta(double rho) {
    rho = std::abs(rho);
    return smooth_step_down((rho - eta_plateau) / (eta_support - eta_plateau));
}

/// Annular bump phi(xi) = eta(xi/2) - eta(xi); phi >= 0 and
/// eta(xi) + sum_{j>=0} phi(2^-j xi) = 1.
inline double phi(double rho) { return eta(rho / 2.0) - eta(rho); }

/// Block multiplier at mode radius rho for block index j >= -1.
inline double block_symbol(int j, double rho) {
    return j < 0 ? eta(rho) : phi(rho / std::ldexp(1.0, j));
}

/// Low-frequency symbol of S_j = sum_{j' < j} Delta_{j'}; telescopes to
/// eta(2^-j rho) for j >= 0 and vanishes for j <= -1.
inline double cutoff_symbol(int j, double rho) {
    return j < 0 ? 0.0 : eta(rho / std::ldexp(1.0, j));
}

inline double mode_radius(int k1, int k2, int k3) {
    return std::sqrt(double(k1) * k1 + double(k2) * k2 + double(k3) * k3);
}

/// Largest block index that can intersect the grid's mode lattice.
inline int max_block(const Grid& g) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); a++) r2 += 0.25 * double(g.n(a)) * g.n(a);
    const double rmax = std::sqrt(r2);
    int j = 0;
    while (eta_plateau * std::ldexp(1.0, j) <= rmax) j++;
    return j;  // blocks beyond this are identically zero
}

}  // namespace lp

struct BesovParams {
    double s = 1.0;
    double p = std::numeric_limits<double>::infinity();
    double r = std::numeric_limits<double>::infinity();

    BesovParams() = default;
    BesovParams(double s_, double p_, double r_) : s(s_), p(p_), r(r_) {
        if (!(p >= 1.0) || !(r >= 1.0))
            throw std::invalid_argument("BesovParams: need p, r in [1, inf]");
    }
};

inline Spectrum dyadic_block_spectrum(const Spectrum& f, int j) {
    if (j < -1) throw std::invalid_argument("dyadic_block: need j >= -1");
    Spectrum out = f;
    for_each_mode(out, [&](std::size_t flat, int k1, int k2, int k3) {
        out.c[flat] *= lp::block_symbol(j, lp::mode_radius(k1, k2, k3));
    });
    return out;
}

/// Frequency-localized piece Delta_j f; j = -1 is the eta-ball block.
inline ScalarField dyadic_block(const ScalarField& f, int j) {
    if (j < -1) throw std::invalid_argument("dyadic_block: need j >= -1");
    if (j > lp::max_block(f.grid)) return ScalarField(f.grid);
    return fft_inverse(dyadic_block_spectrum(fft_forward(f), j));
}

/// S_j f = sum_{j' < j} Delta_{j'} f.
inline ScalarField low_freq_cutoff(const ScalarField& f, int j) {
    if (j < 0) return ScalarField(f.grid);
    Spectrum s = fft_forward(f);
    for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        s.c[flat] *= lp::cutoff_symbol(j, lp::mode_radius(k1, k2, k3));
    });
    return fft_inverse(s);
}

/// Per-block L^p norms ||Delta_j f||_p for j = -1 .. max_block.
inline std::vector<double> block_lp_norms(const ScalarField& f, double p) {
    const int jmax = lp::max_block(f.grid);
    Spectrum s = fft_forward(f);
    std::vector<double> out;
    out.reserve(std::size_t(jmax + 2));
    for (int j = -1; j <= jmax; j++)
        out.push_back(lp_norm(fft_inverse(dyadic_block_spectrum(s, j)), p));
    return out;
}

/// ||f||_{B^s_{p,r}} with the l^r sum over j = -1 .. max_block; the j = -1
/// term carries weight 2^{-s}.
inline double besov_norm(const ScalarField& f, const BesovParams& params) {
    const std::vector<double> blocks = block_lp_norms(f, params.p);
    double acc = 0.0;
    for (int j = -1; j < int(blocks.size()) - 1; j++) {
        const double a = std::pow(2.0, params.s * j) * blocks[std::size_t(j + 1)];
        if (std::isinf(params.r))
            acc = std::max(acc, a);
        else
            acc += std::pow(a, params.r);
    }
    return std::isinf(params.r) ? acc : std::pow(acc, 1.0 / params.r);
}

/// Vector fields take the max over components.
inline double besov_norm(const VectorField& u, const BesovParams& params) {
    double m = 0.0;
    for (const auto& c : u.comp) m = std::max(m, besov_norm(c, params));
    return m;
}

}  // namespace epflow

#endif
