#ifndef EPFLOW_PEAKON_HPP
#define EPFLOW_PEAKON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "diagnostics.hpp"
#include "grid.hpp"

namespace epflow {

// ---- the periodic peakon profile -------------------------------------------

/// Phi(z) = cosh(1/2 - z)/sinh(1/2) extended 1-periodically; kink at the
/// integers. Phi/2 is the Green function of 1 - d^2/dz^2 on the unit torus.
inline double phi_eval(double z) {
    double zz = z - std::floor(z);
    return std::cosh(0.5 - zz) / std::sinh(0.5);
}

namespace peakon_detail {

// branch evaluation on a closed period [0,1]: endpoints take the one-sided
// values, which is what kink-aligned quadrature needs
inline double phi_branch(double w) { return std::cosh(0.5 - w) / std::sinh(0.5); }
inline double dphi_branch(double w) { return -std::sinh(0.5 - w) / std::sinh(0.5); }

}  // namespace peakon_detail

/// Traveling-wave parameters: u^i = M Phi(a.x - C t) with a = z/|z| and the
/// speed pinned to C = coth(1/2) M sum_j a^j.
struct PeakonParams {
    double M = 1.0;
    DirectionSpec z;
    double C = 0.0;
    double sigma = 0.0;
};

inline PeakonParams make_peakon_params(double M, const DirectionSpec& z, double sigma = 0.0) {
    if (sigma < 0.0) throw std::invalid_argument("peakon: sigma must be >= 0");
    PeakonParams p;
    p.M = M;
    p.z = z;
    p.sigma = sigma;
    double asum = 0.0;
    for (int a = 0; a < z.d; a++) asum += z.e[std::size_t(a)];
    p.C = std::cosh(0.5) / std::sinh(0.5) * M * asum;
    return p;
}

/// Closed-form evaluation; all components coincide.
inline std::array<double, 3> peakon_field(const PeakonParams& p, double t, const Point& x) {
    double ax = 0.0;
    for (int a = 0; a < p.z.d; a++) ax += p.z.e[std::size_t(a)] * x[std::size_t(a)];
    const double v = p.M * phi_eval(ax - p.C * t);
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int a = 0; a < p.z.d; a++) out[std::size_t(a)] = v;
    return out;
}

// ---- deterministic test fields ----------------------------------------------

namespace peakon_detail {

struct SplitMix64 {
    std::uint64_t s;
    explicit SplitMix64(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo = -1.0, double hi = 1.0) {
        const double u = double(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }
};

}  // namespace peakon_detail

/// Smooth space-time test field phi^i(t,x) = q(t) psi^i(x): trig polynomial
/// of degree <= 3 per axis, temporal cubic with q(T) = 0 exactly.
class TestField {
  public:
    TestField(std::uint64_t seed, double T, int d) : T_(T), d_(d) {
        if (!(T > 0.0)) throw std::invalid_argument("TestField: T must be positive");
        if (d < 1 || d > 3) throw std::invalid_argument("TestField: d must be 1..3");
        peakon_detail::SplitMix64 rng(seed);
        q0_ = rng.uniform(0.5, 1.5);
        q1_ = rng.uniform();
        q2_ = rng.uniform();
        // representative modes: first nonzero entry positive, |k_a| <= 3
        const int kb = 3;
        std::array<int, 3> k{0, 0, 0};
        const auto push = [&](std::array<int, 3> kk) { modes_.push_back(kk); };
        if (d == 1) {
            for (k[0] = 1; k[0] <= kb; k[0]++) push(k);
        } else if (d == 2) {
            for (k[0] = 0; k[0] <= kb; k[0]++)
                for (k[1] = -kb; k[1] <= kb; k[1]++) {
                    if (k[0] == 0 && k[1] <= 0) continue;
                    push(k);
                }
        } else {
            for (k[0] = 0; k[0] <= kb; k[0]++)
                for (k[1] = -kb; k[1] <= kb; k[1]++)
                    for (k[2] = -kb; k[2] <= kb; k[2]++) {
                        if (k[0] == 0 && (k[1] < 0 || (k[1] == 0 && k[2] <= 0))) continue;
                        push(k);
                    }
        }
        coef_.resize(std::size_t(d));
        for (int i = 0; i < d; i++) {
            auto& ci = coef_[std::size_t(i)];
            ci.resize(modes_.size());
            for (std::size_t m = 0; m < modes_.size(); m++) {
                double k2 = 0.0;
                for (int a = 0; a < d; a++) k2 += double(modes_[m][std::size_t(a)]) * modes_[m][std::size_t(a)];
                const double damp = 1.0 / (1.0 + k2);
                ci[m] = {rng.uniform() * damp, rng.uniform() * damp};
            }
            const_.push_back(rng.uniform());
        }
    }

    double horizon() const { return T_; }
    int dim() const { return d_; }

    double q(double t) const { return (T_ - t) * (q0_ + q1_ * t + q2_ * t * t); }
    double dq(double t) const {
        return -(q0_ + q1_ * t + q2_ * t * t) + (T_ - t) * (q1_ + 2.0 * q2_ * t);
    }

    struct SpatialEval {
        std::array<double, 3> psi{};                  // psi^i
        std::array<std::array<double, 3>, 3> dpsi{};  // dpsi[i][j] = d_j psi^i
        std::array<std::array<double, 3>, 3> d2ax{};  // d2ax[i][j] = d_j d_ax psi^i
    };

    /// All spatial values and the derivatives the weak form needs, with the
    /// mixed second derivatives taken against axis `ax`.
    SpatialEval spatial(const Point& x, int ax) const {
        SpatialEval ev;
        for (int i = 0; i < d_; i++) ev.psi[std::size_t(i)] = const_[std::size_t(i)];
        for (std::size_t m = 0; m < modes_.size(); m++) {
            double theta = 0.0;
            for (int a = 0; a < d_; a++)
                theta += two_pi * modes_[m][std::size_t(a)] * x[std::size_t(a)];
            const double c = std::cos(theta), s = std::sin(theta);
            const double kax = two_pi * modes_[m][std::size_t(ax)];
            for (int i = 0; i < d_; i++) {
                const double al = coef_[std::size_t(i)][m].first;
                const double be = coef_[std::size_t(i)][m].second;
                const double val = al * c + be * s;
                const double osc = -al * s + be * c;  // d(val)/dtheta
                ev.psi[std::size_t(i)] += val;
                for (int j = 0; j < d_; j++) {
                    const double kj = two_pi * modes_[m][std::size_t(j)];
                    ev.dpsi[std::size_t(i)][std::size_t(j)] += kj * osc;
                    ev.d2ax[std::size_t(i)][std::size_t(j)] -= kj * kax * val;
                }
            }
        }
        return ev;
    }

    bool same_coefficients(const TestField& o) const {
        return q0_ == o.q0_ && q1_ == o.q1_ && q2_ == o.q2_ && const_ == o.const_ &&
               coef_ == o.coef_;
    }

    void scale(double alpha) {
        q0_ *= alpha;
        q1_ *= alpha;
        q2_ *= alpha;
    }

  private:
    double T_;
    int d_;
    double q0_, q1_, q2_;
    std::vector<std::array<int, 3>> modes_;
    std::vector<std::vector<std::pair<double, double>>> coef_;
    std::vector<double> const_;
};

inline TestField make_test_field(std::uint64_t seed, double T, int d = 2) {
    return TestField(seed, T, d);
}

// ---- weak-form residual ------------------------------------------------------

struct WeakFormOptions {
    bool align_kinks = true;     // split the time quadrature at kink crossings
    double cell_offset = 0.0;    // shift of the spatial cells, in cell units
    bool literal_transport = false;  // evaluate the (first-derivative) variant
                                     // of the transport term instead of the
                                     // second-derivative form
};

struct WeakResidual {
    double residual = 0.0;
    double scale = 0.0;
    double I_time = 0.0;     // int u.phi_t + grad u : grad phi_t
    double I_initial = 0.0;  // initial-data term
    double I_tensor = 0.0;   // bounded tensor against grad phi
    double I_transport = 0.0;
};

namespace peakon_detail {

constexpr double gl2_node = 0.28867513459481288225;  // 1/(2 sqrt(3))

struct TimePiece {
    double a, b;
    double branch;  // integer part of (y - C t) on the piece
};

inline std::vector<TimePiece> time_pieces(double y, double C, double T, bool align) {
    std::vector<TimePiece> pieces;
    std::vector<double> cuts{0.0, T};
    if (align && C != 0.0) {
        // kink times: y - C t integer
        const double w0 = y, w1 = y - C * T;
        const double lo = std::min(w0, w1), hi = std::max(w0, w1);
        for (long m = long(std::ceil(lo)); m <= long(std::floor(hi)); m++) {
            const double t = (y - double(m)) / C;
            if (t > 1e-14 && t < T - 1e-14) cuts.push_back(t);
        }
        std::sort(cuts.begin(), cuts.end());
    }
    for (std::size_t q = 0; q + 1 < cuts.size(); q++) {
        TimePiece p;
        p.a = cuts[q];
        p.b = cuts[q + 1];
        p.branch = std::floor(y - C * 0.5 * (p.a + p.b));
        pieces.push_back(p);
    }
    return pieces;
}

}  // namespace peakon_detail

/// Evaluates the four space-time integrals of the distributional form of the
/// momentum equation for the exact peakon against a test field, using
/// kink-aligned composite quadrature: 2-point Gauss-Legendre cells in space
/// and composite Simpson in time with the kink crossings as breakpoints.
/// The residual of a genuine weak solution converges to zero with the cells.
inline WeakResidual weak_residual(const PeakonParams& params, const TestField& testfield,
                                  int cells_per_axis, const WeakFormOptions& opts = {}) {
    if (params.sigma != 0.0)
        throw std::invalid_argument("weak_residual: exact peakon required (sigma = 0)");
    if (cells_per_axis < 4)
        throw std::invalid_argument("weak_residual: need cells_per_axis >= 4");
    const int d = params.z.d;
    if (testfield.dim() != d) throw std::invalid_argument("weak_residual: dimension mismatch");
    int ax = -1;
    for (int a = 0; a < d; a++) {
        if (params.z.z[std::size_t(a)] == 0) continue;
        if (ax >= 0 || params.z.z[std::size_t(a)] != 1)
            throw std::invalid_argument(
                "weak_residual: direction must be a positive coordinate axis");
        ax = a;
    }
    const double M = params.M, C = params.C, T = testfield.horizon();

    const int nc = cells_per_axis;
    const double h = 1.0 / nc;
    const double off = opts.cell_offset * h;
    // transverse axes: uniform cells, 2-point Gauss-Legendre
    std::vector<double> nodes, weights;
    for (int c = 0; c < nc; c++) {
        const double mid = off + (c + 0.5) * h;
        nodes.push_back(mid - peakon_detail::gl2_node * h);
        nodes.push_back(mid + peakon_detail::gl2_node * h);
        weights.push_back(0.5 * h);
        weights.push_back(0.5 * h);
    }
    // the kink axis gets extra cell boundaries where the time-domain kink
    // structure changes: the t = 0 entry locus y = 0 is already a boundary,
    // the t = T exit locus sits at frac(C T)
    std::vector<double> ynodes, yweights;
    {
        std::vector<double> cuts;
        for (int c = 0; c <= nc; c++) cuts.push_back(off + c * h);
        if (opts.align_kinks) {
            const double ystar = C * T - std::floor(C * T);
            for (const auto& cut : std::vector<double>{ystar}) {
                bool fresh = cut > 1e-12 && cut < 1.0 - 1e-12;
                for (double b : cuts)
                    if (std::abs(b - cut) < 1e-12) fresh = false;
                if (fresh) cuts.push_back(cut);
            }
            std::sort(cuts.begin(), cuts.end());
        }
        for (std::size_t c = 0; c + 1 < cuts.size(); c++) {
            const double a = cuts[c], b = cuts[c + 1];
            const double hc = b - a, mid = 0.5 * (a + b);
            ynodes.push_back(mid - peakon_detail::gl2_node * hc);
            ynodes.push_back(mid + peakon_detail::gl2_node * hc);
            yweights.push_back(0.5 * hc);
            yweights.push_back(0.5 * hc);
        }
    }

    const double h_t = 1.0 / (2.0 * nc * std::max(std::abs(C), 1.0));

    WeakResidual acc;

    // iterate the transverse lattice (all axes except ax)
    std::vector<int> tidx(std::size_t(d > 1 ? d - 1 : 0), 0);
    const int tn = int(nodes.size());
    const std::size_t transverse_count = d > 1 ? std::size_t(std::pow(double(tn), d - 1)) : 1;

    for (std::size_t tc = 0; tc < transverse_count; tc++) {
        // decode transverse node indices
        std::size_t rem = tc;
        double wt = 1.0;
        Point x{0.0, 0.0, 0.0};
        for (int a = 0, slot = 0; a < d; a++) {
            if (a == ax) continue;
            const int id = int(rem % std::size_t(tn));
            rem /= std::size_t(tn);
            x[std::size_t(a)] = nodes[std::size_t(id)];
            wt *= weights[std::size_t(id)];
            tidx[std::size_t(slot++)] = id;
        }
        for (std::size_t yi = 0; yi < ynodes.size(); yi++) {
            const double y = ynodes[yi];
            const double wy = yweights[yi] * wt;
            x[std::size_t(ax)] = y;

            // initial-data term at t = 0 (branch is floor(y): y in (0,1))
            {
                const double w = y - std::floor(y);
                const double Phi = peakon_detail::phi_branch(w);
                const double dPhi = peakon_detail::dphi_branch(w);
                const TestField::SpatialEval ev = testfield.spatial(x, ax);
                const double q0 = testfield.q(0.0);
                double sum_psi = 0.0, sum_dax = 0.0;
                for (int i = 0; i < d; i++) {
                    sum_psi += ev.psi[std::size_t(i)];
                    sum_dax += ev.dpsi[std::size_t(i)][std::size_t(ax)];
                }
                acc.I_initial += wy * (M * Phi * q0 * sum_psi + M * dPhi * q0 * sum_dax);
            }

            const TestField::SpatialEval ev = testfield.spatial(x, ax);
            double sum_psi = 0.0, sum_dax = 0.0, s_all = 0.0, s_div = 0.0, s_d2 = 0.0;
            double dax_ax = 0.0, s_dax_psi_ax = 0.0;
            for (int i = 0; i < d; i++) {
                sum_psi += ev.psi[std::size_t(i)];
                sum_dax += ev.dpsi[std::size_t(i)][std::size_t(ax)];
                for (int j = 0; j < d; j++) {
                    s_all += ev.dpsi[std::size_t(i)][std::size_t(j)];
                    s_d2 += ev.d2ax[std::size_t(i)][std::size_t(j)];
                }
                s_div += ev.dpsi[std::size_t(i)][std::size_t(i)];
                s_dax_psi_ax += ev.dpsi[std::size_t(ax)][std::size_t(i)];
            }
            dax_ax = ev.dpsi[std::size_t(ax)][std::size_t(ax)];

            // time integrand at fixed x; spatial factors above are constant in t
            const auto integrand = [&](double t, double branch, double& time_part,
                                       double& tensor_part, double& transport_part) {
                const double w = y - C * t - branch;
                const double Phi = peakon_detail::phi_branch(w);
                const double dPhi = peakon_detail::dphi_branch(w);
                const double dq = testfield.dq(t);
                const double q = testfield.q(t);
                time_part = M * Phi * dq * sum_psi + M * dPhi * dq * sum_dax;
                const double p2 = Phi * Phi + dPhi * dPhi;
                tensor_part = M * M * q * (p2 * (s_all + 0.5 * d * s_div) -
                                           double(d) * dPhi * dPhi * dax_ax);
                if (opts.literal_transport)
                    transport_part = double(d) * M * M * Phi * dPhi * q * s_dax_psi_ax;
                else
                    transport_part = M * M * Phi * dPhi * q * s_d2;
            };

            for (const auto& piece :
                 peakon_detail::time_pieces(y, C, T, opts.align_kinks)) {
                const double len = piece.b - piece.a;
                const int half = std::max(1, int(std::ceil(len / (2.0 * h_t))));
                const int nsub = 2 * half;
                const double ht = len / nsub;
                double s_time = 0.0, s_tensor = 0.0, s_transport = 0.0;
                for (int m = 0; m <= nsub; m++) {
                    const double t = piece.a + m * ht;
                    double a1, a2, a3;
                    integrand(t, piece.branch, a1, a2, a3);
                    const double w = (m == 0 || m == nsub) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
                    s_time += w * a1;
                    s_tensor += w * a2;
                    s_transport += w * a3;
                }
                const double f = ht / 3.0;
                acc.I_time += wy * f * s_time;
                acc.I_tensor += wy * f * s_tensor;
                acc.I_transport += wy * f * s_transport;
            }
        }
    }

    acc.scale = std::abs(acc.I_time) + std::abs(acc.I_initial) + std::abs(acc.I_tensor) +
                std::abs(acc.I_transport);
    acc.residual = std::abs(acc.I_time + acc.I_initial + acc.I_tensor + acc.I_transport);
    return acc;
}

/// Richardson extrapolation of the residual from the two finest of three
/// nested cell counts; also reports the observed order.
struct ResidualStudy {
    std::array<double, 3> residual{};
    double order = 0.0;
    double extrapolated = 0.0;
    double scale = 0.0;
};

inline ResidualStudy residual_study(const PeakonParams& params, const TestField& tf,
                                    std::array<int, 3> cells, const WeakFormOptions& opts = {}) {
    ResidualStudy st;
    double signed_r[3];
    for (int i = 0; i < 3; i++) {
        const WeakResidual r = weak_residual(params, tf, cells[std::size_t(i)], opts);
        signed_r[i] = r.I_time + r.I_initial + r.I_tensor + r.I_transport;
        st.residual[std::size_t(i)] = r.residual;
        st.scale = std::max(st.scale, r.scale);
    }
    const double d01 = std::abs(signed_r[1] - signed_r[0]);
    const double d12 = std::abs(signed_r[2] - signed_r[1]);
    st.order = (d12 > 0.0 && d01 > 0.0) ? std::log2(d01 / d12) : 8.0;
    // Richardson on the finest pair at the scheme's design order (GL2 cells
    // and composite Simpson are both fourth order on the aligned pieces)
    st.extrapolated = std::abs(signed_r[2] + (signed_r[2] - signed_r[1]) / 15.0);
    return st;
}

}  // namespace epflow

#endif
