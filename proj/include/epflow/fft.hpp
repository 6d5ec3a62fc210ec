#ifndef EPFLOW_FFT_HPP
#define EPFLOW_FFT_HPP

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "grid.hpp"

namespace epflow {

/// Signed mode index for bin i of an n-point axis: 0..n/2, then negative.
inline int signed_mode(int i, int n) { return i <= n / 2 ? i : i - n; }

constexpr double two_pi = 6.283185307179586476925286766559;

/// Half-complex spectrum of a real field, real-to-complex layout: the last
/// axis holds bins 0..n/2, the others all n bins. Coefficients are
/// normalized so that f(x) = sum_k c_k exp(i 2*pi k.x/L) with the implied
/// Hermitian completion.
struct Spectrum {
    Grid grid;
    std::vector<std::complex<double>> c;

    int bins(int axis) const {
        return axis == grid.dim() - 1 ? grid.n(axis) / 2 + 1 : grid.n(axis);
    }
    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < grid.dim(); a++) s *= std::size_t(bins(a));
        return s;
    }
};

/// Visits every spectral bin as (flat, k1, k2, k3) with signed mode indices.
template <class F>
inline void for_each_mode(const Spectrum& s, F&& f) {
    const Grid& g = s.grid;
    const int d = g.dim();
    const int b1 = s.bins(0), b2 = d > 1 ? s.bins(1) : 1, b3 = d > 2 ? s.bins(2) : 1;
    std::size_t flat = 0;
    for (int i1 = 0; i1 < b1; i1++) {
        const int k1 = d == 1 ? i1 : signed_mode(i1, g.n(0));
        for (int i2 = 0; i2 < b2; i2++) {
            const int k2 = d == 2 ? i2 : (d > 1 ? signed_mode(i2, g.n(1)) : 0);
            for (int i3 = 0; i3 < b3; i3++, flat++) f(flat, k1, k2, d > 2 ? i3 : 0);
        }
    }
}

namespace detail {

struct PlanEntry {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* real_buf = nullptr;
    fftw_complex* cplx_buf = nullptr;
    std::size_t nreal = 0, ncplx = 0;
    std::mutex mtx;

    ~PlanEntry() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real_buf) fftw_free(real_buf);
        if (cplx_buf) fftw_free(cplx_buf);
    }
};

// FFTW planning is not thread safe; ESTIMATE keeps plan choice (and hence
// results) deterministic run to run.
inline PlanEntry& plan_for(const Grid& g) {
    static std::mutex cache_mtx;
    static std::map<std::array<int, 4>, std::unique_ptr<PlanEntry>> cache;

    std::array<int, 4> key{g.dim(), g.n(0), g.dim() > 1 ? g.n(1) : 1,
                           g.dim() > 2 ? g.n(2) : 1};
    std::lock_guard<std::mutex> lock(cache_mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;

    auto entry = std::make_unique<PlanEntry>();
    std::vector<int> dims;
    std::size_t nreal = 1, ncplx = 1;
    for (int a = 0; a < g.dim(); a++) {
        dims.push_back(g.n(a));
        nreal *= std::size_t(g.n(a));
        ncplx *= std::size_t(a == g.dim() - 1 ? g.n(a) / 2 + 1 : g.n(a));
    }
    entry->nreal = nreal;
    entry->ncplx = ncplx;
    entry->real_buf = static_cast<double*>(fftw_malloc(sizeof(double) * nreal));
    entry->cplx_buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * ncplx));
    entry->fwd = fftw_plan_dft_r2c(g.dim(), dims.data(), entry->real_buf, entry->cplx_buf,
                                   FFTW_ESTIMATE);
    entry->bwd = fftw_plan_dft_c2r(g.dim(), dims.data(), entry->cplx_buf, entry->real_buf,
                                   FFTW_ESTIMATE);
    auto& ref = *entry;
    cache[key] = std::move(entry);
    return ref;
}

}  // namespace detail

inline Spectrum fft_forward(const ScalarField& f) {
    auto& plan = detail::plan_for(f.grid);
    Spectrum out;
    out.grid = f.grid;
    out.c.resize(plan.ncplx);
    const double inv_n = 1.0 / double(plan.nreal);
    std::lock_guard<std::mutex> lock(plan.mtx);
    for (std::size_t i = 0; i < plan.nreal; i++) plan.real_buf[i] = f.values[i];
    fftw_execute(plan.fwd);
    for (std::size_t i = 0; i < plan.ncplx; i++)
        out.c[i] = std::complex<double>(plan.cplx_buf[i][0] * inv_n, plan.cplx_buf[i][1] * inv_n);
    return out;
}

inline ScalarField fft_inverse(const Spectrum& s) {
    auto& plan = detail::plan_for(s.grid);
    ScalarField out(s.grid);
    std::lock_guard<std::mutex> lock(plan.mtx);
    for (std::size_t i = 0; i < plan.ncplx; i++) {
        plan.cplx_buf[i][0] = s.c[i].real();
        plan.cplx_buf[i][1] = s.c[i].imag();
    }
    fftw_execute(plan.bwd);
    for (std::size_t i = 0; i < plan.nreal; i++) out.values[i] = plan.real_buf[i];
    return out;
}

}  // namespace epflow

#endif
