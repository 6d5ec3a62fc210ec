#ifndef EPFLOW_TEST_UTIL_HPP
#define EPFLOW_TEST_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "epflow/dynamics.hpp"
#include "epflow/spectral.hpp"

namespace test_util {

struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform(double lo = -1.0, double hi = 1.0) {
        return lo + (hi - lo) * double(next() >> 11) * 0x1.0p-53;
    }
};

/// Deterministic real field with spectrum confined to |k_a| <= kcap.
inline epflow::ScalarField random_band_limited(const epflow::Grid& g, std::uint64_t seed,
                                               int kcap) {
    Rng rng(seed);
    epflow::ScalarField zero(g);
    epflow::Spectrum s = epflow::fft_forward(zero);
    epflow::for_each_mode(s, [&](std::size_t flat, int k1, int k2, int k3) {
        const int ks[3] = {k1, k2, k3};
        int kmax = 0;
        for (int a = 0; a < g.dim(); a++) kmax = std::max(kmax, std::abs(ks[a]));
        if (kmax == 0 || kmax > kcap) return;
        s.c[flat] = std::complex<double>(rng.uniform(), rng.uniform()) /
                    (1.0 + double(kmax) * kmax);
    });
    return epflow::fft_inverse(s);
}

inline epflow::VectorField random_band_limited_vec(const epflow::Grid& g, std::uint64_t seed,
                                                   int kcap) {
    epflow::VectorField u(g);
    for (int i = 0; i < g.dim(); i++) u[i] = random_band_limited(g, seed * 931 + i, kcap);
    return u;
}

inline double max_abs_diff(const epflow::ScalarField& a, const epflow::ScalarField& b) {
    double m = 0.0;
    for (std::size_t q = 0; q < a.values.size(); q++)
        m = std::max(m, std::abs(a.values[q] - b.values[q]));
    return m;
}

inline double max_abs_diff(const epflow::VectorField& a, const epflow::VectorField& b) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); i++) m = std::max(m, max_abs_diff(a[i], b[i]));
    return m;
}

inline double max_abs(const epflow::VectorField& a) {
    double m = 0.0;
    for (const auto& c : a.comp)
        for (double v : c.values) m = std::max(m, std::abs(v));
    return m;
}

/// Scratch directory unique to the current test binary run.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("epflow_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace test_util

#endif
