#ifndef EPFLOW_GRID_HPP
#define EPFLOW_GRID_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace epflow {

using Point = std::array<double, 3>;

/// Uniform rectangular grid on the d-torus, d in 1..3.
///
/// Samples are stored row-major with the last axis fastest, axis order
/// x1..xd. Periods are per-axis so that both the unit-period and the
/// 2*pi conventions coexist.
class Grid {
  public:
    static constexpr std::size_t default_point_cap = std::size_t(1) << 24;

    Grid() = default;

    Grid(int d, std::array<int, 3> n, std::array<double, 3> length,
         std::size_t point_cap = default_point_cap)
        : d_(d), n_(n), len_(length) {
        if (d < 1 || d > 3) throw std::invalid_argument("Grid: d must be 1, 2 or 3");
        std::size_t total = 1;
        for (int a = 0; a < d_; a++) {
            if (n_[a] < 8 || n_[a] % 2 != 0)
                throw std::invalid_argument("Grid: points per axis must be even and >= 8");
            if (!(len_[a] > 0.0) || !std::isfinite(len_[a]))
                throw std::invalid_argument("Grid: period must be positive and finite");
            total *= std::size_t(n_[a]);
        }
        for (int a = d_; a < 3; a++) { n_[a] = 1; len_[a] = 1.0; }
        if (total > point_cap)
            throw std::invalid_argument("Grid: total point count " + std::to_string(total) +
                                        " exceeds cap " + std::to_string(point_cap));
        size_ = total;
    }

    /// Cubic grid, n points per axis, uniform period L.
    static Grid uniform(int d, int n, double L) {
        return Grid(d, {n, n, n}, {L, L, L});
    }

    int dim() const { return d_; }
    int n(int axis) const { return n_[axis]; }
    double length(int axis) const { return len_[axis]; }
    double spacing(int axis) const { return len_[axis] / n_[axis]; }
    std::size_t size() const { return size_; }

    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < d_; a++) v *= spacing(a);
        return v;
    }
    double volume() const {
        double v = 1.0;
        for (int a = 0; a < d_; a++) v *= len_[a];
        return v;
    }
    double min_spacing() const {
        double h = spacing(0);
        for (int a = 1; a < d_; a++) h = std::min(h, spacing(a));
        return h;
    }

    /// Flat index of the sample (i1,..,id), last axis fastest.
    std::size_t index(std::array<int, 3> i) const {
        std::size_t idx = 0;
        for (int a = 0; a < d_; a++) idx = idx * std::size_t(n_[a]) + std::size_t(i[a]);
        return idx;
    }

    Point coord(std::array<int, 3> i) const {
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < d_; a++) x[a] = i[a] * spacing(a);
        return x;
    }

    bool operator==(const Grid& o) const {
        if (d_ != o.d_) return false;
        for (int a = 0; a < d_; a++)
            if (n_[a] != o.n_[a] || len_[a] != o.len_[a]) return false;
        return true;
    }
    bool operator!=(const Grid& o) const { return !(*this == o); }

  private:
    int d_ = 0;
    std::array<int, 3> n_{1, 1, 1};
    std::array<double, 3> len_{1.0, 1.0, 1.0};
    std::size_t size_ = 0;
};

/// Real scalar samples on a Grid.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}

    double& at(std::array<int, 3> i) { return values[grid.index(i)]; }
    double at(std::array<int, 3> i) const { return values[grid.index(i)]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Visits every sample index of `g` as (flat, i1, i2, i3).
template <class F>
inline void for_each_index(const Grid& g, F&& f) {
    const int n1 = g.n(0), n2 = g.dim() > 1 ? g.n(1) : 1, n3 = g.dim() > 2 ? g.n(2) : 1;
    std::size_t flat = 0;
    for (int i1 = 0; i1 < n1; i1++)
        for (int i2 = 0; i2 < n2; i2++)
            for (int i3 = 0; i3 < n3; i3++, flat++) f(flat, i1, i2, i3);
}

/// Samples f(x) over the grid.
template <class F>
inline ScalarField sample(const Grid& g, F&& f) {
    ScalarField out(g);
    for_each_index(g, [&](std::size_t flat, int i1, int i2, int i3) {
        out.values[flat] = f(g.coord({i1, i2, i3}));
    });
    return out;
}

/// d scalar components sharing one grid.
struct VectorField {
    Grid grid;
    std::vector<ScalarField> comp;

    VectorField() = default;
    explicit VectorField(const Grid& g) : grid(g), comp(std::size_t(g.dim()), ScalarField(g)) {}

    int dim() const { return grid.dim(); }
    ScalarField& operator[](int i) { return comp[std::size_t(i)]; }
    const ScalarField& operator[](int i) const { return comp[std::size_t(i)]; }

    bool all_finite() const {
        for (const auto& c : comp)
            if (!c.all_finite()) return false;
        return true;
    }
};

inline VectorField zero_vector_field(const Grid& g) { return VectorField(g); }

}  // namespace epflow

#endif
