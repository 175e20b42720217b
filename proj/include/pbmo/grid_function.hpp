#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dyadic.hpp"
#include "errors.hpp"

namespace pbmo {

/// Compensated (Kahan) sum; keeps mass sums deterministic and tight.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

// ---------------------------------------------------------------------------
// A real step function on [0,1)^N, constant on the finest dyadic cells of its
// grid.  Values are stored row-major in grid-local cell order; every integral
// below is an exact finite sum over cells.
// ---------------------------------------------------------------------------

class GridFunction {
public:
    GridFunction() = default;

    explicit GridFunction(Grid grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(grid_.cells(), fill) {}

    GridFunction(Grid grid, std::vector<double> values)
        : grid_(std::move(grid)), v_(std::move(values)) {
        if (v_.size() != grid_.cells()) throw ArgumentError("value count does not match grid");
    }

    const Grid& grid() const { return grid_; }
    std::uint64_t size() const { return v_.size(); }
    double operator[](std::uint64_t cell) const { return v_[cell]; }
    double& operator[](std::uint64_t cell) { return v_[cell]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    double mean() const {
        KahanSum s;
        for (double x : v_) s.add(x);
        return s.value() / static_cast<double>(v_.size());
    }

    double integral() const { return mean(); }

    double l2_norm_sq() const {
        KahanSum s;
        for (double x : v_) s.add(x * x);
        return s.value() * grid_.cell_measure();
    }

    double l2_norm() const { return std::sqrt(l2_norm_sq()); }

    double sup_norm() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::fabs(x));
        return m;
    }

    GridFunction& operator+=(const GridFunction& o) {
        require_same_grid(o);
        for (std::uint64_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
        return *this;
    }
    GridFunction& operator-=(const GridFunction& o) {
        require_same_grid(o);
        for (std::uint64_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
        return *this;
    }
    GridFunction& operator*=(double c) {
        for (double& x : v_) x *= c;
        return *this;
    }
    GridFunction& operator+=(double c) {
        for (double& x : v_) x += c;
        return *this;
    }

    friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
    friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
    friend GridFunction operator*(double c, GridFunction f) { return f *= c; }
    friend GridFunction operator*(GridFunction f, double c) { return f *= c; }

    void require_same_grid(const GridFunction& o) const {
        if (!(grid_ == o.grid_)) throw ArgumentError("grid mismatch");
    }

private:
    Grid grid_;
    std::vector<double> v_;
};

inline double inner_product(const GridFunction& f, const GridFunction& g) {
    f.require_same_grid(g);
    KahanSum s;
    for (std::uint64_t i = 0; i < f.size(); ++i) s.add(f[i] * g[i]);
    return s.value() * f.grid().cell_measure();
}

/// Pointwise product per cell.
inline GridFunction multiply(const GridFunction& phi, const GridFunction& f) {
    phi.require_same_grid(f);
    GridFunction out(phi.grid());
    for (std::uint64_t i = 0; i < phi.size(); ++i) out[i] = phi[i] * f[i];
    return out;
}

/// Mean of f over a rectangle of its grid (grid-local coordinates).
inline double rectangle_mean(const GridFunction& f, const DyadicRectangle& r) {
    KahanSum s;
    for_each_cell(f.grid(), r, [&](std::uint64_t c) { s.add(f[c]); });
    return s.value() / static_cast<double>(cell_count(f.grid(), r));
}

/// L1 mean oscillation of f over a rectangle: (1/|R|) int_R |f - m_R f|.
inline double rectangle_oscillation(const GridFunction& f, const DyadicRectangle& r) {
    const double m = rectangle_mean(f, r);
    KahanSum s;
    for_each_cell(f.grid(), r, [&](std::uint64_t c) { s.add(std::fabs(f[c] - m)); });
    return s.value() / static_cast<double>(cell_count(f.grid(), r));
}

// ---------------------------------------------------------------------------
// Torus translation.  relabel_translated re-expresses the same torus function
// on the grid shifted by an extra alpha (integer numerators of the finest
// cell width per axis): cell i of the new grid reads the value at torus point
// shift + alpha + i*w, so values are cyclically rotated and nothing is
// resampled.  Translating by alpha then -alpha is the identity.
// ---------------------------------------------------------------------------

inline GridFunction relabel_translated(const GridFunction& f,
                                       const std::vector<std::int64_t>& alpha_numerators) {
    const Grid& g = f.grid();
    const int n = g.dims();
    if (static_cast<int>(alpha_numerators.size()) != n)
        throw ArgumentError("translation arity does not match grid dims");
    std::vector<std::int64_t> combined(n);
    std::vector<std::uint32_t> rot(n);
    for (int a = 0; a < n; ++a) {
        const std::int64_t m = static_cast<std::int64_t>(g.axis_cells(a));
        combined[a] = (static_cast<std::int64_t>(g.shift_numerator(a)) + alpha_numerators[a]) % m;
        rot[a] = static_cast<std::uint32_t>(((alpha_numerators[a] % m) + m) % m);
    }
    Grid out_grid(g.levels(), combined);
    GridFunction out(out_grid);
    std::vector<std::uint32_t> c(n, 0);
    std::vector<std::uint32_t> src(n);
    for (std::uint64_t i = 0; i < out.size(); ++i) {
        for (int a = 0; a < n; ++a) {
            std::uint64_t s = c[a] + rot[a];
            const std::uint64_t m = g.axis_cells(a);
            src[a] = static_cast<std::uint32_t>(s >= m ? s - m : s);
        }
        out[i] = f[g.linear(src)];
        int a = n - 1;
        for (; a >= 0; --a) {
            if (++c[a] < out_grid.axis_cells(a)) break;
            c[a] = 0;
        }
        if (a < 0) break;
    }
    return out;
}

/// Convert torus offsets (multiples of the finest cell width) to numerators.
inline std::vector<std::int64_t> alpha_to_numerators(const Grid& g,
                                                     const std::vector<double>& alpha) {
    const int n = g.dims();
    if (static_cast<int>(alpha.size()) != n)
        throw ArgumentError("translation arity does not match grid dims");
    std::vector<std::int64_t> num(n);
    for (int a = 0; a < n; ++a) {
        const double scaled = alpha[a] * static_cast<double>(g.axis_cells(a));
        const double rounded = std::round(scaled);
        if (std::fabs(scaled - rounded) > 1e-9)
            throw ArgumentError("translation is not a multiple of the finest cell width");
        num[a] = static_cast<std::int64_t>(rounded);
    }
    return num;
}

} // namespace pbmo
