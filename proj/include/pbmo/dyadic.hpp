#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pbmo {

// ---------------------------------------------------------------------------
// Dyadic geometry on the torus [0,1)^N at finite resolution.
//
// An axis at resolution k carries 2^k equal cells.  Dyadic intervals are
// addressed by (level j, index m) with 0 <= j <= k, 0 <= m < 2^j.  A grid may
// be translated on the torus by an integer multiple of the finest cell width;
// coarse intervals of a translated grid can wrap around 1 and are reported as
// two segments.  All computations run in grid-local cell coordinates, so the
// wrap only shows up when positions are reported in torus coordinates.
// ---------------------------------------------------------------------------

inline constexpr int kMaxDims = 8;
inline constexpr int kMaxLevel = 24;
inline constexpr int kDefaultExactCap = 16;
inline constexpr int kHardExactCap = 30; // 2^cap subsets must stay enumerable

/// Exact open-set enumeration cap. PBMO_EXACT_CAP overrides the default of 16.
inline int default_exact_cap() {
    static const int cap = [] {
        if (const char* env = std::getenv("PBMO_EXACT_CAP")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1 && v <= kHardExactCap) return static_cast<int>(v);
        }
        return kDefaultExactCap;
    }();
    return cap;
}

struct DyadicInterval {
    int level = 0;             // |I| = 2^-level
    std::uint32_t index = 0;   // in [0, 2^level)
    // Torus offset of the carrying grid: shift_num / 2^shift_level.
    std::uint32_t shift_num = 0;
    int shift_level = 0;

    double measure() const { return std::ldexp(1.0, -level); }
    double shift() const { return std::ldexp(static_cast<double>(shift_num), -shift_level); }

    /// Left endpoint in torus coordinates.
    double left() const {
        double x = static_cast<double>(index) * measure() + shift();
        return x < 1.0 ? x : x - 1.0;
    }

    bool wraps() const { return left() + measure() > 1.0 + 1e-15; }

    struct Segment {
        double lo, hi;
    };

    /// Torus pieces of the interval; one ordinary piece, or two when the
    /// translate wraps around 1. Piece measures always sum to 2^-level.
    int segments(Segment out[2]) const {
        const double lo = left();
        const double hi = lo + measure();
        if (hi <= 1.0 + 1e-15) {
            out[0] = {lo, std::min(hi, 1.0)};
            return 1;
        }
        out[0] = {lo, 1.0};
        out[1] = {0.0, hi - 1.0};
        return 2;
    }

    friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;
};

/// (level, index) ordering; [0,1) sorts first, then by position within level.
inline bool lex_less(const DyadicInterval& a, const DyadicInterval& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.index < b.index;
}

struct DyadicRectangle {
    std::vector<DyadicInterval> axes;

    DyadicRectangle() = default;
    explicit DyadicRectangle(std::vector<DyadicInterval> ax) : axes(std::move(ax)) {}

    int dims() const { return static_cast<int>(axes.size()); }

    double measure() const {
        double m = 1.0;
        for (const auto& I : axes) m *= I.measure();
        return m;
    }

    std::vector<int> generation() const {
        std::vector<int> j(axes.size());
        for (std::size_t a = 0; a < axes.size(); ++a) j[a] = axes[a].level;
        return j;
    }

    friend bool operator==(const DyadicRectangle&, const DyadicRectangle&) = default;
};

inline bool lex_less(const DyadicRectangle& a, const DyadicRectangle& b) {
    const std::size_t n = std::min(a.axes.size(), b.axes.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.axes[i] == b.axes[i]) continue;
        return lex_less(a.axes[i], b.axes[i]);
    }
    return a.axes.size() < b.axes.size();
}

class Grid {
public:
    Grid() = default;

    explicit Grid(std::vector<int> levels, std::vector<std::int64_t> shift_numerators = {})
        : levels_(std::move(levels)) {
        const int n = dims();
        if (n < 1 || n > kMaxDims) throw ArgumentError("grid dims must be in [1, " + std::to_string(kMaxDims) + "]");
        for (int k : levels_)
            if (k < 0 || k > kMaxLevel) throw ArgumentError("axis resolution out of range");
        if (shift_numerators.empty()) shift_numerators.assign(n, 0);
        if (static_cast<int>(shift_numerators.size()) != n)
            throw ArgumentError("translation arity does not match grid dims");
        shift_.resize(n);
        for (int a = 0; a < n; ++a) {
            const std::int64_t m = static_cast<std::int64_t>(axis_cells_at(levels_[a]));
            shift_[a] = static_cast<std::uint32_t>(((shift_numerators[a] % m) + m) % m);
        }
        strides_.assign(n, 1);
        for (int a = n - 2; a >= 0; --a)
            strides_[a] = strides_[a + 1] * axis_cells(a + 1);
    }

    int dims() const { return static_cast<int>(levels_.size()); }
    int level(int axis) const { return levels_[axis]; }
    const std::vector<int>& levels() const { return levels_; }
    std::uint32_t shift_numerator(int axis) const { return shift_[axis]; }
    const std::vector<std::uint32_t>& shift_numerators() const { return shift_; }
    bool translated() const {
        return std::any_of(shift_.begin(), shift_.end(), [](std::uint32_t s) { return s != 0; });
    }

    /// Torus offset of axis `axis`, always a multiple of the finest cell width.
    double translation(int axis) const {
        return std::ldexp(static_cast<double>(shift_[axis]), -levels_[axis]);
    }

    std::uint64_t axis_cells(int axis) const { return axis_cells_at(levels_[axis]); }
    std::uint64_t stride(int axis) const { return strides_[axis]; }

    std::uint64_t cells() const {
        std::uint64_t n = 1;
        for (int a = 0; a < dims(); ++a) n *= axis_cells(a);
        return n;
    }

    double cell_measure() const { return 1.0 / static_cast<double>(cells()); }

    std::uint64_t linear(const std::vector<std::uint32_t>& coords) const {
        std::uint64_t c = 0;
        for (int a = 0; a < dims(); ++a) c += static_cast<std::uint64_t>(coords[a]) * strides_[a];
        return c;
    }

    std::vector<std::uint32_t> coords(std::uint64_t cell) const {
        std::vector<std::uint32_t> out(dims());
        for (int a = 0; a < dims(); ++a) {
            out[a] = static_cast<std::uint32_t>(cell / strides_[a]);
            cell %= strides_[a];
        }
        return out;
    }

    /// Interval (level, index) on this grid, carrying the grid's torus shift.
    DyadicInterval interval(int axis, int level, std::uint32_t index) const {
        return DyadicInterval{level, index, shift_[axis], levels_[axis]};
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static std::uint64_t axis_cells_at(int level) { return std::uint64_t{1} << level; }

    std::vector<int> levels_;
    std::vector<std::uint32_t> shift_;
    std::vector<std::uint64_t> strides_;
};

/// Grid-local cell range [begin, end) covered by an interval along one axis.
struct AxisRange {
    std::uint32_t begin = 0, end = 0;
    std::uint32_t size() const { return end - begin; }
};

inline AxisRange axis_range(const Grid& g, int axis, const DyadicInterval& I) {
    if (I.level > g.level(axis))
        throw ResolutionError("interval finer than grid resolution");
    const std::uint32_t w = std::uint32_t{1} << (g.level(axis) - I.level);
    return AxisRange{I.index * w, (I.index + 1) * w};
}

inline std::uint64_t cell_count(const Grid& g, const DyadicRectangle& r) {
    std::uint64_t n = 1;
    for (int a = 0; a < r.dims(); ++a)
        n *= axis_range(g, a, r.axes[a]).size();
    return n;
}

/// Visit the grid-local linear ids of all cells of `r`, in increasing order.
template <class F>
void for_each_cell(const Grid& g, const DyadicRectangle& r, F&& fn) {
    const int n = g.dims();
    if (r.dims() != n) throw ArgumentError("rectangle arity does not match grid");
    std::vector<AxisRange> ranges(n);
    for (int a = 0; a < n; ++a) ranges[a] = axis_range(g, a, r.axes[a]);
    std::vector<std::uint32_t> c(n);
    for (int a = 0; a < n; ++a) c[a] = ranges[a].begin;
    for (;;) {
        fn(g.linear(c));
        int a = n - 1;
        for (; a >= 0; --a) {
            if (++c[a] < ranges[a].end) break;
            c[a] = ranges[a].begin;
        }
        if (a < 0) return;
    }
}

// ---------------------------------------------------------------------------
// Open sets as unions of finest-level cells.  The induced dyadic rectangle
// family {R : R subset of Omega} is down-closed by construction; containment
// queries run off an inclusive prefix-sum table of the cell indicator.
// ---------------------------------------------------------------------------

class OpenSetApprox {
public:
    OpenSetApprox(Grid grid, std::vector<std::uint32_t> cell_ids)
        : grid_(std::move(grid)), cells_(std::move(cell_ids)) {
        std::sort(cells_.begin(), cells_.end());
        cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
        const std::uint64_t total = grid_.cells();
        if (!cells_.empty() && cells_.back() >= total)
            throw ArgumentError("cell id outside grid");
        build_prefix();
    }

    static OpenSetApprox full(const Grid& grid) {
        std::vector<std::uint32_t> all(grid.cells());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        return OpenSetApprox(grid, std::move(all));
    }

    const Grid& grid() const { return grid_; }
    const std::vector<std::uint32_t>& cells() const { return cells_; }
    bool empty() const { return cells_.empty(); }
    double measure() const { return static_cast<double>(cells_.size()) * grid_.cell_measure(); }

    bool contains_cell(std::uint32_t cell) const {
        return std::binary_search(cells_.begin(), cells_.end(), cell);
    }

    /// Number of Omega-cells inside the rectangle.
    std::uint64_t covered(const DyadicRectangle& r) const {
        const int n = grid_.dims();
        std::vector<AxisRange> ranges(n);
        for (int a = 0; a < n; ++a) ranges[a] = axis_range(grid_, a, r.axes[a]);
        // inclusion-exclusion over box corners of the inclusive prefix table
        std::int64_t sum = 0;
        for (unsigned corner = 0; corner < (1u << n); ++corner) {
            std::int64_t sign = 1;
            std::uint64_t idx = 0;
            bool valid = true;
            for (int a = 0; a < n; ++a) {
                std::uint32_t edge;
                if (corner & (1u << a)) {
                    if (ranges[a].begin == 0) { valid = false; break; }
                    edge = ranges[a].begin - 1;
                    sign = -sign;
                } else {
                    edge = ranges[a].end - 1;
                }
                idx += static_cast<std::uint64_t>(edge) * grid_.stride(a);
            }
            if (valid) sum += sign * static_cast<std::int64_t>(prefix_[idx]);
        }
        return static_cast<std::uint64_t>(sum);
    }

    bool contains(const DyadicRectangle& r) const {
        return covered(r) == cell_count(grid_, r);
    }

private:
    void build_prefix() {
        const std::uint64_t total = grid_.cells();
        prefix_.assign(total, 0);
        for (std::uint32_t c : cells_) prefix_[c] = 1;
        // running sums axis by axis turn the indicator into an inclusive table
        for (int a = 0; a < grid_.dims(); ++a) {
            const std::uint64_t stride = grid_.stride(a);
            const std::uint64_t n = grid_.axis_cells(a);
            const std::uint64_t lines = total / n;
            for (std::uint64_t li = 0; li < lines; ++li) {
                const std::uint64_t block = li / stride, off = li % stride;
                const std::uint64_t base = block * n * stride + off;
                for (std::uint64_t t = 1; t < n; ++t)
                    prefix_[base + t * stride] += prefix_[base + (t - 1) * stride];
            }
        }
    }

    Grid grid_;
    std::vector<std::uint32_t> cells_;
    std::vector<std::uint32_t> prefix_;
};

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// All rectangles of one generation; they partition the torus.
inline std::vector<DyadicRectangle> rectangles_of_generation(const Grid& g,
                                                             const std::vector<int>& gen) {
    const int n = g.dims();
    if (static_cast<int>(gen.size()) != n) throw ArgumentError("generation arity mismatch");
    for (int a = 0; a < n; ++a)
        if (gen[a] < 0 || gen[a] > g.level(a))
            throw ResolutionError("generation exceeds grid resolution");
    std::vector<DyadicRectangle> out;
    std::uint64_t count = 1;
    for (int a = 0; a < n; ++a) count *= std::uint64_t{1} << gen[a];
    out.reserve(count);
    std::vector<std::uint32_t> idx(n, 0);
    for (;;) {
        DyadicRectangle r;
        r.axes.reserve(n);
        for (int a = 0; a < n; ++a) r.axes.push_back(g.interval(a, gen[a], idx[a]));
        out.push_back(std::move(r));
        int a = n - 1;
        for (; a >= 0; --a) {
            if (++idx[a] < (std::uint32_t{1} << gen[a])) break;
            idx[a] = 0;
        }
        if (a < 0) break;
    }
    return out;
}

/// Every dyadic rectangle of the grid: levels 0..k_a per axis, all positions.
inline std::vector<DyadicRectangle> all_dyadic_rectangles(const Grid& g) {
    const int n = g.dims();
    std::vector<std::vector<DyadicInterval>> per_axis(n);
    for (int a = 0; a < n; ++a) {
        for (int j = 0; j <= g.level(a); ++j)
            for (std::uint32_t m = 0; m < (std::uint32_t{1} << j); ++m)
                per_axis[a].push_back(g.interval(a, j, m));
    }
    std::vector<DyadicRectangle> out;
    std::uint64_t count = 1;
    for (int a = 0; a < n; ++a) count *= per_axis[a].size();
    out.reserve(count);
    std::vector<std::size_t> idx(n, 0);
    for (;;) {
        DyadicRectangle r;
        r.axes.reserve(n);
        for (int a = 0; a < n; ++a) r.axes.push_back(per_axis[a][idx[a]]);
        out.push_back(std::move(r));
        int a = n - 1;
        for (; a >= 0; --a) {
            if (++idx[a] < per_axis[a].size()) break;
            idx[a] = 0;
        }
        if (a < 0) break;
    }
    return out;
}

/// Visit every nonempty union of finest cells, smallest bitmask first.
template <class F>
void for_each_open_set(const Grid& g, F&& fn, int cap = default_exact_cap()) {
    const std::uint64_t n = g.cells();
    if (cap > kHardExactCap) cap = kHardExactCap;
    if (n > static_cast<std::uint64_t>(cap))
        throw CapacityError("open-set enumeration over " + std::to_string(n) +
                            " cells exceeds the exact cap of " + std::to_string(cap) +
                            "; use the heuristic search in norms");
    const std::uint64_t subsets = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask <= subsets; ++mask) fn(mask);
}

inline std::vector<std::uint32_t> mask_cells(std::uint64_t mask) {
    std::vector<std::uint32_t> cells;
    for (std::uint32_t c = 0; mask != 0; ++c, mask >>= 1)
        if (mask & 1) cells.push_back(c);
    return cells;
}

inline std::vector<OpenSetApprox> enumerate_open_sets(const Grid& g,
                                                      int cap = default_exact_cap()) {
    std::vector<OpenSetApprox> out;
    for_each_open_set(g, [&](std::uint64_t mask) {
        out.emplace_back(g, mask_cells(mask));
    }, cap);
    return out;
}

/// Dyadic rectangles whose cells all lie in Omega; down-closed.
inline std::vector<DyadicRectangle> rectangles_contained(const OpenSetApprox& omega) {
    std::vector<DyadicRectangle> out;
    for (auto& r : all_dyadic_rectangles(omega.grid()))
        if (omega.contains(r)) out.push_back(std::move(r));
    return out;
}

} // namespace pbmo
