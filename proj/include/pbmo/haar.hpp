#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dyadic.hpp"
#include "grid_function.hpp"

namespace pbmo {

// ---------------------------------------------------------------------------
// Exact Haar analysis for step functions.
//
// Convention: h_I = |I|^{-1/2} (chi_{left half} - chi_{right half}); the mean
// companion is h^1_I = chi_I / |I|.  Tensor products over axes give h_R and
// h^eps_R.
//
// Spectra live on the augmented tensor basis: per axis either the constant 1
// (code 0) or a Haar function of an interval at level j < k (code 2^j + m).
// That basis has exactly one element per grid cell, so a spectrum is stored
// as a dense array in the same row-major layout as cell values.  Coefficients
// whose axes are all non-constant are the Haar coefficients f_R.
// ---------------------------------------------------------------------------

enum class AxisPairing : std::uint8_t { Haar, Mean };

namespace detail {

inline double pow2(int e) { return std::ldexp(1.0, e); }

inline double sqrt_pow2(int j) {
    // 2^{j/2}
    return (j & 1) ? std::ldexp(std::sqrt(2.0), (j - 1) / 2) : std::ldexp(1.0, j / 2);
}

template <class LineFn>
void for_each_line(const Grid& g, int axis, LineFn&& fn) {
    const std::uint64_t n = g.axis_cells(axis);
    const std::uint64_t stride = g.stride(axis);
    const std::uint64_t total = g.cells();
    const std::uint64_t blocks = total / (n * stride);
    for (std::uint64_t b = 0; b < blocks; ++b)
        for (std::uint64_t off = 0; off < stride; ++off)
            fn(b * n * stride + off, stride);
}

// One analysis pass along `axis`: cell indexing -> interval-code indexing.
// Slot 0 receives the axis integral (the constant-direction coefficient);
// slot 2^j+m receives <.,h_I> (Haar) or m_I (Mean) for I = (j,m).
inline void axis_analysis(std::vector<double>& data, const Grid& g, int axis, AxisPairing mode) {
    const std::uint64_t n = g.axis_cells(axis);
    if (n == 1) return;
    const int k = g.level(axis);
    std::vector<double> sums(n), out(n);
    for_each_line(g, axis, [&](std::uint64_t base, std::uint64_t stride) {
        for (std::uint64_t t = 0; t < n; ++t) sums[t] = data[base + t * stride];
        std::uint64_t len = n;
        int j = k;
        while (len >= 2) {
            const std::uint64_t half = len / 2;
            --j; // parent level
            for (std::uint64_t m = 0; m < half; ++m) {
                const double left = sums[2 * m], right = sums[2 * m + 1];
                if (mode == AxisPairing::Haar)
                    out[half + m] = (left - right) * sqrt_pow2(j) * pow2(-k);
                else
                    out[half + m] = (left + right) * pow2(j - k);
                sums[m] = left + right;
            }
            len = half;
        }
        out[0] = sums[0] * pow2(-k);
        for (std::uint64_t t = 0; t < n; ++t) data[base + t * stride] = out[t];
    });
}

// Adjoint direction: interval-code indexing -> cell values.  Slot 0 acts as a
// constant term; slot 2^j+m contributes c*h_I (Haar) or c*chi_I/|I| (Mean).
inline void axis_synthesis(std::vector<double>& data, const Grid& g, int axis, AxisPairing mode) {
    const std::uint64_t n = g.axis_cells(axis);
    if (n == 1) return;
    std::vector<double> acc(n), next(n);
    for_each_line(g, axis, [&](std::uint64_t base, std::uint64_t stride) {
        acc[0] = data[base];
        std::uint64_t len = 1;
        int j = 0;
        while (len < n) {
            for (std::uint64_t m = 0; m < len; ++m) {
                const double c = data[base + (len + m) * stride];
                const double d = (mode == AxisPairing::Haar) ? c * sqrt_pow2(j) : c * pow2(j);
                if (mode == AxisPairing::Haar) {
                    next[2 * m] = acc[m] + d;
                    next[2 * m + 1] = acc[m] - d;
                } else {
                    next[2 * m] = acc[m] + d;
                    next[2 * m + 1] = acc[m] + d;
                }
            }
            std::swap(acc, next);
            len *= 2;
            ++j;
        }
        for (std::uint64_t t = 0; t < n; ++t) data[base + t * stride] = acc[t];
    });
}

} // namespace detail

// ---------------------------------------------------------------------------
// HaarSpectrum
// ---------------------------------------------------------------------------

class HaarSpectrum {
public:
    static constexpr std::uint32_t kConst = 0;

    HaarSpectrum() = default;
    explicit HaarSpectrum(Grid grid, double fill = 0.0)
        : grid_(std::move(grid)), c_(grid_.cells(), fill) {}
    HaarSpectrum(Grid grid, std::vector<double> coefs)
        : grid_(std::move(grid)), c_(std::move(coefs)) {
        if (c_.size() != grid_.cells()) throw ArgumentError("coefficient count does not match grid");
    }

    static std::uint32_t code(int level, std::uint32_t index) {
        return (std::uint32_t{1} << level) + index;
    }
    static int code_level(std::uint32_t code) {
        int j = -1;
        while (code) { ++j; code >>= 1; }
        return j; // code 0 -> -1 (constant direction)
    }
    static std::uint32_t code_index(std::uint32_t code) {
        const int j = code_level(code);
        return code - (std::uint32_t{1} << j);
    }

    const Grid& grid() const { return grid_; }
    std::uint64_t size() const { return c_.size(); }
    double operator[](std::uint64_t i) const { return c_[i]; }
    double& operator[](std::uint64_t i) { return c_[i]; }
    const std::vector<double>& data() const { return c_; }
    std::vector<double>& data() { return c_; }

    std::uint32_t axis_code(std::uint64_t i, int axis) const {
        return static_cast<std::uint32_t>((i / grid_.stride(axis)) % grid_.axis_cells(axis));
    }

    bool pure(std::uint64_t i) const {
        for (int a = 0; a < grid_.dims(); ++a)
            if (axis_code(i, a) == kConst) return false;
        return true;
    }

    std::uint64_t linear(const std::vector<std::uint32_t>& codes) const {
        std::uint64_t i = 0;
        for (int a = 0; a < grid_.dims(); ++a)
            i += static_cast<std::uint64_t>(codes[a]) * grid_.stride(a);
        return i;
    }

    /// Haar coefficient f_R of a pure dyadic rectangle; rectangles at the
    /// finest level carry no representable oscillation and read as 0.
    double coefficient(const DyadicRectangle& r) const {
        std::uint64_t i = 0;
        for (int a = 0; a < grid_.dims(); ++a) {
            const auto& I = r.axes[a];
            if (I.level > grid_.level(a)) throw ResolutionError("rectangle finer than grid");
            if (I.level == grid_.level(a)) return 0.0;
            i += static_cast<std::uint64_t>(code(I.level, I.index)) * grid_.stride(a);
        }
        return c_[i];
    }

    /// The all-constant coefficient, i.e. the global mean of the function.
    double mean_coefficient() const { return c_[0]; }

    double coefficient_l2_sq() const {
        KahanSum s;
        for (double x : c_) s.add(x * x);
        return s.value();
    }

private:
    Grid grid_;
    std::vector<double> c_;
};

inline HaarSpectrum forward_haar(const GridFunction& f) {
    HaarSpectrum s(f.grid(), 0.0);
    s.data() = f.values();
    for (int a = 0; a < f.grid().dims(); ++a)
        detail::axis_analysis(s.data(), f.grid(), a, AxisPairing::Haar);
    return s;
}

inline GridFunction inverse_haar(const HaarSpectrum& s) {
    GridFunction f(s.grid());
    f.values() = s.data();
    for (int a = 0; a < s.grid().dims(); ++a)
        detail::axis_synthesis(f.values(), s.grid(), a, AxisPairing::Haar);
    return f;
}

/// <f, h^eps_R>: per axis, eps=0 pairs against h_I and eps=1 against
/// chi_I/|I|.  All-mean pairing returns m_R f.
inline double haar_coefficient(const GridFunction& f, const DyadicRectangle& r,
                               const std::vector<std::uint8_t>& eps) {
    const Grid& g = f.grid();
    const int n = g.dims();
    if (r.dims() != n || static_cast<int>(eps.size()) != n)
        throw ArgumentError("rectangle/pairing arity mismatch");
    std::vector<AxisRange> ranges(n);
    std::vector<double> factor(n); // |weight| per axis; Haar sign handled per cell
    for (int a = 0; a < n; ++a) {
        const auto& I = r.axes[a];
        if (I.level > g.level(a)) throw ResolutionError("rectangle finer than grid");
        ranges[a] = axis_range(g, a, I);
        if (eps[a] == 0) {
            if (I.level == g.level(a)) return 0.0; // h integrates to zero inside one cell
            factor[a] = detail::sqrt_pow2(I.level);
        } else {
            factor[a] = detail::pow2(I.level);
        }
    }
    KahanSum s;
    std::vector<std::uint32_t> c(n);
    for (int a = 0; a < n; ++a) c[a] = ranges[a].begin;
    for (;;) {
        double w = 1.0;
        for (int a = 0; a < n; ++a) {
            if (eps[a] == 0) {
                const std::uint32_t mid = ranges[a].begin + ranges[a].size() / 2;
                w *= (c[a] < mid) ? factor[a] : -factor[a];
            } else {
                w *= factor[a];
            }
        }
        s.add(f[g.linear(c)] * w);
        int a = n - 1;
        for (; a >= 0; --a) {
            if (++c[a] < ranges[a].end) break;
            c[a] = ranges[a].begin;
        }
        if (a < 0) break;
    }
    return s.value() * g.cell_measure();
}

// ---------------------------------------------------------------------------
// Slice transforms: pair f against h_I or chi_I/|I| on selected axes and
// return the function-valued coefficient on the remaining axes.
// ---------------------------------------------------------------------------

struct AxisSlice {
    int axis;
    AxisPairing mode;
    DyadicInterval interval;
};

inline GridFunction partial_transform(const GridFunction& f, const std::vector<AxisSlice>& slices) {
    const Grid& g = f.grid();
    const int n = g.dims();
    std::vector<int> taken(n, -1);
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const int a = slices[i].axis;
        if (a < 0 || a >= n) throw ArgumentError("slice axis out of range");
        if (taken[a] >= 0) throw ArgumentError("slice axis repeated");
        taken[a] = static_cast<int>(i);
    }
    if (static_cast<std::size_t>(n) == slices.size())
        throw ArgumentError("all axes paired; use haar_coefficient instead");

    std::vector<int> rest;
    for (int a = 0; a < n; ++a)
        if (taken[a] < 0) rest.push_back(a);

    std::vector<int> out_levels;
    std::vector<std::int64_t> out_shift;
    for (int a : rest) {
        out_levels.push_back(g.level(a));
        out_shift.push_back(g.shift_numerator(a));
    }
    Grid out_grid(out_levels, out_shift);
    GridFunction out(out_grid);

    // weight tables along the paired axes
    struct Paired {
        int axis;
        AxisRange range;
        double factor;
        bool haar;
        bool zero;
    };
    std::vector<Paired> paired;
    double measure = 1.0;
    for (const auto& sl : slices) {
        const auto& I = sl.interval;
        if (I.level > g.level(sl.axis)) throw ResolutionError("slice interval finer than grid");
        Paired p;
        p.axis = sl.axis;
        p.range = axis_range(g, sl.axis, I);
        p.haar = (sl.mode == AxisPairing::Haar);
        p.zero = p.haar && I.level == g.level(sl.axis);
        p.factor = p.haar ? detail::sqrt_pow2(I.level) : detail::pow2(I.level);
        paired.push_back(p);
        measure *= detail::pow2(-g.level(sl.axis));
    }
    for (const auto& p : paired)
        if (p.zero) return out; // finest-level Haar pairing vanishes cellwise

    std::vector<std::uint32_t> coords(n, 0);
    const std::uint64_t out_cells = out_grid.cells();
    for (std::uint64_t oc = 0; oc < out_cells; ++oc) {
        const auto rest_coords = out_grid.coords(oc);
        for (std::size_t i = 0; i < rest.size(); ++i) coords[rest[i]] = rest_coords[i];
        KahanSum s;
        // iterate the paired box
        std::vector<std::uint32_t> pc(paired.size());
        for (std::size_t i = 0; i < paired.size(); ++i) pc[i] = paired[i].range.begin;
        for (;;) {
            double w = 1.0;
            for (std::size_t i = 0; i < paired.size(); ++i) {
                const auto& p = paired[i];
                coords[p.axis] = pc[i];
                if (p.haar) {
                    const std::uint32_t mid = p.range.begin + p.range.size() / 2;
                    w *= (pc[i] < mid) ? p.factor : -p.factor;
                } else {
                    w *= p.factor;
                }
            }
            s.add(f[g.linear(coords)] * w);
            int i = static_cast<int>(paired.size()) - 1;
            for (; i >= 0; --i) {
                if (++pc[i] < paired[i].range.end) break;
                pc[i] = paired[i].range.begin;
            }
            if (i < 0) break;
        }
        out[oc] = s.value() * measure;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Martingale operators.
//
// DIFF keeps exactly the pure Haar coefficients of one generation; EXPECT is
// the conditional expectation onto that generation's cells (per axis: the
// constant direction or any level < j_a); TAIL keeps pure coefficients with
// level >= j_a on every axis.  Note that EXPECT + TAIL is not the identity
// for N >= 2: mixed regions (some axes below the cut, some above) belong to
// neither, exactly as the componentwise inequalities demand.
// ---------------------------------------------------------------------------

enum class MartingaleMode { Diff, Expect, Tail };

inline GridFunction martingale(const GridFunction& f, const std::vector<int>& gen,
                               MartingaleMode mode) {
    const Grid& g = f.grid();
    const int n = g.dims();
    if (static_cast<int>(gen.size()) != n) throw ArgumentError("generation arity mismatch");
    for (int a = 0; a < n; ++a)
        if (gen[a] < 0 || gen[a] > g.level(a))
            throw ResolutionError("generation exceeds grid resolution");
    HaarSpectrum s = forward_haar(f);
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        bool keep = true;
        for (int a = 0; a < n && keep; ++a) {
            const std::uint32_t code = s.axis_code(i, a);
            const int level = HaarSpectrum::code_level(code); // -1 for constant
            switch (mode) {
                case MartingaleMode::Diff:
                    keep = (code != HaarSpectrum::kConst) && level == gen[a];
                    break;
                case MartingaleMode::Expect:
                    keep = (code == HaarSpectrum::kConst) || level < gen[a];
                    break;
                case MartingaleMode::Tail:
                    keep = (code != HaarSpectrum::kConst) && level >= gen[a];
                    break;
            }
        }
        if (!keep) s[i] = 0.0;
    }
    return inverse_haar(s);
}

/// Projection onto the span of pure Haar rectangles (kills all slice means).
inline GridFunction pure_haar_part(const GridFunction& f) {
    HaarSpectrum s = forward_haar(f);
    for (std::uint64_t i = 0; i < s.size(); ++i)
        if (!s.pure(i)) s[i] = 0.0;
    return inverse_haar(s);
}

// ---------------------------------------------------------------------------
// Open-set projection P_Omega: keep Haar coefficients of rectangles inside
// Omega.  The block variant constrains only the given axes, leaving the other
// axes of the tensor index untouched; it is the slicewise projection used for
// estimates against partial open sets.
// ---------------------------------------------------------------------------

inline HaarSpectrum project_open_set(const HaarSpectrum& s, const OpenSetApprox& omega,
                                     const std::vector<int>& axes) {
    const Grid& g = s.grid();
    const int nb = static_cast<int>(axes.size());
    if (omega.grid().dims() != nb) throw ArgumentError("open-set arity does not match axis block");
    for (int i = 0; i < nb; ++i)
        if (omega.grid().level(i) != g.level(axes[i]))
            throw ArgumentError("open-set grid resolution mismatch");
    HaarSpectrum out = s;
    std::vector<DyadicInterval> sub(nb);
    for (std::uint64_t i = 0; i < out.size(); ++i) {
        if (out[i] == 0.0) continue;
        bool keep = true;
        for (int b = 0; b < nb && keep; ++b) {
            const std::uint32_t code = out.axis_code(i, axes[b]);
            if (code == HaarSpectrum::kConst) {
                keep = false;
            } else {
                sub[b] = DyadicInterval{HaarSpectrum::code_level(code),
                                        HaarSpectrum::code_index(code), 0, 0};
            }
        }
        if (keep) keep = omega.contains(DyadicRectangle{sub});
        if (!keep) out[i] = 0.0;
    }
    return out;
}

inline GridFunction project_open_set(const GridFunction& f, const OpenSetApprox& omega) {
    if (!(omega.grid() == f.grid())) throw ArgumentError("grid mismatch");
    std::vector<int> axes(f.grid().dims());
    for (int a = 0; a < f.grid().dims(); ++a) axes[a] = a;
    return inverse_haar(project_open_set(forward_haar(f), omega, axes));
}

/// Block projection: omega lives on the sub-grid spanned by `axes` of f.
inline GridFunction project_open_set(const GridFunction& f, const OpenSetApprox& omega,
                                     const std::vector<int>& axes) {
    return inverse_haar(project_open_set(forward_haar(f), omega, axes));
}

// ---------------------------------------------------------------------------
// Square function and the product H^1 norm.
// ---------------------------------------------------------------------------

struct SquareFunctionResult {
    GridFunction values;
    double h1_norm = 0.0;
};

/// S[f] = (sum_R chi_R |f_R|^2 / |R|)^{1/2} over pure Haar rectangles;
/// h1_norm is its integral.  Slice means do not contribute.
inline SquareFunctionResult square_function(const GridFunction& f) {
    const Grid& g = f.grid();
    HaarSpectrum s = forward_haar(f);
    GridFunction sq(g, 0.0);
    const int n = g.dims();
    std::vector<DyadicInterval> ax(n);
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0 || !s.pure(i)) continue;
        int level_sum = 0;
        for (int a = 0; a < n; ++a) {
            const std::uint32_t code = s.axis_code(i, a);
            ax[a] = DyadicInterval{HaarSpectrum::code_level(code), HaarSpectrum::code_index(code),
                                   g.shift_numerator(a), g.level(a)};
            level_sum += ax[a].level;
        }
        const double add = s[i] * s[i] * detail::pow2(level_sum); // f_R^2 / |R|
        for_each_cell(g, DyadicRectangle{ax}, [&](std::uint64_t c) { sq[c] += add; });
    }
    SquareFunctionResult out{GridFunction(g, 0.0), 0.0};
    KahanSum h1;
    for (std::uint64_t c = 0; c < sq.size(); ++c) {
        out.values[c] = std::sqrt(sq[c]);
        h1.add(out.values[c]);
    }
    out.h1_norm = h1.value() * g.cell_measure();
    return out;
}

// ---------------------------------------------------------------------------
// First-axis aggregation at a cut level.  Coefficients coarser than the cut
// on axis 0 are kept; a coefficient slot exactly at the cut collects the
// root-sum-square of its whole axis-0 subtree; finer slots are cleared.  The
// coefficient l2 mass is preserved.  Other axes can be reached by permuting
// axes first.
// ---------------------------------------------------------------------------

inline HaarSpectrum tilde_aggregate(const HaarSpectrum& s, int cut) {
    const Grid& g = s.grid();
    const int k0 = g.level(0);
    if (cut < 0 || cut > k0) throw ResolutionError("cut level outside axis-0 resolution");
    HaarSpectrum out(g, 0.0);
    const std::uint64_t stride0 = g.stride(0);
    const std::uint64_t n0 = g.axis_cells(0);
    const std::uint64_t rest = g.cells() / n0;
    for (std::uint64_t r = 0; r < rest; ++r) {
        const std::uint64_t block = r / stride0, off = r % stride0;
        const std::uint64_t base = block * n0 * stride0 + off;
        // constant direction and levels < cut pass through
        out[base] = s[base];
        for (std::uint32_t p = 1; p < n0; ++p) {
            const int level = HaarSpectrum::code_level(p);
            if (level < cut)
                out[base + p * stride0] = s[base + p * stride0];
        }
        if (cut >= k0) continue; // no representable slots at the cut
        for (std::uint32_t m = 0; m < (std::uint32_t{1} << cut); ++m) {
            KahanSum sub;
            for (int j = cut; j < k0; ++j) {
                const std::uint32_t lo = m << (j - cut);
                const std::uint32_t hi = (m + 1u) << (j - cut);
                for (std::uint32_t mm = lo; mm < hi; ++mm) {
                    const double c = s[base + HaarSpectrum::code(j, mm) * stride0];
                    sub.add(c * c);
                }
            }
            out[base + HaarSpectrum::code(cut, m) * stride0] = std::sqrt(sub.value());
        }
    }
    return out;
}

inline HaarSpectrum tilde_aggregate(const GridFunction& f, int cut) {
    return tilde_aggregate(forward_haar(f), cut);
}

// ---------------------------------------------------------------------------
// Mixed-pairing transforms of a whole function, one pairing per axis.  These
// are the building blocks of the bilinear Haar operators: after the analysis
// passes, entry [codes] holds <f, tensor of h^{mode_a}_{I_a}>; the synthesis
// passes assemble sum_R c_R * tensor of h^{mode_a}_{I_a} back into cells.
// ---------------------------------------------------------------------------

inline std::vector<double> mixed_analysis(const GridFunction& f,
                                          const std::vector<AxisPairing>& modes) {
    const Grid& g = f.grid();
    if (static_cast<int>(modes.size()) != g.dims()) throw ArgumentError("pairing arity mismatch");
    std::vector<double> data = f.values();
    for (int a = 0; a < g.dims(); ++a) detail::axis_analysis(data, g, a, modes[a]);
    return data;
}

inline GridFunction mixed_synthesis(const Grid& g, std::vector<double> codes,
                                    const std::vector<AxisPairing>& modes) {
    if (static_cast<int>(modes.size()) != g.dims()) throw ArgumentError("pairing arity mismatch");
    for (int a = 0; a < g.dims(); ++a) detail::axis_synthesis(codes, g, a, modes[a]);
    return GridFunction(g, std::move(codes));
}

} // namespace pbmo
