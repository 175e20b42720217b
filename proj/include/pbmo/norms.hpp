#pragma once

#include <bit>
#include <cstdint>
#include <queue>
#include <string>
#include <vector>

#include "haar.hpp"

namespace pbmo {

enum class SearchMethod { Exact, Heuristic };

struct Witness {
    enum class Kind { None, Rectangle, OpenSet, Generation, Sample };
    Kind kind = Kind::None;
    DyadicRectangle rect;             // Rectangle; also the enclosing box of a Carleson witness
    std::vector<std::uint32_t> cells; // OpenSet (grid-local ids)
    std::vector<int> generation;      // Generation
    std::string label;                // free-form context (axes, alpha, sample name)

    static Witness none() { return Witness{}; }
    static Witness rectangle(DyadicRectangle r, std::string label = {}) {
        Witness w;
        w.kind = Kind::Rectangle;
        w.rect = std::move(r);
        w.label = std::move(label);
        return w;
    }
    static Witness open_set(std::vector<std::uint32_t> cells, std::string label = {}) {
        Witness w;
        w.kind = Kind::OpenSet;
        w.cells = std::move(cells);
        w.label = std::move(label);
        return w;
    }
    static Witness gen(std::vector<int> j, std::string label = {}) {
        Witness w;
        w.kind = Kind::Generation;
        w.generation = std::move(j);
        w.label = std::move(label);
        return w;
    }
    static Witness sample_label(std::string label) {
        Witness w;
        w.kind = Kind::Sample;
        w.label = std::move(label);
        return w;
    }
};

/// Result of a norm computation.  A Heuristic value is a certified lower
/// bound for the supremum at the same resolution; an Exact value equals the
/// brute-force supremum.
struct NormReport {
    std::string norm;
    double value = 0.0;
    Witness witness;
    SearchMethod method = SearchMethod::Exact;
    Grid grid;
};

// ---------------------------------------------------------------------------
// Rectangle-oscillation norms
// ---------------------------------------------------------------------------

/// sup over dyadic rectangles of (1/|R|) int_R |f - m_R f|.  The enumeration
/// runs in lexicographic rectangle order, so the first maximizer wins ties.
inline NormReport bmo_norm(const GridFunction& f) {
    const Grid& g = f.grid();
    NormReport rep;
    rep.norm = "bmo";
    rep.grid = g;
    rep.method = SearchMethod::Exact;
    double best = -1.0;
    for (const auto& r : all_dyadic_rectangles(g)) {
        const double osc = rectangle_oscillation(f, r);
        if (osc > best) {
            best = osc;
            rep.witness = Witness::rectangle(r);
        }
    }
    rep.value = best < 0 ? 0.0 : best;
    return rep;
}

/// Same supremum over the rectangles of the grid translated by alpha
/// (numerators of the finest cell width per axis).
inline NormReport bmo_norm(const GridFunction& f, const std::vector<std::int64_t>& alpha) {
    NormReport rep = bmo_norm(relabel_translated(f, alpha));
    rep.norm = "bmo";
    return rep;
}

namespace detail {

inline GridFunction slice_function(const GridFunction& f, const std::vector<int>& keep,
                                   const std::vector<std::uint32_t>& frozen_coords,
                                   const std::vector<int>& frozen_axes) {
    const Grid& g = f.grid();
    std::vector<int> levels;
    std::vector<std::int64_t> shift;
    for (int a : keep) {
        levels.push_back(g.level(a));
        shift.push_back(static_cast<std::int64_t>(g.shift_numerator(a)));
    }
    Grid sg(levels, shift);
    GridFunction out(sg);
    std::vector<std::uint32_t> coords(g.dims());
    for (std::size_t i = 0; i < frozen_axes.size(); ++i) coords[frozen_axes[i]] = frozen_coords[i];
    for (std::uint64_t c = 0; c < out.size(); ++c) {
        const auto kc = sg.coords(c);
        for (std::size_t i = 0; i < keep.size(); ++i) coords[keep[i]] = kc[i];
        out[c] = f[g.linear(coords)];
    }
    return out;
}

template <class Fn>
void for_each_coord(const Grid& g, const std::vector<int>& axes, Fn&& fn) {
    std::vector<std::uint32_t> c(axes.size(), 0);
    for (;;) {
        fn(c);
        int i = static_cast<int>(axes.size()) - 1;
        for (; i >= 0; --i) {
            if (++c[i] < g.axis_cells(axes[i])) break;
            c[i] = 0;
        }
        if (i < 0) break;
    }
}

} // namespace detail

/// The slice quantity of the little-BMO characterization: the largest bmo
/// norm among all 1-block slices of a contiguous (N1, N2) split, in both
/// orientations.
inline double slice_bmo_max(const GridFunction& f, int n1) {
    const Grid& g = f.grid();
    const int n = g.dims();
    if (n1 <= 0 || n1 >= n) throw ArgumentError("split must leave both blocks nonempty");
    double best = 0.0;
    for (int orient = 0; orient < 2; ++orient) {
        std::vector<int> keep, frozen;
        for (int a = 0; a < n; ++a)
            ((orient == 0) == (a < n1) ? keep : frozen).push_back(a);
        detail::for_each_coord(g, frozen, [&](const std::vector<std::uint32_t>& fc) {
            best = std::max(best, bmo_norm(detail::slice_function(f, keep, fc, frozen)).value);
        });
    }
    return best;
}

// ---------------------------------------------------------------------------
// Open-set search shared by the Carleson-type norms.
//
// The searched quantity is q(Omega) = (1/|Omega|) sum_{R in Omega} f_R^2 over
// unions Omega of finest cells inside a box.  The exact path enumerates all
// 2^cells - 1 unions; the heuristic path takes the best of (a) every dyadic
// rectangle, (b) greedy cell augmentation from each rectangle seed, accepting
// a cell only when the quotient strictly increases, and (c) cumulative unions
// of the top-scoring maximal rectangles.  Heuristic results are therefore
// certified lower bounds.
// ---------------------------------------------------------------------------

namespace detail {

struct SearchOutcome {
    double q = 0.0;
    std::vector<std::uint32_t> cells; // grid-local ids
    bool exact = false;
};

/// T[i] = sum of squared coefficients over the pure-rectangle subtree at i.
inline std::vector<double> subtree_sums(const HaarSpectrum& s) {
    const Grid& g = s.grid();
    std::vector<double> T(s.size(), 0.0);
    for (std::uint64_t i = 0; i < s.size(); ++i)
        if (s.pure(i)) T[i] = s[i] * s[i];
    for (int a = 0; a < g.dims(); ++a) {
        const std::uint64_t n = g.axis_cells(a);
        if (n < 4) continue; // codes 0,1 only: leaves
        for_each_line(g, a, [&](std::uint64_t base, std::uint64_t stride) {
            for (std::uint64_t p = n / 2; p-- > 1;)
                T[base + p * stride] += T[base + 2 * p * stride] + T[base + (2 * p + 1) * stride];
        });
    }
    return T;
}

inline bool mask_lex_less(std::uint64_t a, std::uint64_t b) {
    if (a == b) return false;
    const int p = std::countr_zero(a ^ b);
    const bool in_a = (a >> p) & 1;
    const std::uint64_t other = in_a ? b : a;
    const bool other_continues = (other >> p) >> 1;
    return in_a ? other_continues : !other_continues;
}

struct BoxContext {
    const Grid* grid = nullptr;
    std::vector<AxisRange> ranges; // per-axis cell window
    std::uint64_t cell_total = 1;

    std::uint64_t local_cells() const { return cell_total; }

    std::uint32_t global_cell(std::uint64_t local) const {
        std::uint64_t id = 0;
        for (int a = grid->dims() - 1; a >= 0; --a) {
            const std::uint64_t sz = ranges[a].size();
            id += (ranges[a].begin + local % sz) * grid->stride(a);
            local /= sz;
        }
        return static_cast<std::uint32_t>(id);
    }
};

inline BoxContext full_box(const Grid& g) {
    BoxContext b;
    b.grid = &g;
    b.ranges.resize(g.dims());
    for (int a = 0; a < g.dims(); ++a) {
        b.ranges[a] = AxisRange{0, static_cast<std::uint32_t>(g.axis_cells(a))};
        b.cell_total *= b.ranges[a].size();
    }
    return b;
}

inline BoxContext rect_box(const Grid& g, const DyadicRectangle& r) {
    BoxContext b;
    b.grid = &g;
    b.ranges.resize(g.dims());
    for (int a = 0; a < g.dims(); ++a) {
        b.ranges[a] = axis_range(g, a, r.axes[a]);
        b.cell_total *= b.ranges[a].size();
    }
    return b;
}

inline bool code_within(std::uint32_t code, int grid_level, const AxisRange& window) {
    const int level = HaarSpectrum::code_level(code);
    const std::uint32_t w = std::uint32_t{1} << (grid_level - level);
    const std::uint32_t lo = HaarSpectrum::code_index(code) * w;
    return lo >= window.begin && lo + w <= window.end;
}

/// Pure rectangles with nonzero coefficient lying inside the box.
struct RectSet {
    std::vector<std::uint64_t> id;  // spectrum linear index
    std::vector<double> coefsq;
};

inline RectSet rects_in_box(const HaarSpectrum& s, const BoxContext& box) {
    const Grid& g = s.grid();
    RectSet out;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        if (s[i] == 0.0 || !s.pure(i)) continue;
        bool inside = true;
        for (int a = 0; a < g.dims() && inside; ++a)
            inside = code_within(s.axis_code(i, a), g.level(a), box.ranges[a]);
        if (inside) {
            out.id.push_back(i);
            out.coefsq.push_back(s[i] * s[i]);
        }
    }
    return out;
}

inline SearchOutcome exact_box_search(const HaarSpectrum& s, const BoxContext& box, int cap) {
    const Grid& g = s.grid();
    const std::uint64_t n = box.local_cells();
    if (cap > kHardExactCap) cap = kHardExactCap;
    if (n > static_cast<std::uint64_t>(cap))
        throw CapacityError("exact open-set search over " + std::to_string(n) +
                            " cells exceeds the cap of " + std::to_string(cap));
    const RectSet rects = rects_in_box(s, box);
    // local bitmask per rectangle
    std::vector<std::uint64_t> global_of(n);
    for (std::uint64_t l = 0; l < n; ++l) global_of[l] = box.global_cell(l);
    std::vector<std::uint64_t> rmask(rects.id.size(), 0);
    for (std::size_t r = 0; r < rects.id.size(); ++r) {
        const std::uint64_t i = rects.id[r];
        std::vector<DyadicInterval> ax(g.dims());
        for (int a = 0; a < g.dims(); ++a) {
            const std::uint32_t code = s.axis_code(i, a);
            ax[a] = DyadicInterval{HaarSpectrum::code_level(code), HaarSpectrum::code_index(code), 0, 0};
        }
        std::uint64_t m = 0;
        for_each_cell(g, DyadicRectangle{ax}, [&](std::uint64_t cell) {
            const auto it = std::lower_bound(global_of.begin(), global_of.end(), cell);
            m |= std::uint64_t{1} << static_cast<std::uint64_t>(it - global_of.begin());
        });
        rmask[r] = m;
    }
    const double w = g.cell_measure();
    SearchOutcome best;
    std::uint64_t best_mask = 0;
    const std::uint64_t subsets = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask <= subsets; ++mask) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rmask.size(); ++r)
            if ((rmask[r] & ~mask) == 0) sum += rects.coefsq[r];
        const double q = sum / (static_cast<double>(std::popcount(mask)) * w);
        if (q > best.q || (q == best.q && best_mask != 0 && mask_lex_less(mask, best_mask))) {
            best.q = q;
            best_mask = mask;
        }
    }
    if (best.q > 0.0)
        for (std::uint64_t l = 0; l < n; ++l)
            if ((best_mask >> l) & 1) best.cells.push_back(static_cast<std::uint32_t>(global_of[l]));
    best.exact = true;
    return best;
}

// Greedy scratch shared across seeds; touched entries are reset after each run.
struct GreedyScratch {
    std::vector<double> pending;
    std::vector<std::uint32_t> covered;
    std::vector<char> in_omega;
    std::vector<std::uint64_t> touched_rects;
    std::vector<std::uint32_t> touched_cells;

    void ensure(std::uint64_t cells) {
        if (pending.size() < cells) {
            pending.assign(cells, 0.0);
            covered.assign(cells, 0);
            in_omega.assign(cells, 0);
        }
    }
    void reset() {
        for (auto r : touched_rects) covered[r] = 0;
        for (auto c : touched_cells) {
            pending[c] = 0.0;
            in_omega[c] = 0;
        }
        touched_rects.clear();
        touched_cells.clear();
    }
};

struct GreedyRun {
    const Grid* grid;
    const HaarSpectrum* spec;
    GreedyScratch* scratch;
    double S = 0.0;
    std::uint64_t n = 0;
    std::vector<std::uint32_t> omega;
    using Entry = std::pair<double, std::uint32_t>; // (gain, cell)
    struct EntryLess {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.first != b.first) return a.first < b.first;
            return a.second > b.second; // lower cell id wins ties
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, EntryLess> heap;

    std::uint64_t work = 0;

    // decode helpers
    std::uint32_t rect_size(std::uint64_t rect_id) const {
        std::uint32_t sz = 1;
        for (int a = 0; a < grid->dims(); ++a) {
            const std::uint32_t code = static_cast<std::uint32_t>(
                (rect_id / grid->stride(a)) % grid->axis_cells(a));
            sz *= std::uint32_t{1} << (grid->level(a) - HaarSpectrum::code_level(code));
        }
        return sz;
    }

    template <class Fn>
    void for_each_rect_cell(std::uint64_t rect_id, Fn&& fn) const {
        std::vector<DyadicInterval> ax(grid->dims());
        for (int a = 0; a < grid->dims(); ++a) {
            const std::uint32_t code = static_cast<std::uint32_t>(
                (rect_id / grid->stride(a)) % grid->axis_cells(a));
            ax[a] = DyadicInterval{HaarSpectrum::code_level(code), HaarSpectrum::code_index(code), 0, 0};
        }
        for_each_cell(*grid, DyadicRectangle{ax}, fn);
    }

    template <class Fn>
    void for_each_ancestor_rect(std::uint32_t cell, Fn&& fn) const {
        const int nd = grid->dims();
        // per-axis ancestor code contributions
        std::uint64_t contrib[kMaxDims][kMaxLevel];
        int counts[kMaxDims];
        std::uint64_t rest = cell;
        for (int a = 0; a < nd; ++a) {
            const std::uint32_t coord = static_cast<std::uint32_t>(rest / grid->stride(a));
            rest %= grid->stride(a);
            const int k = grid->level(a);
            counts[a] = k; // levels 0..k-1
            for (int j = 0; j < k; ++j)
                contrib[a][j] = static_cast<std::uint64_t>(HaarSpectrum::code(j, coord >> (k - j))) *
                                grid->stride(a);
        }
        for (int a = 0; a < nd; ++a)
            if (counts[a] == 0) return; // axis without Haar levels: no pure rects
        int idx[kMaxDims] = {0};
        for (;;) {
            std::uint64_t id = 0;
            for (int a = 0; a < nd; ++a) id += contrib[a][idx[a]];
            fn(id);
            int a = nd - 1;
            for (; a >= 0; --a) {
                if (++idx[a] < counts[a]) break;
                idx[a] = 0;
            }
            if (a < 0) break;
        }
    }

    void touch_cell(std::uint32_t c) {
        // pending and in_omega entries both recorded once
        scratch->touched_cells.push_back(c);
    }

    void add_cell(std::uint32_t c) {
        auto& sc = *scratch;
        if (sc.in_omega[c]) return;
        if (!sc.in_omega[c] && sc.pending[c] == 0.0) touch_cell(c);
        sc.in_omega[c] = 1;
        ++n;
        omega.push_back(c);
        for_each_ancestor_rect(c, [&](std::uint64_t rect) {
            const double cf = (*spec)[rect];
            if (cf == 0.0) return;
            const double csq = cf * cf;
            if (sc.covered[rect] == 0) sc.touched_rects.push_back(rect);
            const std::uint32_t cov = ++sc.covered[rect];
            const std::uint32_t size = rect_size(rect);
            ++work;
            if (cov == size) {
                S += csq;
            } else if (cov + 1 == size) {
                // locate the single uncovered cell
                std::uint32_t missing = 0;
                bool found = false;
                for_each_rect_cell(rect, [&](std::uint64_t rc) {
                    if (!found && !sc.in_omega[rc]) {
                        missing = static_cast<std::uint32_t>(rc);
                        found = true;
                    }
                    ++work;
                });
                if (sc.pending[missing] == 0.0 && !sc.in_omega[missing]) touch_cell(missing);
                sc.pending[missing] += csq;
                heap.push({sc.pending[missing], missing});
            }
        });
    }

    void grow(const BoxContext& box) {
        auto& sc = *scratch;
        // candidates outside the box are never pushed: ancestor rectangles of
        // in-box cells can leak outside it, so filter at pop time.
        while (!heap.empty()) {
            const auto [gain, c] = heap.top();
            heap.pop();
            if (sc.in_omega[c] || sc.pending[c] != gain) continue;
            bool inside = true;
            std::uint64_t rest = c;
            for (int a = 0; a < grid->dims() && inside; ++a) {
                const std::uint32_t coord = static_cast<std::uint32_t>(rest / grid->stride(a));
                rest %= grid->stride(a);
                inside = coord >= box.ranges[a].begin && coord < box.ranges[a].end;
            }
            if (!inside) continue;
            if (static_cast<double>(n) * gain <= S) break;
            add_cell(c);
        }
    }

    double quotient() const {
        return n == 0 ? 0.0 : S / (static_cast<double>(n) * grid->cell_measure());
    }
};

inline constexpr std::uint64_t kDefaultSearchBudget = 64'000'000;

inline SearchOutcome heuristic_box_search(const HaarSpectrum& s, const BoxContext& box,
                                          const std::vector<double>& subtree,
                                          std::uint64_t budget = kDefaultSearchBudget) {
    const Grid& g = s.grid();
    SearchOutcome best;
    auto consider = [&](double q, std::vector<std::uint32_t> cells) {
        if (q < best.q) return;
        std::sort(cells.begin(), cells.end());
        if (q > best.q ||
            (q == best.q && q > 0.0 &&
             std::lexicographical_compare(cells.begin(), cells.end(), best.cells.begin(),
                                          best.cells.end()))) {
            best.q = q;
            best.cells = std::move(cells);
        }
    };

    // (a) every dyadic rectangle inside the box, scored via subtree sums
    struct Seed {
        double q;
        std::uint64_t id;     // spectrum linear index of the rect codes
        std::uint32_t size;
    };
    std::vector<Seed> seeds;
    for (std::uint64_t i = 0; i < s.size(); ++i) {
        if (!s.pure(i)) continue;
        bool inside = true;
        std::uint32_t size = 1;
        for (int a = 0; a < g.dims() && inside; ++a) {
            const std::uint32_t code = s.axis_code(i, a);
            inside = code_within(code, g.level(a), box.ranges[a]);
            size *= std::uint32_t{1} << (g.level(a) - HaarSpectrum::code_level(code));
        }
        if (!inside) continue;
        const double q = subtree[i] * static_cast<double>(g.cells()) / static_cast<double>(size);
        seeds.push_back({q, i, size});
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
        if (a.q != b.q) return a.q > b.q;
        return a.id < b.id;
    });

    GreedyScratch scratch;
    scratch.ensure(g.cells());

    // (b) greedy augmentation from each seed, best-scoring seeds first,
    // bounded by a deterministic work budget on large grids
    std::uint64_t spent = 0;
    for (const auto& seed : seeds) {
        if (seed.q == 0.0) break; // sorted: the rest carry no coefficient mass
        if (spent > budget) break;
        GreedyRun run{&g, &s, &scratch};
        run.for_each_rect_cell(seed.id, [&](std::uint64_t c) {
            run.add_cell(static_cast<std::uint32_t>(c));
        });
        consider(run.quotient(), run.omega); // the bare rectangle
        run.grow(box);
        consider(run.quotient(), run.omega);
        spent += run.work + seed.size;
        scratch.reset();
    }

    // (c) cumulative unions of the top-scoring maximal rectangles
    std::vector<std::uint64_t> kept;
    auto rect_inside = [&](std::uint64_t inner, std::uint64_t outer) {
        for (int a = 0; a < g.dims(); ++a) {
            const std::uint32_t ci = static_cast<std::uint32_t>((inner / g.stride(a)) % g.axis_cells(a));
            const std::uint32_t co = static_cast<std::uint32_t>((outer / g.stride(a)) % g.axis_cells(a));
            const int li = HaarSpectrum::code_level(ci), lo = HaarSpectrum::code_level(co);
            if (li < lo) return false;
            if ((HaarSpectrum::code_index(ci) >> (li - lo)) != HaarSpectrum::code_index(co))
                return false;
        }
        return true;
    };
    {
        GreedyRun run{&g, &s, &scratch};
        for (const auto& seed : seeds) {
            if (seed.q == 0.0 || kept.size() >= 16) break;
            bool dominated = false;
            for (auto k : kept)
                if (rect_inside(seed.id, k)) { dominated = true; break; }
            if (dominated) continue;
            kept.push_back(seed.id);
            run.for_each_rect_cell(seed.id, [&](std::uint64_t c) {
                run.add_cell(static_cast<std::uint32_t>(c));
            });
            consider(run.quotient(), run.omega);
        }
        scratch.reset();
    }

    best.exact = false;
    return best;
}

inline SearchOutcome open_set_search(const HaarSpectrum& s, const BoxContext& box,
                                     SearchMethod method, int cap,
                                     std::uint64_t budget = kDefaultSearchBudget) {
    if (method == SearchMethod::Exact) return exact_box_search(s, box, cap);
    return heuristic_box_search(s, box, subtree_sums(s), budget);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Product BMO over open sets: value^2 = sup_Omega (1/|Omega|) sum_{R in Omega} f_R^2.
// ---------------------------------------------------------------------------

inline NormReport product_bmo_norm(const GridFunction& f,
                                   SearchMethod method = SearchMethod::Exact,
                                   int cap = default_exact_cap()) {
    const Grid& g = f.grid();
    const HaarSpectrum s = forward_haar(f);
    const auto box = detail::full_box(g);
    const auto outcome = detail::open_set_search(s, box, method, cap);
    NormReport rep;
    rep.norm = "product_bmo";
    rep.grid = g;
    rep.method = outcome.exact ? SearchMethod::Exact : SearchMethod::Heuristic;
    rep.value = std::sqrt(outcome.q);
    rep.witness = outcome.q > 0.0 ? Witness::open_set(outcome.cells) : Witness::none();
    return rep;
}

/// Mean product BMO: the largest product-BMO norm of a partial average
/// m_R f over any proper coordinate subset and any dyadic R there.
inline NormReport bmo_m_norm(const GridFunction& f, SearchMethod method = SearchMethod::Exact,
                             int cap = default_exact_cap()) {
    const Grid& g = f.grid();
    const int n = g.dims();
    if (n < 2) throw ArgumentError("mean product BMO needs N >= 2");
    NormReport rep;
    rep.norm = "mean_bmo";
    rep.grid = g;
    rep.method = SearchMethod::Exact;
    for (unsigned subset = 1; subset + 1 < (1u << n); ++subset) {
        std::vector<int> axes;
        for (int a = 0; a < n; ++a)
            if (subset & (1u << a)) axes.push_back(a);
        // dyadic rectangles of the averaged block
        std::vector<int> sub_levels;
        for (int a : axes) sub_levels.push_back(g.level(a));
        Grid sub(sub_levels);
        for (const auto& r : all_dyadic_rectangles(sub)) {
            std::vector<AxisSlice> slices;
            for (std::size_t i = 0; i < axes.size(); ++i)
                slices.push_back({axes[i], AxisPairing::Mean, r.axes[i]});
            const GridFunction avg = partial_transform(f, slices);
            const NormReport inner = product_bmo_norm(avg, method, cap);
            if (inner.method == SearchMethod::Heuristic) rep.method = SearchMethod::Heuristic;
            if (inner.value > rep.value) {
                rep.value = inner.value;
                std::string label = "axes=";
                for (int a : axes) label += std::to_string(a);
                rep.witness = Witness::rectangle(r, label);
            }
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Logarithmic mean oscillation, in both of its forms.
//
// Tail form:     sup_j (sum j_a + N) * ||Q_j f||_{product BMO}
// Carleson form: sup over dyadic R and open Omega inside R of
//                (sum_a (j_a + 2))^2 * (1/|Omega|) sum_{Q in Omega} f_Q^2
//
// (base-2 logs: log2(4/|I|) = level + 2).  The tail value is 1-homogeneous,
// the Carleson value 2-homogeneous; both vanish together.  Open-set searches
// fall back from exact to heuristic per instance once the cell count passes
// the cap, and the report method records any fallback.
// ---------------------------------------------------------------------------

enum class LmoMode { Tail, Carleson };

inline NormReport lmo_norm(const GridFunction& f, LmoMode mode, int cap = default_exact_cap()) {
    const Grid& g = f.grid();
    const int n = g.dims();
    NormReport rep;
    rep.grid = g;
    rep.method = SearchMethod::Exact;
    if (mode == LmoMode::Tail) {
        rep.norm = "lmo_tail";
        std::vector<int> jmax(n);
        for (int a = 0; a < n; ++a) jmax[a] = std::max(g.level(a) - 1, 0);
        std::vector<int> j(n, 0);
        for (;;) {
            int weight = n;
            for (int a = 0; a < n; ++a) weight += j[a];
            const GridFunction qf = martingale(f, j, MartingaleMode::Tail);
            const HaarSpectrum qs = forward_haar(qf);
            const auto box = detail::full_box(g);
            const bool exact_ok = g.cells() <= static_cast<std::uint64_t>(std::min(cap, kHardExactCap));
            const auto outcome = detail::open_set_search(
                qs, box, exact_ok ? SearchMethod::Exact : SearchMethod::Heuristic, cap);
            if (!outcome.exact) rep.method = SearchMethod::Heuristic;
            const double val = weight * std::sqrt(outcome.q);
            if (val > rep.value) {
                rep.value = val;
                rep.witness = Witness::gen(j);
            }
            int a = n - 1;
            for (; a >= 0; --a) {
                if (++j[a] <= jmax[a]) break;
                j[a] = 0;
            }
            if (a < 0) break;
        }
        return rep;
    }
    rep.norm = "lmo_carleson";
    const HaarSpectrum s = forward_haar(f);
    const auto subtree = detail::subtree_sums(s);
    for (const auto& r : all_dyadic_rectangles(g)) {
        bool representable = true;
        int level_sum = 0;
        for (int a = 0; a < n; ++a) {
            level_sum += r.axes[a].level;
            if (r.axes[a].level >= g.level(a)) representable = false;
        }
        double weight = 0;
        {
            const int logs = level_sum + 2 * n;
            weight = static_cast<double>(logs) * static_cast<double>(logs);
        }
        if (representable) {
            // quick skip: no coefficient mass inside R
            std::vector<std::uint32_t> codes(n);
            for (int a = 0; a < n; ++a)
                codes[a] = HaarSpectrum::code(r.axes[a].level, r.axes[a].index);
            if (subtree[s.linear(codes)] == 0.0) continue;
        } else {
            continue; // no pure rectangle fits inside R
        }
        const auto box = detail::rect_box(g, r);
        const bool exact_ok = box.local_cells() <= static_cast<std::uint64_t>(std::min(cap, kHardExactCap));
        detail::SearchOutcome outcome;
        if (exact_ok) {
            outcome = detail::exact_box_search(s, box, cap);
        } else {
            outcome = detail::heuristic_box_search(s, box, subtree, detail::kDefaultSearchBudget / 16);
            rep.method = SearchMethod::Heuristic;
        }
        const double val = weight * outcome.q;
        if (val > rep.value) {
            rep.value = val;
            Witness w = Witness::open_set(outcome.cells);
            w.rect = r;
            rep.witness = std::move(w);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Stegenga's one-dimensional multiplier functional:
// sup_I log2(4/|I|) * (1/|I|) int_I |f - m_I f|.
// ---------------------------------------------------------------------------

inline NormReport stegenga_functional(const GridFunction& f) {
    const Grid& g = f.grid();
    if (g.dims() != 1) throw ArgumentError("stegenga functional is one-dimensional");
    NormReport rep;
    rep.norm = "stegenga";
    rep.grid = g;
    rep.method = SearchMethod::Exact;
    for (const auto& r : all_dyadic_rectangles(g)) {
        const double weight = r.axes[0].level + 2;
        const double val = weight * rectangle_oscillation(f, r);
        if (val > rep.value) {
            rep.value = val;
            rep.witness = Witness::rectangle(r);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Translated-grid intersection norms: the chosen norm maximized over a sample
// of torus translations. 0 is always included, so the result dominates the
// standard dyadic value.
// ---------------------------------------------------------------------------

enum class NormKind { LittleBmo, ProductBmo, MeanBmo, LmoTail, LmoCarleson, Stegenga };

inline NormReport compute_norm(const GridFunction& f, NormKind kind,
                               SearchMethod method = SearchMethod::Exact,
                               int cap = default_exact_cap()) {
    switch (kind) {
        case NormKind::LittleBmo: return bmo_norm(f);
        case NormKind::ProductBmo: return product_bmo_norm(f, method, cap);
        case NormKind::MeanBmo: return bmo_m_norm(f, method, cap);
        case NormKind::LmoTail: return lmo_norm(f, LmoMode::Tail, cap);
        case NormKind::LmoCarleson: return lmo_norm(f, LmoMode::Carleson, cap);
        case NormKind::Stegenga: return stegenga_functional(f);
    }
    throw ArgumentError("unknown norm kind");
}

inline const char* norm_kind_name(NormKind kind) {
    switch (kind) {
        case NormKind::LittleBmo: return "bmo";
        case NormKind::ProductBmo: return "product_bmo";
        case NormKind::MeanBmo: return "mean_bmo";
        case NormKind::LmoTail: return "lmo_tail";
        case NormKind::LmoCarleson: return "lmo_carleson";
        case NormKind::Stegenga: return "stegenga";
    }
    return "?";
}

inline NormReport intersection_norm(const GridFunction& f, NormKind kind,
                                    const std::vector<std::vector<double>>& alphas,
                                    SearchMethod method = SearchMethod::Exact,
                                    int cap = default_exact_cap()) {
    const Grid& g = f.grid();
    std::vector<std::vector<std::int64_t>> shifts;
    shifts.push_back(std::vector<std::int64_t>(g.dims(), 0));
    for (const auto& alpha : alphas) {
        auto num = alpha_to_numerators(g, alpha);
        if (std::any_of(num.begin(), num.end(), [](std::int64_t v) { return v != 0; }))
            shifts.push_back(std::move(num));
    }
    NormReport best;
    bool first = true;
    for (const auto& shift : shifts) {
        const GridFunction fv = relabel_translated(f, shift);
        NormReport r = compute_norm(fv, kind, method, cap);
        std::string label = "alpha=";
        for (int a = 0; a < g.dims(); ++a) {
            if (a) label += ",";
            label += std::to_string(fv.grid().translation(a));
        }
        r.witness.label = r.witness.label.empty() ? label : r.witness.label + " " + label;
        if (first || r.value > best.value) {
            best = std::move(r);
            first = false;
        }
    }
    best.norm = std::string(norm_kind_name(kind)) + "_intersection";
    return best;
}

} // namespace pbmo
