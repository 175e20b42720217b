#pragma once

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "norms.hpp"
#include "test_functions.hpp"

namespace pbmo {

// ---------------------------------------------------------------------------
// The bilinear Haar operators
//
//     B_{eps,delta,beta}(phi, f) = sum_R <phi, h^eps_R> <f, h^delta_R> h^beta_R
//
// over dyadic rectangles R.  Admissible signatures satisfy, per coordinate,
// eps_j + delta_j = 1 - beta_j with (eps,delta,beta) != 0 and (eps,delta)
// never (1,1); that leaves exactly three options per coordinate,
//
//     (0,1,0)  phi Haar-paired, f averaged, Haar output      ("main" type)
//     (0,0,1)  both Haar-paired, averaged output             ("diagonal" type)
//     (1,0,0)  phi averaged, f Haar-paired, Haar output      ("dual" type)
//
// hence 3^N admissible triples in dimension N.  The two global conditions are
// already implied by the per-coordinate equation; they are validated anyway.
// A pointwise product of two functions with zero slice means decomposes
// exactly into the sum of all admissible operators.
// ---------------------------------------------------------------------------

struct OperatorSignature {
    std::vector<std::uint8_t> eps, delta, beta;

    OperatorSignature() = default;
    OperatorSignature(std::vector<std::uint8_t> e, std::vector<std::uint8_t> d,
                      std::vector<std::uint8_t> b)
        : eps(std::move(e)), delta(std::move(d)), beta(std::move(b)) {
        validate();
    }

    int dims() const { return static_cast<int>(eps.size()); }

    void validate() const {
        const std::size_t n = eps.size();
        if (n == 0 || delta.size() != n || beta.size() != n)
            throw ArgumentError("signature arity mismatch");
        bool all_zero = true, ed_all_one = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (eps[j] > 1 || delta[j] > 1 || beta[j] > 1)
                throw ArgumentError("signature entries must be 0/1");
            if (eps[j] + delta[j] != 1 - beta[j])
                throw ArgumentError("signature violates eps+delta = 1-beta");
            if (eps[j] || delta[j] || beta[j]) all_zero = false;
            if (!(eps[j] && delta[j])) ed_all_one = false;
        }
        if (all_zero) throw ArgumentError("signature must not be identically zero");
        if (ed_all_one) throw ArgumentError("signature must not pair both factors by means only");
    }

    std::string key() const {
        std::string s;
        auto bits = [&](const std::vector<std::uint8_t>& v) {
            for (auto b : v) s += static_cast<char>('0' + b);
        };
        bits(eps); s += ","; bits(delta); s += ","; bits(beta);
        return s;
    }

    friend bool operator==(const OperatorSignature&, const OperatorSignature&) = default;
};

/// All admissible triples, per-coordinate order (0,1,0), (0,0,1), (1,0,0).
inline std::vector<OperatorSignature> enumerate_signatures(int dims) {
    if (dims < 1 || dims > kMaxDims) throw ArgumentError("bad dimension");
    static constexpr std::uint8_t options[3][3] = {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}};
    std::vector<OperatorSignature> out;
    std::vector<int> pick(dims, 0);
    for (;;) {
        OperatorSignature sig;
        sig.eps.resize(dims);
        sig.delta.resize(dims);
        sig.beta.resize(dims);
        for (int a = 0; a < dims; ++a) {
            sig.eps[a] = options[pick[a]][0];
            sig.delta[a] = options[pick[a]][1];
            sig.beta[a] = options[pick[a]][2];
        }
        out.push_back(std::move(sig));
        int a = dims - 1;
        for (; a >= 0; --a) {
            if (++pick[a] < 3) break;
            pick[a] = 0;
        }
        if (a < 0) break;
    }
    return out;
}

/// B_{eps,delta,beta}(phi, f), bilinear in both arguments.  The rectangle sum
/// is truncated at the grid resolution, which loses nothing: every axis pairs
/// at least one factor against a Haar function, and those coefficients vanish
/// beyond the representable levels.
inline GridFunction apply_bilinear(const GridFunction& phi, const GridFunction& f,
                                   const OperatorSignature& sig) {
    phi.require_same_grid(f);
    const Grid& g = phi.grid();
    if (sig.dims() != g.dims()) throw ArgumentError("signature arity does not match grid");
    std::vector<AxisPairing> phi_modes(g.dims()), f_modes(g.dims()), out_modes(g.dims());
    for (int a = 0; a < g.dims(); ++a) {
        phi_modes[a] = sig.eps[a] ? AxisPairing::Mean : AxisPairing::Haar;
        f_modes[a] = sig.delta[a] ? AxisPairing::Mean : AxisPairing::Haar;
        out_modes[a] = sig.beta[a] ? AxisPairing::Mean : AxisPairing::Haar;
    }
    const std::vector<double> A = mixed_analysis(phi, phi_modes);
    const std::vector<double> B = mixed_analysis(f, f_modes);
    std::vector<double> W(A.size());
    HaarSpectrum probe(g, 0.0); // for the pure-index predicate
    for (std::uint64_t i = 0; i < W.size(); ++i)
        W[i] = probe.pure(i) ? A[i] * B[i] : 0.0;
    return mixed_synthesis(g, std::move(W), out_modes);
}

/// All 3^N components of the product decomposition, in signature order.
inline std::vector<std::pair<OperatorSignature, GridFunction>> decompose_product(
    const GridFunction& phi, const GridFunction& f) {
    phi.require_same_grid(f);
    std::vector<std::pair<OperatorSignature, GridFunction>> out;
    for (auto& sig : enumerate_signatures(phi.grid().dims()))
        out.emplace_back(sig, apply_bilinear(phi, f, sig));
    return out;
}

// ---------------------------------------------------------------------------
// Named operators.  Each one is a single signature plus an axis grouping:
//
//   main        all axes (0,1,0):   sum_R phi_R (m_R f) h_R
//   diagonal    all axes (0,0,1):   sum_R phi_R f_R chi_R/|R|
//   mixed(beta) (0,1,0) where beta_j=0, (0,0,1) where beta_j=1
//   t1          all axes (1,0,0):   the Haar multiplier with m_R phi
//   t2          (0,0,1) on the S-block, (1,0,0) on the T-block
//   t3          (0,1,0) on the S-block, (1,0,0) on the T-block
//   t4          (0,1,0) on R-block, (0,0,1) on S-block, (1,0,0) on T-block
// ---------------------------------------------------------------------------

enum class OperatorKind { Main, Diagonal, Mixed, T1, T2, T3, T4 };

struct OperatorHandle {
    std::string name;
    OperatorSignature sig;
    GridFunction phi;
};

inline const char* operator_kind_name(OperatorKind k) {
    switch (k) {
        case OperatorKind::Main: return "pi";
        case OperatorKind::Diagonal: return "delta";
        case OperatorKind::Mixed: return "pi-beta";
        case OperatorKind::T1: return "t1";
        case OperatorKind::T2: return "t2";
        case OperatorKind::T3: return "t3";
        case OperatorKind::T4: return "t4";
    }
    return "?";
}

/// `groups` tags each axis with its block: for Mixed it is the beta vector
/// itself; t2/t3 use 0 = S-block, 1 = T-block; t4 uses 0/1/2 for R/S/T.
inline OperatorHandle named_operator(OperatorKind kind, const GridFunction& phi,
                                     const std::vector<int>& groups = {}) {
    const int n = phi.grid().dims();
    auto need_groups = [&](int count) {
        if (static_cast<int>(groups.size()) != n)
            throw ArgumentError("operator needs one group tag per axis");
        std::vector<bool> seen(count, false);
        for (int t : groups) {
            if (t < 0 || t >= count) throw ArgumentError("group tag out of range");
            seen[t] = true;
        }
        for (bool b : seen)
            if (!b) throw ArgumentError("every block of the split must be nonempty");
    };
    // per-coordinate types
    const std::uint8_t MAIN[3] = {0, 1, 0}, DIAG[3] = {0, 0, 1}, DUAL[3] = {1, 0, 0};
    std::vector<const std::uint8_t*> pick(n, MAIN);
    switch (kind) {
        case OperatorKind::Main:
            break;
        case OperatorKind::Diagonal:
            pick.assign(n, DIAG);
            break;
        case OperatorKind::Mixed: {
            need_groups(2);
            bool any0 = false, any1 = false;
            for (int a = 0; a < n; ++a) {
                pick[a] = groups[a] ? DIAG : MAIN;
                (groups[a] ? any1 : any0) = true;
            }
            (void)any0;
            (void)any1;
            break;
        }
        case OperatorKind::T1:
            pick.assign(n, DUAL);
            break;
        case OperatorKind::T2:
            need_groups(2);
            for (int a = 0; a < n; ++a) pick[a] = groups[a] ? DUAL : DIAG;
            break;
        case OperatorKind::T3:
            need_groups(2);
            for (int a = 0; a < n; ++a) pick[a] = groups[a] ? DUAL : MAIN;
            break;
        case OperatorKind::T4:
            need_groups(3);
            for (int a = 0; a < n; ++a)
                pick[a] = groups[a] == 0 ? MAIN : (groups[a] == 1 ? DIAG : DUAL);
            break;
    }
    OperatorSignature sig;
    sig.eps.resize(n);
    sig.delta.resize(n);
    sig.beta.resize(n);
    for (int a = 0; a < n; ++a) {
        sig.eps[a] = pick[a][0];
        sig.delta[a] = pick[a][1];
        sig.beta[a] = pick[a][2];
    }
    sig.validate();
    return OperatorHandle{operator_kind_name(kind), std::move(sig), phi};
}

inline GridFunction apply(const OperatorHandle& h, const GridFunction& f) {
    return apply_bilinear(h.phi, f, h.sig);
}

// ---------------------------------------------------------------------------
// Dense matrices in spectrum coordinates, and the l2 operator norm by power
// iteration on the normal matrix.
// ---------------------------------------------------------------------------

struct OperatorMatrix {
    Grid grid;
    std::uint64_t dim = 0;
    std::vector<double> a; // row-major

    double entry(std::uint64_t r, std::uint64_t c) const { return a[r * dim + c]; }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y(dim, 0.0);
        for (std::uint64_t r = 0; r < dim; ++r) {
            KahanSum s;
            const double* row = a.data() + r * dim;
            for (std::uint64_t c = 0; c < dim; ++c) s.add(row[c] * x[c]);
            y[r] = s.value();
        }
        return y;
    }

    std::vector<double> apply_transposed(const std::vector<double>& y) const {
        std::vector<double> z(dim, 0.0);
        for (std::uint64_t r = 0; r < dim; ++r) {
            const double* row = a.data() + r * dim;
            const double yr = y[r];
            if (yr == 0.0) continue;
            for (std::uint64_t c = 0; c < dim; ++c) z[c] += row[c] * yr;
        }
        return z;
    }
};

inline constexpr std::uint64_t kDefaultMatrixCap = 8192;

/// Column c is the spectrum of op applied to the c-th augmented basis element.
inline OperatorMatrix assemble_matrix(const std::function<GridFunction(const GridFunction&)>& op,
                                      const Grid& g, std::uint64_t dim_cap = kDefaultMatrixCap) {
    const std::uint64_t dim = g.cells();
    if (dim > dim_cap)
        throw CapacityError("matrix dimension " + std::to_string(dim) + " exceeds cap " +
                            std::to_string(dim_cap));
    OperatorMatrix m;
    m.grid = g;
    m.dim = dim;
    m.a.assign(dim * dim, 0.0);
    for (std::uint64_t c = 0; c < dim; ++c) {
        HaarSpectrum e(g, 0.0);
        e[c] = 1.0;
        const HaarSpectrum col = forward_haar(op(inverse_haar(e)));
        for (std::uint64_t r = 0; r < dim; ++r) m.a[r * dim + c] = col[r];
    }
    return m;
}

inline OperatorMatrix assemble_matrix(const OperatorHandle& h,
                                      std::uint64_t dim_cap = kDefaultMatrixCap) {
    return assemble_matrix([&](const GridFunction& f) { return apply(h, f); }, h.phi.grid(),
                           dim_cap);
}

/// Largest singular value via power iteration on A^T A, deterministic
/// normalized all-ones start.  Throws ConvergenceError (with the best
/// estimate attached) if the iteration cap is hit.
inline double l2_operator_norm(const OperatorMatrix& m, double tol = 1e-10,
                               int max_iter = 10000) {
    if (tol <= 0) throw ArgumentError("tolerance must be positive");
    const std::uint64_t dim = m.dim;
    std::vector<double> x(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const std::vector<double> y = m.apply(x);
        KahanSum yy;
        for (double v : y) yy.add(v * v);
        const double lambda = yy.value(); // x normalized: ||Ax||^2
        const double next = std::sqrt(lambda);
        if (next == 0.0) return 0.0;
        const std::vector<double> z = m.apply_transposed(y);
        KahanSum zz;
        for (double v : z) zz.add(v * v);
        const double zn = std::sqrt(zz.value());
        if (zn == 0.0) return next;
        for (std::uint64_t i = 0; i < dim; ++i) x[i] = z[i] / zn;
        if (it > 0 && std::fabs(next - sigma) <= tol * std::max(next, 1e-300)) return next;
        sigma = next;
    }
    throw ConvergenceError("power iteration did not converge", sigma);
}

// ---------------------------------------------------------------------------
// Certified lower bounds for operator norms between non-Hilbert norms: the
// best ratio codomain-norm(op f) / domain-norm(f) over a declared family of
// test functions.  No upper bound is claimed.
// ---------------------------------------------------------------------------

struct ProbeMember {
    std::string label;
    GridFunction f;
};

/// Normalized Haar atoms, indicators, dyadic logs, and band-limited noise.
inline std::vector<ProbeMember> default_probe_family(const Grid& g, std::uint64_t seed = 7,
                                                     int randoms = 4) {
    std::vector<ProbeMember> fam;
    for (const auto& r : all_dyadic_rectangles(g)) {
        bool representable = true;
        int level_sum = 0;
        for (int a = 0; a < g.dims(); ++a) {
            level_sum += r.axes[a].level;
            if (r.axes[a].level >= g.level(a)) representable = false;
        }
        std::string tag;
        for (int a = 0; a < g.dims(); ++a) {
            if (a) tag += "x";
            tag += std::to_string(r.axes[a].level) + ":" + std::to_string(r.axes[a].index);
        }
        if (representable) fam.push_back({"atom[" + tag + "]", haar_atom(g, r, true)});
        if (level_sum > 0) fam.push_back({"chi[" + tag + "]", indicator(g, r)});
    }
    const int kmin = *std::min_element(g.levels().begin(), g.levels().end());
    for (int depth = 2; depth <= kmin; ++depth) {
        DyadicRectangle target;
        for (int a = 0; a < g.dims(); ++a) target.axes.push_back(DyadicInterval{depth, 0, 0, 0});
        fam.push_back({"log[depth=" + std::to_string(depth) + "]", dyadic_log(g, target)});
    }
    for (int i = 0; i < randoms; ++i)
        fam.push_back({"random[" + std::to_string(i) + "]",
                       random_band_limited(g, seed + static_cast<std::uint64_t>(i))});
    return fam;
}

/// Max of codomain(op f)/domain(f) over the family; zero-domain members are
/// skipped with a warning on stderr.  The result is a certified lower bound
/// when the domain norm is computed exactly.
inline NormReport norm_ratio_lower_bound(const std::function<GridFunction(const GridFunction&)>& op,
                                         const Grid& grid,
                                         const std::vector<ProbeMember>& family,
                                         NormKind domain, NormKind codomain,
                                         SearchMethod method = SearchMethod::Heuristic,
                                         int cap = default_exact_cap()) {
    if (family.empty()) throw ArgumentError("probe family is empty");
    NormReport rep;
    rep.norm = std::string(norm_kind_name(domain)) + "->" + norm_kind_name(codomain);
    rep.grid = grid;
    rep.method = SearchMethod::Exact;
    for (const auto& member : family) {
        const NormReport dom = compute_norm(member.f, domain, method, cap);
        if (dom.value <= 1e-14) {
            std::cerr << "warning: probe member " << member.label
                      << " has zero domain norm; skipped\n";
            continue;
        }
        const NormReport cod = compute_norm(op(member.f), codomain, method, cap);
        if (dom.method == SearchMethod::Heuristic) rep.method = SearchMethod::Heuristic;
        const double ratio = cod.value / dom.value;
        if (ratio > rep.value) {
            rep.value = ratio;
            rep.witness = Witness::sample_label(member.label);
        }
    }
    return rep;
}

inline NormReport norm_ratio_lower_bound(const OperatorHandle& op,
                                         const std::vector<ProbeMember>& family,
                                         NormKind domain, NormKind codomain,
                                         SearchMethod method = SearchMethod::Heuristic,
                                         int cap = default_exact_cap()) {
    return norm_ratio_lower_bound([&](const GridFunction& f) { return apply(op, f); },
                                  op.phi.grid(), family, domain, codomain, method, cap);
}

// ---------------------------------------------------------------------------
// The crossed mean/Haar kernel of a contiguous split: pairing f by means on
// the first block and Haar on the second, g the other way round, with Haar
// output everywhere.  Its product-H^1 norm certifies l2 bounds for the mixed
// operators.
// ---------------------------------------------------------------------------

struct KernelResult {
    GridFunction values;
    double h1_norm = 0.0;
};

inline KernelResult paraproduct_kernel(const GridFunction& f, const GridFunction& g, int n1) {
    f.require_same_grid(g);
    const int n = f.grid().dims();
    if (n1 <= 0 || n1 >= n) throw ArgumentError("split must leave both blocks nonempty");
    OperatorSignature sig;
    sig.eps.resize(n);
    sig.delta.resize(n);
    sig.beta.assign(n, 0);
    for (int a = 0; a < n; ++a) {
        sig.eps[a] = a < n1 ? 1 : 0;
        sig.delta[a] = a < n1 ? 0 : 1;
    }
    sig.validate();
    GridFunction k = apply_bilinear(f, g, sig);
    auto sq = square_function(k);
    return KernelResult{std::move(k), sq.h1_norm};
}

} // namespace pbmo
