#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include <pbmo/haar.hpp>
#include <pbmo/test_functions.hpp>

using namespace pbmo;

namespace {

// Oracle: tensor Haar/mean factors evaluated per cell straight from the
// definition, independent of the transform code path.
GridFunction oracle_tensor(const Grid& g, const std::vector<DyadicInterval>& axes,
                           const std::vector<std::uint8_t>& eps) {
    GridFunction out(g, 0.0);
    for (std::uint64_t c = 0; c < out.size(); ++c) {
        const auto coords = g.coords(c);
        double v = 1.0;
        for (int a = 0; a < g.dims(); ++a) {
            const auto& I = axes[a];
            const std::uint32_t w = std::uint32_t{1} << (g.level(a) - I.level);
            const std::uint32_t lo = I.index * w, hi = lo + w;
            if (coords[a] < lo || coords[a] >= hi) {
                v = 0.0;
                break;
            }
            if (eps[a] == 0) {
                const double amp = std::pow(2.0, I.level / 2.0);
                v *= (coords[a] < lo + w / 2) ? amp : -amp;
            } else {
                v *= std::pow(2.0, I.level);
            }
        }
        out[c] = v;
    }
    return out;
}

double oracle_inner(const GridFunction& f, const GridFunction& g) {
    double s = 0;
    for (std::uint64_t c = 0; c < f.size(); ++c) s += f[c] * g[c];
    return s * f.grid().cell_measure();
}

} // namespace

TEST_CASE("forward_haar on two cells") {
    Grid g({1});
    GridFunction f(g, {1.0, 0.0});
    auto s = forward_haar(f);
    CHECK(s.mean_coefficient() == Catch::Approx(0.5));
    CHECK(s[1] == Catch::Approx(0.5));
}

TEST_CASE("constant functions have only the constant coefficient") {
    Grid g({2, 2});
    GridFunction f(g, 3.25);
    auto s = forward_haar(f);
    CHECK(s.mean_coefficient() == Catch::Approx(3.25));
    for (std::uint64_t i = 1; i < s.size(); ++i) CHECK(std::fabs(s[i]) < 1e-14);
}

TEST_CASE("inverse_haar synthesis examples") {
    SECTION("constant") {
        Grid g({2});
        HaarSpectrum s(g, 0.0);
        s[0] = 1.0;
        auto f = inverse_haar(s);
        for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(f[c] == Catch::Approx(1.0));
    }
    SECTION("h_[0,1) is +1 on the left half") {
        Grid g({1});
        HaarSpectrum s(g, 0.0);
        s[1] = 1.0;
        auto f = inverse_haar(s);
        CHECK(f[0] == Catch::Approx(1.0));
        CHECK(f[1] == Catch::Approx(-1.0));
    }
    SECTION("h_[0,1/2) at k=2") {
        Grid g({2});
        HaarSpectrum s(g, 0.0);
        s[HaarSpectrum::code(1, 0)] = 1.0;
        auto f = inverse_haar(s);
        CHECK(f[0] == Catch::Approx(std::sqrt(2.0)));
        CHECK(f[1] == Catch::Approx(-std::sqrt(2.0)));
        CHECK(f[2] == Catch::Approx(0.0).margin(1e-15));
        CHECK(f[3] == Catch::Approx(0.0).margin(1e-15));
    }
}

TEST_CASE("round trip and Parseval on random inputs") {
    std::mt19937_64 seeder(11);
    for (int n = 1; n <= 3; ++n) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<int> levels(n);
            for (int a = 0; a < n; ++a) levels[a] = 1 + static_cast<int>(seeder() % 4);
            Grid g(levels);
            const GridFunction f = random_cells(g, seeder());
            const HaarSpectrum s = forward_haar(f);
            const GridFunction back = inverse_haar(s);
            double max_err = 0;
            for (std::uint64_t c = 0; c < f.size(); ++c)
                max_err = std::max(max_err, std::fabs(back[c] - f[c]));
            CHECK(max_err <= 1e-12);
            CHECK(std::fabs(s.coefficient_l2_sq() - f.l2_norm_sq()) <= 1e-12);
        }
    }
}

TEST_CASE("spectrum coefficients match direct inner products") {
    Grid g({3, 3});
    const GridFunction f = random_cells(g, 99);
    const HaarSpectrum s = forward_haar(f);
    for (int j1 = 0; j1 < 3; ++j1)
        for (int j2 = 0; j2 < 3; ++j2) {
            DyadicRectangle r{{DyadicInterval{j1, 1 % (1u << j1), 0, 0},
                              DyadicInterval{j2, (1u << j2) - 1, 0, 0}}};
            const auto hr = oracle_tensor(g, r.axes, {0, 0});
            CHECK(s.coefficient(r) == Catch::Approx(oracle_inner(f, hr)).margin(1e-13));
        }
}

TEST_CASE("haar_coefficient examples") {
    Grid g({2});
    // f = chi_[0,1/4)
    GridFunction f(g, {1.0, 0.0, 0.0, 0.0});
    DyadicRectangle half{{DyadicInterval{1, 0, 0, 0}}};
    SECTION("Haar pairing") {
        CHECK(haar_coefficient(f, half, {0}) == Catch::Approx(std::pow(2.0, -1.5)));
    }
    SECTION("mean pairing") {
        CHECK(haar_coefficient(f, half, {1}) == Catch::Approx(0.5));
    }
    SECTION("orthonormality") {
        const auto h = oracle_tensor(g, half.axes, {0});
        CHECK(haar_coefficient(h, half, {0}) == Catch::Approx(1.0));
    }
    SECTION("finer than grid") {
        DyadicRectangle deep{{DyadicInterval{3, 0, 0, 0}}};
        CHECK_THROWS_AS(haar_coefficient(f, deep, {0}), ResolutionError);
    }
    SECTION("all-mean pairing is the rectangle mean") {
        Grid g2({2, 2});
        const GridFunction r2 = random_cells(g2, 5);
        DyadicRectangle r{{DyadicInterval{1, 1, 0, 0}, DyadicInterval{2, 2, 0, 0}}};
        CHECK(haar_coefficient(r2, r, {1, 1}) == Catch::Approx(rectangle_mean(r2, r)));
    }
}

TEST_CASE("partial_transform slices") {
    Grid g({2, 2});
    const DyadicInterval full{0, 0, 0, 0};
    SECTION("pairing h(t) against h on axis 1") {
        // f(s,t) = h_[0,1)(t)
        GridFunction hline = haar_atom(Grid({2}), DyadicRectangle{{full}}, false);
        GridFunction one(Grid({2}), 1.0);
        GridFunction f = tensor_product(one, hline);
        auto out = partial_transform(f, {{1, AxisPairing::Haar, full}});
        REQUIRE(out.grid().dims() == 1);
        for (std::uint64_t c = 0; c < out.size(); ++c) CHECK(out[c] == Catch::Approx(1.0));
    }
    SECTION("mean of a Haar factor vanishes") {
        GridFunction h1 = haar_atom(Grid({2}), DyadicRectangle{{full}}, false);
        GridFunction f = tensor_product(h1, h1);
        auto out = partial_transform(f, {{1, AxisPairing::Mean, full}});
        for (std::uint64_t c = 0; c < out.size(); ++c)
            CHECK(out[c] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("mean slice of an indicator") {
        // f = chi_{[0,1/2)^2}, mean over [0,1/2) in axis 1 -> chi_[0,1/2)(s)
        DyadicRectangle q{{DyadicInterval{1, 0, 0, 0}, DyadicInterval{1, 0, 0, 0}}};
        GridFunction f = indicator(g, q);
        auto out = partial_transform(f, {{1, AxisPairing::Mean, DyadicInterval{1, 0, 0, 0}}});
        CHECK(out[0] == Catch::Approx(1.0));
        CHECK(out[1] == Catch::Approx(1.0));
        CHECK(out[2] == Catch::Approx(0.0).margin(1e-15));
        CHECK(out[3] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("repeated axis rejected") {
        GridFunction f(g, 1.0);
        CHECK_THROWS_AS(
            partial_transform(f, {{0, AxisPairing::Mean, full}, {0, AxisPairing::Haar, full}}),
            ArgumentError);
    }
}

TEST_CASE("martingale operators") {
    SECTION("single atom: DIFF picks its own generation") {
        Grid g({1});
        GridFunction h = haar_atom(g, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
        auto d0 = martingale(h, {0}, MartingaleMode::Diff);
        for (std::uint64_t c = 0; c < h.size(); ++c) CHECK(d0[c] == Catch::Approx(h[c]));
        auto d1 = martingale(h, {1}, MartingaleMode::Diff);
        for (std::uint64_t c = 0; c < h.size(); ++c)
            CHECK(d1[c] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("TAIL at zero is the identity on zero-slice-mean functions") {
        Grid g({2, 2});
        GridFunction f = random_band_limited(g, 21);
        auto q = martingale(f, {0, 0}, MartingaleMode::Tail);
        for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(q[c] == Catch::Approx(f[c]).margin(1e-13));
    }
    SECTION("EXPECT uses strict inequality") {
        Grid g({2});
        GridFunction h = haar_atom(g, DyadicRectangle{{DyadicInterval{1, 0, 0, 0}}}, false);
        auto e = martingale(h, {1}, MartingaleMode::Expect);
        for (std::uint64_t c = 0; c < h.size(); ++c)
            CHECK(e[c] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("EXPECT is the conditional expectation on generation cells") {
        Grid g({3});
        GridFunction f = random_cells(g, 3);
        auto e = martingale(f, {2}, MartingaleMode::Expect);
        for (std::uint32_t m = 0; m < 4; ++m) {
            DyadicRectangle r{{DyadicInterval{2, m, 0, 0}}};
            const double mean = rectangle_mean(f, r);
            for_each_cell(g, r, [&](std::uint64_t c) { CHECK(e[c] == Catch::Approx(mean)); });
        }
    }
    SECTION("telescoping: DIFF over all generations plus means reconstructs f") {
        Grid g({2, 2});
        GridFunction f = random_cells(g, 77);
        // sum of all pure DIFF blocks
        GridFunction sum(g, 0.0);
        for (int j1 = 0; j1 < 2; ++j1)
            for (int j2 = 0; j2 < 2; ++j2) sum += martingale(f, {j1, j2}, MartingaleMode::Diff);
        // mean directions: everything that is not a pure Haar coefficient
        GridFunction means = f - pure_haar_part(f);
        sum += means;
        for (std::uint64_t c = 0; c < f.size(); ++c)
            CHECK(sum[c] == Catch::Approx(f[c]).margin(1e-12));
    }
}

TEST_CASE("open-set projection") {
    Grid g({2, 2});
    SECTION("atom inside / outside") {
        DyadicRectangle r{{DyadicInterval{1, 0, 0, 0}, DyadicInterval{1, 0, 0, 0}}};
        GridFunction h = haar_atom(g, r, false);
        std::vector<std::uint32_t> rcells;
        for_each_cell(g, r, [&](std::uint64_t c) { rcells.push_back(static_cast<std::uint32_t>(c)); });
        auto inside = project_open_set(h, OpenSetApprox(g, rcells));
        for (std::uint64_t c = 0; c < h.size(); ++c) CHECK(inside[c] == Catch::Approx(h[c]).margin(1e-13));
        auto outside = project_open_set(h, OpenSetApprox(g, {15}));
        for (std::uint64_t c = 0; c < h.size(); ++c)
            CHECK(outside[c] == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("norm identity, idempotence, self-adjointness") {
        const GridFunction f = random_cells(g, 13);
        const GridFunction u = random_cells(g, 14);
        OpenSetApprox omega(g, {0, 1, 2, 3, 4, 5, 6, 7, 9});
        const auto pf = project_open_set(f, omega);
        const auto pu = project_open_set(u, omega);
        // coefficient-sum oracle
        const HaarSpectrum s = forward_haar(f);
        double expect = 0;
        for (const auto& r : rectangles_contained(omega)) {
            bool representable = true;
            for (int a = 0; a < 2; ++a)
                if (r.axes[a].level >= g.level(a)) representable = false;
            if (!representable) continue;
            const double c = s.coefficient(r);
            expect += c * c;
        }
        CHECK(pf.l2_norm_sq() == Catch::Approx(expect).margin(1e-12));
        const auto ppf = project_open_set(pf, omega);
        for (std::uint64_t c = 0; c < f.size(); ++c)
            CHECK(ppf[c] == Catch::Approx(pf[c]).margin(1e-12));
        CHECK(inner_product(pf, u) == Catch::Approx(inner_product(f, pu)).margin(1e-12));
        CHECK(pf.l2_norm() <= f.l2_norm() + 1e-12);
    }
}

TEST_CASE("square function") {
    SECTION("single 2-d atom") {
        Grid g({2, 2});
        DyadicRectangle r{{DyadicInterval{1, 0, 0, 0}, DyadicInterval{1, 0, 0, 0}}};
        GridFunction h = haar_atom(g, r, false);
        auto sq = square_function(h);
        for_each_cell(g, r, [&](std::uint64_t c) { CHECK(sq.values[c] == Catch::Approx(2.0)); });
        CHECK(sq.h1_norm == Catch::Approx(0.5)); // |R|^{1/2}
    }
    SECTION("1-d examples") {
        Grid g({2});
        GridFunction h = haar_atom(g, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
        auto sq = square_function(h);
        for (std::uint64_t c = 0; c < h.size(); ++c) CHECK(sq.values[c] == Catch::Approx(1.0));
        CHECK(sq.h1_norm == Catch::Approx(1.0));

        GridFunction two = haar_atom(g, DyadicRectangle{{DyadicInterval{1, 0, 0, 0}}}, false) +
                           haar_atom(g, DyadicRectangle{{DyadicInterval{1, 1, 0, 0}}}, false);
        auto sq2 = square_function(two);
        for (std::uint64_t c = 0; c < two.size(); ++c)
            CHECK(sq2.values[c] == Catch::Approx(std::sqrt(2.0)));
        CHECK(sq2.h1_norm == Catch::Approx(std::sqrt(2.0)));
    }
}

TEST_CASE("tilde aggregation") {
    Grid g({2, 2});
    const DyadicInterval J{0, 0, 0, 0};
    SECTION("two siblings collapse to their root-sum-square") {
        GridFunction gfun =
            haar_atom(g, DyadicRectangle{{DyadicInterval{1, 0, 0, 0}, J}}, false) +
            haar_atom(g, DyadicRectangle{{DyadicInterval{1, 1, 0, 0}, J}}, false);
        auto t = tilde_aggregate(gfun, 0);
        CHECK(t.coefficient(DyadicRectangle{{DyadicInterval{0, 0, 0, 0}, J}}) ==
              Catch::Approx(std::sqrt(2.0)));
        // everything else at the cut is zero
        double total = t.coefficient_l2_sq();
        CHECK(total == Catch::Approx(2.0));
    }
    SECTION("coarser coefficients pass through") {
        GridFunction gfun = random_band_limited(g, 31, {1, 2}); // axis-0 levels < 1 only
        auto t = tilde_aggregate(gfun, 1);
        auto s = forward_haar(gfun);
        for (std::uint64_t i = 0; i < s.size(); ++i) CHECK(t[i] == Catch::Approx(s[i]).margin(1e-14));
    }
    SECTION("l2 mass of coefficients is preserved") {
        GridFunction gfun = random_band_limited(g, 32);
        auto s = forward_haar(gfun);
        for (int cut = 0; cut <= 2; ++cut) {
            auto t = tilde_aggregate(gfun, cut);
            CHECK(t.coefficient_l2_sq() == Catch::Approx(s.coefficient_l2_sq()).margin(1e-12));
        }
    }
    SECTION("subtree root-sum-square oracle at the cut") {
        Grid g3({3, 1});
        GridFunction gfun = random_band_limited(g3, 33);
        auto s = forward_haar(gfun);
        auto t = tilde_aggregate(gfun, 1);
        const DyadicInterval J0{0, 0, 0, 0};
        for (std::uint32_t m = 0; m < 2; ++m) {
            const DyadicInterval R1{1, m, 0, 0};
            // axis-0 subtree of R1 at k=3: R1 itself and its two level-2 children
            double sub = 0;
            const double c1 = s.coefficient(DyadicRectangle{{R1, J0}});
            sub += c1 * c1;
            for (std::uint32_t mm = 2 * m; mm < 2 * m + 2; ++mm) {
                const double c2 = s.coefficient(DyadicRectangle{{DyadicInterval{2, mm, 0, 0}, J0}});
                sub += c2 * c2;
            }
            CHECK(t.coefficient(DyadicRectangle{{R1, J0}}) ==
                  Catch::Approx(std::sqrt(sub)).margin(1e-14));
        }
    }
}
