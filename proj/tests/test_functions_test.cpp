#include <catch2/catch_amalgamated.hpp>

#include <pbmo/norms.hpp>
#include <pbmo/test_functions.hpp>

using namespace pbmo;

TEST_CASE("dyadic_log construction") {
    SECTION("ancestor-indicator sum at k=3") {
        Grid g({3});
        auto f = dyadic_log(g, DyadicInterval{3, 0, 0, 0});
        const double expect[8] = {3, 3, 2, 2, 1, 1, 1, 1};
        for (int c = 0; c < 8; ++c) CHECK(f[c] == expect[c]);
    }
    SECTION("whole torus has no strict ancestors") {
        Grid g({2});
        auto f = dyadic_log(g, DyadicInterval{0, 0, 0, 0});
        for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(f[c] == 0.0);
    }
    SECTION("plateau equals the level, exactly") {
        Grid g({4});
        for (int j = 1; j <= 4; ++j) {
            auto f = dyadic_log(g, DyadicInterval{j, (1u << j) - 1, 0, 0});
            const AxisRange rng = axis_range(g, 0, DyadicInterval{j, (1u << j) - 1, 0, 0});
            for (std::uint32_t c = rng.begin; c < rng.end; ++c) CHECK(f[c] == j);
        }
    }
    SECTION("bounded bmo at every depth") {
        for (int k = 2; k <= 6; ++k) {
            Grid g({k});
            auto f = dyadic_log(g, DyadicInterval{k, 0, 0, 0});
            const double v = bmo_norm(f).value;
            CHECK(v <= 1.0 + 1e-12);
            if (k == 3) CHECK(v == Catch::Approx(0.75));
        }
    }
    SECTION("rectangle log is the level sum on the target") {
        Grid g({3, 2});
        DyadicRectangle r{{DyadicInterval{2, 1, 0, 0}, DyadicInterval{2, 3, 0, 0}}};
        auto f = dyadic_log(g, r);
        for_each_cell(g, r, [&](std::uint64_t c) { CHECK(f[c] == 4.0); });
    }
}

TEST_CASE("tensor product") {
    Grid g1({2}), g2({1});
    SECTION("constant left factor") {
        GridFunction one(g1, 1.0);
        GridFunction h = haar_atom(g2, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
        auto t = tensor_product(one, h);
        REQUIRE(t.grid().dims() == 2);
        for (std::uint64_t c = 0; c < t.size(); ++c) {
            const auto coords = t.grid().coords(c);
            CHECK(t[c] == h[coords[1]]);
        }
    }
    SECTION("l2 norm multiplies") {
        auto f = random_cells(g1, 4);
        auto g = random_cells(g2, 5);
        auto t = tensor_product(f, g);
        CHECK(t.l2_norm() == Catch::Approx(f.l2_norm() * g.l2_norm()));
    }
}

TEST_CASE("additive lift") {
    SECTION("zero components") {
        auto f = additive_lift({GridFunction(Grid({2}), 0.0), GridFunction(Grid({2}), 0.0)});
        for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(f[c] == 0.0);
    }
    SECTION("two Haar components have bmo 1, within the component-sum bound") {
        Grid line({2});
        GridFunction h = haar_atom(line, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
        auto f = additive_lift({h, h});
        const double v = bmo_norm(f).value;
        CHECK(v == Catch::Approx(1.0));
        CHECK(v <= bmo_norm(h).value + bmo_norm(h).value + 1e-12);
    }
    SECTION("slices keep the structure") {
        Grid line({2});
        auto logf = dyadic_log(line, DyadicInterval{2, 0, 0, 0});
        auto f = additive_lift({logf, GridFunction(line, 0.0)});
        const Grid& g = f.grid();
        for (std::uint32_t s = 0; s < 4; ++s) {
            const double v0 = f[g.linear({s, 0})];
            for (std::uint32_t t = 1; t < 4; ++t) CHECK(f[g.linear({s, t})] == v0);
        }
        for (std::uint32_t t = 0; t < 4; ++t)
            for (std::uint32_t s = 0; s < 4; ++s) CHECK(f[g.linear({s, t})] == logf[s]);
    }
    SECTION("component count must match") {
        CHECK_THROWS_AS(additive_lift({}), ArgumentError);
    }
}

TEST_CASE("recipes and determinism") {
    Grid g({2, 2});
    SECTION("indicator recipe") {
        FunctionRecipe r;
        r.kind = FunctionRecipe::Kind::Indicator;
        r.target = DyadicRectangle{{DyadicInterval{1, 0, 0, 0}, DyadicInterval{1, 1, 0, 0}}};
        auto f = sample(r, g, 0);
        double mass = 0;
        for (std::uint64_t c = 0; c < f.size(); ++c) mass += f[c];
        CHECK(mass == 4.0);
    }
    SECTION("normalized atom has sup-norm 1") {
        FunctionRecipe r;
        r.kind = FunctionRecipe::Kind::HaarAtom;
        r.target = DyadicRectangle{{DyadicInterval{1, 0, 0, 0}, DyadicInterval{0, 0, 0, 0}}};
        auto f = sample(r, g, 0);
        CHECK(f.sup_norm() == Catch::Approx(1.0));
    }
    SECTION("random recipe is deterministic") {
        FunctionRecipe r;
        r.kind = FunctionRecipe::Kind::Random;
        r.band = {2, 2};
        auto a = sample(r, g, 7);
        auto b = sample(r, g, 7);
        for (std::uint64_t c = 0; c < a.size(); ++c) CHECK(a[c] == b[c]);
        auto d = sample(r, g, 8);
        bool different = false;
        for (std::uint64_t c = 0; c < a.size(); ++c) different |= a[c] != d[c];
        CHECK(different);
    }
    SECTION("band-limited samples pass the band predicate") {
        auto f = random_band_limited(g, 3, {1, 2});
        CHECK(band_limited(f, {1, 2}));
        CHECK(band_limited(f, {}));
        auto raw = random_cells(g, 3);
        CHECK_FALSE(band_limited(raw, {1, 1}));
    }
}
