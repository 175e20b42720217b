#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <pbmo/io.hpp>

using namespace pbmo;

TEST_CASE("grid function text format") {
    Grid g({2, 1}, {1, 0});
    GridFunction f = random_cells(g, 42);
    std::ostringstream out;
    write_grid_function(out, f, false);
    const std::string text = out.str();
    CHECK(text.rfind("PBMO1 2 2 1 0.25 0\n", 0) == 0);
    std::istringstream in(text);
    const GridFunction back = read_grid_function(in);
    CHECK(back.grid() == g);
    for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(back[c] == f[c]);
}

TEST_CASE("grid function binary format") {
    Grid g({3});
    GridFunction f = random_cells(g, 43);
    std::ostringstream out;
    write_grid_function(out, f, true);
    std::istringstream in(out.str());
    const GridFunction back = read_grid_function(in);
    CHECK(back.grid() == g);
    for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(back[c] == f[c]);
}

TEST_CASE("malformed function files are rejected") {
    SECTION("bad magic") {
        std::istringstream in("NOPE 1 2 0\n1\n2\n3\n4\n");
        CHECK_THROWS_AS(read_grid_function(in), IoError);
    }
    SECTION("wrong value count") {
        std::istringstream in("PBMO1 1 2 0\n1\n2\n3\n");
        CHECK_THROWS_AS(read_grid_function(in), IoError);
    }
    SECTION("misaligned translation") {
        std::istringstream in("PBMO1 1 1 0.3\n1\n2\n");
        CHECK_THROWS_AS(read_grid_function(in), ArgumentError);
    }
}

TEST_CASE("matrix format round trip") {
    Grid g({1});
    GridFunction h = haar_atom(g, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
    auto m = assemble_matrix(named_operator(OperatorKind::Main, h));
    std::ostringstream out;
    write_matrix(out, m);
    CHECK(out.str().rfind("PBMOMAT 2 2\n", 0) == 0);
    std::istringstream in(out.str());
    const DenseMatrix back = read_matrix(in);
    REQUIRE(back.rows == 2);
    REQUIRE(back.cols == 2);
    for (std::uint64_t r = 0; r < 2; ++r)
        for (std::uint64_t c = 0; c < 2; ++c) CHECK(back.a[r * 2 + c] == m.entry(r, c));
}

TEST_CASE("spectrum json round trip") {
    Grid g({2, 2});
    const GridFunction f = random_cells(g, 44);
    const HaarSpectrum s = forward_haar(f);
    const json j = spectrum_to_json(s);
    const HaarSpectrum back = spectrum_from_json(j);
    REQUIRE(back.grid() == g);
    for (std::uint64_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
    // synthesized function matches too
    const GridFunction fb = inverse_haar(back);
    for (std::uint64_t c = 0; c < f.size(); ++c) CHECK(fb[c] == Catch::Approx(f[c]).margin(1e-13));
}

TEST_CASE("norm report json carries the contract fields") {
    Grid g({2});
    GridFunction h = haar_atom(g, DyadicRectangle{{DyadicInterval{0, 0, 0, 0}}}, false);
    const json j = norm_report_to_json(bmo_norm(h));
    CHECK(j.at("norm") == "bmo");
    CHECK(j.at("value").get<double>() == Catch::Approx(1.0));
    CHECK(j.at("method") == "exact");
    CHECK(j.at("witness").at("kind") == "rectangle");
    CHECK(j.at("resolution").get<std::vector<int>>() == std::vector<int>{2});
}

TEST_CASE("recipe json round trip") {
    FunctionRecipe r;
    r.kind = FunctionRecipe::Kind::Tensor;
    r.split = 1;
    FunctionRecipe a;
    a.kind = FunctionRecipe::Kind::LogInterval;
    a.target = DyadicRectangle{{DyadicInterval{2, 0, 0, 0}}};
    FunctionRecipe b;
    b.kind = FunctionRecipe::Kind::Random;
    b.band = {2};
    r.parts = {a, b};
    const FunctionRecipe back = recipe_from_json(recipe_to_json(r));
    Grid g({3, 3});
    const GridFunction f1 = sample(r, g, 5);
    const GridFunction f2 = sample(back, g, 5);
    for (std::uint64_t c = 0; c < f1.size(); ++c) CHECK(f1[c] == f2[c]);
}
