#include <catch2/catch_amalgamated.hpp>

#include "mrf/grid.hpp"
#include "mrf/rng.hpp"

using namespace mrf;

TEST_CASE("interpolation is exact at nodes") {
    GridField g({{-1.0, -2.0}, {1.5, 2.0}}, {7, 9});
    Rng rng(42);
    for (auto& v : g.values()) v = rng.uniform(-5.0, 5.0);
    for (std::size_t i = 0; i < g.node_count(); i += 5) {
        const Vec x = g.node_coords(i);
        REQUIRE(g.interpolate(x) == Catch::Approx(g.value_at(i)).margin(1e-12));
    }
}

TEST_CASE("1d linear interpolation") {
    GridField g({{0.0}, {1.0}}, {2});
    g.values() = {0.0, 1.0};
    REQUIRE(g.interpolate({0.25}) == Catch::Approx(0.25));
}

TEST_CASE("2d bilinear at cell center averages the corners") {
    GridField g({{0.0, 0.0}, {1.0, 1.0}}, {2, 2});
    g.values() = {0.0, 1.0, 1.0, 2.0};
    REQUIRE(g.interpolate({0.5, 0.5}) == Catch::Approx(1.0));
}

TEST_CASE("interpolated value stays within the enclosing cell corner range") {
    GridField g({{-1.0, -1.0}, {1.0, 1.0}}, {11, 11});
    Rng rng(7);
    for (auto& v : g.values()) v = rng.uniform(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        Vec x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        std::size_t cell[8];
        double w[8];
        g.locate_cell(x, cell, w);
        double lo = kInf, hi = -kInf;
        for (std::size_t dx = 0; dx <= 1; ++dx)
            for (std::size_t dy = 0; dy <= 1; ++dy) {
                const double v = g.value_at(g.flat_index({cell[0] + dx, cell[1] + dy}));
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        const double val = g.interpolate(x);
        REQUIRE(val >= lo - 1e-12);
        REQUIRE(val <= hi + 1e-12);
    }
}

TEST_CASE("query outside the box throws") {
    GridField g({{0.0}, {1.0}}, {5});
    REQUIRE_THROWS_AS(g.interpolate({1.5}), OutOfDomainError);
    REQUIRE_THROWS_AS(g.interpolate({-0.1}), OutOfDomainError);
}

TEST_CASE("boundary and index helpers") {
    GridField g({{0.0, 0.0}, {1.0, 1.0}}, {3, 4});
    REQUIRE(g.node_count() == 12);
    REQUIRE(g.on_boundary(0));
    const std::size_t center = g.flat_index({1, 1});
    REQUIRE_FALSE(g.on_boundary(center));
    REQUIRE(g.multi_index(center) == std::vector<std::size_t>{1, 1});
}
