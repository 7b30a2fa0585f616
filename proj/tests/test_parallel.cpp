#include "flagshift/parallel.hpp"

#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "flagshift/invariants.hpp"

using namespace flagshift;

namespace {

DiagonalKernel K_of(double lambda, int N) { return binomial_kernel(lambda, N + 48); }

double heavy(std::size_t i) {
    double acc = 0.0;
    for (int k = 0; k < 500; ++k) acc += std::sin(0.01 * static_cast<double>(i) + k) / (k + 1.0);
    return acc;
}

} // namespace

TEST_CASE("parallel map is bit-identical to the serial reference") {
    const auto s = map_indexed<double>(257, heavy, Exec::serial);
    const auto p = map_indexed<double>(257, heavy, Exec::parallel);
    REQUIRE(s.size() == p.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == p[i]);
}

TEST_CASE("empty and single-element maps work in both modes") {
    CHECK(map_indexed<int>(0, [](std::size_t) { return 1; }, Exec::parallel).empty());
    const auto one = map_indexed<int>(1, [](std::size_t i) { return static_cast<int>(i) + 5; });
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 5);
}

TEST_CASE("the exception from the lowest failing index wins") {
    const auto f = [](std::size_t i) -> int {
        if (i % 3 == 1) throw std::runtime_error("boom at " + std::to_string(i));
        return static_cast<int>(i);
    };
    for (Exec e : {Exec::serial, Exec::parallel}) {
        try {
            map_indexed<int>(64, f, e);
            FAIL("expected a throw");
        } catch (const std::runtime_error& ex) {
            CHECK(std::string(ex.what()) == "boom at 1");
        }
    }
}

TEST_CASE("invariant reports agree bitwise between serial and parallel execution") {
    const int N = 32;
    const FlagOperator T = build_flag2(K_of(1.0, N), K_of(3.0, N), 1.1, N);
    const auto grid = polar_grid(3, 5, 0.5);
    const InvariantReport a = invariant_report(T, grid, Exec::serial);
    const InvariantReport b = invariant_report(T, grid, Exec::parallel);
    REQUIRE(a.curvature_last.size() == b.curvature_last.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CHECK(a.curvature_last[g] == b.curvature_last[g]);
        CHECK(a.curvature_first[g] == b.curvature_first[g]);
        CHECK(a.ratios[0][g] == b.ratios[0][g]);
        CHECK(a.theta12[g] == b.theta12[g]);
    }
}
