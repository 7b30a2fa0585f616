#include "flagshift/invariants.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

using namespace flagshift;

namespace {

DiagonalKernel K_of(double lambda, int N) { return binomial_kernel(lambda, N + 48); }

} // namespace

TEST_CASE("polar grid covers (0, rmax] with the requested counts") {
    const auto g = polar_grid(4, 6, 0.6);
    REQUIRE(g.size() == 24);
    double rmax = 0.0, rmin = 1.0;
    for (Complex w : g) {
        rmax = std::max(rmax, std::abs(w));
        rmin = std::min(rmin, std::abs(w));
    }
    CHECK(rmax == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(rmin == doctest::Approx(0.15).epsilon(1e-12));
    CHECK_THROWS_AS(polar_grid(0, 6, 0.5), parameter_error);
    CHECK_THROWS_AS(polar_grid(4, 6, 1.0), parameter_error);
}

TEST_CASE("invariant report matches the binomial closed forms") {
    const int N = 32;
    const double l0 = 1.0, l1 = 3.0;
    const FlagOperator T = build_flag2(K_of(l0, N), K_of(l1, N), 1.0, N);
    const auto grid = polar_grid(3, 4, 0.5);
    const InvariantReport rep = invariant_report(T, grid);
    REQUIRE(rep.curvature_last.size() == grid.size());
    REQUIRE(rep.ratios.size() == 1);
    REQUIRE(rep.theta12.size() == grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double r2 = std::norm(grid[g]);
        CHECK(rep.curvature_first[g] ==
              doctest::Approx(-l0 / ((1 - r2) * (1 - r2))).epsilon(1e-10));
        CHECK(rep.curvature_last[g] ==
              doctest::Approx(-l1 / ((1 - r2) * (1 - r2))).epsilon(1e-10));
        // ||t_0|| / ||t_1|| = sqrt(K0 / K1) = (1 - r^2)^((l1 - l0) / 2).
        CHECK(rep.ratios[0][g] ==
              doctest::Approx(std::pow(1 - r2, (l1 - l0) / 2.0)).epsilon(1e-10));
        const double s = 1 - r2;
        const double theta = -(l0 / (s * s)) / std::sqrt(std::pow(s, l0 - l1) + l0 / (s * s));
        CHECK(rep.theta12[g] == doctest::Approx(theta).epsilon(1e-8));
    }
}

TEST_CASE("theta12 is reported only for two-block models") {
    const int N = 24;
    const FlagOperator T3 =
        build_flag_chain({K_of(1.0, N), K_of(2.0, N), K_of(3.0, N)}, {1.0, 1.0}, N);
    const InvariantReport rep = invariant_report(T3, polar_grid(2, 2, 0.4));
    CHECK(rep.theta12.empty());
    CHECK(rep.ratios.size() == 2);
}

TEST_CASE("couplings beyond the superdiagonal surface as extra ratios") {
    const int N = 24;
    std::vector<ShiftBlock> blocks = {build_shift_block(K_of(1.0, N), N),
                                      build_shift_block(K_of(2.0, N), N),
                                      build_shift_block(K_of(3.0, N), N)};
    std::map<std::pair<int, int>, Eigen::MatrixXcd> inter;
    inter[{0, 1}] = build_flag_chain({K_of(1.0, N), K_of(2.0, N)}, {1.0}, N).intertwiner_matrix(0, 1);
    inter[{1, 2}] = build_flag_chain({K_of(2.0, N), K_of(3.0, N)}, {1.0}, N).intertwiner_matrix(0, 1);
    // The composite coupling intertwines the end blocks, so it is a legal
    // entry above the superdiagonal.
    inter[{0, 2}] = inter[{0, 1}] * inter[{1, 2}];
    const FlagOperator T = build_flag_custom(std::move(blocks), std::move(inter), false);
    const InvariantReport rep = invariant_report(T, polar_grid(2, 2, 0.3));
    CHECK(rep.extra_ratios.count({0, 2}) == 1);
}

TEST_CASE("insufficient truncation is refused rather than silently inaccurate") {
    const int N = 8;
    const FlagOperator T = build_flag2(K_of(1.0, N), K_of(3.0, N), 1.0, N);
    CHECK_THROWS_AS(invariant_report(T, polar_grid(2, 2, 0.6)), accuracy_error);
}

TEST_CASE("equivalence verdicts separate couplings and accept gauge copies") {
    const int N = 32;
    const auto grid = polar_grid(4, 6, 0.5);
    const FlagOperator A = build_flag2(K_of(1.0, N), K_of(3.0, N), 1.0, N);

    SUBCASE("gauge conjugate is equivalent") {
        const FlagOperator B = A.with_gauge(random_gauge(2, N, 11));
        const EquivalenceVerdict v = decide_equivalence(A, B, grid, 1e-6);
        CHECK(v.equivalent);
        CHECK(v.max_curvature_gap < 1e-10);
        CHECK(v.max_ratio_gap < 1e-10);
    }
    SUBCASE("coupling change is detected") {
        const FlagOperator B = build_flag2(K_of(1.0, N), K_of(3.0, N), 1.002, N);
        const EquivalenceVerdict v = decide_equivalence(A, B, grid, 1e-6);
        CHECK(!v.equivalent);
        CHECK(v.max_ratio_gap > 1e-4);
    }
    SUBCASE("curvature change is detected") {
        const FlagOperator B = build_flag2(K_of(1.0, N), K_of(3.1, N), 1.0, N);
        const EquivalenceVerdict v = decide_equivalence(A, B, grid, 1e-6);
        CHECK(!v.equivalent);
        CHECK(v.max_curvature_gap > 1e-2);
    }
}

TEST_CASE("the two invariant pairs give the same verdict on two-block models") {
    const int N = 32;
    const auto grid = polar_grid(3, 4, 0.5);
    const FlagOperator A = build_flag2(K_of(2.0, N), K_of(4.0, N), 1.0, N);
    const FlagOperator B = build_flag2(K_of(2.0, N), K_of(4.0, N), 1.25, N);
    const FlagOperator C = A.with_gauge(random_gauge(2, N, 4));
    const auto vr = decide_equivalence(A, B, grid, 1e-6, InvariantPair::curvature_and_ratio);
    const auto vt = decide_equivalence(A, B, grid, 1e-6, InvariantPair::curvature_and_theta);
    CHECK(vr.equivalent == vt.equivalent);
    const auto wr = decide_equivalence(A, C, grid, 1e-6, InvariantPair::curvature_and_ratio);
    const auto wt = decide_equivalence(A, C, grid, 1e-6, InvariantPair::curvature_and_theta);
    CHECK(wr.equivalent);
    CHECK(wt.equivalent);
}

TEST_CASE("non-bidiagonal many-block comparisons are refused without necessary_only") {
    const int N = 16;
    const FlagOperator D = direct_sum_model({K_of(1.0, N), K_of(2.0, N), K_of(3.0, N)}, N);
    const auto grid = polar_grid(2, 2, 0.3);
    CHECK_THROWS_AS(decide_equivalence(D, D, grid, 1e-6), parameter_error);
    const EquivalenceVerdict v = decide_equivalence(D, D, grid, 1e-6,
                                                    InvariantPair::curvature_and_ratio, true);
    CHECK(v.necessary_only);
}

TEST_CASE("homogeneous line detection recovers lambda and rejects perturbations") {
    const auto grid = polar_grid(3, 4, 0.5);
    const auto lam = is_homogeneous_line(K_of(2.5, 64), grid);
    REQUIRE(lam.has_value());
    CHECK(*lam == doctest::Approx(2.5).epsilon(1e-8));

    std::vector<double> a = K_of(2.5, 64).coeffs;
    a[3] *= 1.05;
    CHECK(!is_homogeneous_line(kernel_from_coeffs(a), grid).has_value());
}

TEST_CASE("two-block homogeneity needs the curvature gap two and aligned coupling") {
    const int N = 32;
    const auto grid = polar_grid(3, 4, 0.5);

    SUBCASE("canonical pairs pass") {
        for (double l : {1.0, 2.0}) {
            const FlagOperator T = build_flag2(K_of(l, N), K_of(l + 2.0, N), 0.8, N);
            const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
            CHECK(v.homogeneous);
            CHECK(v.lambda0 == doctest::Approx(l).epsilon(1e-8));
            CHECK(v.lambda1 == doctest::Approx(l + 2.0).epsilon(1e-8));
        }
    }
    SUBCASE("a lambda gap of one fails the gap condition") {
        const FlagOperator T = build_flag2(K_of(1.0, N), K_of(2.0, N), 1.0, N);
        const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
        CHECK(!v.homogeneous);
        CHECK(v.failed_condition == 2);
    }
    SUBCASE("an inhomogeneous block fails the first condition") {
        std::vector<double> a;
        for (int n = 0; n <= N + 48; ++n) a.push_back(1.0 / std::tgamma(n + 1.0));
        const FlagOperator T = build_flag2(kernel_from_coeffs(a), K_of(3.0, N), 1.0, N);
        const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
        CHECK(!v.homogeneous);
        CHECK(v.failed_condition == 1);
    }
}

TEST_CASE("mobius covariance holds for homogeneous models only") {
    const int N = 48;
    const auto grid = polar_grid(2, 3, 0.35);
    const FlagOperator H = build_flag2(K_of(1.0, N), K_of(3.0, N), 1.0, N);
    CHECK(mobius_homogeneity_probe(H, Complex(0.2, 0.1), grid) < 1e-8);
    const FlagOperator X = build_flag2(K_of(1.0, N), K_of(2.0, N), 1.0, N);
    CHECK(mobius_homogeneity_probe(X, Complex(0.2, 0.1), grid) > 1e-3);
}
