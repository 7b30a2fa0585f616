#include "flagshift/jet_modules.hpp"

#include "doctest.h"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace flagshift;

namespace {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return factorial(n) / (factorial(k) * factorial(n - k));
}

Polynomial random_poly(int degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Polynomial f;
    for (int i = 0; i <= degree; ++i) f.coeffs.push_back(Complex(d(rng), d(rng)));
    return f;
}

} // namespace

TEST_CASE("named families carry their closed-form entries and validate exactly") {
    const int k = 5;
    const JetSpec B = binomial_jet_spec(k);
    const JetSpec F = inverse_factorial_jet_spec(k);
    for (int p = 1; p <= k; ++p)
        for (int l = 1; l <= p; ++l) {
            CHECK(B.mu(p - 1, l - 1) == doctest::Approx(binom(p - 1, l - 1)).epsilon(1e-14));
            CHECK(F.mu(p - 1, l - 1) == doctest::Approx(1.0 / factorial(p - l)).epsilon(1e-14));
        }
    REQUIRE(B.mu_exact.has_value());
    REQUIRE(F.mu_exact.has_value());
    const MuValidation vb = validate_spec(B);
    const MuValidation vf = validate_spec(F);
    CHECK(vb.valid);
    CHECK(vb.exact);
    CHECK(vf.valid);
    CHECK(vf.exact);
}

TEST_CASE("the superdiagonal chain-determines the full transition matrix") {
    // mu_{p,i} = prod of superdiagonal couplings / (p-i)!; the binomial family
    // has superdiagonal (1, 2, 3), so reconstruction must reproduce it.
    const JetSpec B = binomial_jet_spec(4);
    const JetSpec R = jet_spec_from_superdiagonal({1.0, 2.0, 3.0});
    CHECK((B.mu - R.mu).norm() < 1e-14);
    const auto s = R.superdiagonal();
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(2.0));
    CHECK(s[2] == doctest::Approx(3.0));
}

TEST_CASE("validation pins the lexicographically first violation") {
    JetSpec S = binomial_jet_spec(4);
    S.mu_exact.reset();

    SUBCASE("non-unit diagonal") {
        S.mu(2, 2) = 1.5;
        const MuValidation v = validate_spec(S);
        CHECK(!v.valid);
        // mu_{3,3} mu_{3,1} = mu_{3,1} is the first triple touching the bad
        // entry, one step before the pure diagonal triple (3,3,3).
        CHECK(v.p == 3);
        CHECK(v.l == 3);
        CHECK(v.i == 1);
    }
    SUBCASE("broken compatibility relation") {
        S.mu(3, 1) += 0.25;
        const MuValidation v = validate_spec(S);
        CHECK(!v.valid);
        CHECK(v.violation > 1e-3);
        // The first triple scanning (p, l, i) lexicographically that touches
        // the perturbed entry mu_{4,2}.
        CHECK(v.p == 4);
    }
}

TEST_CASE("random valid specs are reproducible and pass validation") {
    const JetSpec a = random_valid_jet_spec(4, 123);
    const JetSpec b = random_valid_jet_spec(4, 123);
    const JetSpec c = random_valid_jet_spec(4, 124);
    CHECK((a.mu - b.mu).norm() == 0.0);
    CHECK((a.mu - c.mu).norm() > 1e-6);
    CHECK(validate_spec(a).valid);
    CHECK(validate_spec(c).valid);
}

TEST_CASE("the jet action is multiplicative exactly when the spec is valid") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 4);
        const JetSpec S = random_valid_jet_spec(k, rng());
        const Polynomial f = random_poly(5, rng);
        const Polynomial g = random_poly(4, rng);
        const Complex w(0.3, -0.2);
        const Eigen::MatrixXcd lhs = jet_action(S, f * g, w);
        const Eigen::MatrixXcd rhs = jet_action(S, f, w) * jet_action(S, g, w);
        CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("the action is triangular with f on the diagonal and refuses invalid specs") {
    const JetSpec S = binomial_jet_spec(4);
    Polynomial f;
    f.coeffs = {Complex(2, 1), Complex(0, 0), Complex(1, 0)};
    const Complex w(0.2, 0.1);
    const Eigen::MatrixXcd M = jet_action(S, f, w);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(M(i, i) - f.eval(w)) < 1e-13);
        for (int j = i + 1; j < 4; ++j) CHECK(std::abs(M(i, j)) == 0.0);
    }
    JetSpec bad = S;
    bad.mu_exact.reset();
    bad.mu(3, 0) *= 1.01;
    CHECK_THROWS_AS(jet_action(bad, f, w), parameter_error);
}

TEST_CASE("monomial witnesses refute perturbed specs and clear valid ones") {
    const JetSpec S = binomial_jet_spec(4);
    CHECK(!find_violating_monomials(S).has_value());
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        JetSpec bad = random_valid_jet_spec(3 + static_cast<int>(rng() % 2), rng());
        bad.mu_exact.reset();
        const int p = bad.k;
        bad.mu(p - 1, 0) *= 1.0 + 0.05 * (1.0 + static_cast<double>(rng() % 5));
        const auto witness = find_violating_monomials(bad);
        REQUIRE(witness.has_value());
        CHECK(witness->first >= 0);
        CHECK(witness->first <= bad.k);
        CHECK(witness->second >= 0);
        CHECK(witness->second <= bad.k);
        CHECK(!validate_spec(bad).valid);
    }
}

TEST_CASE("frame coefficients of the named families have closed forms") {
    // Inverse-factorial: b_{p,l} = 1 / (p-l)!. Binomial: b_{p,l} = binom(p-1, l-1).
    const int k = 5;
    const Eigen::MatrixXd bF = b_coefficients(inverse_factorial_jet_spec(k));
    const Eigen::MatrixXd bB = b_coefficients(binomial_jet_spec(k));
    for (int p = 1; p <= k; ++p)
        for (int l = 1; l <= p; ++l) {
            CHECK(bF(p - 1, l - 1) == doctest::Approx(1.0 / factorial(p - l)).epsilon(1e-12));
            CHECK(bB(p - 1, l - 1) == doctest::Approx(binom(p - 1, l - 1)).epsilon(1e-12));
        }
}

TEST_CASE("localized kernels are Hermitian positive semi-definite on the diagonal") {
    std::mt19937_64 rng(17);
    const DiagonalKernel K = binomial_kernel(1.0, 64);
    for (int trial = 0; trial < 6; ++trial) {
        const JetSpec S = random_valid_jet_spec(2 + static_cast<int>(rng() % 3), rng());
        const Complex w(0.3 * std::cos(1.0 + trial), 0.3 * std::sin(1.0 + trial));
        const Eigen::MatrixXcd L = localization_kernel(S, K, w, w);
        CHECK((L - L.adjoint()).norm() < 1e-10 * L.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(L, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-10 * L.norm());
    }
}

TEST_CASE("order one localization is the kernel itself") {
    const DiagonalKernel K = binomial_kernel(2.0, 64);
    JetSpec S;
    S.k = 1;
    S.mu = Eigen::MatrixXd::Ones(1, 1);
    const Complex z(0.2, 0.1), w(0.15, -0.2);
    const Eigen::MatrixXcd L = localization_kernel(S, K, z, w);
    REQUIRE(L.rows() == 1);
    CHECK(std::abs(L(0, 0) - K.eval(z, w)) < 1e-12 * std::abs(L(0, 0)));
}

TEST_CASE("localizations classify by superdiagonal equality") {
    const DiagonalKernel K = binomial_kernel(1.0, 72);
    const int N = 24;

    SUBCASE("equal superdiagonals are isomorphic") {
        const LocalizationVerdict v =
            classify_localizations(jet_spec_from_superdiagonal({1.0, 2.0}),
                                   binomial_jet_spec(3), K, N);
        CHECK(v.superdiagonals_equal);
        CHECK(v.isomorphic);
        CHECK(v.equivalence.equivalent);
    }
    SUBCASE("different superdiagonals are distinguished") {
        const LocalizationVerdict v = classify_localizations(
            binomial_jet_spec(3), inverse_factorial_jet_spec(3), K, N);
        CHECK(!v.superdiagonals_equal);
        CHECK(!v.isomorphic);
        CHECK(!v.equivalence.equivalent);
    }
}

TEST_CASE("polynomial helpers: product, monomial, derivative") {
    Polynomial f;
    f.coeffs = {Complex(1, 0), Complex(2, 0)};
    Polynomial g;
    g.coeffs = {Complex(0, 1), Complex(0, 0), Complex(3, 0)};
    const Polynomial h = f * g;
    REQUIRE(h.degree() == 3);
    CHECK(std::abs(h.eval(Complex(0.5, 0.25)) -
                   f.eval(Complex(0.5, 0.25)) * g.eval(Complex(0.5, 0.25))) < 1e-14);
    const Polynomial m = monomial(3, Complex(2, 0));
    CHECK(m.degree() == 3);
    CHECK(std::abs(m.eval(Complex(2, 0)) - Complex(16, 0)) < 1e-13);
    const Polynomial df = f.derivative();
    CHECK(df.degree() == 0);
    CHECK(std::abs(df.eval(Complex(0, 0)) - Complex(2, 0)) < 1e-15);
}
