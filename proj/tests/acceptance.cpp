// Acceptance battery: ten independent criteria, one verdict line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "flagshift/flag_models.hpp"
#include "flagshift/geometry.hpp"
#include "flagshift/invariants.hpp"
#include "flagshift/jet_modules.hpp"
#include "flagshift/kernels.hpp"
#include "flagshift/verification.hpp"

using namespace flagshift;

namespace {

struct Criterion {
    std::string name;
    bool pass = false;
    double worst = 0.0;
    std::string detail;
    double seconds = 0.0;
};

DiagonalKernel K_of(double lambda, int N) { return binomial_kernel(lambda, N + 48); }

double max_offdiag_ratio(const Eigen::MatrixXd& profile) {
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < profile.rows(); ++i)
        for (int j = 0; j < profile.cols(); ++j)
            (i == j ? diag : off) = std::max(i == j ? diag : off, profile(i, j));
    return off / diag;
}

double max_subdiag_ratio(const Eigen::MatrixXcd& X, int n, int N) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            worst = std::max(worst, X.block(i * N, j * N, N, N).norm());
    return worst / X.norm();
}

// Shared pair construction for criteria 2 and 9: same kernels, coupling mu
// versus mu~; even pairs differ by at least 1e-3, odd pairs are equal up to a
// diagonal gauge.
struct EquivPair {
    FlagOperator A;
    FlagOperator B;
    bool expect_equivalent = false;
};

std::vector<EquivPair> build_equiv_pairs(int count, int N, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<EquivPair> pairs;
    pairs.reserve(static_cast<std::size_t>(count));
    for (int p = 0; p < count; ++p) {
        const double l0 = 1.0 + 0.5 * (p % 3);
        const double l1 = l0 + 2.0 + (p % 2);
        const double mu = 0.5 + u(rng);
        EquivPair e;
        e.A = build_flag2(K_of(l0, N), K_of(l1, N), mu, N);
        if (p % 2 == 0) {
            const double delta = (1e-3 + 0.3 * u(rng)) * (p % 4 == 0 ? 1.0 : -1.0);
            e.B = build_flag2(K_of(l0, N), K_of(l1, N), mu + delta, N);
            e.expect_equivalent = false;
        } else {
            e.B = e.A.with_gauge(random_gauge(2, N, seed + 100 + static_cast<unsigned long long>(p)));
            e.expect_equivalent = true;
        }
        pairs.push_back(std::move(e));
    }
    return pairs;
}

Criterion c1_curvature_law() {
    Criterion c{"c01-homogeneous-curvature-law", true, 0.0, "lambda in {0.5,1,2,3}, 5x8 grid, |w| <= 0.8", 0.0};
    const auto grid = polar_grid(5, 8, 0.8);
    for (double lambda : {0.5, 1.0, 2.0, 3.0}) {
        const DiagonalKernel K = binomial_kernel(lambda, 160, 0.85);
        for (Complex w : grid) {
            const double expected = -lambda / std::pow(1.0 - std::norm(w), 2);
            const double got = curvature_line(K, w).value;
            c.worst = std::max(c.worst, std::abs(got - expected) / std::abs(expected));
        }
    }
    c.pass = c.worst < 1e-6;
    return c;
}

Criterion c2_complete_invariant(const std::vector<EquivPair>& pairs) {
    Criterion c{"c02-coupling-complete-invariant", true, 0.0, "20 random mu pairs at N=32", 0.0};
    const auto grid = polar_grid(4, 6, 0.5);
    int wrong = 0;
    for (const EquivPair& e : pairs) {
        const EquivalenceVerdict v = decide_equivalence(e.A, e.B, grid, 1e-6);
        if (v.equivalent != e.expect_equivalent) ++wrong;
    }
    c.worst = wrong;
    c.pass = wrong == 0;
    c.detail += ", misclassified " + std::to_string(wrong);
    return c;
}

Criterion c3_rigidity() {
    Criterion c{"c03-unitary-rigidity", true, 0.0, "10 gauge pairs, n in {2,3,4}, N=32", 0.0};
    const int N = 32;
    for (int p = 0; p < 10; ++p) {
        FlagOperator A;
        switch (p % 3) {
        case 0: A = build_flag2(K_of(1.0 + 0.25 * p, N), K_of(3.0 + 0.25 * p, N), 1.0, N); break;
        case 1:
            A = build_flag_chain({K_of(1.0, N), K_of(2.5, N), K_of(4.0, N)}, {0.9, 1.1}, N);
            break;
        default: A = build_jet_model(K_of(2.0, N), {1.0, 0.8, 1.2}, N); break;
        }
        const FlagOperator B =
            A.with_gauge(random_gauge(A.block_count(), N, 7000 + static_cast<unsigned long long>(p)));
        const IntertwinerSolution sol = rigidity_probe(A, B);
        if (!sol.converged) {
            c.pass = false;
            c.detail += ", pair " + std::to_string(p) + " did not converge";
            continue;
        }
        c.worst = std::max(c.worst, max_offdiag_ratio(sol.block_profile));
    }
    c.pass = c.pass && c.worst < 1e-6;
    return c;
}

std::vector<FlagOperator> fb_models(int N) {
    std::vector<FlagOperator> models;
    models.push_back(build_flag2(K_of(1.0, N), K_of(3.0, N), 1.0, N));
    models.push_back(build_flag2(K_of(2.0, N), K_of(4.0, N), 0.8, N));
    models.push_back(build_jet_model(K_of(2.0, N), {1.0}, N));
    models.push_back(build_jet_model(K_of(1.5, N), {1.0, 2.0}, N));
    models.push_back(build_flag_chain({K_of(1.0, N), K_of(2.0, N), K_of(3.0, N)}, {0.7, 1.3}, N));
    return models;
}

Criterion c4_commutant_triangular() {
    Criterion c{"c04-commutant-upper-triangular", true, 0.0, "5 flag models at N=8", 0.0};
    const int N = 8;
    for (const FlagOperator& T : fb_models(N)) {
        const CommutantBasis cb = commutant_basis(T);
        for (const Eigen::MatrixXcd& X : cb.basis)
            c.worst = std::max(c.worst, max_subdiag_ratio(X, T.block_count(), N));
    }
    c.pass = c.worst < 1e-8;
    return c;
}

Criterion c5_irreducibility() {
    Criterion c{"c05-irreducibility-verdicts", true, 0.0,
                "5 flag models irreducible, 2 direct sums reducible", 0.0};
    const int N = 8;
    for (const FlagOperator& T : fb_models(N)) {
        const IrreducibilityResult r = irreducibility_check(T);
        if (r.verdict != IrreducibilityResult::Verdict::irreducible) {
            c.pass = false;
            c.detail += ", a flag model was not certified irreducible";
        }
    }
    const FlagOperator s1 = direct_sum_model({K_of(1.0, N), K_of(2.0, N)}, N);
    const FlagOperator s2 = direct_sum_model({K_of(2.0, N), K_of(2.0, N)}, N);
    for (const FlagOperator& D : {s1, s2}) {
        const IrreducibilityResult r = irreducibility_check(D);
        if (r.verdict != IrreducibilityResult::Verdict::reducible) {
            c.pass = false;
            c.detail += ", a direct sum was not certified reducible";
            continue;
        }
        c.worst = std::max(c.worst, std::max(r.commutation_residual, r.idempotent_residual));
        const double pn = r.projection.norm();
        if (pn < 1e-6 ||
            (r.projection - Eigen::MatrixXcd::Identity(D.dim(), D.dim())).norm() < 1e-6)
            c.pass = false;
    }
    c.pass = c.pass && c.worst < 1e-8;
    return c;
}

Criterion c6_sylvester_obstruction() {
    Criterion c{"c06-sylvester-range-obstruction", true, 0.0,
                "identity stays out of range, commutator images come back in", 0.0};
    const int N = 32;
    const ShiftBlock T0 = build_shift_block(K_of(2.0, N), N);
    const ShiftBlock T1 = build_shift_block(K_of(2.0, N), N);
    const SylvesterVerdict far =
        sylvester_range_test(T0, T1, Eigen::MatrixXcd::Identity(N, N), 1e-6);
    const double bound = 1.0 / (2.0 * std::sqrt(static_cast<double>(N)));
    if (far.in_range || far.relative_residual < bound) c.pass = false;
    c.detail += ", identity residual " + std::to_string(far.relative_residual) + " vs bound " +
                std::to_string(bound);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd A(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) A(i, j) = Complex(u(rng), u(rng));
    const Eigen::MatrixXcd S = T0.matrix() * A - A * T1.matrix();
    const SylvesterVerdict near = sylvester_range_test(T0, T1, S, 1e-6);
    c.worst = near.relative_residual;
    c.pass = c.pass && near.in_range && near.relative_residual < 1e-10;
    return c;
}

Criterion c7_jet_multiplicativity() {
    Criterion c{"c07-jet-action-multiplicative", true, 0.0,
                "100 random valid instances, 20 perturbed refutations", 0.0};
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto rand_poly = [&rng, &u](int deg) {
        Polynomial f;
        for (int i = 0; i <= deg; ++i) f.coeffs.push_back(Complex(u(rng), u(rng)));
        return f;
    };
    for (int t = 0; t < 100; ++t) {
        const int k = 2 + static_cast<int>(rng() % 4);
        const JetSpec S = random_valid_jet_spec(k, rng());
        const Polynomial f = rand_poly(2 + static_cast<int>(rng() % 4));
        const Polynomial g = rand_poly(2 + static_cast<int>(rng() % 4));
        const Complex w(0.6 * u(rng), 0.6 * u(rng));
        const Eigen::MatrixXcd lhs = jet_action(S, f * g, w);
        const Eigen::MatrixXcd rhs = jet_action(S, f, w) * jet_action(S, g, w);
        c.worst = std::max(c.worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    }
    if (c.worst >= 1e-10) c.pass = false;

    int refuted = 0;
    for (int t = 0; t < 20; ++t) {
        JetSpec bad = random_valid_jet_spec(2 + static_cast<int>(rng() % 4), rng());
        bad.mu_exact.reset();
        if (bad.k == 2) {
            // Order two has no compatibility relation to break; bend the diagonal.
            bad.mu(1, 1) += 0.05;
        } else {
            bad.mu(bad.k - 1, 0) *= 1.05 + 0.2 * u(rng) * u(rng);
        }
        if (find_violating_monomials(bad).has_value()) ++refuted;
    }
    if (refuted != 20) {
        c.pass = false;
        c.detail += ", refuted only " + std::to_string(refuted) + "/20";
    }
    return c;
}

Criterion c8_localization_classification() {
    Criterion c{"c08-localization-classification", true, 0.0, "50 spec pairs, k <= 4, N=24", 0.0};
    const int N = 24;
    const DiagonalKernel K = K_of(1.0, N);
    std::mt19937_64 rng(88);
    int wrong = 0;
    for (int t = 0; t < 50; ++t) {
        const int k = 2 + static_cast<int>(rng() % 3);
        const JetSpec A = random_valid_jet_spec(k, rng());
        JetSpec B;
        bool expect;
        if (t % 2 == 0) {
            B = jet_spec_from_superdiagonal(A.superdiagonal());
            expect = true;
        } else {
            B = random_valid_jet_spec(k, rng());
            expect = false;
        }
        const LocalizationVerdict v = classify_localizations(A, B, K, N);
        if (v.isomorphic != expect || v.superdiagonals_equal != expect) ++wrong;
    }
    c.worst = wrong;
    c.pass = wrong == 0;
    c.detail += ", misclassified " + std::to_string(wrong);
    return c;
}

Criterion c9_theta12_consistency(const std::vector<EquivPair>& pairs) {
    Criterion c{"c09-theta12-agrees-with-ratio", true, 0.0,
                "both invariant pairs on the criterion-2 pairs, hand value at 0", 0.0};
    const auto grid = polar_grid(4, 6, 0.5);
    int disagree = 0;
    for (const EquivPair& e : pairs) {
        const auto vr = decide_equivalence(e.A, e.B, grid, 1e-6, InvariantPair::curvature_and_ratio);
        const auto vt = decide_equivalence(e.A, e.B, grid, 1e-6, InvariantPair::curvature_and_theta);
        if (vr.equivalent != vt.equivalent || vr.equivalent != e.expect_equivalent) ++disagree;
    }
    if (disagree != 0) {
        c.pass = false;
        c.detail += ", disagreements " + std::to_string(disagree);
    }
    const double theta0 =
        second_fundamental_form(K_of(1.0, 32), K_of(3.0, 32), Complex(0, 0)).coefficient;
    c.worst = std::abs(theta0 - (-1.0 / std::sqrt(2.0)));
    c.pass = c.pass && c.worst < 1e-6;
    return c;
}

Criterion c10_homogeneity_detector() {
    Criterion c{"c10-two-block-homogeneity", true, 0.0,
                "accepts lambda gap 2, rejects gap 1 and the exp kernel", 0.0};
    const int N = 32;
    const auto grid = polar_grid(3, 4, 0.5);
    for (double lambda : {1.0, 2.0}) {
        const FlagOperator T = build_flag2(K_of(lambda, N), K_of(lambda + 2.0, N), 0.9, N);
        const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
        if (!v.homogeneous) {
            c.pass = false;
            c.detail += ", rejected a homogeneous pair";
        }
    }
    {
        const FlagOperator T = build_flag2(K_of(1.0, N), K_of(2.0, N), 1.0, N);
        const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
        if (v.homogeneous || v.failed_condition != 2) {
            c.pass = false;
            c.detail += ", lambda gap 1 misdiagnosed (condition " +
                        std::to_string(v.failed_condition) + ")";
        }
    }
    {
        std::vector<double> a;
        for (int n = 0; n <= N + 48; ++n) a.push_back(1.0 / std::tgamma(n + 1.0));
        const FlagOperator T = build_flag2(kernel_from_coeffs(a), K_of(3.0, N), 1.0, N);
        const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
        if (v.homogeneous || v.failed_condition != 1) {
            c.pass = false;
            c.detail += ", exp kernel misdiagnosed (condition " +
                        std::to_string(v.failed_condition) + ")";
        }
    }
    return c;
}

Criterion timed(Criterion (*f)(), double budget_seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c = f();
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_seconds > 0.0 && c.seconds >= budget_seconds) {
        c.pass = false;
        c.detail += ", over the " + std::to_string(budget_seconds) + " s budget";
    }
    return c;
}

} // namespace

int main() {
    std::vector<Criterion> results;

    results.push_back(timed(&c1_curvature_law, 1.0));

    const auto pairs_t0 = std::chrono::steady_clock::now();
    const std::vector<EquivPair> pairs = build_equiv_pairs(20, 32, 2024);
    {
        auto c = c2_complete_invariant(pairs);
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - pairs_t0).count();
        if (c.seconds >= 30.0) {
            c.pass = false;
            c.detail += ", over the 30 s budget";
        }
        results.push_back(std::move(c));
    }

    results.push_back(timed(&c3_rigidity, 60.0));
    results.push_back(timed(&c4_commutant_triangular, 0.0));
    results.push_back(timed(&c5_irreducibility, 0.0));
    results.push_back(timed(&c6_sylvester_obstruction, 0.0));
    results.push_back(timed(&c7_jet_multiplicativity, 0.0));
    results.push_back(timed(&c8_localization_classification, 60.0));

    {
        const auto t0 = std::chrono::steady_clock::now();
        auto c = c9_theta12_consistency(pairs);
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        results.push_back(std::move(c));
    }

    results.push_back(timed(&c10_homogeneity_detector, 0.0));

    int failures = 0;
    for (const Criterion& c : results) {
        if (!c.pass) ++failures;
        std::printf("[%s] %-34s worst=%.3e  (%.2f s)  %s\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.worst, c.seconds, c.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures;
}
