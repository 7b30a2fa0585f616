#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/rational.hpp>

#include "flagshift/errors.hpp"
#include "flagshift/invariants.hpp"
#include "flagshift/kernels.hpp"

namespace flagshift {

using Rational = boost::rational<long long>;

// Single-variable complex polynomial, coeffs[d] multiplying w^d.
struct Polynomial {
    std::vector<Complex> coeffs;

    static constexpr int degree_cap = 64;

    int degree() const;
    Complex eval(Complex w) const;
    Polynomial derivative() const;
};

Polynomial operator*(const Polynomial& f, const Polynomial& g);
Polynomial monomial(int power, Complex scale = 1.0);

// Order-k jet transition data: lower-triangular mu with unit diagonal,
// subject to mu_{p,l} mu_{l,i} = binom(p-i, l-i) mu_{p,i} for i <= l <= p.
// The constraint chain-determines mu from its superdiagonal, so a spec is
// equivalently a list of k-1 positive couplings. When the entries are known
// exactly, mu_exact carries them and validation is exact instead of
// tolerance-based.
struct JetSpec {
    int k = 1;
    Eigen::MatrixXd mu;
    std::optional<std::vector<std::vector<Rational>>> mu_exact;

    std::vector<double> superdiagonal() const;
};

struct MuValidation {
    bool valid = true;
    bool exact = false;
    // Lexicographically first violated triple, 1-indexed; (i,i,i) flags a
    // non-unit diagonal entry.
    int p = 0, l = 0, i = 0;
    double violation = 0.0;
};

MuValidation validate_mu(const Eigen::MatrixXd& mu, double tol = 1e-10);
MuValidation validate_mu(const std::vector<std::vector<Rational>>& mu);
MuValidation validate_spec(const JetSpec& spec, double tol = 1e-10);

// mu_{p,l} = binom(p-1, l-1), the family induced by translation.
JetSpec binomial_jet_spec(int k);
// mu_{p,l} = 1/(p-l)!.
JetSpec inverse_factorial_jet_spec(int k);
// Chain completion mu_{p,i} = prod_{j=i..p-1} mu_{j+1,j} / (p-i)! from a
// positive superdiagonal; every valid spec arises this way.
JetSpec jet_spec_from_superdiagonal(const std::vector<double>& mu_super);
JetSpec random_valid_jet_spec(int k, unsigned long long seed);

// Lower-triangular action matrix with (i,j) entry mu_{i,j} f^(i-j)(w),
// 1-indexed. Multiplicative in f exactly when the spec is valid; invalid
// specs are rejected.
Eigen::MatrixXcd jet_action(const JetSpec& spec, const Polynomial& f, Complex w);

// Frame-normalization coefficients: b_{p,p} = 1 and
// b_{p,l} = mu_{l+1,l} b_{p,l+1} / (p-l), then cross-checked against the
// relation b_{p,l} = mu_{p-j+1,l} / binom(p-l, j-1) b_{p,p-j+1} for every
// admissible j; an inconsistency means an invalid mu slipped through and
// raises spec_error.
Eigen::MatrixXd b_coefficients(const JetSpec& spec);

// Localized kernel sum_l D(l) (jet block of order k-l+1, bottom-right
// padded) D(l), with D(l) diagonal carrying b_{p,l} at position p >= l.
// Hermitian positive semi-definite at z = w.
Eigen::MatrixXcd localization_kernel(const JetSpec& spec, const DiagonalKernel& K, Complex z,
                                     Complex w);

// First monomial pair (z^a, z^b), a,b <= k, whose action matrices violate
// multiplicativity beyond tol; nullopt when none does. For a valid spec this
// is always empty; for an invalid one a witness exists at monomial level.
std::optional<std::pair<int, int>> find_violating_monomials(const JetSpec& spec,
                                                            double tol = 1e-10);

struct LocalizationVerdict {
    bool isomorphic = false;
    bool superdiagonals_equal = false;
    EquivalenceVerdict equivalence;
};

// Builds the two jet models the specs induce on K and decides unitary
// equivalence from grid invariants. Isomorphy holds exactly when the mu
// superdiagonals agree, so both facts are reported.
LocalizationVerdict classify_localizations(const JetSpec& A, const JetSpec& B,
                                           const DiagonalKernel& K, int N);

} // namespace flagshift
