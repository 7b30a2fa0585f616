#pragma once

#include <vector>

#include "flagshift/flag_models.hpp"

namespace flagshift {

struct IntertwinerSolution {
    Eigen::MatrixXcd X;
    double residual = 0.0;
    Eigen::MatrixXd block_profile;
    bool converged = false;
    int outer_iterations = 0;
};

struct CommutantBasis {
    std::vector<Eigen::MatrixXcd> basis;
    int dimension = 0;
    // Dimension of the full null space of X -> TX - XT at this truncation.
    // A truncated model is nilpotent and derogatory, so that null space
    // carries extra directions with no counterpart in the untruncated
    // operator; raw_dimension - dimension counts them when filtered is set.
    int raw_dimension = 0;
    bool filtered = false;
};

// Null space of the vectorized map X -> X A - B X; basis of the space of
// intertwiners from A into B on the truncation.
std::vector<Eigen::MatrixXcd> intertwiner_basis(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                                                double tol = 1e-8);

// Commutant of the operator the truncation samples, in its window
// representation. For a model carrying the full chain of superdiagonal
// couplings, windows of commutant elements of the sampled operator are
// exactly the block upper triangular solutions of the window commutation
// equation, and the basis returned spans that solution space. The raw null
// space of X -> TX - XT is strictly bigger at any finite truncation (the
// nilpotent window is derogatory); its dimension is reported alongside so
// the artifact count raw_dimension - dimension stays visible. When the
// chain is incomplete (direct sums, gaps) the window characterization does
// not apply and the raw basis is passed through with filtered = false. The
// vectorized commutator is (nN)^2 x (nN)^2, so the model dimension is
// capped at 64.
CommutantBasis commutant_basis(const FlagOperator& T, double tol = 1e-8);

struct IrreducibilityResult {
    enum class Verdict { irreducible, reducible, inconclusive };
    Verdict verdict = Verdict::inconclusive;
    Eigen::MatrixXcd projection;
    double commutation_residual = 0.0;
    double idempotent_residual = 0.0;
    int self_adjoint_dimension = 0;
    int converged_seeds = 0;
    int failed_seeds = 0;
};

// Searches the self-adjoint part of the commutant for a projection other
// than 0 or I: random span elements are pushed to idempotency with the cubic
// iteration P <- 3P^2 - 2P^3. Non-convergence yields inconclusive, never a
// silent irreducible.
IrreducibilityResult irreducibility_check(const FlagOperator& T, double tol = 1e-8, int seeds = 50,
                                          unsigned long long seed = 1);

// Best intertwining unitary between two models of the same shape: seeded by
// least-squares matching of the eigensection frames, then refined by
// alternating projection between the unitary group and ker(X -> X A - B X).
// residual is ||XA - BX|| / ||X||; converged means it fell below 1e-4.
IntertwinerSolution rigidity_probe(const FlagOperator& A, const FlagOperator& B,
                                   const Eigen::MatrixXcd* U_hint = nullptr);

} // namespace flagshift
