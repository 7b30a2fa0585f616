#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flagshift/flag_models.hpp"
#include "flagshift/geometry.hpp"
#include "flagshift/parallel.hpp"

namespace flagshift {

// Grid-sampled unitary invariants of a flag operator: curvature of the first
// and last diagonal blocks, the section-norm ratios ||t_{i-1}|| / ||t_i||,
// the normalized norms of any couplings above the superdiagonal, and (for two
// blocks) the second fundamental form of the line sub-bundle.
struct InvariantReport {
    std::vector<Complex> grid;
    std::vector<double> curvature_last;
    std::vector<double> curvature_first;
    std::vector<std::vector<double>> ratios;
    std::map<std::pair<int, int>, std::vector<double>> extra_ratios;
    std::vector<double> theta12;
};

InvariantReport invariant_report(const FlagOperator& T, const std::vector<Complex>& grid,
                                 Exec exec = Exec::parallel);

enum class InvariantPair { curvature_and_ratio, curvature_and_theta };

struct EquivalenceVerdict {
    bool equivalent = false;
    double max_curvature_gap = 0.0;
    double max_ratio_gap = 0.0;
    double tolerance_used = 0.0;
    bool necessary_only = false;
    std::string note;
};

// Pointwise comparison of the invariants on the grid. For more than two
// blocks the invariants are complete only on strictly bidiagonal models;
// other inputs are refused unless necessary_only is set, in which case the
// verdict reports agreement of necessary invariants without claiming
// equivalence.
EquivalenceVerdict decide_equivalence(const FlagOperator& A, const FlagOperator& B,
                                      const std::vector<Complex>& grid, double tol,
                                      InvariantPair pair = InvariantPair::curvature_and_ratio,
                                      bool necessary_only = false);

// Accepts iff the curvature matches -lambda (1-|w|^2)^{-2} on the whole grid
// with lambda fitted at the first point; returns lambda on acceptance.
std::optional<double> is_homogeneous_line(const DiagonalKernel& K, const std::vector<Complex>& grid);

struct HomogeneityVerdict {
    bool homogeneous = false;
    int failed_condition = 0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    double alpha = 0.0;
    std::string diagnosis;
};

// Three-part test for a two-block flag operator: (i) both blocks homogeneous,
// (ii) the curvature parameters differ by exactly 2, (iii) the coupled
// section S t_1 is a constant multiple of the first block's kernel section.
HomogeneityVerdict is_homogeneous_flag2(const FlagOperator& T, const std::vector<Complex>& grid);

struct SylvesterVerdict {
    double relative_residual = 0.0;
    bool in_range = false;
    Eigen::MatrixXcd minimizer;
};

// Least-squares distance of S to the range of X -> T0 X - X T1 on the
// truncation. A residual above tol certifies S is not in the range there,
// the strong-irreducibility obstruction.
SylvesterVerdict sylvester_range_test(const ShiftBlock& T0, const ShiftBlock& T1,
                                      const Eigen::MatrixXcd& S, double tol);

// Maximum relative violation on the grid of the disk-automorphism covariance
// ||S t_1||^2 / ||t_1||^2 at the transported point = |(phi_u^{-1})'|^2 times
// the same ratio at the original point. Zero (up to roundoff) characterizes
// homogeneous two-block models.
double mobius_homogeneity_probe(const FlagOperator& T, Complex u, const std::vector<Complex>& grid);

// radii * angles points r e^{i theta}, radii equally spaced in (0, rmax].
std::vector<Complex> polar_grid(int radii, int angles, double rmax);

} // namespace flagshift
