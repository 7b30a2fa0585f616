#pragma once

#include <string>
#include <vector>

#include "flagshift/flag_models.hpp"

namespace flagshift {

// One line of the structured verification report: which statement was
// checked, on which instance, how badly it was violated at worst.
struct CheckLine {
    enum class Verdict { pass, fail, inconclusive };

    std::string name;
    Verdict verdict = Verdict::pass;
    double max_violation = 0.0;
    std::string instance;
};

// Unitary rigidity: gauge-conjugated pairs recover a block-diagonal unitary,
// a similar-but-not-unitary pair is rejected, and the coupling stays outside
// the Sylvester range while constructed right-hand sides stay inside.
std::vector<CheckLine> verify_rigidity_suite(int pairs, int N, double tol,
                                             unsigned long long seed);

// Commutant structure at truncation: upper-triangularity and dimension of
// the window representation for the flag constructions, control dimensions
// for the single shift and the direct sum, irreducibility verdicts.
std::vector<CheckLine> verify_commutant_suite(int N, double tol);

// Grid invariants: the curvature law of the weighted kernels, the second
// fundamental form value at the origin, constancy of jet ratios, agreement
// of the two invariant pairs, equivalence decisions on constructed pairs,
// and the homogeneity trichotomy.
std::vector<CheckLine> verify_invariants_suite(int radii, int angles, double rmax, int N,
                                               int equivalence_pairs, double tol,
                                               unsigned long long seed);

// Jet transition structure: multiplicativity of the action on random
// polynomials, monomial refutations for perturbed specs, frame-coefficient
// consistency, localization positivity, and classification by
// superdiagonal.
std::vector<CheckLine> verify_jets_suite(int instances, int refuted, int classify_pairs, int N,
                                         unsigned long long seed);

std::string format_report(const std::vector<CheckLine>& lines);

bool all_pass(const std::vector<CheckLine>& lines);
bool any_fail(const std::vector<CheckLine>& lines);

} // namespace flagshift
