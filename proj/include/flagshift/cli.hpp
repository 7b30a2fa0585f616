#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "flagshift/errors.hpp"

namespace flagshift {

// Kernel descriptor as it appears in config text: a named binomial family or
// an explicit positive coefficient list.
struct KernelDesc {
    std::string type = "binomial";
    double lambda = 1.0;
    std::vector<double> coeffs;

    bool operator==(const KernelDesc&) const = default;
};

// Operator descriptor: one kernel per diagonal block, one positive coupling
// per adjacent pair, optionally an explicit intertwiner per pair (row-major
// N*N complex entries as [re, im] pairs) overriding the canonical coupling,
// and optionally a gauge seed conjugating the model by a random diagonal
// unitary (an exact unitary equivalence).
struct OperatorDesc {
    std::vector<KernelDesc> kernels;
    std::vector<double> mu;
    std::vector<std::vector<std::pair<double, double>>> S;
    long long gauge_seed = -1;  // < 0 means ungauged

    bool operator==(const OperatorDesc&) const = default;
};

// Jet transition data descriptor: a named family with its order, an explicit
// superdiagonal, or the full lower-triangular mu rows with entries written as
// decimals or exact rationals ("3/2"). Exactly one of the three forms.
struct JetSpecDesc {
    int k = 0;
    std::string family;
    std::vector<double> superdiagonal;
    std::vector<std::vector<std::string>> mu_rows;

    bool operator==(const JetSpecDesc&) const = default;
};

struct GridDesc {
    int radii = 5;
    int angles = 8;
    double rmax = 0.5;

    bool operator==(const GridDesc&) const = default;
};

// One fully resolved invocation. Pure data: operators and specs are
// materialized only inside run, so configs compare and round-trip exactly.
struct RunConfig {
    std::string command;
    std::string subcommand;
    std::vector<OperatorDesc> operands;
    std::vector<JetSpecDesc> specs;
    std::vector<std::pair<double, double>> poly;  // jet action operand
    std::pair<double, double> at{0.0, 0.0};       // jet action evaluation point
    GridDesc grid;
    int N = 32;
    double tol = 1e-6;
    long long seed = 1;
    std::string output;  // empty writes to standard output

    bool operator==(const RunConfig&) const = default;
};

// Parses the documented JSON schema over defaults and validates; throws
// config_error carrying every problem found, not just the first.
RunConfig parse_config(const std::string& text);

// Canonical JSON for a config; parse_config(render_config(c)) == c.
std::string render_config(const RunConfig& c);

// Overlays fields present in `text` onto `c` (the config file wins over
// whatever the flags put there); shape problems are appended to `issues`.
void apply_config_text(RunConfig& c, const std::string& text, std::vector<std::string>& issues);

// Semantic validation of a fully merged config; returns every issue.
std::vector<std::string> validate_config(const RunConfig& c);

// Executes a validated config. Returns 0 for success / equivalent /
// irreducible / valid / isomorphic / all checks passed, 1 for the negative
// verdict, 2 for an inconclusive outcome. Library errors propagate; the
// front end maps them to exit code 2.
int run(const RunConfig& c, std::ostream& out);
int run(const RunConfig& c);  // routes to c.output or standard output

// Command-line token helpers shared with the front end.
GridDesc parse_grid_token(const std::string& s);        // "5x8"
KernelDesc parse_kernel_token(const std::string& s);    // "binomial:2" | "coeffs:1,0.5"
JetSpecDesc parse_spec_token(const std::string& s);     // "binomial:4" | "inverse-factorial:3" | "super:1,0.8"

} // namespace flagshift
