#include "flagshift/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "flagshift/flag_models.hpp"
#include "flagshift/geometry.hpp"
#include "flagshift/invariants.hpp"
#include "flagshift/jet_modules.hpp"
#include "flagshift/kernels.hpp"
#include "flagshift/verification.hpp"
#include "flagshift/verify_suites.hpp"

namespace flagshift {

namespace {

using nlohmann::json;

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<std::string> kCommands = {"curvature", "invariants", "equiv", "homog",
                                            "irred",     "verify",     "jet"};
const std::vector<std::string> kVerifySubs = {"rigidity", "commutant", "invariants", "jets", "all"};
const std::vector<std::string> kJetSubs = {"validate", "action", "localize", "classify"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

// ---- JSON decoding, collecting every problem instead of stopping ----

bool take_double(const json& j, const std::string& where, double& out,
                 std::vector<std::string>& issues) {
    if (!j.is_number()) {
        issues.push_back(where + " must be a number");
        return false;
    }
    out = j.get<double>();
    return true;
}

bool take_int(const json& j, const std::string& where, long long& out,
              std::vector<std::string>& issues) {
    if (!j.is_number_integer()) {
        issues.push_back(where + " must be an integer");
        return false;
    }
    out = j.get<long long>();
    return true;
}

bool take_string(const json& j, const std::string& where, std::string& out,
                 std::vector<std::string>& issues) {
    if (!j.is_string()) {
        issues.push_back(where + " must be a string");
        return false;
    }
    out = j.get<std::string>();
    return true;
}

bool take_pair(const json& j, const std::string& where, std::pair<double, double>& out,
               std::vector<std::string>& issues) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        issues.push_back(where + " must be a [re, im] pair");
        return false;
    }
    out = {j[0].get<double>(), j[1].get<double>()};
    return true;
}

KernelDesc decode_kernel(const json& j, const std::string& where,
                         std::vector<std::string>& issues) {
    KernelDesc k;
    if (!j.is_object()) {
        issues.push_back(where + " must be an object");
        return k;
    }
    for (const auto& [key, val] : j.items()) {
        if (key == "type") take_string(val, where + ".type", k.type, issues);
        else if (key == "lambda") take_double(val, where + ".lambda", k.lambda, issues);
        else if (key == "values") {
            if (!val.is_array()) {
                issues.push_back(where + ".values must be an array of numbers");
                continue;
            }
            for (const auto& c : val) {
                double v = 0.0;
                if (take_double(c, where + ".values entry", v, issues)) k.coeffs.push_back(v);
            }
        } else issues.push_back(where + ": unknown field '" + key + "'");
    }
    return k;
}

OperatorDesc decode_operand(const json& j, const std::string& where,
                            std::vector<std::string>& issues) {
    OperatorDesc od;
    if (!j.is_object()) {
        issues.push_back(where + " must be an object");
        return od;
    }
    for (const auto& [key, val] : j.items()) {
        if (key == "kernels") {
            if (!val.is_array()) {
                issues.push_back(where + ".kernels must be an array");
                continue;
            }
            int i = 0;
            for (const auto& kj : val)
                od.kernels.push_back(
                    decode_kernel(kj, where + ".kernels[" + std::to_string(i++) + "]", issues));
        } else if (key == "mu") {
            if (!val.is_array()) {
                issues.push_back(where + ".mu must be an array of numbers");
                continue;
            }
            for (const auto& c : val) {
                double v = 0.0;
                if (take_double(c, where + ".mu entry", v, issues)) od.mu.push_back(v);
            }
        } else if (key == "S") {
            if (!val.is_array()) {
                issues.push_back(where + ".S must be an array of matrices");
                continue;
            }
            int i = 0;
            for (const auto& mj : val) {
                const std::string mw = where + ".S[" + std::to_string(i++) + "]";
                std::vector<std::pair<double, double>> m;
                if (!mj.is_array()) {
                    issues.push_back(mw + " must be an array of [re, im] pairs");
                } else {
                    for (const auto& e : mj) {
                        std::pair<double, double> p;
                        if (take_pair(e, mw + " entry", p, issues)) m.push_back(p);
                    }
                }
                od.S.push_back(std::move(m));
            }
        } else if (key == "gauge_seed") take_int(val, where + ".gauge_seed", od.gauge_seed, issues);
        else issues.push_back(where + ": unknown field '" + key + "'");
    }
    return od;
}

JetSpecDesc decode_spec(const json& j, const std::string& where,
                        std::vector<std::string>& issues) {
    JetSpecDesc sd;
    if (!j.is_object()) {
        issues.push_back(where + " must be an object");
        return sd;
    }
    for (const auto& [key, val] : j.items()) {
        if (key == "k") {
            long long k = 0;
            if (take_int(val, where + ".k", k, issues)) sd.k = static_cast<int>(k);
        } else if (key == "family") take_string(val, where + ".family", sd.family, issues);
        else if (key == "superdiagonal") {
            if (!val.is_array()) {
                issues.push_back(where + ".superdiagonal must be an array of numbers");
                continue;
            }
            for (const auto& c : val) {
                double v = 0.0;
                if (take_double(c, where + ".superdiagonal entry", v, issues))
                    sd.superdiagonal.push_back(v);
            }
        } else if (key == "mu") {
            if (!val.is_array()) {
                issues.push_back(where + ".mu must be an array of rows");
                continue;
            }
            for (const auto& row : val) {
                std::vector<std::string> r;
                if (!row.is_array()) {
                    issues.push_back(where + ".mu rows must be arrays");
                } else {
                    for (const auto& e : row) {
                        if (e.is_string()) r.push_back(e.get<std::string>());
                        else if (e.is_number()) r.push_back(num17(e.get<double>()));
                        else issues.push_back(where + ".mu entries must be numbers or strings");
                    }
                }
                sd.mu_rows.push_back(std::move(r));
            }
        } else issues.push_back(where + ": unknown field '" + key + "'");
    }
    return sd;
}

// ---- rational / decimal entry parsing for jet mu rows ----

bool parse_ll(const std::string& s, long long& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stoll(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

bool parse_rational_entry(const std::string& s, Rational& out) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
        long long n = 0;
        if (!parse_ll(s, n)) return false;
        out = Rational(n);
        return true;
    }
    long long num = 0, den = 0;
    if (!parse_ll(s.substr(0, slash), num) || !parse_ll(s.substr(slash + 1), den)) return false;
    if (den == 0) return false;
    out = Rational(num, den);
    return true;
}

bool parse_decimal_entry(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::size_t pos = 0;
    try {
        out = std::stod(s, &pos);
    } catch (...) {
        return false;
    }
    return pos == s.size();
}

// ---- materialization: descriptors to library objects ----

DiagonalKernel kernel_of(const KernelDesc& kd, int N) {
    if (kd.type == "binomial") return binomial_kernel(kd.lambda, N + 48);
    return kernel_from_coeffs(kd.coeffs);
}

FlagOperator operator_of(const OperatorDesc& od, int N) {
    std::vector<DiagonalKernel> ks;
    ks.reserve(od.kernels.size());
    for (const auto& kd : od.kernels) ks.push_back(kernel_of(kd, N));

    FlagOperator T;
    if (od.S.empty()) {
        T = build_flag_chain(ks, od.mu, N);
    } else {
        std::vector<ShiftBlock> blocks;
        blocks.reserve(ks.size());
        for (const auto& K : ks) blocks.push_back(build_shift_block(K, N));
        std::map<std::pair<int, int>, Eigen::MatrixXcd> inter;
        for (std::size_t i = 0; i < od.S.size(); ++i) {
            Eigen::MatrixXcd M(N, N);
            for (int r = 0; r < N; ++r)
                for (int c = 0; c < N; ++c) {
                    const auto& p = od.S[i][static_cast<std::size_t>(r * N + c)];
                    M(r, c) = Complex(p.first, p.second);
                }
            inter[{static_cast<int>(i), static_cast<int>(i) + 1}] = std::move(M);
        }
        T = build_flag_custom(std::move(blocks), std::move(inter), true);
    }
    if (od.gauge_seed >= 0)
        T = T.with_gauge(random_gauge(T.block_count(), N,
                                      static_cast<unsigned long long>(od.gauge_seed)));
    return T;
}

JetSpec jet_spec_of(const JetSpecDesc& d) {
    if (d.family == "binomial") return binomial_jet_spec(d.k);
    if (d.family == "inverse-factorial") return inverse_factorial_jet_spec(d.k);
    if (!d.superdiagonal.empty()) return jet_spec_from_superdiagonal(d.superdiagonal);

    const int k = static_cast<int>(d.mu_rows.size());
    JetSpec s;
    s.k = k;
    s.mu = Eigen::MatrixXd::Zero(k, k);
    std::vector<std::vector<Rational>> exact(static_cast<std::size_t>(k));
    bool all_exact = true;
    for (int p = 0; p < k; ++p) {
        exact[static_cast<std::size_t>(p)].resize(static_cast<std::size_t>(p) + 1);
        for (int l = 0; l <= p; ++l) {
            const std::string& e = d.mu_rows[static_cast<std::size_t>(p)][static_cast<std::size_t>(l)];
            Rational r;
            double v = 0.0;
            if (parse_rational_entry(e, r)) {
                exact[static_cast<std::size_t>(p)][static_cast<std::size_t>(l)] = r;
                s.mu(p, l) = boost::rational_cast<double>(r);
            } else if (parse_decimal_entry(e, v)) {
                all_exact = false;
                s.mu(p, l) = v;
            }
        }
    }
    if (all_exact) s.mu_exact = std::move(exact);
    return s;
}

// ---- command implementations ----

void csv_point_prefix(std::string& line, Complex w) {
    line += num17(w.real());
    line += ',';
    line += num17(w.imag());
}

int run_curvature(const RunConfig& c, std::ostream& out) {
    const DiagonalKernel K = kernel_of(c.operands[0].kernels[0], c.N);
    const std::vector<Complex> grid = polar_grid(c.grid.radii, c.grid.angles, c.grid.rmax);
    out << "re,im,kappa\n";
    for (Complex w : grid) {
        const CurvatureSample s = curvature_line(K, w);
        std::string line;
        csv_point_prefix(line, w);
        line += ',';
        line += num17(s.value);
        out << line << '\n';
    }
    return 0;
}

int run_invariants(const RunConfig& c, std::ostream& out) {
    const FlagOperator T = operator_of(c.operands[0], c.N);
    const std::vector<Complex> grid = polar_grid(c.grid.radii, c.grid.angles, c.grid.rmax);
    const InvariantReport rep = invariant_report(T, grid);
    const int nr = static_cast<int>(rep.ratios.size());
    const bool has_theta = !rep.theta12.empty();

    std::string header = "re,im,kappa";
    for (int i = 1; i <= nr; ++i) header += ",ratio_" + std::to_string(i);
    if (has_theta) header += ",theta12";
    out << header << '\n';
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::string line;
        csv_point_prefix(line, grid[g]);
        line += ',';
        line += num17(rep.curvature_last[g]);
        for (int i = 0; i < nr; ++i) {
            line += ',';
            line += num17(rep.ratios[static_cast<std::size_t>(i)][g]);
        }
        if (has_theta) {
            line += ',';
            line += num17(rep.theta12[g]);
        }
        out << line << '\n';
    }

    // Summary block as comment rows so the CSV body stays machine-readable.
    const auto range_of = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return "[" + num17(*lo) + ", " + num17(*hi) + "]";
    };
    out << "# summary\n# points: " << grid.size() << '\n';
    out << "# kappa_range: " << range_of(rep.curvature_last) << '\n';
    for (int i = 0; i < nr; ++i)
        out << "# ratio_" << (i + 1)
            << "_range: " << range_of(rep.ratios[static_cast<std::size_t>(i)]) << '\n';
    if (has_theta) out << "# theta12_range: " << range_of(rep.theta12) << '\n';
    return 0;
}

int run_equiv(const RunConfig& c, std::ostream& out) {
    const FlagOperator A = operator_of(c.operands[0], c.N);
    const FlagOperator B = operator_of(c.operands[1], c.N);
    const std::vector<Complex> grid = polar_grid(c.grid.radii, c.grid.angles, c.grid.rmax);
    const EquivalenceVerdict v = decide_equivalence(A, B, grid, c.tol);
    out << "verdict: " << (v.equivalent ? "equivalent" : "not-equivalent") << '\n';
    out << "max_curvature_gap: " << num17(v.max_curvature_gap) << '\n';
    out << "max_ratio_gap: " << num17(v.max_ratio_gap) << '\n';
    out << "tolerance: " << num17(v.tolerance_used) << '\n';
    if (!v.note.empty()) out << "note: " << v.note << '\n';
    return v.equivalent ? 0 : 1;
}

int run_homog(const RunConfig& c, std::ostream& out) {
    const std::vector<Complex> grid = polar_grid(c.grid.radii, c.grid.angles, c.grid.rmax);
    if (c.operands[0].kernels.size() == 1) {
        const DiagonalKernel K = kernel_of(c.operands[0].kernels[0], c.N);
        const std::optional<double> lam = is_homogeneous_line(K, grid);
        out << "verdict: " << (lam ? "homogeneous" : "not-homogeneous") << '\n';
        if (lam) out << "lambda: " << num17(*lam) << '\n';
        return lam ? 0 : 1;
    }
    const FlagOperator T = operator_of(c.operands[0], c.N);
    const HomogeneityVerdict v = is_homogeneous_flag2(T, grid);
    out << "verdict: " << (v.homogeneous ? "homogeneous" : "not-homogeneous") << '\n';
    if (v.homogeneous) {
        out << "lambda0: " << num17(v.lambda0) << '\n';
        out << "lambda1: " << num17(v.lambda1) << '\n';
        out << "alpha: " << num17(v.alpha) << '\n';
    } else {
        out << "failed_condition: " << v.failed_condition << '\n';
        out << "diagnosis: " << v.diagnosis << '\n';
    }
    return v.homogeneous ? 0 : 1;
}

int run_irred(const RunConfig& c, std::ostream& out) {
    const FlagOperator T = operator_of(c.operands[0], c.N);
    const IrreducibilityResult r =
        irreducibility_check(T, c.tol, 50, static_cast<unsigned long long>(c.seed));
    const char* verdict = r.verdict == IrreducibilityResult::Verdict::irreducible ? "irreducible"
                          : r.verdict == IrreducibilityResult::Verdict::reducible ? "reducible"
                                                                                  : "inconclusive";
    out << "verdict: " << verdict << '\n';
    out << "self_adjoint_dimension: " << r.self_adjoint_dimension << '\n';
    out << "converged_seeds: " << r.converged_seeds << '\n';
    out << "failed_seeds: " << r.failed_seeds << '\n';
    if (r.verdict == IrreducibilityResult::Verdict::reducible) {
        out << "commutation_residual: " << num17(r.commutation_residual) << '\n';
        out << "idempotent_residual: " << num17(r.idempotent_residual) << '\n';
    }
    switch (r.verdict) {
    case IrreducibilityResult::Verdict::irreducible: return 0;
    case IrreducibilityResult::Verdict::reducible: return 1;
    default: return 2;
    }
}

int run_verify(const RunConfig& c, std::ostream& out) {
    const auto seed = static_cast<unsigned long long>(c.seed);
    const std::string sub = c.subcommand.empty() ? "all" : c.subcommand;
    // The commutant suite solves (nN)^2-column systems; its models cap N at 8.
    const int nc = std::min(c.N, 8);
    std::vector<CheckLine> lines;
    const auto append = [&lines](std::vector<CheckLine> more) {
        for (auto& l : more) lines.push_back(std::move(l));
    };
    if (sub == "rigidity" || sub == "all") append(verify_rigidity_suite(3, c.N, c.tol, seed));
    if (sub == "commutant" || sub == "all") append(verify_commutant_suite(nc, std::min(c.tol, 1e-8)));
    if (sub == "invariants" || sub == "all")
        append(verify_invariants_suite(c.grid.radii, c.grid.angles, c.grid.rmax, c.N, 8, c.tol,
                                       seed));
    if (sub == "jets" || sub == "all") append(verify_jets_suite(20, 5, 10, std::min(c.N, 24), seed));
    out << format_report(lines);
    if (any_fail(lines)) return 1;
    return all_pass(lines) ? 0 : 2;
}

int run_jet(const RunConfig& c, std::ostream& out) {
    if (c.subcommand == "validate") {
        const JetSpec s = jet_spec_of(c.specs[0]);
        const MuValidation v = validate_spec(s, 1e-10);
        out << "verdict: " << (v.valid ? "valid" : "invalid") << '\n';
        out << "mode: " << (v.exact ? "exact" : "numeric") << '\n';
        if (!v.valid) {
            out << "witness: (" << v.p << ", " << v.l << ", " << v.i << ")\n";
            out << "violation: " << num17(v.violation) << '\n';
        }
        return v.valid ? 0 : 1;
    }
    if (c.subcommand == "action") {
        const JetSpec s = jet_spec_of(c.specs[0]);
        Polynomial f;
        f.coeffs.reserve(c.poly.size());
        for (const auto& p : c.poly) f.coeffs.push_back(Complex(p.first, p.second));
        const Eigen::MatrixXcd M =
            jet_action(s, f, Complex(c.at.first, c.at.second));
        std::string header;
        for (int j = 1; j <= s.k; ++j) {
            if (j > 1) header += ',';
            header += "re_" + std::to_string(j) + ",im_" + std::to_string(j);
        }
        out << header << '\n';
        for (int i = 0; i < s.k; ++i) {
            std::string line;
            for (int j = 0; j < s.k; ++j) {
                if (j > 0) line += ',';
                line += num17(M(i, j).real());
                line += ',';
                line += num17(M(i, j).imag());
            }
            out << line << '\n';
        }
        return 0;
    }
    if (c.subcommand == "localize") {
        const JetSpec s = jet_spec_of(c.specs[0]);
        const DiagonalKernel K =
            kernel_of(c.operands.empty() ? KernelDesc{} : c.operands[0].kernels[0], c.N);
        const std::vector<Complex> grid = polar_grid(c.grid.radii, c.grid.angles, c.grid.rmax);
        std::string header = "re,im";
        for (int j = 1; j <= s.k; ++j) header += ",eig_" + std::to_string(j);
        out << header << '\n';
        for (Complex w : grid) {
            const Eigen::MatrixXcd L = localization_kernel(s, K, w, w);
            const Eigen::MatrixXcd H = 0.5 * (L + L.adjoint());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
            std::string line;
            csv_point_prefix(line, w);
            for (int j = 0; j < s.k; ++j) {
                line += ',';
                line += num17(es.eigenvalues()(j));
            }
            out << line << '\n';
        }
        return 0;
    }
    // classify
    const JetSpec A = jet_spec_of(c.specs[0]);
    const JetSpec B = jet_spec_of(c.specs[1]);
    const DiagonalKernel K =
        kernel_of(c.operands.empty() ? KernelDesc{} : c.operands[0].kernels[0], c.N);
    const LocalizationVerdict v = classify_localizations(A, B, K, c.N);
    out << "verdict: " << (v.isomorphic ? "isomorphic" : "not-isomorphic") << '\n';
    out << "superdiagonals_equal: " << (v.superdiagonals_equal ? "true" : "false") << '\n';
    out << "max_curvature_gap: " << num17(v.equivalence.max_curvature_gap) << '\n';
    out << "max_ratio_gap: " << num17(v.equivalence.max_ratio_gap) << '\n';
    return v.isomorphic ? 0 : 1;
}

} // namespace

void apply_config_text(RunConfig& c, const std::string& text, std::vector<std::string>& issues) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        issues.push_back(std::string("config is not well-formed JSON: ") + e.what());
        return;
    }
    if (!j.is_object()) {
        issues.push_back("config must be a JSON object");
        return;
    }
    // The sugar keys conflict only with their long forms in the same document;
    // either one still replaces whatever the flags put in.
    const bool doc_has_operands = j.contains("operands");
    const bool doc_has_specs = j.contains("specs");
    if (doc_has_operands && j.contains("kernel"))
        issues.push_back("give either 'kernel' or 'operands', not both");
    if (doc_has_specs && j.contains("spec"))
        issues.push_back("give either 'spec' or 'specs', not both");
    for (const auto& [key, val] : j.items()) {
        if (key == "command") take_string(val, "command", c.command, issues);
        else if (key == "subcommand") take_string(val, "subcommand", c.subcommand, issues);
        else if (key == "operands") {
            if (!val.is_array()) {
                issues.push_back("operands must be an array");
                continue;
            }
            c.operands.clear();
            int i = 0;
            for (const auto& oj : val)
                c.operands.push_back(
                    decode_operand(oj, "operands[" + std::to_string(i++) + "]", issues));
        } else if (key == "kernel") {
            // Sugar: a single bare kernel stands for one single-block operand.
            if (doc_has_operands) continue;
            OperatorDesc od;
            od.kernels.push_back(decode_kernel(val, "kernel", issues));
            c.operands.clear();
            c.operands.push_back(std::move(od));
        } else if (key == "specs") {
            if (!val.is_array()) {
                issues.push_back("specs must be an array");
                continue;
            }
            c.specs.clear();
            int i = 0;
            for (const auto& sj : val)
                c.specs.push_back(decode_spec(sj, "specs[" + std::to_string(i++) + "]", issues));
        } else if (key == "spec") {
            if (doc_has_specs) continue;
            c.specs.clear();
            c.specs.push_back(decode_spec(val, "spec", issues));
        } else if (key == "poly") {
            if (!val.is_array()) {
                issues.push_back("poly must be an array of [re, im] pairs");
                continue;
            }
            c.poly.clear();
            for (const auto& e : val) {
                std::pair<double, double> p;
                if (take_pair(e, "poly entry", p, issues)) c.poly.push_back(p);
            }
        } else if (key == "at") take_pair(val, "at", c.at, issues);
        else if (key == "grid") {
            if (!val.is_object()) {
                issues.push_back("grid must be an object");
                continue;
            }
            for (const auto& [gk, gv] : val.items()) {
                long long n = 0;
                if (gk == "radii") {
                    if (take_int(gv, "grid.radii", n, issues)) c.grid.radii = static_cast<int>(n);
                } else if (gk == "angles") {
                    if (take_int(gv, "grid.angles", n, issues)) c.grid.angles = static_cast<int>(n);
                } else if (gk == "rmax") take_double(gv, "grid.rmax", c.grid.rmax, issues);
                else issues.push_back("grid: unknown field '" + gk + "'");
            }
        } else if (key == "N") {
            long long n = 0;
            if (take_int(val, "N", n, issues)) c.N = static_cast<int>(n);
        } else if (key == "tol") take_double(val, "tol", c.tol, issues);
        else if (key == "seed") take_int(val, "seed", c.seed, issues);
        else if (key == "output") take_string(val, "output", c.output, issues);
        else issues.push_back("unknown field '" + key + "'");
    }
}

std::vector<std::string> validate_config(const RunConfig& c) {
    std::vector<std::string> issues;
    const auto need_operands = [&](std::size_t want) {
        if (c.operands.size() != want)
            issues.push_back(c.command + " requires " + (want == 1 ? "one operand" : "two operands") +
                             ", got " + std::to_string(c.operands.size()));
    };
    const auto need_specs = [&](std::size_t want) {
        if (c.specs.size() != want)
            issues.push_back("jet " + c.subcommand + " requires " +
                             (want == 1 ? "one spec" : "two specs") + ", got " +
                             std::to_string(c.specs.size()));
    };

    if (c.command.empty()) issues.push_back("missing command");
    else if (!contains(kCommands, c.command)) issues.push_back("unknown command '" + c.command + "'");

    if (c.command == "verify") {
        // An empty subcommand means the full battery.
        if (!c.subcommand.empty() && !contains(kVerifySubs, c.subcommand))
            issues.push_back("unknown verify suite '" + c.subcommand + "'");
    } else if (c.command == "jet") {
        if (!contains(kJetSubs, c.subcommand))
            issues.push_back("unknown jet subcommand '" + c.subcommand + "'");
    } else if (!c.subcommand.empty()) {
        issues.push_back("command '" + c.command + "' takes no subcommand");
    }

    if (c.N < 4) issues.push_back("N must be at least 4");
    if (!(c.tol > 0.0)) issues.push_back("tol must be positive");
    if (c.grid.radii < 1) issues.push_back("grid.radii must be at least 1");
    if (c.grid.angles < 1) issues.push_back("grid.angles must be at least 1");
    if (!(c.grid.rmax > 0.0) || c.grid.rmax >= 1.0)
        issues.push_back("grid.rmax must lie in (0, 1)");

    // Per-descriptor checks run regardless of arity so everything surfaces.
    for (std::size_t oi = 0; oi < c.operands.size(); ++oi) {
        const OperatorDesc& od = c.operands[oi];
        const std::string where = "operands[" + std::to_string(oi) + "]";
        if (od.kernels.empty()) issues.push_back(where + " needs at least one kernel");
        for (std::size_t ki = 0; ki < od.kernels.size(); ++ki) {
            const KernelDesc& kd = od.kernels[ki];
            const std::string kw = where + ".kernels[" + std::to_string(ki) + "]";
            if (kd.type == "binomial") {
                if (!(kd.lambda > 0.0)) issues.push_back(kw + ": lambda must be positive");
            } else if (kd.type == "coeffs") {
                if (kd.coeffs.empty()) issues.push_back(kw + ": coefficient list is empty");
                for (double a : kd.coeffs)
                    if (!(a > 0.0)) {
                        issues.push_back(kw + ": coefficients must be positive");
                        break;
                    }
            } else {
                issues.push_back(kw + ": unknown kernel type '" + kd.type + "'");
            }
        }
        if (!od.S.empty()) {
            if (!od.mu.empty()) issues.push_back(where + ": give mu or explicit S, not both");
            if (od.S.size() + 1 != od.kernels.size())
                issues.push_back(where + ": need one S per adjacent block pair");
            for (std::size_t si = 0; si < od.S.size(); ++si) {
                if (od.S[si].size() != static_cast<std::size_t>(c.N) * static_cast<std::size_t>(c.N))
                    issues.push_back(where + ".S[" + std::to_string(si) + "] needs N*N entries");
                bool nonzero = false;
                for (const auto& p : od.S[si])
                    if (p.first != 0.0 || p.second != 0.0) {
                        nonzero = true;
                        break;
                    }
                if (!nonzero)
                    issues.push_back(where + ".S[" + std::to_string(si) + "] must be nonzero");
            }
        } else if (od.mu.size() + 1 != od.kernels.size()) {
            issues.push_back(where + ": need one mu per adjacent block pair");
        }
        for (double m : od.mu)
            if (!(m > 0.0)) {
                issues.push_back(where + ": couplings mu must be positive");
                break;
            }
    }

    for (std::size_t si = 0; si < c.specs.size(); ++si) {
        const JetSpecDesc& sd = c.specs[si];
        const std::string where = "specs[" + std::to_string(si) + "]";
        const int forms = (sd.family.empty() ? 0 : 1) + (sd.superdiagonal.empty() ? 0 : 1) +
                          (sd.mu_rows.empty() ? 0 : 1);
        if (forms != 1) {
            issues.push_back(where + ": give exactly one of family, superdiagonal, mu");
            continue;
        }
        int k = sd.k;
        if (!sd.family.empty()) {
            if (sd.family != "binomial" && sd.family != "inverse-factorial")
                issues.push_back(where + ": unknown family '" + sd.family + "'");
            if (sd.k < 1) issues.push_back(where + ": family form needs k >= 1");
        } else if (!sd.superdiagonal.empty()) {
            k = static_cast<int>(sd.superdiagonal.size()) + 1;
            if (sd.k > 0 && sd.k != k)
                issues.push_back(where + ": k contradicts the superdiagonal length");
            for (double m : sd.superdiagonal)
                if (!(m > 0.0)) {
                    issues.push_back(where + ": superdiagonal entries must be positive");
                    break;
                }
        } else {
            k = static_cast<int>(sd.mu_rows.size());
            if (sd.k > 0 && sd.k != k) issues.push_back(where + ": k contradicts the row count");
            for (std::size_t r = 0; r < sd.mu_rows.size(); ++r) {
                if (sd.mu_rows[r].size() != r + 1) {
                    issues.push_back(where + ": mu matrix not lower-triangular (row " +
                                     std::to_string(r + 1) + " has " +
                                     std::to_string(sd.mu_rows[r].size()) + " entries)");
                    continue;
                }
                for (const std::string& e : sd.mu_rows[r]) {
                    Rational rq;
                    double dv = 0.0;
                    if (!parse_rational_entry(e, rq) && !parse_decimal_entry(e, dv))
                        issues.push_back(where + ": entry '" + e +
                                         "' is neither a rational nor a decimal");
                }
            }
        }
        if (k > 12) issues.push_back(where + ": order k exceeds the supported cap of 12");
    }

    if (c.command == "curvature") {
        need_operands(1);
        if (c.operands.size() == 1 &&
            (c.operands[0].kernels.size() != 1 || !c.operands[0].mu.empty() ||
             !c.operands[0].S.empty()))
            issues.push_back("curvature takes a single kernel");
    } else if (c.command == "invariants" || c.command == "irred") {
        need_operands(1);
    } else if (c.command == "homog") {
        need_operands(1);
        if (c.operands.size() == 1 && c.operands[0].kernels.size() > 2)
            issues.push_back("homog takes one or two kernels");
    } else if (c.command == "equiv") {
        need_operands(2);
    } else if (c.command == "verify") {
        if (!c.operands.empty()) issues.push_back("verify takes no operands");
    } else if (c.command == "jet") {
        if (c.subcommand == "validate" || c.subcommand == "action" || c.subcommand == "localize")
            need_specs(1);
        else if (c.subcommand == "classify") need_specs(2);
        if (c.subcommand == "action" && c.poly.empty())
            issues.push_back("jet action needs a polynomial");
        // No operand defaults the localization kernel to binomial lambda = 1.
        if ((c.subcommand == "localize" || c.subcommand == "classify") && !c.operands.empty() &&
            (c.operands.size() != 1 || c.operands[0].kernels.size() != 1))
            issues.push_back("jet " + c.subcommand + " takes a single kernel");
    }
    if (c.command != "jet") {
        if (!c.specs.empty()) issues.push_back(c.command + " takes no jet specs");
        if (!c.poly.empty()) issues.push_back(c.command + " takes no polynomial");
    }
    return issues;
}

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::vector<std::string> issues;
    apply_config_text(c, text, issues);
    if (issues.empty()) {
        std::vector<std::string> more = validate_config(c);
        issues.insert(issues.end(), more.begin(), more.end());
    }
    if (!issues.empty()) throw config_error(std::move(issues));
    return c;
}

std::string render_config(const RunConfig& c) {
    json j;
    j["command"] = c.command;
    if (!c.subcommand.empty()) j["subcommand"] = c.subcommand;
    if (!c.operands.empty()) {
        json ops = json::array();
        for (const OperatorDesc& od : c.operands) {
            json o;
            json ks = json::array();
            for (const KernelDesc& kd : od.kernels) {
                json k;
                k["type"] = kd.type;
                if (kd.type == "binomial") k["lambda"] = kd.lambda;
                else k["values"] = kd.coeffs;
                ks.push_back(std::move(k));
            }
            o["kernels"] = std::move(ks);
            if (!od.mu.empty()) o["mu"] = od.mu;
            if (!od.S.empty()) {
                json ss = json::array();
                for (const auto& m : od.S) {
                    json mj = json::array();
                    for (const auto& p : m) mj.push_back(json::array({p.first, p.second}));
                    ss.push_back(std::move(mj));
                }
                o["S"] = std::move(ss);
            }
            if (od.gauge_seed >= 0) o["gauge_seed"] = od.gauge_seed;
            ops.push_back(std::move(o));
        }
        j["operands"] = std::move(ops);
    }
    if (!c.specs.empty()) {
        json sp = json::array();
        for (const JetSpecDesc& sd : c.specs) {
            json s;
            if (sd.k > 0) s["k"] = sd.k;
            if (!sd.family.empty()) s["family"] = sd.family;
            if (!sd.superdiagonal.empty()) s["superdiagonal"] = sd.superdiagonal;
            if (!sd.mu_rows.empty()) s["mu"] = sd.mu_rows;
            sp.push_back(std::move(s));
        }
        j["specs"] = std::move(sp);
    }
    if (!c.poly.empty()) {
        json pj = json::array();
        for (const auto& p : c.poly) pj.push_back(json::array({p.first, p.second}));
        j["poly"] = std::move(pj);
    }
    if (c.at != std::pair<double, double>{0.0, 0.0})
        j["at"] = json::array({c.at.first, c.at.second});
    j["grid"] = {{"radii", c.grid.radii}, {"angles", c.grid.angles}, {"rmax", c.grid.rmax}};
    j["N"] = c.N;
    j["tol"] = c.tol;
    j["seed"] = c.seed;
    if (!c.output.empty()) j["output"] = c.output;
    return j.dump(2) + "\n";
}

int run(const RunConfig& c, std::ostream& out) {
    const std::vector<std::string> issues = validate_config(c);
    if (!issues.empty()) throw config_error(issues);
    if (c.command == "curvature") return run_curvature(c, out);
    if (c.command == "invariants") return run_invariants(c, out);
    if (c.command == "equiv") return run_equiv(c, out);
    if (c.command == "homog") return run_homog(c, out);
    if (c.command == "irred") return run_irred(c, out);
    if (c.command == "verify") return run_verify(c, out);
    return run_jet(c, out);
}

int run(const RunConfig& c) {
    if (c.output.empty()) return run(c, std::cout);
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw config_error({"cannot open output file '" + c.output + "'"});
    const int code = run(c, f);
    if (!f.good()) throw config_error({"write to '" + c.output + "' failed"});
    return code;
}

// ---- command-line token helpers ----

GridDesc parse_grid_token(const std::string& s) {
    GridDesc g;
    const auto x = s.find_first_of("xX");
    long long r = 0, a = 0;
    if (x == std::string::npos || !parse_ll(s.substr(0, x), r) || !parse_ll(s.substr(x + 1), a))
        throw config_error({"--grid expects RxA, for example 5x8, got '" + s + "'"});
    g.radii = static_cast<int>(r);
    g.angles = static_cast<int>(a);
    return g;
}

namespace {

std::vector<double> parse_number_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_decimal_entry(item, v))
            throw config_error({what + ": '" + item + "' is not a number"});
        out.push_back(v);
    }
    if (out.empty()) throw config_error({what + ": empty list"});
    return out;
}

} // namespace

KernelDesc parse_kernel_token(const std::string& s) {
    KernelDesc k;
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    if (head == "binomial") {
        k.type = "binomial";
        if (colon == std::string::npos)
            throw config_error({"--kernel binomial needs a lambda, for example binomial:2"});
        if (!parse_decimal_entry(s.substr(colon + 1), k.lambda))
            throw config_error({"--kernel: '" + s.substr(colon + 1) + "' is not a number"});
        return k;
    }
    if (head == "coeffs") {
        k.type = "coeffs";
        if (colon == std::string::npos)
            throw config_error({"--kernel coeffs needs values, for example coeffs:1,0.5"});
        k.coeffs = parse_number_list(s.substr(colon + 1), "--kernel coeffs");
        return k;
    }
    throw config_error({"--kernel expects binomial:LAMBDA or coeffs:A0,A1,..., got '" + s + "'"});
}

JetSpecDesc parse_spec_token(const std::string& s) {
    JetSpecDesc d;
    const auto colon = s.find(':');
    const std::string head = s.substr(0, colon);
    if (head == "binomial" || head == "inverse-factorial") {
        d.family = head;
        long long k = 0;
        if (colon == std::string::npos || !parse_ll(s.substr(colon + 1), k))
            throw config_error({"--spec " + head + " needs an order, for example " + head + ":4"});
        d.k = static_cast<int>(k);
        return d;
    }
    if (head == "super") {
        if (colon == std::string::npos)
            throw config_error({"--spec super needs couplings, for example super:1,0.8"});
        d.superdiagonal = parse_number_list(s.substr(colon + 1), "--spec super");
        return d;
    }
    throw config_error(
        {"--spec expects binomial:K, inverse-factorial:K or super:M1,M2,..., got '" + s + "'"});
}

} // namespace flagshift
