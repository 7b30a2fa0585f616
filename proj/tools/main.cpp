#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "flagshift/cli.hpp"
#include "flagshift/errors.hpp"

namespace {

// "re,im" -> pair
std::pair<double, double> parse_point(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (...) {
        throw flagshift::config_error({"'" + s + "' is not a complex point re,im"});
    }
}

// "re,im;re,im;..." -> coefficient list, low degree first
std::vector<std::pair<double, double>> parse_poly(const std::string& s) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (!item.empty()) out.push_back(parse_point(item));
    if (out.empty()) throw flagshift::config_error({"--poly: empty coefficient list"});
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite matrix models of flag-structured shift operators: curvature "
                 "invariants, equivalence and irreducibility decisions, jet module "
                 "classification, and a self-checking verification battery."};
    app.get_formatter()->column_width(26);

    std::string command, subcommand;
    app.add_option("command", command,
                   "curvature | invariants | equiv | homog | irred | verify | jet");
    app.add_option("subcommand", subcommand,
                   "verify: rigidity|commutant|invariants|jets|all; "
                   "jet: validate|action|localize|classify");

    std::string config_path, grid_token, out_path, poly_token, at_token;
    std::vector<std::string> kernel_tokens, spec_tokens;
    double rmax = -1.0, tol = -1.0;
    long long dim = -1, seed = std::numeric_limits<long long>::min();
    app.add_option("--config", config_path, "JSON config file; its fields override the flags");
    app.add_option("--kernel", kernel_tokens,
                   "operand kernel, binomial:LAMBDA or coeffs:A0,A1,... "
                   "(equiv: repeat for the second operand; homog/invariants/irred: "
                   "repeats chain blocks with unit couplings)");
    app.add_option("--spec", spec_tokens,
                   "jet spec, binomial:K, inverse-factorial:K or super:M1,M2,... "
                   "(repeat for a second spec)");
    app.add_option("--grid", grid_token, "sample grid as RADIIxANGLES, for example 5x8");
    app.add_option("--rmax", rmax, "outer sampling radius, in (0,1)");
    app.add_option("--dim", dim, "truncation dimension N");
    app.add_option("--tol", tol, "decision tolerance");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--poly", poly_token, "jet action polynomial, RE,IM;RE,IM;... low degree first");
    app.add_option("--at", at_token, "jet action evaluation point RE,IM");
    app.add_option("--out", out_path, "write results to this file instead of standard output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    flagshift::RunConfig cfg;
    std::vector<std::string> issues;
    try {
        cfg.command = command;
        cfg.subcommand = subcommand;
        for (const std::string& t : kernel_tokens) {
            flagshift::OperatorDesc od;
            od.kernels.push_back(flagshift::parse_kernel_token(t));
            cfg.operands.push_back(std::move(od));
        }
        // Single-operand commands read repeated --kernel flags as the blocks
        // of one chain with unit couplings; equiv keeps one operand per flag.
        if ((command == "homog" || command == "invariants" || command == "irred") &&
            cfg.operands.size() > 1) {
            flagshift::OperatorDesc chain;
            for (flagshift::OperatorDesc& od : cfg.operands)
                chain.kernels.push_back(std::move(od.kernels.front()));
            chain.mu.assign(chain.kernels.size() - 1, 1.0);
            cfg.operands.clear();
            cfg.operands.push_back(std::move(chain));
        }
        for (const std::string& t : spec_tokens)
            cfg.specs.push_back(flagshift::parse_spec_token(t));
        if (!grid_token.empty()) {
            const flagshift::GridDesc g = flagshift::parse_grid_token(grid_token);
            cfg.grid.radii = g.radii;
            cfg.grid.angles = g.angles;
        }
        if (rmax >= 0.0) cfg.grid.rmax = rmax;
        if (dim >= 0) cfg.N = static_cast<int>(dim);
        if (tol >= 0.0) cfg.tol = tol;
        if (seed != std::numeric_limits<long long>::min()) cfg.seed = seed;
        if (!poly_token.empty()) cfg.poly = parse_poly(poly_token);
        if (!at_token.empty()) cfg.at = parse_point(at_token);
        if (!out_path.empty()) cfg.output = out_path;
    } catch (const flagshift::config_error& e) {
        for (const std::string& it : e.issues) std::cerr << "error: " << it << '\n';
        return 2;
    }

    if (!config_path.empty()) {
        std::ifstream f(config_path, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot read config file '" << config_path << "'\n";
            return 2;
        }
        std::ostringstream text;
        text << f.rdbuf();
        flagshift::apply_config_text(cfg, text.str(), issues);
    }

    {
        const std::vector<std::string> more = flagshift::validate_config(cfg);
        issues.insert(issues.end(), more.begin(), more.end());
    }
    if (!issues.empty()) {
        for (const std::string& it : issues) std::cerr << "error: " << it << '\n';
        return 2;
    }

    try {
        return flagshift::run(cfg);
    } catch (const flagshift::config_error& e) {
        for (const std::string& it : e.issues) std::cerr << "error: " << it << '\n';
        return 2;
    } catch (const flagshift::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
