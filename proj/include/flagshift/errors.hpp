#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flagshift {

// Common base so the CLI can map any library failure to exit code 2.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument values: non-positive lambda, mu <= 0, short jet sequences, ...
struct parameter_error : error {
    explicit parameter_error(const std::string& msg) : error(msg) {}
};

// Evaluation point outside the guaranteed-accuracy disk.
struct domain_error : error {
    explicit domain_error(const std::string& msg) : error(msg) {}
};

// Requested derivative order too close to the series truncation degree.
struct truncation_error : error {
    explicit truncation_error(const std::string& msg) : error(msg) {}
};

// Metric value below the degeneracy threshold (log/divide would blow up).
struct degenerate_metric_error : error {
    explicit degenerate_metric_error(const std::string& msg) : error(msg) {}
};

// Radicand of the second-fundamental-form denominator not positive.
struct geometric_degeneracy_error : error {
    explicit geometric_degeneracy_error(const std::string& msg) : error(msg) {}
};

// Problem size beyond the configured memory/flop budget.
struct resource_error : error {
    explicit resource_error(const std::string& msg) : error(msg) {}
};

// Truncation residual too large for the requested computation.
struct accuracy_error : error {
    explicit accuracy_error(const std::string& msg) : error(msg) {}
};

// Inconsistent derived data (signals an invalid spec slipped past validation).
struct spec_error : error {
    explicit spec_error(const std::string& msg) : error(msg) {}
};

// CLI/config validation; carries every problem found, not just the first.
struct config_error : error {
    std::vector<std::string> issues;
    explicit config_error(std::vector<std::string> problems)
        : error(join(problems)), issues(std::move(problems)) {}

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string all;
        for (const auto& s : v) {
            if (!all.empty()) all += "; ";
            all += s;
        }
        return all;
    }
};

} // namespace flagshift
