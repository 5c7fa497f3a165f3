#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

/**
 * @file verify.hpp
 *
 * @brief Property suites over the whole library, each returning measured
 * statistics and a pass flag.
 *
 * The full level runs every suite at the sizes the acceptance gate uses
 * (10^7-sample tail and threshold oracles, the 10^4-point recall instance).
 * The quick level shrinks trial counts to stay under a minute.
 */

namespace lplsh {

enum class VerifyLevel { quick, full };

const char* to_string(VerifyLevel level);
VerifyLevel verify_level_from_string(const std::string& name);

struct VerifyOptions {
    VerifyLevel level = VerifyLevel::quick;
    std::uint64_t seed = 20240601;
};

struct SuiteResult {
    std::string name;
    bool passed = false;
    /// Measured statistics, in the order the suite computed them.
    std::vector<std::pair<std::string, double>> metrics;
    /// Failed checks, one line each.
    std::vector<std::string> failures;
    double seconds = 0.0;

    double metric(const std::string& key) const;
};

/// Suite names in execution order.
const std::vector<std::string>& suite_names();

/// Throws ContractError for an unknown name.
SuiteResult run_suite(const std::string& name, const VerifyOptions& options);

/// Runs the named suites (all when empty), printing each result as it completes when out is non-null.
std::vector<SuiteResult> run_verify(const VerifyOptions& options, const std::vector<std::string>& only = {},
                                    std::ostream* out = nullptr);

/// One line: "suite=<name> status=PASS|FAIL seconds=<s> key=value ...", then "  failure: ..." lines.
void write_suite_result(std::ostream& out, const SuiteResult& result);

}  // namespace lplsh
