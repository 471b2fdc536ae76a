#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace speq {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // deterministic: numbers only, no timings
};

struct VerifyOptions {
    /// Empty = run all criteria; otherwise the listed ids (1-based).
    std::vector<int> only;
};

/// Runs the acceptance checklist. Each criterion is self-contained and pinned
/// to its tolerance; results are deterministic for a fixed build.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts = {});

/// One "PASS/FAIL id name (detail)" line per criterion plus a summary line;
/// returns the number of failures.
int print_report(const std::vector<CriterionResult>& results, std::ostream& out);

}  // namespace speq
