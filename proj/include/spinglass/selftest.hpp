#pragma once

// Acceptance suite: every criterion runs at its pinned parameters and
// tolerances and prints one pass/fail line.  Runnable from the CLI
// (`glass selftest`) and from the test suite.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace spinglass {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0;
    std::string detail;
};

struct SelftestOptions {
    int threads = 1;
    std::string out_dir;  // optional: write summary.json here
};

std::vector<CriterionResult> run_selftest(const SelftestOptions& opts, std::ostream& log);

}  // namespace spinglass
