// Built-in verification suite: every shipped accuracy target evaluated at its
// stated tolerance, one pass/fail result per criterion.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qrt::selftest {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// Runs all criteria in order, streaming one line per criterion to `progress`.
std::vector<CriterionResult> run_all(std::ostream& progress, const std::string& cache_dir = "");

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace qrt::selftest
