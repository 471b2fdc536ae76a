// Runs the full acceptance checklist and prints one PASS/FAIL line per
// criterion. Exit code = number of failures, so ctest treats any red
// criterion as a test failure.

#include <iostream>

#include "speq/verify.hpp"

int main() {
    auto results = speq::run_acceptance();
    return speq::print_report(results, std::cout);
}
