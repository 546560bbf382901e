// Dedicated verification binary: runs every shipped accuracy criterion at its
// stated tolerance and prints one pass/fail line per criterion.
#include <iostream>
#include <string>

#include "qrt/selftest.hpp"

int main(int argc, char** argv) {
    std::string cache_dir = argc > 1 ? argv[1] : ".qrt-cache";
    auto results = qrt::selftest::run_all(std::cout, cache_dir);
    int passed = 0;
    for (const auto& r : results) passed += r.pass;
    std::cout << passed << "/" << results.size() << " criteria passed\n";
    return qrt::selftest::all_pass(results) ? 0 : 1;
}
