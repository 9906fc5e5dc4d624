// One line per criterion; nonzero exit when any fails.
// Optional: --seed N to rerun the suite on another master seed.

#include <cstring>
#include <iostream>
#include <string>

#include "teugels/acceptance.hpp"

int main(int argc, char** argv) {
    teugels::AcceptanceOptions opt;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--seed") == 0) opt.seed = std::stoull(argv[i + 1]);
    const auto results = teugels::run_acceptance(opt, &std::cout);
    int failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
