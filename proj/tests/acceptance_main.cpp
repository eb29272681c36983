// Acceptance suite: one named criterion per check, one pass/fail line each.
// Exits non-zero if any criterion fails or if the expected count is not
// registered.

#include <cstdio>
#include <stdexcept>
#include <string>

#include "acceptance.hpp"

namespace acceptance {

Options& options() {
    static Options opts;
    return opts;
}

std::vector<Criterion>& registry() {
    static std::vector<Criterion> criteria;
    return criteria;
}

void expect(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error(what);
}

}  // namespace acceptance

namespace {
constexpr int kExpectedCriteria = 10;
}

int main(int argc, char** argv) {
    auto& opts = acceptance::options();
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--cli") opts.cli = argv[i + 1];
        else if (flag == "--fixtures") opts.fixtures = argv[i + 1];
        else if (flag == "--scratch") opts.scratch = argv[i + 1];
        else {
            std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
            return 1;
        }
    }
    if (opts.cli.empty() || opts.fixtures.empty() || opts.scratch.empty()) {
        std::fprintf(stderr, "usage: verirag_acceptance --cli PATH --fixtures DIR --scratch DIR\n");
        return 1;
    }

    int failures = 0;
    for (const auto& criterion : acceptance::registry()) {
        try {
            criterion.run();
            std::printf("PASS  %s\n", criterion.name.c_str());
        } catch (const std::exception& e) {
            std::printf("FAIL  %s: %s\n", criterion.name.c_str(), e.what());
            ++failures;
        }
    }
    if (acceptance::registry().size() != kExpectedCriteria) {
        std::printf("FAIL  expected %d criteria, %zu registered\n", kExpectedCriteria,
                    acceptance::registry().size());
        return 1;
    }
    return failures == 0 ? 0 : 1;
}
