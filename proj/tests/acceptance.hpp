#pragma once

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Options {
    std::string cli;       // path to the built command-line binary
    std::string fixtures;  // bundled fixture directory
    std::string scratch;   // writable scratch directory
};

Options& options();

struct Criterion {
    std::string name;
    std::function<void()> run;  // throws on failure
};

std::vector<Criterion>& registry();

/// Throws std::runtime_error(what) when cond is false.
void expect(bool cond, const std::string& what);

}  // namespace acceptance
