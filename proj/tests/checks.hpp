#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nsg::checks {

struct Outcome {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double limit = 0.0;  // wall-clock budget, part of the pass condition
    std::string detail;
};

struct Options {
    std::string out_dir = "acceptance_runs";
    std::vector<int> only;  // empty: all criteria 1..10
    bool verbose = false;   // training progress on stderr
};

constexpr int num_criteria = 10;

// Runs the selected criteria in order; on_result is called as each finishes.
std::vector<Outcome> run(const Options& opt, const std::function<void(const Outcome&)>& on_result = {});

// "PASS  3 galerkin sine recovery (0.01 s / 5 s): ..."
std::string format(const Outcome& o);

}  // namespace nsg::checks
