// nsg: train, inspect quadrature rules, list problems, run the acceptance checks.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "checks.hpp"
#include "nsg/harness.hpp"

using namespace nsg;
using json = nlohmann::json;

namespace {

struct RunArgs {
    std::string problem, test, loss, config, out, scale;
    std::int64_t seed = -1;
    bool dump_system = false;
    int log_every = -1;
};

int cmd_run(const RunArgs& a) {
    json j = json::object();
    if (!a.config.empty()) {
        std::ifstream is(a.config);
        if (!is) throw std::runtime_error("cannot open " + a.config);
        j = json::parse(is);
        // a summary.json from an earlier run carries its config under "config"
        if (j.contains("config")) j = j.at("config");
    }
    if (!a.problem.empty()) j["problem"] = a.problem;
    if (!a.test.empty()) j["test"] = a.test;
    if (!a.scale.empty()) j["scale"] = a.scale;
    ExperimentConfig cfg = config_from_json(j);
    if (!a.loss.empty()) cfg.train.loss = loss_from_string(a.loss);
    if (a.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(a.seed);
    if (a.dump_system) cfg.train.dump_system_dir = "system";
    if (a.log_every >= 0) cfg.train.log_every = a.log_every;

    const auto r = run_experiment(cfg, a.out);
    std::printf("%s %s loss=%s steps=%d e_test=%.6e e_E=%.6e loss %.3e -> %.3e (%.1f s)\n", cfg.problem.c_str(),
                cfg.test.c_str(), to_string(cfg.train.loss).c_str(), r.state.step, r.report.e_test, r.report.e_E,
                r.loss_first, r.loss_last, r.seconds);
    return 0;
}

int cmd_quad(const std::string& kind, double alpha, double beta, int n) {
    Rule1D r;
    if (kind == "legendre") r = gauss_legendre(n);
    else if (kind == "lobatto") r = gauss_lobatto(n);
    else if (kind == "jacobi") r = gauss_jacobi(n, alpha, beta);
    else throw std::invalid_argument("unknown rule kind '" + kind + "'");
    std::printf("index,node,weight\n");
    for (std::size_t i = 0; i < r.size(); ++i) std::printf("%zu,%.17g,%.17g\n", i, r.nodes[i], r.weights[i]);
    return 0;
}

int cmd_problems() {
    for (const auto& e : problem_catalog()) {
        std::string tests;
        for (const auto& t : e.tests) tests += (tests.empty() ? "" : ",") + t;
        std::printf("%-24s tests=%-20s %s\n", e.name.c_str(), tests.c_str(), e.description.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive neural subspace Galerkin solver"};
    app.require_subcommand(1);

    RunArgs ra;
    auto* run = app.add_subcommand("run", "train on a problem and write history.csv, summary.json, grid.csv, params.ckpt");
    run->add_option("--problem", ra.problem, "catalog problem name");
    run->add_option("--test", ra.test, "test label (1.1, 2.3, 4.1, circle, singular, rd, ...)");
    run->add_option("--loss", ra.loss, "ritz | posterior")->check(CLI::IsMember({"ritz", "posterior"}));
    run->add_option("--config", ra.config, "config JSON or an earlier summary.json");
    run->add_option("--out", ra.out, "output directory")->required();
    run->add_option("--scale", ra.scale, "desk | paper")->check(CLI::IsMember({"desk", "paper"}));
    run->add_option("--seed", ra.seed, "training seed");
    run->add_option("--log-every", ra.log_every, "progress line every k steps on stderr");
    run->add_flag("--dump-system", ra.dump_system, "write A, B, c of every step under <out>/system/");

    auto* quad = app.add_subcommand("quad", "quadrature rules");
    auto* table = quad->add_subcommand("table", "print nodes and weights as CSV");
    quad->require_subcommand(1);
    std::string kind = "legendre";
    double alpha = 0.0, beta = 0.0;
    int n = 8;
    table->add_option("--kind", kind, "legendre | lobatto | jacobi");
    table->add_option("--alpha", alpha, "Jacobi weight exponent of (1 - x)");
    table->add_option("--beta", beta, "Jacobi weight exponent of (1 + x)");
    table->add_option("--n", n, "number of nodes")->check(CLI::PositiveNumber);

    auto* problems = app.add_subcommand("problems", "problem catalog");
    problems->add_subcommand("list", "list problems and their tests");
    problems->require_subcommand(1);

    checks::Options co;
    auto* check = app.add_subcommand("check", "run acceptance criteria 1-10; nonzero exit on any failure");
    check->add_option("--out", co.out_dir, "directory for experiment artifacts");
    check->add_option("--only", co.only, "criterion ids")->check(CLI::Range(1, checks::num_criteria));
    check->add_flag("-v,--verbose", co.verbose, "training progress on stderr");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(ra);
        if (*table) return cmd_quad(kind, alpha, beta, n);
        if (*problems) return cmd_problems();
        if (*check) {
            int failed = 0;
            checks::run(co, [&](const checks::Outcome& o) {
                std::printf("%s\n", checks::format(o).c_str());
                std::fflush(stdout);
                failed += !o.pass;
            });
            return failed == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
