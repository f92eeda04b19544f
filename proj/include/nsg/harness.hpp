#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsg/training.hpp"

namespace nsg {

struct ErrorReport {
    bool exact_available = false;
    double e_E = 0.0, e_L2 = 0.0, e_test = 0.0;
    int grid_n = 0;  // test grid is grid_n x grid_n
    std::vector<std::string> quadrature_ids;
    // location of the largest pointwise error on the test grid
    double max_err = 0.0;
    std::array<double, 2> max_err_at{0.0, 0.0};
    int max_err_subdomain = -1;
};

// Squared energy and L2 norms of the error and of the exact solution per
// subdomain, integrated over the volume regions.
struct NormParts {
    std::vector<double> err_a2, exact_a2, err_l2, exact_l2;
};
NormParts subdomain_norms(const DiscreteProblem& dp, const std::vector<Field>& u);

// sqrt(sum (u_N - u)^2 / sum u^2) over the listed test points.
double e_test_formula(const std::vector<double>& u_n, const std::vector<double>& u);

// Uniform n x n grid on the problem box, boundary included, x-outer.
Points test_grid(const ProblemSpec& spec, int n);

// Branch `sub` of a piecewise function at (x, y).
using BranchFunction = std::function<Jet2(int, double, double)>;

struct GridSample {
    int n = 0;
    Points pts;
    std::vector<int> sub;  // branch used at each point (lowest index on interfaces)
    std::vector<double> u_n, u;  // u is NaN without an exact solution
};
GridSample sample_grid(const TrialComposition& trial, int n);
GridSample sample_grid(const ProblemSpec& spec, const BranchFunction& u_n, int n);

// e_E, e_L2 from the region fields u, e_test and the max-error location from the grid.
ErrorReport error_metrics(const DiscreteProblem& dp, const std::vector<Field>& u, const GridSample& grid);
ErrorReport error_metrics(const DiscreteProblem& dp, const std::vector<Field>& u, const TrialComposition& trial, int n);

// Fields of a given function on every region of a discrete problem; fn
// receives the subdomain branch of the region.
std::vector<Field> region_fields(const DiscreteProblem& dp, const BranchFunction& fn);

// |L_coarse - L_refined| for the same field; the refined rules come from
// QuadConfig::refined(factor).
double integration_error_probe(std::shared_ptr<const ProblemSpec> spec, const QuadConfig& q, const BranchFunction& field,
                               LossKind kind, int factor);

struct ExperimentConfig {
    int schema_version = 1;
    std::string problem, test, scale = "desk";
    nlohmann::json params = nlohmann::json::object();
    ArchitectureSpec arch;  // used for every term
    QuadConfig quad;
    TrainConfig train;
    int grid_n = 301;
    int probe_factor = 2;  // 0: no integration-error probe
    // boundary network for problems with nonzero Dirichlet data
    ArchitectureSpec lift_arch;
    BoundaryFitConfig lift_fit;
    int lift_subintervals = 40, lift_points = 8;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Missing keys keep the default of the experiment named in the document.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig default_config(const std::string& problem, const std::string& test, const std::string& scale = "desk");

// Experiment names: the test labels of the catalog ("1.1", "4.1", "circle",
// "singular", "rd").
std::vector<std::string> experiment_names();

struct ExperimentResult {
    ExperimentConfig config;
    ErrorReport report;
    TrainState state;
    std::optional<BoundaryFit> lift;
    TrialComposition trial;  // trained u_N
    double probe = -1.0;  // -1: not computed
    double loss_first = 0.0, loss_last = 0.0;  // quantity used for the decrease criterion
    double seconds = 0.0;
    nlohmann::json summary;
};

// Trains, evaluates and (when out_dir is non-empty) writes history.csv,
// summary.json, grid.csv and params.ckpt.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);
ExperimentResult run_experiment(const std::string& name, const std::string& scale, const std::string& out_dir);

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows);

}  // namespace nsg
