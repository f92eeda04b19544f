#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "nsg/basis.hpp"
#include "nsg/galerkin.hpp"
#include "nsg/losses.hpp"

namespace nsg {

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

// Bias-corrected Adam; throws on a non-finite gradient.
void adam_step(ParameterVector& theta, AdamState& st, const std::vector<double>& grad, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// f(theta) and, when grad != nullptr, its gradient.
using Objective = std::function<double(const ParameterVector& theta, std::vector<double>* grad)>;

struct LbfgsState {
    int history = 10;
    std::deque<Vec> s, y;
    long iterations = 0;
    long fallbacks = 0;
};

struct LbfgsResult {
    double f_before = 0.0;
    double f_after = 0.0;
    bool moved = false;
    bool fallback = false;  // line search failed, a short gradient step was taken
    int trials = 0;
};

// One iteration: two-loop direction, backtracking Armijo search from step lr.
LbfgsResult lbfgs_step(ParameterVector& theta, LbfgsState& st, const Objective& f, double lr, double c1 = 1e-4,
                       int max_trials = 25);

// Multi-step decay: lr * gamma^(number of milestones passed); milestones are
// fractions of the total step count.
double scheduled_lr(double lr, int step, int total, const std::vector<double>& milestones, double gamma);

struct TrainConfig {
    int adam_steps = 2000;
    double adam_lr = 1e-3;
    int lbfgs_steps = 50;
    double lbfgs_lr = 0.1;
    int lbfgs_history = 10;
    std::uint64_t seed = 1;
    LossKind loss = LossKind::ritz;
    int galerkin_every = 1;
    double rcond = 1e-12;
    // frozen: dL/dtheta at fixed c. total: also differentiates c(theta)
    // through A c = B (one extra solve with A per step). auto: frozen for
    // the Ritz loss (dL/dc = Ac - B = 0 there, so both agree), total otherwise.
    std::string gradient = "frozen";
    bool total_gradient() const { return gradient == "total" || (gradient == "auto" && loss != LossKind::ritz); }
    std::vector<double> milestones;  // Adam decay points (fractions), empty: constant
    double gamma = 0.5;
    std::string dump_system_dir;  // write A, B, c per step when set
    int log_every = 0;            // progress lines on stderr, 0: silent

    void validate() const;
};

struct HistoryRow {
    int step = 0;
    std::string phase;
    LossValue loss;
    double ritz_gap = 0.0;  // Ritz loss + 1/2 ||u||_a^2 (= 1/2 ||u - u_p||_a^2)
    double e_E = 0.0, e_L2 = 0.0;
    double err_a = 0.0;  // absolute energy error
    double eta = 0.0;    // eta(u_p, grad u_p)
    bool pinv = false;
};

struct TrainState {
    ParameterVector theta;
    Vec c;
    AdamState adam;
    LbfgsState lbfgs;
    int step = 0;
    std::vector<HistoryRow> history;
    int monotonicity_violations = 0;  // Galerkin solve raised the Ritz quadratic
    int pinv_events = 0;
    double seconds = 0.0;
};

// Called after each history row; returning false stops the run.
using StepCallback = std::function<bool(const TrainState&, const SubspaceModel&)>;

// Build the subspace, solve for c, step theta at frozen c; rows for steps 0..M.
TrainState run_algorithm3(SubspaceModel& model, const TrainConfig& cfg, const ParameterVector* theta0 = nullptr,
                          const StepCallback& cb = {});

// Loss at fixed c as a function of theta, for optimizers and gradient checks.
Objective frozen_c_objective(SubspaceModel& model, LossKind kind, const Vec& c);

// dL/dc_m = sum over regions of the adjoint contracted with phi_m.
Vec coefficient_gradient(const SubspaceModel& model, const std::vector<Field>& adj);
// Gradient of L(c(theta), theta) with c solving the Galerkin system sys
// assembled at theta (model forwarded at theta); adj is the loss adjoint at c.
ParameterVector total_gradient(const SubspaceModel& model, const ParameterVector& theta, const GalerkinSystem& sys,
                               const std::vector<Field>& adj, double rcond);
// L(c(theta), theta) with the Galerkin solve inside, total gradient.
Objective galerkin_objective(SubspaceModel& model, LossKind kind, double rcond);

struct BoundaryFitConfig {
    int steps = 5000;
    double lr = 1e-3;
    std::vector<double> milestones{0.5, 0.75, 0.9};
    double gamma = 0.5;
    std::uint64_t seed = 1;
    bool solve_output_layer = true;  // least-squares output layer each step
};

struct BoundaryFit {
    ArchitectureSpec arch;
    ParameterVector params;
    double error = 0.0;  // relative L2 boundary error (absolute when b == 0)
    std::vector<double> history;
};

BoundaryFit fit_boundary_network(const std::function<double(double, double)>& b, const ArchitectureSpec& arch,
                                 const BoundaryRule& rule, const BoundaryFitConfig& cfg);

}  // namespace nsg
