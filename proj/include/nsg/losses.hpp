#pragma once

#include <string>
#include <vector>

#include "nsg/discretize.hpp"

namespace nsg {

enum class LossKind { ritz, posterior };
LossKind loss_from_string(const std::string& s);
std::string to_string(LossKind k);

struct LossValue {
    double total = 0.0;
    double volume_residual = 0.0;
    double interface_jump = 0.0;
    double energy = 0.0;
    double load = 0.0;
    double boundary_misfit = 0.0;
};

// Loss value plus its adjoint with respect to every channel of the trial
// field on every region (empty when not requested).
struct LossEval {
    LossValue value;
    std::vector<Field> adjoint;
};

// 1/2 a(u,u) - (f,u) - <g,u>
LossEval ritz_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint = false);
// sum_q w (f - beta u + alpha lap u)^2 over the volume regions
LossEval residual_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint = false);
// residual plus the Gamma term sum w (g - [alpha du/dn])^2
LossEval interface_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint = false);
// ritz, or the interface/residual form depending on the problem
LossEval evaluate_loss(LossKind kind, const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint = false);

// Squared estimator
//   sum w [ (f - beta psi + alpha div y)^2 / beta + alpha |y - grad psi|^2 ]
// (+ the Gamma jump of alpha y . n against g on interface problems).
// y is passed as a Field with gx, gy the components and l its divergence.
// weighted = false drops the 1/beta factor, as in the interface form.
double eta_squared(const DiscreteProblem& dp, const std::vector<Field>& psi, const std::vector<Field>& y,
                   bool weighted = true);

// ||b_N - b|| / ||b|| with boundary quadrature weights.
double boundary_fit_loss(const Vec& bN, const Vec& b, const Vec& w);

}  // namespace nsg
