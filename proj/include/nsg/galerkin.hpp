#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nsg/basis.hpp"

namespace nsg {

struct GalerkinSystem {
    Mat A;
    Vec B;
    Vec c;
    double condition_estimate = 0.0;
    bool pseudo_inverse = false;  // eigenvalue fallback was taken
    int truncated = 0;            // eigenvalues dropped by the fallback
    Vec eigenvalues;              // filled by the fallback only
};

class DegenerateSubspace : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A_mn = a(phi_n, phi_m) over volume regions;
// B_m = (f, phi_m) + <g, phi_m> - a(lift, phi_m).
GalerkinSystem assemble(const DiscreteProblem& dp, const std::vector<RegionBasis>& bases, int P);
inline GalerkinSystem assemble(const SubspaceModel& m) { return assemble(m.problem(), m.bases(), m.num_basis()); }

// Cholesky when well conditioned, otherwise an eigenvalue-truncated
// pseudo-inverse. Fills sys.c and returns it.
const Vec& solve(GalerkinSystem& sys, double rcond = 1e-12);

// Residual ||A c - B||_inf.
double residual_inf(const GalerkinSystem& sys);

// Quadratic part of the Ritz energy as a function of the coefficients.
double ritz_quadratic(const GalerkinSystem& sys, const Vec& d);

// Writes A, B, c and (if computed) the spectrum as kind,i,j,value rows.
void dump_system(const std::string& path, const GalerkinSystem& sys);

}  // namespace nsg
