#pragma once

#include <vector>

#include "nsg/diffnet.hpp"
#include "nsg/discretize.hpp"

namespace nsg {

// One network term evaluated on one region.
struct TermBlock {
    int term = 0;
    int row0 = 0;  // first local row
    int p = 0;
    // separable path: 1D subnet jets on xs / ys and factor jets
    Jets a, b;
    Mat fx, fy;  // 3 x n: value, d1, d2
    // dense path: network jets at the points and factor jets (4 x M)
    Jets net;
    Mat fac;
    SineMlp::Tape ta, tb;
};

// Basis restricted to one region. Separable when the grid is a tensor grid
// and every active term is a tensor network with a separable factor; then
// phi_m(x, y) = X_m(x) Y_m(y) and channel k of X holds the k-th derivative.
struct RegionBasis {
    bool separable = false;
    int P = 0;
    std::vector<int> rows;  // global index of each local row
    Mat X[3], Y[3];
    Jets D;                 // dense channels, P x M
    std::vector<TermBlock> blocks;

    Field synthesize(const Grid& g, const Vec& c_local) const;
    // out_m = sum_q G.v phi_m + G.gx d1 phi_m + G.gy d2 phi_m + G.l lap phi_m
    Vec contract(const Grid& g, const Field& G) const;
    // sum_q w (alpha grad phi_m . grad phi_n + beta phi_m phi_n)
    Mat gram(const Region& r) const;
    Vec gather(const Vec& c) const;
};

// Networks of all terms with one flat parameter vector, evaluated on the
// regions of a discrete problem.
class SubspaceModel {
public:
    SubspaceModel(const DiscreteProblem& dp, std::vector<ArchitectureSpec> archs);

    const DiscreteProblem& problem() const { return *dp_; }
    const std::vector<ArchitectureSpec>& archs() const { return archs_; }
    int num_basis() const { return P_; }
    std::size_t num_params() const { return nparams_; }
    int basis_offset(int term) const { return boff_[term]; }
    std::size_t param_offset(int term) const { return poff_[term]; }
    ParameterVector init(std::uint64_t seed) const;  // term k uses seed + k
    ParameterVector term_params(const ParameterVector& theta, int term) const;

    // Evaluate every region basis; keeps tapes for backward.
    void forward(const ParameterVector& theta);
    const RegionBasis& basis(int r) const { return bases_[r]; }
    const std::vector<RegionBasis>& bases() const { return bases_; }
    std::size_t num_regions() const { return bases_.size(); }

    // Trial fields per region (lift included) for global coefficients c.
    std::vector<Field> fields(const Vec& c) const;
    // dL/dtheta at fixed c from per-region field adjoints.
    ParameterVector backward(const ParameterVector& theta, const Vec& c, const std::vector<Field>& adj) const;

private:
    const DiscreteProblem* dp_;
    std::vector<ArchitectureSpec> archs_;
    std::vector<Network> nets_;
    std::vector<int> boff_;
    std::vector<std::size_t> poff_;
    int P_ = 0;
    std::size_t nparams_ = 0;
    std::vector<RegionBasis> bases_;
};

}  // namespace nsg
