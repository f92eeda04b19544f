#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nsg/diffnet.hpp"
#include "nsg/problems.hpp"
#include "nsg/quadrature.hpp"

namespace nsg {

// Per-point channels of a scalar field: value, gradient, Laplacian.
struct Field {
    Vec v, gx, gy, l;
    Field() = default;
    explicit Field(Eigen::Index m) : v(Vec::Zero(m)), gx(Vec::Zero(m)), gy(Vec::Zero(m)), l(Vec::Zero(m)) {}
    Eigen::Index size() const { return v.size(); }
    bool empty() const { return v.size() == 0; }
    Field& operator+=(const Field& o);
};

struct Grid {
    bool tensor = true;
    std::vector<double> xs, ys;  // tensor grids, points ordered x-outer
    Points pts;
    Eigen::Index size() const { return static_cast<Eigen::Index>(pts.size()); }
    Eigen::Index nx() const { return static_cast<Eigen::Index>(xs.size()); }
    Eigen::Index ny() const { return static_cast<Eigen::Index>(ys.size()); }
    static std::shared_ptr<Grid> make_tensor(std::vector<double> xs, std::vector<double> ys);
    static std::shared_ptr<Grid> make_scattered(Points pts);
};

enum class RegionRole { volume, load, interface };

// A set of quadrature points on which one branch of the trial function is
// integrated. Volume regions carry the energy weights, load regions only
// contribute to (f, v), interface regions hold one side of a piece of Gamma.
struct Region {
    std::string name;
    RegionRole role = RegionRole::volume;
    int subdomain = 0;
    double alpha = 1.0, beta = 0.0;
    std::shared_ptr<const Grid> grid;
    Vec w;                  // may be signed (difference rules)
    std::vector<double> wx, wy;  // separable factors of w on tensor grids (optional)
    Vec load;               // B_m += sum load * phi_m; empty if none
    Vec f;                  // source at the points; empty if not pointwise available
    int segment = -1;       // interface regions
    bool side_a = true;
    int partner = -1;
    Vec nx, ny, g;
    Field lift, exact;
    std::vector<int> terms;  // problem terms active on this branch

    Eigen::Index size() const { return grid->size(); }
    bool separable_weights() const { return !wx.empty(); }
};

struct QuadConfig {
    std::string kind = "lobatto";  // legendre | lobatto
    int points = 8;                 // per subinterval
    int subintervals = 40;          // per subdomain side
    std::string plan = "jacobi";    // singular problem: naive | refined | jacobi
    int jacobi_points = 200;
    double refined_lo = 0.49, refined_hi = 0.51;
    int refined_subintervals = 20;
    int radial_subintervals = 20, radial_points = 8, n_theta = 160;

    QuadConfig refined(int factor) const;  // subinterval and point counts scaled up
};

struct DiscreteProblem {
    std::shared_ptr<const ProblemSpec> spec;
    QuadConfig quad;
    std::vector<Region> regions;
    std::vector<std::string> rule_ids;
};

Rule1D base_rule(const QuadConfig& q);
DiscreteProblem discretize(std::shared_ptr<const ProblemSpec> spec, const QuadConfig& q);
// Evaluate a boundary network on every region; required before use when the
// problem has nonzero Dirichlet data.
void attach_lift(DiscreteProblem& dp, const ArchitectureSpec& arch, const ParameterVector& params);

// Subdomain of each point for rules that are not tied to a subdomain; points
// lying on an interface have an ambiguous coefficient and are rejected.
std::vector<int> assign_subdomains(const ProblemSpec& spec, const Points& pts, double tol = 1e-14);

}  // namespace nsg
