#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsg/diffnet.hpp"
#include "nsg/quadrature.hpp"

namespace nsg {

// Value, first and second derivative of a 1D function.
struct Jet1 {
    double v = 0, d1 = 0, d2 = 0;
};
// Value, gradient and Laplacian of a 2D function.
struct Jet2 {
    double v = 0, gx = 0, gy = 0, lap = 0;
};

// Polynomial in one variable, coefficients in increasing degree.
struct Poly1 {
    std::vector<double> c;
    Jet1 operator()(double x) const;
    static Poly1 product_of_roots(std::vector<double> roots, double scale = 1.0);
};

// Scalar multiplier vanishing where a network term must vanish. Separable
// factors F(x,y) = fx(x) fy(y) keep tensor-network terms separable.
struct Factor {
    bool separable = true;
    Poly1 fx, fy;
    std::function<Jet2(double, double)> general;

    Jet2 operator()(double x, double y) const;
    static Factor sep(Poly1 fx, Poly1 fy);
    static Factor gen(std::function<Jet2(double, double)> g);
};

struct Geometry {
    enum class Shape { rect, disk, rect_minus_disk } shape = Shape::rect;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double radius = 0;  // disk centred at the origin
    bool contains(double x, double y) const;  // closed set
};

struct Subdomain {
    std::string name;
    double alpha = 1.0;
    Geometry geom;
};

// Interface piece. The normal points from side A into side B.
struct InterfaceSegment {
    enum class Shape { vline, hline, circle } shape = Shape::vline;
    int side_a = 0, side_b = 1;
    double at = 0;          // x = at (vline) or y = at (hline)
    double t0 = 0, t1 = 1;  // extent along the line
    double radius = 1;      // circle
};

struct Term {
    std::string name;
    std::vector<int> support;  // subdomain indices
    Factor factor;
    bool supports(int sub) const;
};

struct ProblemSpec {
    std::string name, test;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double beta = 0;
    std::vector<Subdomain> subdomains;
    std::vector<InterfaceSegment> interfaces;
    std::vector<Term> terms;
    std::function<double(int, double, double)> source;
    std::function<Jet2(int, double, double)> exact;  // branch of subdomain i, empty if unknown
    std::function<double(double, double)> boundary;   // empty: homogeneous
    bool singular_load = false;
    nlohmann::json params;

    bool has_exact() const { return static_cast<bool>(exact); }
    bool has_lift() const { return static_cast<bool>(boundary); }
    // Owning subdomain; points on interfaces go to the lowest index.
    int locate(double x, double y) const;
    std::array<double, 2> normal(int seg, double x, double y) const;
    // Flux jump alpha_A du_A/dn - alpha_B du_B/dn from the exact branches.
    double flux_jump(int seg, double x, double y) const;
    double alpha(int sub) const { return subdomains.at(sub).alpha; }
};

struct CatalogEntry {
    std::string name;
    std::vector<std::string> tests;
    std::string description;
    nlohmann::json defaults;
};
std::vector<CatalogEntry> problem_catalog();

// name is a catalog name; test selects a parameter table (may be empty for
// the default); params override individual entries.
ProblemSpec catalog(const std::string& name, const std::string& test = "",
                    const nlohmann::json& params = nlohmann::json::object());
// Problem name a bare test label belongs to ("1.1" -> two_material).
std::string problem_for_test(const std::string& test);

// Trial function u_N = lift + sum_k F_k * sum_j c_kj N_kj.
struct TrialComposition {
    std::shared_ptr<const ProblemSpec> spec;
    std::vector<ArchitectureSpec> archs;  // one per term
    std::vector<ParameterVector> params;
    std::vector<double> coeffs;           // concatenated per term
    std::optional<ArchitectureSpec> lift_arch;
    ParameterVector lift_params;

    std::size_t num_basis() const;
    std::size_t offset(int term) const;
    // Branch of subdomain `sub` at the given points (one row).
    Jets evaluate(const Points& pts, int sub) const;
};

TrialComposition compose_trial(std::shared_ptr<const ProblemSpec> spec, std::vector<ArchitectureSpec> archs,
                               std::vector<ParameterVector> params, std::vector<double> coeffs = {},
                               std::optional<ArchitectureSpec> lift_arch = std::nullopt,
                               ParameterVector lift_params = {});

// Product rule for F * N given jets of both.
Jet2 product(const Jet2& f, const Jet2& n);

// Tensor grid with one weight per point, x-outer ordering.
struct WeightedGrid {
    std::string label;
    std::vector<double> xs, ys;
    std::vector<double> w;
};

// Load integral of the singular problem split into five weighted grids:
// the |x1-1/2|^{-2/3} part on both halves (Gauss-Jacobi in x1), its mirror
// in x2, and the two |t-1/2|^{4/3} parts on the smooth tensor grid.
// jac_left is a Jacobi(-2/3, 0) rule and jac_right a Jacobi(0, -2/3) rule
// on [-1, 1]; smooth is a rule on [0, 1].
std::vector<WeightedGrid> singular_load_grids(const Rule1D& jac_left, const Rule1D& jac_right, const Rule1D& smooth);
double singular_load_value(const std::vector<WeightedGrid>& grids, const std::function<double(double, double)>& v);

}  // namespace nsg
