#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace nsg {

enum class RuleKind { legendre, lobatto, jacobi };

// 1D rule. For the jacobi kind the weights integrate against
// (b-x)^alpha (x-a)^beta on [a, b].
struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    double a = -1.0;
    double b = 1.0;
    RuleKind kind = RuleKind::legendre;
    double alpha = 0.0;
    double beta = 0.0;

    std::size_t size() const { return nodes.size(); }
    double integrate(const std::function<double(double)>& f) const;
    std::string id() const;
};

Rule1D gauss_legendre(int n);
Rule1D gauss_lobatto(int n);
Rule1D gauss_jacobi(int n, double alpha, double beta);

// m equal subintervals of [a, b]. Coincident Lobatto endpoints are merged
// (weights summed) so nodes stay strictly increasing.
Rule1D compose(const Rule1D& rule, double a, double b, int m);

// Concatenate rules living on disjoint, ordered intervals.
Rule1D concatenate(const std::vector<Rule1D>& parts);

// Jacobi polynomial P_n^{(alpha,beta)}(x) and its derivative.
double jacobi_p(int n, double alpha, double beta, double x);
double jacobi_dp(int n, double alpha, double beta, double x);

enum class Provenance { tensor, polar_disk, difference, scattered };

struct Rule2D {
    std::vector<std::array<double, 2>> points;
    std::vector<double> weights;
    Provenance provenance = Provenance::tensor;

    std::size_t size() const { return points.size(); }
    double integrate(const std::function<double(double, double)>& f) const;
};

Rule2D tensor_product(const Rule1D& rx, const Rule1D& ry);
Rule2D polar_disk(const Rule1D& r_rule, int n_theta, double radius = 1.0);
Rule2D difference(const Rule2D& whole, const Rule2D& part);

struct BoundaryRule {
    std::vector<std::array<double, 2>> points;
    std::vector<std::array<double, 2>> normals;  // outward unit normals
    std::vector<double> weights;                  // arc length

    std::size_t size() const { return points.size(); }
    double length() const;
    double integrate(const std::function<double(double, double)>& f) const;
};

BoundaryRule circle_boundary(int n_theta, double radius = 1.0);
// Four edges of [x0,x1]x[y0,y1], each with `edge` mapped to the edge.
BoundaryRule rectangle_boundary(const Rule1D& edge, double x0, double x1, double y0, double y1);

}  // namespace nsg
