#include "nsg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nsg {

namespace {

constexpr double kNewtonTol = 1e-15;
constexpr int kNewtonMaxIter = 100;

// Roots of P_n^{(alpha,beta)}, ascending. Newton with Maehly deflation
// against the roots already found, started from cosine (Chebyshev-type) guesses.
std::vector<double> jacobi_roots(int n, double alpha, double beta) {
    std::vector<double> roots;
    roots.reserve(n);
    for (int k = 1; k <= n; ++k) {
        const double theta = std::numbers::pi * (k - 0.25 + 0.5 * alpha) / (n + 0.5 + 0.5 * (alpha + beta));
        double x = std::cos(theta);
        if (!roots.empty() && x >= roots.back()) x = roots.back() - 1e-3 * (1.0 + roots.back());
        for (int it = 0; it < kNewtonMaxIter; ++it) {
            const double p = jacobi_p(n, alpha, beta, x);
            const double dp = jacobi_dp(n, alpha, beta, x);
            double s = 0.0;
            for (double r : roots) s += 1.0 / (x - r);
            const double dx = p / (dp - p * s);
            x -= dx;
            if (std::abs(dx) <= kNewtonTol) break;
        }
        roots.push_back(x);
    }
    std::sort(roots.begin(), roots.end());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (!(roots[i] > -1.0 && roots[i] < 1.0) || (i > 0 && !(roots[i] > roots[i - 1])))
            throw std::runtime_error("jacobi root iteration failed to separate roots");
    }
    return roots;
}

// Gamma(n+a+1) Gamma(n+b+1) / (n! Gamma(n+a+b+1)), by upward recursion from n = 1.
double jacobi_gamma_ratio(int n, double alpha, double beta) {
    double r = std::tgamma(alpha + 2.0) * std::tgamma(beta + 2.0) / std::tgamma(alpha + beta + 2.0);
    for (int k = 2; k <= n; ++k) r *= (k + alpha) * (k + beta) / (k * (k + alpha + beta));
    return r;
}

void check_rule(const Rule1D& r) {
    if (r.nodes.size() != r.weights.size()) throw std::logic_error("rule size mismatch");
    for (std::size_t i = 1; i < r.nodes.size(); ++i)
        if (!(r.nodes[i] > r.nodes[i - 1])) throw std::logic_error("rule nodes not increasing");
}

}  // namespace

double jacobi_p(int n, double alpha, double beta, double x) {
    if (n == 0) return 1.0;
    double p0 = 1.0;
    double p1 = (alpha + 1.0) + 0.5 * (alpha + beta + 2.0) * (x - 1.0);
    for (int k = 2; k <= n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        const double a1 = 2.0 * k * (k + alpha + beta) * (s - 2.0);
        const double a2 = (s - 1.0) * (s * (s - 2.0) * x + alpha * alpha - beta * beta);
        const double a3 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * s;
        const double p2 = (a2 * p1 - a3 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double jacobi_dp(int n, double alpha, double beta, double x) {
    if (n == 0) return 0.0;
    return 0.5 * (n + alpha + beta + 1.0) * jacobi_p(n - 1, alpha + 1.0, beta + 1.0, x);
}

double Rule1D::integrate(const std::function<double(double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
}

std::string Rule1D::id() const {
    std::ostringstream os;
    switch (kind) {
        case RuleKind::legendre: os << "legendre"; break;
        case RuleKind::lobatto: os << "lobatto"; break;
        case RuleKind::jacobi: os << "jacobi(" << alpha << "," << beta << ")"; break;
    }
    os << "[" << a << "," << b << "]x" << nodes.size();
    return os.str();
}

Rule1D gauss_jacobi(int n, double alpha, double beta) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
    if (!(alpha > -1.0) || !(beta > -1.0))
        throw std::invalid_argument("gauss_jacobi: alpha and beta must exceed -1");
    Rule1D r;
    r.kind = (alpha == 0.0 && beta == 0.0) ? RuleKind::legendre : RuleKind::jacobi;
    r.alpha = alpha;
    r.beta = beta;
    r.nodes = jacobi_roots(n, alpha, beta);
    const double c = std::pow(2.0, alpha + beta + 1.0) * jacobi_gamma_ratio(n, alpha, beta);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double x = r.nodes[i];
        const double dp = jacobi_dp(n, alpha, beta, x);
        r.weights[i] = c / ((1.0 - x) * (1.0 + x) * dp * dp);
    }
    return r;
}

Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    return gauss_jacobi(n, 0.0, 0.0);
}

Rule1D gauss_lobatto(int n) {
    if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be >= 2");
    Rule1D r;
    r.kind = RuleKind::lobatto;
    r.nodes.push_back(-1.0);
    if (n > 2) {
        auto inner = jacobi_roots(n - 2, 1.0, 1.0);
        r.nodes.insert(r.nodes.end(), inner.begin(), inner.end());
    }
    r.nodes.push_back(1.0);
    const double c = 2.0 / (n * (n - 1.0));
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        if (i == 0 || i == n - 1) {
            r.weights[i] = c;
        } else {
            const double p = jacobi_p(n - 1, 0.0, 0.0, r.nodes[i]);
            r.weights[i] = c / (p * p);
        }
    }
    return r;
}

Rule1D compose(const Rule1D& rule, double a, double b, int m) {
    if (!(b > a)) throw std::invalid_argument("compose: degenerate or reversed interval");
    if (m < 1) throw std::invalid_argument("compose: m must be >= 1");
    const double ra = rule.a, rb = rule.b;
    Rule1D out;
    out.kind = rule.kind;
    out.alpha = rule.alpha;
    out.beta = rule.beta;
    out.a = a;
    out.b = b;
    if (rule.kind == RuleKind::jacobi) {
        if (m != 1) throw std::invalid_argument("compose: jacobi rules cannot be composite");
        const double s = (b - a) / (rb - ra);
        const double ws = std::pow(s, 1.0 + rule.alpha + rule.beta);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            out.nodes.push_back(a + (rule.nodes[i] - ra) * s);
            out.weights.push_back(rule.weights[i] * ws);
        }
        check_rule(out);
        return out;
    }
    const double h = (b - a) / m;
    const double s = h / (rb - ra);
    const double ref_mid = 0.5 * (ra + rb);
    for (int k = 0; k < m; ++k) {
        const double mid = a + (k + 0.5) * h;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            double x = mid + (rule.nodes[i] - ref_mid) * s;
            if (rule.nodes[i] == ra) x = a + k * h;
            if (rule.nodes[i] == rb) x = (k == m - 1) ? b : a + (k + 1) * h;
            const double w = rule.weights[i] * s;
            if (!out.nodes.empty() && std::abs(x - out.nodes.back()) <= 1e-14 * (std::abs(b) + std::abs(a))) {
                out.weights.back() += w;
            } else {
                out.nodes.push_back(x);
                out.weights.push_back(w);
            }
        }
    }
    check_rule(out);
    return out;
}

Rule1D concatenate(const std::vector<Rule1D>& parts) {
    if (parts.empty()) throw std::invalid_argument("concatenate: no parts");
    Rule1D out;
    out.kind = parts.front().kind;
    out.a = parts.front().a;
    out.b = parts.back().b;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!out.nodes.empty() && std::abs(p.nodes[i] - out.nodes.back()) <= 1e-14 * (1.0 + std::abs(p.nodes[i]))) {
                out.weights.back() += p.weights[i];
            } else {
                out.nodes.push_back(p.nodes[i]);
                out.weights.push_back(p.weights[i]);
            }
        }
    }
    check_rule(out);
    return out;
}

double Rule2D::integrate(const std::function<double(double, double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i][0], points[i][1]);
    return s;
}

Rule2D tensor_product(const Rule1D& rx, const Rule1D& ry) {
    Rule2D r;
    r.provenance = Provenance::tensor;
    r.points.reserve(rx.size() * ry.size());
    r.weights.reserve(rx.size() * ry.size());
    for (std::size_t i = 0; i < rx.size(); ++i) {
        for (std::size_t j = 0; j < ry.size(); ++j) {
            r.points.push_back({rx.nodes[i], ry.nodes[j]});
            r.weights.push_back(rx.weights[i] * ry.weights[j]);
        }
    }
    return r;
}

Rule2D polar_disk(const Rule1D& r_rule, int n_theta, double radius) {
    if (n_theta < 4) throw std::invalid_argument("polar_disk: n_theta must be >= 4");
    Rule2D r;
    r.provenance = Provenance::polar_disk;
    const double dtheta = 2.0 * std::numbers::pi / n_theta;
    for (std::size_t i = 0; i < r_rule.size(); ++i) {
        const double rho = r_rule.nodes[i] * radius;
        const double w = r_rule.weights[i] * r_rule.nodes[i] * radius * radius * dtheta;
        if (rho == 0.0) continue;
        for (int k = 0; k < n_theta; ++k) {
            const double t = k * dtheta;
            r.points.push_back({rho * std::cos(t), rho * std::sin(t)});
            r.weights.push_back(w);
        }
    }
    return r;
}

Rule2D difference(const Rule2D& whole, const Rule2D& part) {
    Rule2D r;
    r.provenance = Provenance::difference;
    r.points = whole.points;
    r.weights = whole.weights;
    for (std::size_t i = 0; i < part.size(); ++i) {
        r.points.push_back(part.points[i]);
        r.weights.push_back(-part.weights[i]);
    }
    return r;
}

double BoundaryRule::length() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double BoundaryRule::integrate(const std::function<double(double, double)>& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i][0], points[i][1]);
    return s;
}

BoundaryRule circle_boundary(int n_theta, double radius) {
    if (n_theta < 4) throw std::invalid_argument("circle_boundary: n_theta must be >= 4");
    BoundaryRule r;
    const double dtheta = 2.0 * std::numbers::pi / n_theta;
    for (int k = 0; k < n_theta; ++k) {
        const double t = k * dtheta;
        r.points.push_back({radius * std::cos(t), radius * std::sin(t)});
        r.normals.push_back({std::cos(t), std::sin(t)});
        r.weights.push_back(radius * dtheta);
    }
    return r;
}

BoundaryRule rectangle_boundary(const Rule1D& edge, double x0, double x1, double y0, double y1) {
    BoundaryRule r;
    const Rule1D ex = compose(edge, x0, x1, 1);
    const Rule1D ey = compose(edge, y0, y1, 1);
    for (std::size_t i = 0; i < ex.size(); ++i) {
        r.points.push_back({ex.nodes[i], y0});
        r.normals.push_back({0.0, -1.0});
        r.weights.push_back(ex.weights[i]);
    }
    for (std::size_t i = 0; i < ey.size(); ++i) {
        r.points.push_back({x1, ey.nodes[i]});
        r.normals.push_back({1.0, 0.0});
        r.weights.push_back(ey.weights[i]);
    }
    for (std::size_t i = ex.size(); i-- > 0;) {
        r.points.push_back({ex.nodes[i], y1});
        r.normals.push_back({0.0, 1.0});
        r.weights.push_back(ex.weights[i]);
    }
    for (std::size_t i = ey.size(); i-- > 0;) {
        r.points.push_back({x0, ey.nodes[i]});
        r.normals.push_back({-1.0, 0.0});
        r.weights.push_back(ey.weights[i]);
    }
    return r;
}

}  // namespace nsg
