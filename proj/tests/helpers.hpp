#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nsg/diffnet.hpp"
#include "nsg/quadrature.hpp"

namespace testutil {

using namespace nsg;

inline ArchitectureSpec fnn(int p, std::vector<int> h) {
    ArchitectureSpec a;
    a.family = Family::fnn2d;
    a.output_dim = p;
    a.hidden_widths = std::move(h);
    return a;
}

inline ArchitectureSpec tnn(int p, std::vector<int> h) {
    auto a = fnn(p, std::move(h));
    a.family = Family::tnn;
    return a;
}

// Network that is identically one: only the output bias is set.
inline ParameterVector constant_one(const ArchitectureSpec& a) {
    ParameterVector th(param_count(a), 0.0);
    const auto lay = param_layout(a);
    int last = 0;
    for (const auto& e : lay) last = std::max(last, e.layer);
    for (const auto& e : lay)
        if (e.layer == last && e.kind == 'b')
            for (int i = 0; i < e.rows * e.cols; ++i) th[e.offset + i] = 1.0;
    return th;
}

// Gauss-Legendre on a mesh graded geometrically towards the point s inside
// [a, b]; integrates functions with an algebraic singularity at s.
inline Rule1D graded_rule(double a, double b, double s, int levels, int n, double ratio = 0.2) {
    std::vector<Rule1D> parts;
    const Rule1D g = gauss_legendre(n);
    auto side = [&](double far, bool left) {
        std::vector<double> cuts;  // distances from s
        double d = std::abs(far - s);
        for (int k = 0; k <= levels; ++k) {
            cuts.push_back(d);
            d *= ratio;
        }
        std::vector<Rule1D> seg;
        if (left) {
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) seg.push_back(compose(g, s - cuts[k], s - cuts[k + 1], 1));
            seg.push_back(compose(g, s - cuts.back(), s, 1));
        } else {
            seg.push_back(compose(g, s, s + cuts.back(), 1));
            for (std::size_t k = cuts.size() - 1; k > 0; --k) seg.push_back(compose(g, s + cuts[k], s + cuts[k - 1], 1));
        }
        return seg;
    };
    for (auto& r : side(a, true)) parts.push_back(r);
    for (auto& r : side(b, false)) parts.push_back(r);
    return concatenate(parts);
}

// Rule on [0, 1] from the substitution t = 1/2 +- tau^3 on both halves;
// removes |t - 1/2|^{-2/3} and |t - 1/2|^{4/3} singularities from the integrand.
inline Rule1D cubic_rule(int n, int m) {
    const Rule1D g = compose(gauss_legendre(n), 0, std::cbrt(0.5), m);
    Rule1D r;
    r.a = 0;
    r.b = 1;
    for (std::size_t i = g.size(); i-- > 0;) {
        const double t = g.nodes[i];
        r.nodes.push_back(0.5 - t * t * t);
        r.weights.push_back(3 * t * t * g.weights[i]);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double t = g.nodes[i];
        r.nodes.push_back(0.5 + t * t * t);
        r.weights.push_back(3 * t * t * g.weights[i]);
    }
    return r;
}

inline double integrate2(const Rule1D& rx, const Rule1D& ry, const std::function<double(double, double)>& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        double t = 0.0;
        for (std::size_t j = 0; j < ry.size(); ++j) t += ry.weights[j] * f(rx.nodes[i], ry.nodes[j]);
        s += rx.weights[i] * t;
    }
    return s;
}

}  // namespace testutil
