#include "nsg/discretize.hpp"

#include <cmath>
#include <stdexcept>

namespace nsg {

Field& Field::operator+=(const Field& o) {
    v += o.v;
    gx += o.gx;
    gy += o.gy;
    l += o.l;
    return *this;
}

std::shared_ptr<Grid> Grid::make_tensor(std::vector<double> xs, std::vector<double> ys) {
    auto g = std::make_shared<Grid>();
    g->tensor = true;
    for (double x : xs)
        for (double y : ys) g->pts.push_back({x, y});
    g->xs = std::move(xs);
    g->ys = std::move(ys);
    return g;
}

std::shared_ptr<Grid> Grid::make_scattered(Points pts) {
    auto g = std::make_shared<Grid>();
    g->tensor = false;
    g->pts = std::move(pts);
    return g;
}

QuadConfig QuadConfig::refined(int factor) const {
    if (factor < 1) throw std::invalid_argument("refinement factor must be >= 1");
    QuadConfig q = *this;
    q.subintervals *= factor;
    q.jacobi_points *= factor;
    q.refined_subintervals *= factor;
    q.radial_subintervals *= factor;
    q.n_theta *= factor;
    return q;
}

Rule1D base_rule(const QuadConfig& q) {
    if (q.kind == "legendre") return gauss_legendre(q.points);
    if (q.kind == "lobatto") return gauss_lobatto(q.points);
    throw std::invalid_argument("quadrature kind must be legendre or lobatto, got '" + q.kind + "'");
}

namespace {

Vec outer(const std::vector<double>& a, const std::vector<double>& b) {
    Vec w(a.size() * b.size());
    Eigen::Index q = 0;
    for (double x : a)
        for (double y : b) w[q++] = x * y;
    return w;
}

std::vector<int> active_terms(const ProblemSpec& s, int sub) {
    std::vector<int> t;
    for (std::size_t k = 0; k < s.terms.size(); ++k)
        if (s.terms[k].supports(sub)) t.push_back(static_cast<int>(k));
    return t;
}

void fill_pointwise(const ProblemSpec& s, Region& r, bool with_source) {
    const auto& pts = r.grid->pts;
    const Eigen::Index m = r.size();
    if (with_source) {
        r.f.resize(m);
        for (Eigen::Index q = 0; q < m; ++q) r.f[q] = s.source(r.subdomain, pts[q][0], pts[q][1]);
        r.load = r.w.cwiseProduct(r.f);
    }
    if (s.has_exact()) {
        r.exact = Field(m);
        for (Eigen::Index q = 0; q < m; ++q) {
            const Jet2 e = s.exact(r.subdomain, pts[q][0], pts[q][1]);
            r.exact.v[q] = e.v;
            r.exact.gx[q] = e.gx;
            r.exact.gy[q] = e.gy;
            r.exact.l[q] = e.lap;
        }
    }
}

Region volume_region(const ProblemSpec& s, int sub, const Rule1D& rx, const Rule1D& ry, bool with_source) {
    Region r;
    r.name = s.subdomains[sub].name;
    r.subdomain = sub;
    r.alpha = s.alpha(sub);
    r.beta = s.beta;
    r.grid = Grid::make_tensor(rx.nodes, ry.nodes);
    r.wx = rx.weights;
    r.wy = ry.weights;
    r.w = outer(rx.weights, ry.weights);
    r.terms = active_terms(s, sub);
    fill_pointwise(s, r, with_source);
    return r;
}

// One-sided regions for interface piece `seg`, sharing one grid.
void interface_regions(const ProblemSpec& s, int seg, std::shared_ptr<const Grid> grid, const std::vector<double>& wx,
                       const std::vector<double>& wy, const Vec& w, std::vector<Region>& out) {
    const auto& is = s.interfaces[seg];
    const int first = static_cast<int>(out.size());
    for (int side = 0; side < 2; ++side) {
        Region r;
        r.role = RegionRole::interface;
        r.subdomain = side == 0 ? is.side_a : is.side_b;
        r.name = "Gamma" + std::to_string(seg) + (side == 0 ? "A" : "B");
        r.alpha = s.alpha(r.subdomain);
        r.beta = s.beta;
        r.grid = grid;
        r.wx = wx;
        r.wy = wy;
        r.w = w;
        r.segment = seg;
        r.side_a = side == 0;
        r.partner = first + (1 - side);
        r.terms = active_terms(s, r.subdomain);
        const Eigen::Index m = grid->size();
        r.nx.resize(m);
        r.ny.resize(m);
        r.g = Vec::Zero(m);
        for (Eigen::Index q = 0; q < m; ++q) {
            const auto n = s.normal(seg, grid->pts[q][0], grid->pts[q][1]);
            r.nx[q] = n[0];
            r.ny[q] = n[1];
            if (s.has_exact()) r.g[q] = s.flux_jump(seg, grid->pts[q][0], grid->pts[q][1]);
        }
        fill_pointwise(s, r, false);
        out.push_back(std::move(r));
    }
}

void singular_regions(const ProblemSpec& s, const QuadConfig& q, DiscreteProblem& dp) {
    const Rule1D base = base_rule(q);
    Rule1D r1;
    if (q.plan == "refined") {
        if (!(q.refined_lo > 0 && q.refined_lo < 0.5 && q.refined_hi > 0.5 && q.refined_hi < 1))
            throw std::invalid_argument("refined window must contain 1/2 inside (0,1)");
        const int side = std::max(1, q.subintervals / 2);
        r1 = concatenate({compose(base, 0, q.refined_lo, side), compose(base, q.refined_lo, q.refined_hi, q.refined_subintervals),
                          compose(base, q.refined_hi, 1, side)});
    } else if (q.plan == "naive" || q.plan == "jacobi") {
        r1 = compose(base, 0, 1, q.subintervals);
    } else {
        throw std::invalid_argument("singular plan must be naive, refined or jacobi, got '" + q.plan + "'");
    }
    const bool pointwise = q.plan != "jacobi";
    if (pointwise)
        for (double x : r1.nodes)
            if (x == 0.5) throw std::invalid_argument("quadrature node on the singular line x = 1/2; use an even subinterval count or Gauss-Legendre points");
    Region vol = volume_region(s, 0, r1, r1, pointwise);
    dp.rule_ids.push_back(r1.id());
    if (!pointwise) {
        const Rule1D jl = gauss_jacobi(q.jacobi_points, -2.0 / 3.0, 0.0);
        const Rule1D jr = gauss_jacobi(q.jacobi_points, 0.0, -2.0 / 3.0);
        dp.rule_ids.push_back(jl.id());
        dp.rule_ids.push_back(jr.id());
        auto grids = singular_load_grids(jl, jr, r1);
        // the |t-1/2|^{4/3} parts live on the volume grid
        vol.load = Eigen::Map<const Vec>(grids.back().w.data(), static_cast<Eigen::Index>(grids.back().w.size()));
        grids.pop_back();
        dp.regions.push_back(std::move(vol));
        for (auto& g : grids) {
            Region r;
            r.name = "load_" + g.label;
            r.role = RegionRole::load;
            r.grid = Grid::make_tensor(g.xs, g.ys);
            r.load = Eigen::Map<const Vec>(g.w.data(), static_cast<Eigen::Index>(g.w.size()));
            r.terms = active_terms(s, 0);
            dp.regions.push_back(std::move(r));
        }
        return;
    }
    dp.regions.push_back(std::move(vol));
}

void circle_regions(const ProblemSpec& s, const QuadConfig& q, DiscreteProblem& dp) {
    const Rule1D base = base_rule(q);
    const Rule1D rr = compose(q.kind == "lobatto" ? gauss_lobatto(q.radial_points) : gauss_legendre(q.radial_points), 0, 1,
                              q.radial_subintervals);
    const Rule2D disk = polar_disk(rr, q.n_theta, s.interfaces[0].radius);
    auto dgrid = Grid::make_scattered(disk.points);
    const Vec dw = Eigen::Map<const Vec>(disk.weights.data(), static_cast<Eigen::Index>(disk.weights.size()));
    dp.rule_ids.push_back("polar_disk(" + rr.id() + ",ntheta=" + std::to_string(q.n_theta) + ")");

    Region inner;
    inner.name = "disk";
    inner.subdomain = 0;
    inner.alpha = s.alpha(0);
    inner.beta = s.beta;
    inner.grid = dgrid;
    inner.w = dw;
    inner.terms = active_terms(s, 0);
    fill_pointwise(s, inner, true);
    dp.regions.push_back(std::move(inner));

    const Rule1D r1 = compose(base, s.x0, s.x1, q.subintervals);
    dp.rule_ids.push_back(r1.id());
    dp.regions.push_back(volume_region(s, 1, r1, compose(base, s.y0, s.y1, q.subintervals), true));
    dp.regions.back().name = "square";

    Region minus;
    minus.name = "square_minus_disk";
    minus.subdomain = 1;
    minus.alpha = s.alpha(1);
    minus.beta = s.beta;
    minus.grid = dgrid;
    minus.w = -dw;
    minus.terms = active_terms(s, 1);
    fill_pointwise(s, minus, true);
    dp.regions.push_back(std::move(minus));

    const BoundaryRule cb = circle_boundary(q.n_theta, s.interfaces[0].radius);
    dp.rule_ids.push_back("circle(ntheta=" + std::to_string(q.n_theta) + ")");
    const Vec cw = Eigen::Map<const Vec>(cb.weights.data(), static_cast<Eigen::Index>(cb.weights.size()));
    interface_regions(s, 0, Grid::make_scattered(cb.points), {}, {}, cw, dp.regions);
}

}  // namespace

DiscreteProblem discretize(std::shared_ptr<const ProblemSpec> spec, const QuadConfig& q) {
    if (q.points < 1 || q.subintervals < 1) throw std::invalid_argument("quadrature counts must be positive");
    DiscreteProblem dp;
    dp.spec = spec;
    dp.quad = q;
    const ProblemSpec& s = *spec;
    if (s.singular_load) {
        singular_regions(s, q, dp);
        return dp;
    }
    if (s.name == "circle_inclusion") {
        circle_regions(s, q, dp);
        return dp;
    }
    const Rule1D base = base_rule(q);
    for (std::size_t i = 0; i < s.subdomains.size(); ++i) {
        const auto& g = s.subdomains[i].geom;
        if (g.shape != Geometry::Shape::rect) throw std::invalid_argument("discretize: unsupported subdomain shape");
        const Rule1D rx = compose(base, g.x0, g.x1, q.subintervals), ry = compose(base, g.y0, g.y1, q.subintervals);
        if (i == 0) dp.rule_ids.push_back(rx.id());
        dp.regions.push_back(volume_region(s, static_cast<int>(i), rx, ry, true));
    }
    for (std::size_t k = 0; k < s.interfaces.size(); ++k) {
        const auto& is = s.interfaces[k];
        const Rule1D rt = compose(base, is.t0, is.t1, q.subintervals);
        std::shared_ptr<Grid> grid;
        std::vector<double> wx, wy;
        if (is.shape == InterfaceSegment::Shape::vline) {
            grid = Grid::make_tensor({is.at}, rt.nodes);
            wx = {1.0};
            wy = rt.weights;
        } else if (is.shape == InterfaceSegment::Shape::hline) {
            grid = Grid::make_tensor(rt.nodes, {is.at});
            wx = rt.weights;
            wy = {1.0};
        } else {
            throw std::invalid_argument("discretize: circular interface outside the circle problem");
        }
        interface_regions(s, static_cast<int>(k), grid, wx, wy, outer(wx, wy), dp.regions);
    }
    return dp;
}

void attach_lift(DiscreteProblem& dp, const ArchitectureSpec& arch, const ParameterVector& params) {
    for (auto& r : dp.regions) {
        const Jets b = eval_basis(arch, params, r.grid->pts);
        if (b.rows() != 1) throw std::invalid_argument("attach_lift: boundary network must be scalar");
        r.lift.v = b.v.row(0).transpose();
        r.lift.gx = b.g[0].row(0).transpose();
        r.lift.gy = b.g[1].row(0).transpose();
        r.lift.l = b.l.row(0).transpose();
    }
}

std::vector<int> assign_subdomains(const ProblemSpec& spec, const Points& pts, double tol) {
    std::vector<int> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        for (std::size_t k = 0; k < spec.interfaces.size(); ++k) {
            const auto& is = spec.interfaces[k];
            double d = 0.0;
            switch (is.shape) {
                case InterfaceSegment::Shape::vline:
                    d = (p[1] >= is.t0 && p[1] <= is.t1) ? std::abs(p[0] - is.at) : INFINITY;
                    break;
                case InterfaceSegment::Shape::hline:
                    d = (p[0] >= is.t0 && p[0] <= is.t1) ? std::abs(p[1] - is.at) : INFINITY;
                    break;
                case InterfaceSegment::Shape::circle: d = std::abs(std::hypot(p[0], p[1]) - is.radius); break;
            }
            if (d <= tol)
                throw std::invalid_argument("quadrature point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                                            ") lies on an interface; its coefficient is ambiguous");
        }
        const int s = spec.locate(p[0], p[1]);
        if (s < 0) throw std::invalid_argument("quadrature point outside the domain");
        out.push_back(s);
    }
    return out;
}

}  // namespace nsg
