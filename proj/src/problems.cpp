#include "nsg/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsg {

using std::numbers::pi;

Jet1 Poly1::operator()(double x) const {
    // Horner for the value and both derivatives
    Jet1 j;
    for (auto it = c.rbegin(); it != c.rend(); ++it) {
        j.d2 = j.d2 * x + 2 * j.d1;
        j.d1 = j.d1 * x + j.v;
        j.v = j.v * x + *it;
    }
    return j;
}

Poly1 Poly1::product_of_roots(std::vector<double> roots, double scale) {
    Poly1 p{{scale}};
    for (double r : roots) {
        std::vector<double> q(p.c.size() + 1, 0.0);
        for (std::size_t i = 0; i < p.c.size(); ++i) {
            q[i + 1] += p.c[i];
            q[i] -= r * p.c[i];
        }
        p.c = std::move(q);
    }
    return p;
}

Jet2 Factor::operator()(double x, double y) const {
    if (!separable) return general(x, y);
    const Jet1 a = fx(x), b = fy(y);
    return {a.v * b.v, a.d1 * b.v, a.v * b.d1, a.d2 * b.v + a.v * b.d2};
}

Factor Factor::sep(Poly1 fx, Poly1 fy) {
    Factor f;
    f.fx = std::move(fx);
    f.fy = std::move(fy);
    return f;
}

Factor Factor::gen(std::function<Jet2(double, double)> g) {
    Factor f;
    f.separable = false;
    f.general = std::move(g);
    return f;
}

Jet2 product(const Jet2& f, const Jet2& n) {
    return {f.v * n.v, f.gx * n.v + f.v * n.gx, f.gy * n.v + f.v * n.gy,
            f.lap * n.v + 2 * (f.gx * n.gx + f.gy * n.gy) + f.v * n.lap};
}

bool Geometry::contains(double x, double y) const {
    const bool in_rect = x >= x0 && x <= x1 && y >= y0 && y <= y1;
    const double r2 = x * x + y * y, R2 = radius * radius;
    switch (shape) {
        case Shape::rect: return in_rect;
        case Shape::disk: return r2 <= R2;
        case Shape::rect_minus_disk: return in_rect && r2 >= R2;
    }
    return false;
}

bool Term::supports(int sub) const {
    for (int s : support)
        if (s == sub) return true;
    return false;
}

int ProblemSpec::locate(double x, double y) const {
    for (std::size_t i = 0; i < subdomains.size(); ++i)
        if (subdomains[i].geom.contains(x, y)) return static_cast<int>(i);
    return -1;
}

std::array<double, 2> ProblemSpec::normal(int seg, double x, double y) const {
    const auto& s = interfaces.at(seg);
    switch (s.shape) {
        case InterfaceSegment::Shape::vline: return {1.0, 0.0};
        case InterfaceSegment::Shape::hline: return {0.0, 1.0};
        case InterfaceSegment::Shape::circle: {
            const double r = std::hypot(x, y);
            return {x / r, y / r};
        }
    }
    return {0.0, 0.0};
}

double ProblemSpec::flux_jump(int seg, double x, double y) const {
    if (!has_exact()) throw std::logic_error("flux_jump: problem has no exact solution");
    const auto& s = interfaces.at(seg);
    const auto n = normal(seg, x, y);
    const Jet2 a = exact(s.side_a, x, y), b = exact(s.side_b, x, y);
    return alpha(s.side_a) * (a.gx * n[0] + a.gy * n[1]) - alpha(s.side_b) * (b.gx * n[0] + b.gy * n[1]);
}

namespace {

using nlohmann::json;

Geometry rect(double x0, double x1, double y0, double y1) {
    Geometry g;
    g.x0 = x0;
    g.x1 = x1;
    g.y0 = y0;
    g.y1 = y1;
    return g;
}

// c sin(k1 pi x) sin(k2 pi y)
Jet2 sine_mode(double c, double k1, double k2, double x, double y) {
    const double a = k1 * pi, b = k2 * pi;
    const double sx = std::sin(a * x), cx = std::cos(a * x), sy = std::sin(b * y), cy = std::cos(b * y);
    return {c * sx * sy, c * a * cx * sy, c * b * sx * cy, -c * (a * a + b * b) * sx * sy};
}

Poly1 roots(std::vector<double> r) { return Poly1::product_of_roots(std::move(r)); }
// (x - a)(b - x): positive between a and b
Poly1 bump(double a, double b) { return Poly1::product_of_roots({a, b}, -1.0); }

json merged(json defaults, const json& overrides) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!defaults.contains(it.key())) throw std::invalid_argument("unknown problem parameter '" + it.key() + "'");
        defaults[it.key()] = it.value();
    }
    return defaults;
}

void check_alphas(const json& alpha) {
    for (double a : alpha)
        if (!(a > 0)) throw std::invalid_argument("diffusion coefficients must be positive");
}

json two_material_table(const std::string& test) {
    json d = {{"alpha", {4.0, 1.0}}, {"c", {1.0, 1.0}}, {"k", {{1.0, 2.0}, {4.0, 2.0}}}, {"xstar", 2.0 / 3.0}};
    if (test.empty() || test == "1.1" || test == "2.2") return d;
    if (test == "1.2") d["alpha"] = {4.0, 2.0};
    else if (test == "2.1") d["alpha"] = {4e-4, 1.0};
    else if (test == "2.3") d["alpha"] = {4000.0, 1.0};
    else if (test == "3.1") {
        d["alpha"] = {10.0, 2.0};
        d["k"] = {{1.0, 2.0}, {10.0, 2.0}};
        d["xstar"] = 2.0 / 9.0;
    } else
        throw std::invalid_argument("unknown test '" + test + "' for two_material");
    return d;
}

ProblemSpec make_two_material(const std::string& name, const std::string& test, const json& params) {
    const std::string t = test.empty() ? (name == "two_material_highfreq" ? "3.1" : "1.1") : test;
    if (name == "two_material_highfreq" && t != "3.1") throw std::invalid_argument("two_material_highfreq only has test 3.1");
    if (name == "two_material" && t == "3.1") throw std::invalid_argument("test 3.1 belongs to two_material_highfreq");
    const json p = merged(two_material_table(t), params);
    check_alphas(p["alpha"]);
    const double xs = p["xstar"];
    if (!(xs > 0 && xs < 1)) throw std::invalid_argument("xstar must lie in (0, 1)");

    ProblemSpec s;
    s.name = name;
    s.test = t;
    s.params = p;
    s.subdomains = {{"Omega1", p["alpha"][0], rect(0, xs, 0, 1)}, {"Omega2", p["alpha"][1], rect(xs, 1, 0, 1)}};
    InterfaceSegment g;
    g.shape = InterfaceSegment::Shape::vline;
    g.at = xs;
    s.interfaces = {g};
    s.terms = {{"Omega1", {0}, Factor::sep(bump(0, xs), bump(0, 1))},
               {"Omega2", {1}, Factor::sep(bump(xs, 1), bump(0, 1))},
               {"Omega", {0, 1}, Factor::sep(bump(0, 1), bump(0, 1))}};
    std::array<double, 2> c{p["c"][0], p["c"][1]};
    std::array<std::array<double, 2>, 2> k{{{p["k"][0][0], p["k"][0][1]}, {p["k"][1][0], p["k"][1][1]}}};
    std::array<double, 2> al{p["alpha"][0], p["alpha"][1]};
    s.exact = [c, k](int i, double x, double y) { return sine_mode(c[i], k[i][0], k[i][1], x, y); };
    s.source = [c, k, al](int i, double x, double y) { return -al[i] * sine_mode(c[i], k[i][0], k[i][1], x, y).lap; };
    return s;
}

json four_material_table(const std::string& test) {
    if (test.empty() || test == "4.1")
        return {{"alpha", {4.0, 1.0, 1.0, 2.0}},
                {"c", {1.0, 4.0, 4.0, 2.0}},
                {"k", {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}}};
    if (test == "4.2")
        return {{"alpha", {4.0, 1.0, 1.0, 10.0}},
                {"c", {2.0, 5.0, 2.0, 4.0}},
                {"k", {{3.0, 1.0}, {1.0, 2.0}, {1.0, 4.0}, {2.0, 2.0}}}};
    throw std::invalid_argument("unknown test '" + test + "' for four_material");
}

ProblemSpec make_four_material(const std::string& test, const json& params) {
    const std::string t = test.empty() ? "4.1" : test;
    const json p = merged(four_material_table(t), params);
    check_alphas(p["alpha"]);
    ProblemSpec s;
    s.name = "four_material";
    s.test = t;
    s.params = p;
    s.x0 = s.y0 = -1;
    s.subdomains = {{"Omega1", p["alpha"][0], rect(-1, 0, -1, 0)},
                    {"Omega2", p["alpha"][1], rect(0, 1, -1, 0)},
                    {"Omega3", p["alpha"][2], rect(-1, 0, 0, 1)},
                    {"Omega4", p["alpha"][3], rect(0, 1, 0, 1)}};
    using Sh = InterfaceSegment::Shape;
    s.interfaces = {{Sh::vline, 0, 1, 0.0, -1, 0, 1}, {Sh::vline, 2, 3, 0.0, 0, 1, 1},
                    {Sh::hline, 0, 2, 0.0, -1, 0, 1}, {Sh::hline, 1, 3, 0.0, 0, 1, 1}};
    const Poly1 L = bump(-1, 0), R = bump(0, 1), W = bump(-1, 1);
    s.terms = {{"Omega1", {0}, Factor::sep(L, L)},         {"Omega2", {1}, Factor::sep(R, L)},
               {"Omega3", {2}, Factor::sep(L, R)},         {"Omega4", {3}, Factor::sep(R, R)},
               {"Omega12", {0, 1}, Factor::sep(W, L)},     {"Omega13", {0, 2}, Factor::sep(L, W)},
               {"Omega24", {1, 3}, Factor::sep(R, W)},     {"Omega34", {2, 3}, Factor::sep(W, R)},
               {"Omega", {0, 1, 2, 3}, Factor::sep(W, W)}};
    std::array<double, 4> c{}, al{};
    std::array<std::array<double, 2>, 4> k{};
    for (int i = 0; i < 4; ++i) {
        c[i] = p["c"][i];
        al[i] = p["alpha"][i];
        k[i] = {p["k"][i][0], p["k"][i][1]};
    }
    s.exact = [c, k](int i, double x, double y) { return sine_mode(c[i], k[i][0], k[i][1], x, y); };
    s.source = [c, k, al](int i, double x, double y) { return -al[i] * sine_mode(c[i], k[i][0], k[i][1], x, y).lap; };
    return s;
}

// sin(omega (x^2 + y^2 - 1))
Jet2 radial_sine(double omega, double x, double y) {
    const double s = x * x + y * y - 1, sn = std::sin(omega * s), cs = std::cos(omega * s);
    const double r2 = x * x + y * y;
    return {sn, 2 * omega * x * cs, 2 * omega * y * cs, 4 * omega * cs - 4 * omega * omega * r2 * sn};
}

ProblemSpec make_circle(const std::string& test, const json& params) {
    if (!test.empty() && test != "circle") throw std::invalid_argument("unknown test '" + test + "' for circle_inclusion");
    const json p = merged({{"alpha", {1.0, 4.0}}}, params);
    check_alphas(p["alpha"]);
    ProblemSpec s;
    s.name = "circle_inclusion";
    s.test = "circle";
    s.params = p;
    s.x0 = s.y0 = -2;
    s.x1 = s.y1 = 2;
    Geometry disk;
    disk.shape = Geometry::Shape::disk;
    disk.radius = 1;
    Geometry outer = rect(-2, 2, -2, 2);
    outer.shape = Geometry::Shape::rect_minus_disk;
    outer.radius = 1;
    s.subdomains = {{"Omega1", p["alpha"][0], disk}, {"Omega2", p["alpha"][1], outer}};
    InterfaceSegment g;
    g.shape = InterfaceSegment::Shape::circle;
    g.radius = 1;
    s.interfaces = {g};
    s.terms = {{"Psi", {0, 1}, Factor::sep(bump(-2, 2), bump(-2, 2))},
               {"Psi1", {0}, Factor::gen([](double x, double y) { return Jet2{x * x + y * y - 1, 2 * x, 2 * y, 4.0}; })}};
    const std::array<double, 2> omega{pi, pi / 4};
    const std::array<double, 2> al{p["alpha"][0], p["alpha"][1]};
    s.exact = [omega](int i, double x, double y) { return radial_sine(omega[i], x, y); };
    s.source = [omega, al](int i, double x, double y) { return -al[i] * radial_sine(omega[i], x, y).lap; };
    s.boundary = [](double x, double y) {
        // on x2 = +-2 the data depends on x1, on x1 = +-2 on x2
        const double t = std::abs(std::abs(y) - 2) < std::abs(std::abs(x) - 2) ? x : y;
        return std::sin(pi / 4 * (t * t + 3));
    };
    return s;
}

// |t - 1/2|^{4/3} and its derivatives (second derivative singular at 1/2)
Jet1 singular_power(double t) {
    const double d = t - 0.5, a = std::abs(d);
    const double sg = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    return {std::pow(a, 4.0 / 3.0), 4.0 / 3.0 * sg * std::cbrt(a), a > 0 ? 4.0 / 9.0 * std::pow(a, -2.0 / 3.0) : INFINITY};
}

Jet2 singular_exact(double x, double y) {
    const Jet1 P = roots({0, 1})(x), Q = roots({0, 1})(y);  // x(x-1) and y(y-1)
    const Jet1 S = singular_power(x), T = singular_power(y);
    const double s = S.v + T.v;
    const double v = P.v * Q.v * s;
    const double gx = P.d1 * Q.v * s + P.v * Q.v * S.d1;
    const double gy = P.v * Q.d1 * s + P.v * Q.v * T.d1;
    const double lap = P.d2 * Q.v * s + 2 * P.d1 * Q.v * S.d1 + P.v * Q.v * S.d2 + P.v * Q.d2 * s +
                       2 * P.v * Q.d1 * T.d1 + P.v * Q.v * T.d2;
    return {v, gx, gy, lap};
}

double singular_source(double x, double y) {
    const double ax = std::abs(x - 0.5), ay = std::abs(y - 0.5);
    const double px = x * (x - 1), py = y * (y - 1);
    return -py * (std::pow(ax, -2.0 / 3.0) * (70.0 / 9.0 * px + 11.0 / 6.0) + 2 * std::pow(ay, 4.0 / 3.0)) -
           px * (std::pow(ay, -2.0 / 3.0) * (70.0 / 9.0 * py + 11.0 / 6.0) + 2 * std::pow(ax, 4.0 / 3.0));
}

ProblemSpec single_square(const std::string& name) {
    ProblemSpec s;
    s.name = name;
    s.subdomains = {{"Omega", 1.0, rect(0, 1, 0, 1)}};
    s.terms = {{"Omega", {0}, Factor::sep(bump(0, 1), bump(0, 1))}};
    return s;
}

ProblemSpec make_singular(const std::string& test, const json& params) {
    if (!test.empty() && test != "singular") throw std::invalid_argument("unknown test '" + test + "' for singular_laplace");
    merged(json::object(), params);
    ProblemSpec s = single_square("singular_laplace");
    s.test = "singular";
    s.params = json::object();
    s.singular_load = true;
    s.exact = [](int, double x, double y) { return singular_exact(x, y); };
    s.source = [](int, double x, double y) { return singular_source(x, y); };
    return s;
}

// sin(pi x) sin(pi y) exp(x y)
Jet2 rd_exact(double x, double y) {
    const Jet2 P = sine_mode(1, 1, 1, x, y);
    const double E = std::exp(x * y);
    const Jet2 e{E, E * y, E * x, E * (x * x + y * y)};
    return product(P, e);
}

ProblemSpec make_reaction_diffusion(const std::string& test, const json& params) {
    if (!test.empty() && test != "rd") throw std::invalid_argument("unknown test '" + test + "' for reaction_diffusion");
    const json p = merged({{"beta", 1.0}}, params);
    const double beta = p["beta"];
    if (!(beta > 0)) throw std::invalid_argument("reaction_diffusion needs beta > 0");
    ProblemSpec s = single_square("reaction_diffusion");
    s.test = "rd";
    s.params = p;
    s.beta = beta;
    s.exact = [](int, double x, double y) { return rd_exact(x, y); };
    s.source = [beta](int, double x, double y) {
        const Jet2 u = rd_exact(x, y);
        return -u.lap + beta * u.v;
    };
    return s;
}

}  // namespace

std::vector<CatalogEntry> problem_catalog() {
    return {
        {"singular_laplace", {"singular"}, "Poisson on (0,1)^2 with line singularities along x1 = 1/2 and x2 = 1/2",
         json::object()},
        {"two_material", {"1.1", "1.2", "2.1", "2.2", "2.3"}, "two materials split at x1 = xstar, sine exact solution",
         two_material_table("1.1")},
        {"two_material_highfreq", {"3.1"}, "two materials with a high-frequency right region", two_material_table("3.1")},
        {"four_material", {"4.1", "4.2"}, "four quadrant materials on (-1,1)^2, nine locally supported networks",
         four_material_table("4.1")},
        {"circle_inclusion", {"circle"}, "disk inclusion in (-2,2)^2 with nonzero Dirichlet data and a boundary network",
         {{"alpha", {1.0, 4.0}}}},
        {"reaction_diffusion", {"rd"}, "-Laplace u + beta u = f on (0,1)^2 with a smooth manufactured solution",
         {{"beta", 1.0}}},
    };
}

std::string problem_for_test(const std::string& test) {
    for (const auto& e : problem_catalog())
        for (const auto& t : e.tests)
            if (t == test) return e.name;
    throw std::invalid_argument("unknown test label '" + test + "'");
}

ProblemSpec catalog(const std::string& name, const std::string& test, const nlohmann::json& params) {
    if (name == "two_material" || name == "two_material_highfreq") return make_two_material(name, test, params);
    if (name == "four_material") return make_four_material(test, params);
    if (name == "circle_inclusion") return make_circle(test, params);
    if (name == "singular_laplace") return make_singular(test, params);
    if (name == "reaction_diffusion") return make_reaction_diffusion(test, params);
    throw std::invalid_argument("unknown problem '" + name + "'");
}

std::size_t TrialComposition::num_basis() const {
    std::size_t n = 0;
    for (const auto& a : archs) n += a.output_dim;
    return n;
}

std::size_t TrialComposition::offset(int term) const {
    std::size_t n = 0;
    for (int k = 0; k < term; ++k) n += archs[k].output_dim;
    return n;
}

Jets TrialComposition::evaluate(const Points& pts, int sub) const {
    const auto m = static_cast<Eigen::Index>(pts.size());
    Jets out(1, m, 2);
    for (std::size_t k = 0; k < spec->terms.size(); ++k) {
        const Term& t = spec->terms[k];
        if (!t.supports(sub)) continue;
        const Jets J = eval_basis(archs[k], params[k], pts);
        const std::size_t off = offset(static_cast<int>(k));
        for (Eigen::Index q = 0; q < m; ++q) {
            Jet2 n;
            for (Eigen::Index j = 0; j < J.rows(); ++j) {
                const double c = coeffs[off + j];
                n.v += c * J.v(j, q);
                n.gx += c * J.g[0](j, q);
                n.gy += c * J.g[1](j, q);
                n.lap += c * J.l(j, q);
            }
            const Jet2 u = product(t.factor(pts[q][0], pts[q][1]), n);
            out.v(0, q) += u.v;
            out.g[0](0, q) += u.gx;
            out.g[1](0, q) += u.gy;
            out.l(0, q) += u.lap;
        }
    }
    if (lift_arch) {
        const Jets b = eval_basis(*lift_arch, lift_params, pts);
        out.v += b.v;
        out.g[0] += b.g[0];
        out.g[1] += b.g[1];
        out.l += b.l;
    }
    return out;
}

TrialComposition compose_trial(std::shared_ptr<const ProblemSpec> spec, std::vector<ArchitectureSpec> archs,
                               std::vector<ParameterVector> params, std::vector<double> coeffs,
                               std::optional<ArchitectureSpec> lift_arch, ParameterVector lift_params) {
    if (archs.size() != spec->terms.size() || params.size() != archs.size())
        throw std::invalid_argument("compose_trial: " + spec->name + " needs " + std::to_string(spec->terms.size()) +
                                    " networks, got " + std::to_string(archs.size()));
    if (spec->has_lift() && !lift_arch) throw std::invalid_argument("compose_trial: " + spec->name + " needs a boundary network");
    if (!spec->has_lift() && lift_arch) throw std::invalid_argument("compose_trial: " + spec->name + " takes no boundary network");
    TrialComposition t;
    t.spec = std::move(spec);
    t.archs = std::move(archs);
    t.params = std::move(params);
    for (std::size_t k = 0; k < t.archs.size(); ++k) {
        t.archs[k].validate();
        if (t.params[k].size() != param_count(t.archs[k]))
            throw std::invalid_argument("compose_trial: parameter count mismatch for network " + std::to_string(k));
    }
    t.coeffs = coeffs.empty() ? std::vector<double>(t.num_basis(), 1.0) : std::move(coeffs);
    if (t.coeffs.size() != t.num_basis()) throw std::invalid_argument("compose_trial: coefficient count mismatch");
    if (lift_arch) {
        if (lift_arch->output_dim != 1 || lift_params.size() != param_count(*lift_arch))
            throw std::invalid_argument("compose_trial: boundary network must be scalar with matching parameters");
        t.lift_arch = lift_arch;
        t.lift_params = std::move(lift_params);
    }
    return t;
}

std::vector<WeightedGrid> singular_load_grids(const Rule1D& jac_left, const Rule1D& jac_right, const Rule1D& smooth) {
    auto is_jac = [](const Rule1D& r, double a, double b) {
        return r.kind == RuleKind::jacobi && std::abs(r.alpha - a) < 1e-12 && std::abs(r.beta - b) < 1e-12 &&
               r.a == -1.0 && r.b == 1.0;
    };
    if (!is_jac(jac_left, -2.0 / 3.0, 0.0)) throw std::invalid_argument("singular load: left rule must be Jacobi(-2/3, 0) on [-1,1]");
    if (!is_jac(jac_right, 0.0, -2.0 / 3.0)) throw std::invalid_argument("singular load: right rule must be Jacobi(0, -2/3) on [-1,1]");
    if (smooth.size() == 0 || smooth.a != 0.0 || smooth.b != 1.0 || smooth.kind == RuleKind::jacobi)
        throw std::invalid_argument("singular load: smooth rule must be a Legendre/Lobatto rule on [0,1]");

    const double s = std::pow(4.0, -1.0 / 3.0);
    // hat u_1 without the network factor: -x2(x2-1)(70/9 x1(x1-1) + 11/6)
    auto coef = [](double t, double o) { return -o * (o - 1) * (70.0 / 9.0 * t * (t - 1) + 11.0 / 6.0); };
    std::vector<double> sx, sw;
    for (std::size_t i = 0; i < smooth.size(); ++i) {
        sx.push_back(smooth.nodes[i]);
        sw.push_back(smooth.weights[i]);
    }
    std::vector<WeightedGrid> out;
    auto halves = [&](bool in_x) {
        for (int side = 0; side < 2; ++side) {
            const Rule1D& j = side == 0 ? jac_left : jac_right;
            WeightedGrid g;
            g.label = std::string(in_x ? "x1" : "x2") + (side == 0 ? "_left" : "_right");
            std::vector<double> js, jw;
            for (std::size_t i = 0; i < j.size(); ++i) {
                js.push_back(side == 0 ? (j.nodes[i] + 1) / 4 : (j.nodes[i] + 3) / 4);
                jw.push_back(s * j.weights[i]);
            }
            g.xs = in_x ? js : sx;
            g.ys = in_x ? sx : js;
            for (std::size_t a = 0; a < g.xs.size(); ++a)
                for (std::size_t b = 0; b < g.ys.size(); ++b) {
                    const double wa = in_x ? jw[a] : sw[a], wb = in_x ? sw[b] : jw[b];
                    g.w.push_back(wa * wb * (in_x ? coef(g.xs[a], g.ys[b]) : coef(g.ys[b], g.xs[a])));
                }
            out.push_back(std::move(g));
        }
    };
    halves(true);
    halves(false);
    WeightedGrid g;
    g.label = "smooth";
    g.xs = sx;
    g.ys = sx;
    for (std::size_t a = 0; a < sx.size(); ++a)
        for (std::size_t b = 0; b < sx.size(); ++b) {
            const double x = sx[a], y = sx[b];
            g.w.push_back(sw[a] * sw[b] *
                          (-2 * y * (y - 1) * std::pow(std::abs(y - 0.5), 4.0 / 3.0) -
                           2 * x * (x - 1) * std::pow(std::abs(x - 0.5), 4.0 / 3.0)));
        }
    out.push_back(std::move(g));
    return out;
}

double singular_load_value(const std::vector<WeightedGrid>& grids, const std::function<double(double, double)>& v) {
    double total = 0.0;
    for (const auto& g : grids) {
        std::size_t q = 0;
        for (double x : g.xs)
            for (double y : g.ys) total += g.w[q++] * v(x, y);
    }
    return total;
}

}  // namespace nsg
