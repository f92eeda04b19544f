#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "nsg/training.hpp"

using namespace nsg;
using namespace testutil;
using std::numbers::pi;

namespace {

QuadConfig quad(int m, int n) {
    QuadConfig q;
    q.subintervals = m;
    q.points = n;
    return q;
}

// -Laplace u = 2 pi^2 sin(pi x) sin(pi y) with a unit factor, so a hand-built
// tensor network can carry the sine basis itself.
std::shared_ptr<ProblemSpec> sine_problem() {
    auto s = std::make_shared<ProblemSpec>();
    s->name = "sine_poisson";
    Geometry g;
    s->subdomains = {{"Omega", 1.0, g}};
    s->terms = {{"Omega", {0}, Factor::sep(Poly1{{1.0}}, Poly1{{1.0}})}};
    s->source = [](int, double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); };
    s->exact = [](int, double x, double y) {
        const double a = std::sin(pi * x), b = std::sin(pi * y);
        return Jet2{a * b, pi * std::cos(pi * x) * b, pi * a * std::cos(pi * y), -2 * pi * pi * a * b};
    };
    return s;
}

// Rank-2 tensor network with phi_1 = sin(pi x) sin(pi y), phi_2 = sin(2 pi x) sin(pi y).
ParameterVector sine_tnn(const ArchitectureSpec& a) {
    ParameterVector th(param_count(a), 0.0);
    for (const auto& e : param_layout(a)) {
        double* p = th.data() + e.offset;
        if (e.layer == 0 && e.kind == 'W') {  // 2 x 1: frequencies
            p[0] = pi;
            p[1] = e.subnet == 0 ? 2 * pi : pi;
        }
        if (e.layer == 1 && e.kind == 'W') {  // 2 x 2 column-major
            if (e.subnet == 0) {
                p[0] = 1;  // out0 <- h0
                p[3] = 1;  // out1 <- h1
            } else {
                p[0] = 1;  // both outputs <- h0
                p[1] = 1;
            }
        }
    }
    return th;
}

double rosenbrock(const ParameterVector& x, std::vector<double>* g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    if (g) *g = {-2 * a - 400 * x[0] * b, 200 * b};
    return a * a + 100 * b * b;
}

}  // namespace

TEST_CASE("adam: first step, zero gradient, two-step recursion") {
    ParameterVector th{0.0};
    AdamState st;
    adam_step(th, st, {1.0}, 1e-3);
    CHECK(th[0] == doctest::Approx(-1e-3 / (1 + 1e-8)).epsilon(1e-14));
    // hand-evaluated second step with g = -1:
    // m = 0.09 - 0.1 = -0.01, mhat = -0.01 / 0.19; v = 0.001999, vhat = 1
    adam_step(th, st, {-1.0}, 1e-3);
    const double step2 = -1e-3 * (-0.01 / 0.19) / (1.0 + 1e-8);
    CHECK(th[0] == doctest::Approx(-1e-3 / (1 + 1e-8) + step2).epsilon(1e-12));

    ParameterVector z{0.3, -0.2};
    AdamState s2;
    for (int k = 0; k < 5; ++k) adam_step(z, s2, {0.0, 0.0}, 1e-3);
    CHECK(z == ParameterVector{0.3, -0.2});
    CHECK_THROWS_WITH(adam_step(z, s2, {NAN, 0.0}, 1e-3), doctest::Contains("step 6"));
    CHECK_THROWS(adam_step(z, s2, {1.0}, 1e-3));
}

TEST_CASE("lbfgs: quadratic, Rosenbrock, zero gradient") {
    Objective quad = [](const ParameterVector& x, std::vector<double>* g) {
        double f = 0;
        for (double v : x) f += 0.5 * v * v;
        if (g) *g = x;
        return f;
    };
    ParameterVector x(6, 1.0);
    LbfgsState st;
    lbfgs_step(x, st, quad, 1.0);
    double n = 0;
    for (double v : x) n += v * v;
    CHECK(std::sqrt(n) <= 1e-12);

    ParameterVector r{-1.2, 1.0};
    LbfgsState sr;
    int it = 0;
    while (it < 200 && rosenbrock(r, nullptr) > 1e-8) {
        lbfgs_step(r, sr, rosenbrock, 1.0);
        ++it;
    }
    CHECK(rosenbrock(r, nullptr) <= 1e-8);
    CHECK(it <= 200);

    ParameterVector z{0.0, 0.0, 0.0};
    LbfgsState s0;
    const auto res = lbfgs_step(z, s0, quad, 1.0);
    CHECK_FALSE(res.moved);
    CHECK(z == ParameterVector{0.0, 0.0, 0.0});
}

TEST_CASE("lbfgs: failed line search falls back to a short gradient step") {
    // Armijo can never hold: the objective jumps up away from the start
    Objective bad = [](const ParameterVector& x, std::vector<double>* g) {
        if (g) *g = {1.0};
        return x[0] == 0.0 ? 0.0 : 1.0;
    };
    ParameterVector x{0.0};
    LbfgsState st;
    const auto res = lbfgs_step(x, st, bad, 0.1);
    CHECK(res.fallback);
    CHECK(x[0] == doctest::Approx(-0.1 * 1e-2));
    CHECK(st.fallbacks == 1);
}

TEST_CASE("schedule milestones") {
    const std::vector<double> ms{0.5, 0.75, 0.9};
    CHECK(scheduled_lr(1.0, 0, 100, ms, 0.5) == 1.0);
    CHECK(scheduled_lr(1.0, 50, 100, ms, 0.5) == 0.5);
    CHECK(scheduled_lr(1.0, 80, 100, ms, 0.5) == 0.25);
    CHECK(scheduled_lr(1.0, 95, 100, ms, 0.5) == 0.125);
}

TEST_CASE("run_algorithm3 with M = 0") {
    auto spec = std::make_shared<ProblemSpec>(catalog("two_material", "1.1"));
    const auto dp = discretize(spec, quad(4, 6));
    SubspaceModel m(dp, std::vector<ArchitectureSpec>(3, tnn(4, {8})));
    TrainConfig cfg;
    cfg.adam_steps = 0;
    cfg.lbfgs_steps = 0;
    cfg.loss = LossKind::posterior;
    const auto st = run_algorithm3(m, cfg);
    REQUIRE(st.history.size() == 1);
    CHECK(std::isfinite(st.history[0].loss.total));
    CHECK(st.c.size() == 12);
    TrainConfig bad = cfg;
    bad.galerkin_every = 0;
    CHECK_THROWS(run_algorithm3(m, bad));
}

TEST_CASE("analytic two-function network reproduces the Galerkin answer every step") {
    auto spec = sine_problem();
    const auto dp = discretize(spec, quad(8, 8));
    const auto a = tnn(2, {2});
    SubspaceModel m(dp, {a});
    const auto th = sine_tnn(a);
    for (LossKind kind : {LossKind::ritz, LossKind::posterior}) {
        TrainConfig cfg;
        cfg.adam_steps = 3;
        cfg.lbfgs_steps = 2;
        cfg.adam_lr = 1e-14;  // theta stays put up to rounding
        cfg.lbfgs_lr = 1e-14;
        cfg.loss = kind;
        std::vector<Vec> cs;
        run_algorithm3(m, cfg, &th, [&](const TrainState& s, const SubspaceModel&) {
            cs.push_back(s.c);
            return true;
        });
        REQUIRE(cs.size() == 6);
        for (const auto& c : cs) {
            CHECK(std::abs(c[0] - 1.0) <= 1e-10);
            CHECK(std::abs(c[1]) <= 1e-10);
        }
    }
}

TEST_CASE("short training run: history, identities, frozen-c gradient, determinism") {
    auto spec = std::make_shared<ProblemSpec>(catalog("reaction_diffusion"));
    const auto dp = discretize(spec, quad(6, 8));
    SubspaceModel m(dp, {tnn(6, {10, 10})});
    TrainConfig cfg;
    cfg.adam_steps = 30;
    cfg.lbfgs_steps = 5;
    cfg.adam_lr = 1e-2;
    cfg.loss = LossKind::ritz;
    cfg.seed = 3;
    const auto st = run_algorithm3(m, cfg);
    REQUIRE(st.history.size() == 36);
    CHECK(st.monotonicity_violations == 0);
    CHECK(st.history.back().phase == "lbfgs");
    double u2 = 0.0;
    for (const auto& r : dp.regions) u2 += r.w.dot(r.exact.gx.cwiseAbs2() + r.exact.gy.cwiseAbs2() + r.exact.v.cwiseAbs2());
    for (const auto& row : st.history) {
        // Ritz loss + 1/2 ||u||_a^2 = 1/2 ||u - u_p||_a^2
        CHECK(std::abs(row.ritz_gap - 0.5 * row.err_a * row.err_a) <= 1e-10 * u2);
        // energy error bounded by the estimator
        CHECK(row.err_a <= row.eta + 1e-8);
    }
    CHECK(st.history.back().ritz_gap < st.history.front().ritz_gap);

    // the training gradient is the gradient of the loss with c frozen
    auto obj = frozen_c_objective(m, LossKind::ritz, st.c);
    std::vector<double> g;
    obj(st.theta, &g);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> v(g.size());
        double nv = 0.0, dot = 0.0;
        for (auto& x : v) {
            x = n01(rng);
            nv += x * x;
        }
        for (std::size_t i = 0; i < v.size(); ++i) dot += g[i] * v[i] / std::sqrt(nv);
        auto at = [&](double h) {
            ParameterVector t = st.theta;
            for (std::size_t i = 0; i < v.size(); ++i) t[i] += h * v[i] / std::sqrt(nv);
            return obj(t, nullptr);
        };
        // near-stationary point: a larger step keeps the difference above
        // roundoff, Richardson removes the h^2 term
        const double h = 1e-3;
        const double d1 = (at(h) - at(-h)) / (2 * h), d2 = (at(h / 2) - at(-h / 2)) / h;
        const double fd = (4 * d2 - d1) / 3;
        double gn = 0.0;
        for (double x : g) gn += x * x;
        CHECK(std::abs(fd - dot) <= 1e-5 * std::max(std::abs(dot), 1e-3 * std::sqrt(gn)));
    }

    // identical config and seed: identical history
    const auto again = run_algorithm3(m, cfg);
    REQUIRE(again.history.size() == st.history.size());
    for (std::size_t i = 0; i < st.history.size(); ++i) {
        CHECK(again.history[i].loss.total == st.history[i].loss.total);
        CHECK(again.history[i].e_E == st.history[i].e_E);
    }
    CHECK(again.theta == st.theta);
}

TEST_CASE("boundary fit: zero data, constant data, circle data") {
    const BoundaryRule br = rectangle_boundary(compose(gauss_legendre(8), -1, 1, 16), -2, 2, -2, 2);
    const auto arch = fnn(1, {30, 30});
    BoundaryFitConfig cfg;
    cfg.steps = 10;
    const auto z = fit_boundary_network([](double, double) { return 0.0; }, arch, br, cfg);
    CHECK(z.history.front() == 0.0);
    CHECK(z.error == 0.0);

    cfg.steps = 2000;
    const auto one = fit_boundary_network([](double, double) { return 1.0; }, arch, br, cfg);
    CHECK(one.error <= 1e-6);

    cfg.steps = 5000;
    auto b = [](double x, double y) {
        const double t = std::abs(std::abs(y) - 2) < std::abs(std::abs(x) - 2) ? x : y;
        return std::sin(pi / 4 * (t * t + 3));
    };
    const auto fit = fit_boundary_network(b, arch, br, cfg);
    MESSAGE("circle boundary fit error " << fit.error);
    CHECK(fit.error <= 1e-3);
    CHECK(fit.history.size() == 5001);
    CHECK_THROWS(fit_boundary_network(b, tnn(1, {4}), br, cfg));
}

TEST_CASE("total gradient through the Galerkin solve matches finite differences") {
    auto spec = std::make_shared<ProblemSpec>(catalog("two_material", "1.2"));
    const auto dp = discretize(spec, quad(6, 8));
    SubspaceModel m(dp, std::vector<ArchitectureSpec>(spec->terms.size(), tnn(4, {8})));
    const auto th = m.init(2);
    for (auto kind : {LossKind::posterior, LossKind::ritz}) {
        auto obj = galerkin_objective(m, kind, 1e-14);
        std::vector<double> g;
        obj(th, &g);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n01;
        for (int k = 0; k < 3; ++k) {
            std::vector<double> v(g.size());
            double nv = 0.0;
            for (auto& x : v) {
                x = n01(rng);
                nv += x * x;
            }
            for (auto& x : v) x /= std::sqrt(nv);
            double dot = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) dot += g[i] * v[i];
            auto at = [&](double h) {
                ParameterVector t = th;
                for (std::size_t i = 0; i < v.size(); ++i) t[i] += h * v[i];
                return obj(t, nullptr);
            };
            const double h = 1e-5;
            const double d1 = (at(h) - at(-h)) / (2 * h), d2 = (at(h / 2) - at(-h / 2)) / h;
            CHECK(std::abs((4 * d2 - d1) / 3 - dot) <= 1e-4 * std::abs(dot));
        }
    }
    // the Ritz loss is stationary in c, so the total and frozen gradients agree
    m.forward(th);
    GalerkinSystem sys = assemble(m);
    solve(sys, 1e-14);
    const auto ev = evaluate_loss(LossKind::ritz, dp, m.fields(sys.c), true);
    const auto gf = m.backward(th, sys.c, ev.adjoint);
    const auto gt = total_gradient(m, th, sys, ev.adjoint, 1e-14);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < gf.size(); ++i) {
        diff = std::max(diff, std::abs(gf[i] - gt[i]));
        norm = std::max(norm, std::abs(gf[i]));
    }
    CHECK(diff <= 1e-6 * norm);
}
