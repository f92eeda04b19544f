#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "nsg/harness.hpp"

using namespace nsg;
using namespace testutil;
using std::numbers::pi;
using json = nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("nsg_harness_" + name);
    std::filesystem::remove_all(p);
    return p;
}

Jet2 smooth(double x, double y) {
    const double e = std::exp(x / 3), c = std::cos(y / 2), s = std::sin(y / 2);
    return {e * c, e * c / 3, -0.5 * e * s, e * c / 9 - 0.25 * e * c};
}

}  // namespace

TEST_CASE("e_test formula against a brute-force 11 x 11 evaluation") {
    const auto spec = catalog("two_material", "1.1");
    auto fn = [&](int sub, double x, double y) {
        Jet2 j = spec.exact(sub, x, y);
        j.v = 1.01 * j.v + 0.003 * std::sin(7 * x + y);
        return j;
    };
    const GridSample s = sample_grid(spec, fn, 11);
    REQUIRE(s.pts.size() == 121);
    // independent loop: branch by x <= x*, same point arithmetic and order
    const double xs = 2.0 / 3.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            const double x = i / 10.0, y = j / 10.0;
            const int b = x <= xs ? 0 : 1;
            const double u = spec.exact(b, x, y).v, un = fn(b, x, y).v;
            num += (un - u) * (un - u);
            den += u * u;
        }
    CHECK(e_test_formula(s.u_n, s.u) == std::sqrt(num / den));
    // boundary points are part of the grid
    CHECK(s.pts.front()[0] == 0.0);
    CHECK(s.pts.back()[0] == 1.0);
    CHECK(s.pts.back()[1] == 1.0);
    CHECK_THROWS(e_test_formula({1.0}, {1.0, 2.0}));
    CHECK_THROWS(e_test_formula({1.0}, {0.0}));
}

TEST_CASE("error metrics: exact field gives zero, scaled field gives delta") {
    for (const char* test : {"1.1", "4.1"}) {
        auto spec = std::make_shared<const ProblemSpec>(catalog(problem_for_test(test), test));
        QuadConfig q;
        q.subintervals = 10;
        const auto dp = discretize(spec, q);
        auto exact = [&](int s, double x, double y) { return spec->exact(s, x, y); };
        const auto r0 = error_metrics(dp, region_fields(dp, exact), sample_grid(*spec, exact, 31));
        CHECK(r0.e_E == 0.0);
        CHECK(r0.e_L2 == 0.0);
        CHECK(r0.e_test == 0.0);
        const double d = 1e-3;
        auto scaled = [&](int s, double x, double y) {
            Jet2 j = spec->exact(s, x, y);
            return Jet2{(1 + d) * j.v, (1 + d) * j.gx, (1 + d) * j.gy, (1 + d) * j.lap};
        };
        const auto r1 = error_metrics(dp, region_fields(dp, scaled), sample_grid(*spec, scaled, 31));
        CHECK(r1.e_E == doctest::Approx(d).epsilon(1e-9));
        CHECK(r1.e_L2 == doctest::Approx(d).epsilon(1e-9));
        CHECK(r1.e_test == doctest::Approx(d).epsilon(1e-9));
        CHECK(r1.grid_n == 31);
        CHECK(r1.quadrature_ids == dp.rule_ids);
    }
}

TEST_CASE("largest pointwise error is located in its subdomain") {
    const auto spec = catalog("two_material", "2.1");
    // bump centred in Omega1 = (0, 2/3) x (0, 1)
    auto fn = [&](int s, double x, double y) {
        Jet2 j = spec.exact(s, x, y);
        j.v += 0.1 * std::exp(-50 * ((x - 0.3) * (x - 0.3) + (y - 0.5) * (y - 0.5)));
        return j;
    };
    auto sp = std::make_shared<const ProblemSpec>(spec);
    QuadConfig q;
    q.subintervals = 4;
    const auto dp = discretize(sp, q);
    const auto r = error_metrics(dp, region_fields(dp, fn), sample_grid(spec, fn, 301));
    CHECK(r.max_err_subdomain == 0);
    CHECK(r.max_err_at[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(r.max_err_at[1] == doctest::Approx(0.5).epsilon(1e-12));
    // interface points take the Omega1 branch
    const auto s = sample_grid(spec, fn, 301);
    int on = 0;
    for (std::size_t k = 0; k < s.pts.size(); ++k)
        if (s.pts[k][0] == 2.0 / 3.0) {
            ++on;
            CHECK(s.sub[k] == 0);
        }
    CHECK(on == 301);
}

TEST_CASE("per-subdomain norms add up to the global norm") {
    // two materials with equal coefficients and a globally smooth field
    {
        auto spec = std::make_shared<ProblemSpec>(catalog("two_material", "1.1", {{"alpha", {1.0, 1.0}}}));
        spec->exact = [](int, double x, double y) { return smooth(x, y); };
        QuadConfig q;
        q.subintervals = 20;
        const auto dp = discretize(spec, q);
        std::vector<Field> zero;
        for (const auto& r : dp.regions) zero.emplace_back(r.size());
        const NormParts p = subdomain_norms(dp, zero);
        const Rule1D r = compose(gauss_legendre(10), 0.0, 1.0, 20);
        const double a2 = integrate2(r, r, [](double x, double y) {
            const Jet2 j = smooth(x, y);
            return j.gx * j.gx + j.gy * j.gy;
        });
        const double l2 = integrate2(r, r, [](double x, double y) { return smooth(x, y).v * smooth(x, y).v; });
        CHECK(std::abs(p.exact_a2[0] + p.exact_a2[1] - a2) <= 1e-12 * a2);
        CHECK(std::abs(p.exact_l2[0] + p.exact_l2[1] - l2) <= 1e-12 * l2);
        CHECK(p.err_a2[0] == p.exact_a2[0]);
    }
    // disk plus (square minus disk) equals the square
    {
        auto spec = std::make_shared<ProblemSpec>(catalog("circle_inclusion", "", {{"alpha", {1.0, 1.0}}}));
        spec->exact = [](int, double x, double y) { return smooth(x, y); };
        QuadConfig q;
        q.subintervals = 20;
        q.points = 8;
        const auto dp = discretize(spec, q);
        std::vector<Field> zero;
        for (const auto& r : dp.regions) zero.emplace_back(r.size());
        const NormParts p = subdomain_norms(dp, zero);
        const Rule1D r = compose(gauss_lobatto(8), -2.0, 2.0, 20);
        const double a2 = integrate2(r, r, [](double x, double y) {
            const Jet2 j = smooth(x, y);
            return j.gx * j.gx + j.gy * j.gy;
        });
        CHECK(std::abs(p.exact_a2[0] + p.exact_a2[1] - a2) <= 1e-12 * a2);
    }
}

TEST_CASE("integration-error probe") {
    // polynomial data and field: every rule integrates them exactly
    auto spec = std::make_shared<ProblemSpec>(catalog("reaction_diffusion"));
    spec->source = [](int, double x, double y) { return 1.0 + x * y * y; };
    auto poly = [](int, double x, double y) {
        const double a = x * (1 - x), b = y * (1 - y);
        return Jet2{a * b, (1 - 2 * x) * b, a * (1 - 2 * y), -2 * b - 2 * a};
    };
    QuadConfig q;
    q.subintervals = 4;
    for (auto kind : {LossKind::ritz, LossKind::posterior}) {
        CHECK(integration_error_probe(spec, q, poly, kind, 1) == 0.0);
        CHECK(integration_error_probe(spec, q, poly, kind, 2) <= 1e-14);
    }
    CHECK_THROWS(integration_error_probe(spec, q, poly, LossKind::ritz, 0));

    // singular load: the naive Legendre plan is far less accurate than the Jacobi plan
    auto sing = std::make_shared<const ProblemSpec>(catalog("singular_laplace"));
    auto exact = [&](int s, double x, double y) { return sing->exact(s, x, y); };
    QuadConfig naive, jac;
    naive.kind = jac.kind = "legendre";
    naive.subintervals = jac.subintervals = 40;
    naive.plan = "naive";
    jac.plan = "jacobi";
    const double pn = integration_error_probe(sing, naive, exact, LossKind::ritz, 2);
    const double pj = integration_error_probe(sing, jac, exact, LossKind::ritz, 2);
    MESSAGE("probe naive " << pn << " jacobi " << pj);
    CHECK(pn > 1e3 * pj);
}

TEST_CASE("experiment configs: defaults, JSON round trip, schema version") {
    for (const auto& name : experiment_names())
        for (const char* scale : {"desk", "paper"}) {
            const auto c = default_config(problem_for_test(name), name, scale);
            CHECK(c.test == name);
            CHECK_NOTHROW(c.arch.validate());
            CHECK_NOTHROW(c.train.validate());
            const auto j = to_json(c);
            CHECK(to_json(config_from_json(j)) == j);
            CHECK(config_from_json(json::parse(j.dump())).train.adam_lr == c.train.adam_lr);
        }
    // partial documents keep the defaults of their experiment
    const auto c = config_from_json({{"test", "2.3"}, {"train", {{"adam_steps", 7}}}});
    CHECK(c.problem == "two_material");
    CHECK(c.train.adam_steps == 7);
    CHECK(c.train.lbfgs_steps == default_config("two_material", "2.3").train.lbfgs_steps);
    CHECK_THROWS(config_from_json({{"schema_version", 2}, {"test", "1.1"}}));
    CHECK_THROWS(config_from_json({{"problem", "nope"}}));
    CHECK_THROWS(config_from_json(json::object()));
    CHECK_THROWS(default_config("two_material", "1.1", "huge"));
}

namespace {

ExperimentConfig tiny(const std::string& test) {
    ExperimentConfig c = default_config(problem_for_test(test), test);
    c.arch.output_dim = 4;
    c.arch.hidden_widths = {8};
    c.quad.subintervals = 4;
    c.quad.radial_subintervals = 4;
    c.quad.n_theta = 32;
    c.train.adam_steps = 6;
    c.train.lbfgs_steps = 2;
    c.grid_n = 21;
    c.lift_arch.hidden_widths = {8};
    c.lift_fit.steps = 20;
    c.lift_subintervals = 4;
    return c;
}

}  // namespace

TEST_CASE("run_experiment writes its artifacts and re-runs bitwise from summary.json") {
    const auto dir = scratch("rd");
    ExperimentConfig c = tiny("rd");
    c.train.loss = LossKind::posterior;
    const auto res = run_experiment(c, dir.string());
    for (const char* f : {"history.csv", "summary.json", "grid.csv", "params.ckpt"}) CHECK(std::filesystem::exists(dir / f));

    const std::string hist = slurp(dir / "history.csv");
    std::istringstream hs(hist);
    std::string line;
    std::getline(hs, line);
    CHECK(line == "step,phase,loss_total,volume_residual,interface_jump,energy,load,ritz_gap,e_E,e_L2,err_a,eta,pinv");
    int rows = 0;
    while (std::getline(hs, line)) ++rows;
    CHECK(rows == c.train.adam_steps + c.train.lbfgs_steps + 1);

    std::ifstream gs(dir / "grid.csv");
    std::getline(gs, line);
    CHECK(line == "x1,x2,u_N,u_exact,abs_err");
    rows = 0;
    while (std::getline(gs, line)) ++rows;
    CHECK(rows == 21 * 21);

    const json s = json::parse(slurp(dir / "summary.json"));
    CHECK(s.at("schema_version") == 1);
    CHECK(s.at("seed") == c.train.seed);
    CHECK(s.at("errors").at("e_test").get<double>() == res.report.e_test);
    CHECK(s.at("errors").at("e_E").get<double>() == doctest::Approx(res.state.history.back().e_E).epsilon(1e-12));
    CHECK(s.contains("wall_seconds"));
    CHECK(s.at("integration_error_probe").at("factor") == 2);

    const Checkpoint ck = read_checkpoint((dir / "params.ckpt").string());
    CHECK(ck.params == res.state.theta);
    CHECK(json::parse(ck.extra_json).at("coefficients").size() == static_cast<std::size_t>(res.state.c.size()));

    // echoed config reproduces the history bitwise
    const auto dir2 = scratch("rd_again");
    run_experiment(config_from_json(s.at("config")), dir2.string());
    CHECK(slurp(dir2 / "history.csv") == hist);
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("run_experiment with a boundary network") {
    const auto dir = scratch("circle");
    const auto res = run_experiment(tiny("circle"), dir.string());
    REQUIRE(res.lift.has_value());
    CHECK(std::isfinite(res.report.e_test));
    const json s = json::parse(slurp(dir / "summary.json"));
    CHECK(s.at("boundary_fit").at("relative_error").get<double>() == res.lift->error);
    const Checkpoint ck = read_checkpoint((dir / "params.ckpt").string());
    CHECK(ck.archs.size() == 3);  // two terms and the boundary network
    CHECK(ck.params.size() == res.state.theta.size() + res.lift->params.size());
    std::filesystem::remove_all(dir);
}
