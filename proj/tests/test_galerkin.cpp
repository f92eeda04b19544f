#include <cmath>
#include <numbers>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "nsg/galerkin.hpp"

using namespace nsg;
using namespace testutil;
using std::numbers::pi;

namespace {

// Unit square, alpha = 1, beta as given, source f, one volume region.
DiscreteProblem square_problem(double beta, const std::function<double(double, double)>& f, int m = 10) {
    auto spec = std::make_shared<ProblemSpec>(catalog("reaction_diffusion"));
    DiscreteProblem dp;
    dp.spec = spec;
    const Rule1D r = compose(gauss_legendre(8), 0, 1, m);
    Region reg;
    reg.name = "square";
    reg.alpha = 1.0;
    reg.beta = beta;
    reg.grid = Grid::make_tensor(r.nodes, r.nodes);
    reg.wx = r.weights;
    reg.wy = r.weights;
    reg.w.resize(reg.size());
    reg.f.resize(reg.size());
    Eigen::Index q = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r.size(); ++j, ++q) {
            reg.w[q] = r.weights[i] * r.weights[j];
            reg.f[q] = f(r.nodes[i], r.nodes[j]);
        }
    reg.load = reg.w.cwiseProduct(reg.f);
    dp.regions.push_back(std::move(reg));
    return dp;
}

// Dense basis sin(m pi x) sin(n pi y) for the listed (m, n), scaled by s.
RegionBasis sine_basis(const Region& reg, const std::vector<std::array<int, 2>>& modes, double s = 1.0) {
    RegionBasis b;
    b.P = static_cast<int>(modes.size());
    for (int i = 0; i < b.P; ++i) b.rows.push_back(i);
    const auto& pts = reg.grid->pts;
    b.D = Jets(b.P, reg.size(), 2);
    for (int i = 0; i < b.P; ++i) {
        const double a = modes[i][0] * pi, c = modes[i][1] * pi;
        for (Eigen::Index q = 0; q < reg.size(); ++q) {
            const double x = pts[q][0], y = pts[q][1];
            b.D.v(i, q) = s * std::sin(a * x) * std::sin(c * y);
            b.D.g[0](i, q) = s * a * std::cos(a * x) * std::sin(c * y);
            b.D.g[1](i, q) = s * c * std::sin(a * x) * std::cos(c * y);
            b.D.l(i, q) = -s * (a * a + c * c) * std::sin(a * x) * std::sin(c * y);
        }
    }
    return b;
}

double poisson_f(double x, double y) { return 2 * pi * pi * std::sin(pi * x) * std::sin(pi * y); }

}  // namespace

TEST_CASE("sine basis: analytic stiffness, load and exact recovery") {
    const auto dp = square_problem(0.0, poisson_f);
    const std::vector<RegionBasis> bases{sine_basis(dp.regions[0], {{1, 1}, {2, 1}})};
    auto sys = assemble(dp, bases, 2);
    CHECK(sys.A(0, 0) == doctest::Approx(pi * pi * 2 / 4).epsilon(1e-13));
    CHECK(sys.A(1, 1) == doctest::Approx(pi * pi * 5 / 4).epsilon(1e-13));
    CHECK(std::abs(sys.A(0, 1)) <= 1e-13);
    CHECK(sys.B[0] == doctest::Approx(pi * pi / 2).epsilon(1e-13));
    CHECK(std::abs(sys.B[1]) <= 1e-13);
    solve(sys);
    CHECK(std::abs(sys.c[0] - 1.0) <= 1e-10);
    CHECK(std::abs(sys.c[1]) <= 1e-10);
    CHECK(residual_inf(sys) <= 1e-10);
    CHECK_FALSE(sys.pseudo_inverse);
    // bitwise symmetric
    CHECK((sys.A - sys.A.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity system returns B") {
    GalerkinSystem sys;
    sys.A = Mat::Identity(5, 5);
    sys.B = Vec::LinSpaced(5, -1, 3);
    solve(sys);
    CHECK((sys.c - sys.B).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("beta-only probe with an orthonormalized basis gives the identity") {
    const auto dp = square_problem(1.0, poisson_f);
    const auto& reg = dp.regions[0];
    RegionBasis b = sine_basis(reg, {{1, 1}, {1, 2}, {2, 3}});
    // orthonormalize the values in the discrete L2 product; with alpha = 0 only values matter
    const Mat G = b.D.v * reg.w.asDiagonal() * b.D.v.transpose();
    const Mat L = Eigen::LLT<Mat>(G).matrixL();
    const Mat Linv = L.inverse();
    b.D.v = Linv * b.D.v;
    b.D.g[0] = Linv * b.D.g[0];
    b.D.g[1] = Linv * b.D.g[1];
    b.D.l = Linv * b.D.l;
    auto dp0 = dp;
    dp0.regions[0].alpha = 0.0;
    const auto sys = assemble(dp0, {b}, 3);
    CHECK((sys.A - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("rank-deficient system: minimum-norm least squares") {
    // duplicated basis function: rows 2 and 3 of V are equal
    Mat V(4, 6);
    V << 1, 2, 0, 1, 0, 3,  //
        0, 1, 1, 2, 1, 0,   //
        2, 0, 1, 0, 1, 1,   //
        2, 0, 1, 0, 1, 1;
    GalerkinSystem sys;
    sys.A = V * V.transpose();
    sys.B = V * Vec::LinSpaced(6, 0.5, 2.0);
    solve(sys);
    CHECK(sys.pseudo_inverse);
    CHECK(sys.truncated == 1);
    CHECK((sys.A * sys.c - sys.B).norm() <= 1e-10);
    const Vec ref = sys.A.completeOrthogonalDecomposition().solve(sys.B);  // minimum-norm oracle
    CHECK((sys.c - ref).norm() <= 1e-10 * ref.norm());
    CHECK(std::abs(sys.c[2] - sys.c[3]) <= 1e-12);

    GalerkinSystem zero;
    zero.A = Mat::Zero(3, 3);
    zero.B = Vec::Ones(3);
    CHECK_THROWS_AS(solve(zero), DegenerateSubspace);
}

TEST_CASE("scale equivariance") {
    const auto dp = square_problem(0.5, [](double x, double y) { return std::exp(x) * (1 + y * y); });
    const std::vector<std::array<int, 2>> modes{{1, 1}, {2, 1}, {1, 3}, {2, 2}};
    const double s = 3.7;
    auto s1 = assemble(dp, {sine_basis(dp.regions[0], modes)}, 4);
    auto s2 = assemble(dp, {sine_basis(dp.regions[0], modes, s)}, 4);
    CHECK((s2.A - s * s * s1.A).cwiseAbs().maxCoeff() <= 1e-12 * s2.A.cwiseAbs().maxCoeff());
    CHECK((s2.B - s * s1.B).cwiseAbs().maxCoeff() <= 1e-12 * s2.B.cwiseAbs().maxCoeff());
    solve(s1);
    solve(s2);
    CHECK((s2.c - s1.c / s).cwiseAbs().maxCoeff() <= 1e-12 * s1.c.cwiseAbs().maxCoeff());
    const Field u1 = sine_basis(dp.regions[0], modes).synthesize(*dp.regions[0].grid, s1.c);
    const Field u2 = sine_basis(dp.regions[0], modes, s).synthesize(*dp.regions[0].grid, s2.c);
    CHECK((u1.v - u2.v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("best approximation in the energy norm") {
    // u = sin(pi x) sin(pi y) exp(xy) with beta = 1; basis of sine modes
    const auto spec = catalog("reaction_diffusion");
    const auto dp = square_problem(1.0, [&](double x, double y) { return spec.source(0, x, y); }, 12);
    const auto& reg = dp.regions[0];
    std::vector<std::array<int, 2>> modes;
    for (int m = 1; m <= 3; ++m)
        for (int n = 1; n <= 3; ++n) modes.push_back({m, n});
    const auto b = sine_basis(reg, modes);
    auto sys = assemble(dp, {b}, static_cast<int>(modes.size()));
    solve(sys);
    auto energy_err = [&](const Vec& d) {
        const Field u = b.synthesize(*reg.grid, d);
        double e = 0.0;
        for (Eigen::Index q = 0; q < reg.size(); ++q) {
            const Jet2 x = spec.exact(0, reg.grid->pts[q][0], reg.grid->pts[q][1]);
            const double dv = x.v - u.v[q], dx = x.gx - u.gx[q], dy = x.gy - u.gy[q];
            e += reg.w[q] * (dx * dx + dy * dy + dv * dv);
        }
        return e;
    };
    const double best = energy_err(sys.c);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    for (int k = 0; k < 20; ++k) {
        Vec d = sys.c;
        for (Eigen::Index i = 0; i < d.size(); ++i) d[i] += 0.05 * n01(rng);
        CHECK(best <= energy_err(d));
        // Galerkin orthogonality makes the gap exactly the energy of the perturbation
        CHECK(ritz_quadratic(sys, sys.c) <= ritz_quadratic(sys, d));
    }
    CHECK(residual_inf(sys) <= 1e-10 * (sys.A.norm() * sys.c.norm() + sys.B.norm()));
}

TEST_CASE("separable and dense evaluation of a tensor network agree") {
    QuadConfig q;
    q.subintervals = 3;
    q.points = 5;
    auto spec = std::make_shared<ProblemSpec>(catalog("two_material", "1.2"));
    const auto dp = discretize(spec, q);
    std::vector<ArchitectureSpec> archs(3, tnn(3, {6, 6}));
    SubspaceModel ms(dp, archs);
    // the same problem with every grid flagged scattered forces the dense path
    auto dp2 = dp;
    for (auto& r : dp2.regions) {
        auto g = std::make_shared<Grid>(*r.grid);
        g->tensor = false;
        r.grid = g;
    }
    SubspaceModel md(dp2, archs);
    const auto th = ms.init(5);
    ms.forward(th);
    md.forward(th);
    REQUIRE(ms.basis(0).separable);
    REQUIRE_FALSE(md.basis(0).separable);
    auto a = assemble(ms), b = assemble(md);
    CHECK((a.A - b.A).cwiseAbs().maxCoeff() <= 1e-12 * a.A.cwiseAbs().maxCoeff());
    CHECK((a.B - b.B).cwiseAbs().maxCoeff() <= 1e-12 * a.B.cwiseAbs().maxCoeff());
    const Vec c = Vec::LinSpaced(ms.num_basis(), -1, 1);
    const auto fa = ms.fields(c), fb = md.fields(c);
    for (std::size_t r = 0; r < fa.size(); ++r) {
        CHECK((fa[r].v - fb[r].v).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((fa[r].l - fb[r].l).cwiseAbs().maxCoeff() <= 1e-10);
    }
    CHECK_THROWS(SubspaceModel(dp, std::vector<ArchitectureSpec>(2, tnn(3, {6}))));
}

TEST_CASE("system dump") {
    GalerkinSystem sys;
    sys.A = Mat::Identity(2, 2);
    sys.B = Vec::Ones(2);
    solve(sys);
    const std::string path = "galerkin_dump_test.csv";
    dump_system(path, sys);
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "kind,i,j,value");
    int lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    CHECK(lines == 4 + 2 + 2 + 2);
    std::remove(path.c_str());
}
