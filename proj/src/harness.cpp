#include "nsg/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace nsg {

using json = nlohmann::json;

NormParts subdomain_norms(const DiscreteProblem& dp, const std::vector<Field>& u) {
    if (u.size() != dp.regions.size()) throw std::invalid_argument("subdomain_norms: one field per region expected");
    const std::size_t ns = dp.spec->subdomains.size();
    NormParts n;
    n.err_a2.assign(ns, 0.0);
    n.exact_a2.assign(ns, 0.0);
    n.err_l2.assign(ns, 0.0);
    n.exact_l2.assign(ns, 0.0);
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& R = dp.regions[r];
        if (R.role != RegionRole::volume) continue;
        const auto s = static_cast<std::size_t>(R.subdomain);
        const Field& e = R.exact;
        const Vec dv = e.v - u[r].v, dx = e.gx - u[r].gx, dy = e.gy - u[r].gy;
        n.err_a2[s] += R.w.dot(R.alpha * (dx.cwiseAbs2() + dy.cwiseAbs2()) + R.beta * dv.cwiseAbs2());
        n.err_l2[s] += R.w.dot(dv.cwiseAbs2());
        n.exact_a2[s] += R.w.dot(R.alpha * (e.gx.cwiseAbs2() + e.gy.cwiseAbs2()) + R.beta * e.v.cwiseAbs2());
        n.exact_l2[s] += R.w.dot(e.v.cwiseAbs2());
    }
    return n;
}

double e_test_formula(const std::vector<double>& u_n, const std::vector<double>& u) {
    if (u_n.size() != u.size()) throw std::invalid_argument("e_test: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num += (u_n[i] - u[i]) * (u_n[i] - u[i]);
        den += u[i] * u[i];
    }
    if (!(den > 0)) throw std::invalid_argument("e_test: exact solution vanishes on the test grid");
    return std::sqrt(num / den);
}

Points test_grid(const ProblemSpec& spec, int n) {
    if (n < 2) throw std::invalid_argument("test grid needs n >= 2");
    Points pts;
    pts.reserve(static_cast<std::size_t>(n) * n);
    // (x1 - x0) * i / (n - 1) rather than i * h: grid lines that should meet an
    // interface (x = 2/3 at n = 301) then hit it exactly
    const double lx = spec.x1 - spec.x0, ly = spec.y1 - spec.y0;
    for (int i = 0; i < n; ++i) {
        const double x = i == n - 1 ? spec.x1 : spec.x0 + lx * i / (n - 1);
        for (int j = 0; j < n; ++j) pts.push_back({x, j == n - 1 ? spec.y1 : spec.y0 + ly * j / (n - 1)});
    }
    return pts;
}

namespace {

GridSample grid_for(const ProblemSpec& spec, int n) {
    GridSample s;
    s.n = n;
    s.pts = test_grid(spec, n);
    const std::size_t m = s.pts.size();
    s.sub.resize(m);
    s.u_n.assign(m, 0.0);
    s.u.assign(m, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t q = 0; q < m; ++q) s.sub[q] = spec.locate(s.pts[q][0], s.pts[q][1]);
    if (spec.has_exact())
        for (std::size_t q = 0; q < m; ++q) s.u[q] = spec.exact(s.sub[q], s.pts[q][0], s.pts[q][1]).v;
    return s;
}

}  // namespace

GridSample sample_grid(const TrialComposition& trial, int n) {
    const ProblemSpec& spec = *trial.spec;
    GridSample s = grid_for(spec, n);
    // batches per branch keep the jet buffers small
    constexpr std::size_t batch = 16384;
    for (std::size_t sub = 0; sub < spec.subdomains.size(); ++sub) {
        std::vector<std::size_t> idx;
        for (std::size_t q = 0; q < s.pts.size(); ++q)
            if (s.sub[q] == static_cast<int>(sub)) idx.push_back(q);
        for (std::size_t b0 = 0; b0 < idx.size(); b0 += batch) {
            const std::size_t b1 = std::min(idx.size(), b0 + batch);
            Points p;
            for (std::size_t k = b0; k < b1; ++k) p.push_back(s.pts[idx[k]]);
            const Jets J = trial.evaluate(p, static_cast<int>(sub));
            for (std::size_t k = b0; k < b1; ++k) s.u_n[idx[k]] = J.v(0, static_cast<Eigen::Index>(k - b0));
        }
    }
    return s;
}

GridSample sample_grid(const ProblemSpec& spec, const BranchFunction& u_n, int n) {
    GridSample s = grid_for(spec, n);
    for (std::size_t q = 0; q < s.pts.size(); ++q) s.u_n[q] = u_n(s.sub[q], s.pts[q][0], s.pts[q][1]).v;
    return s;
}

ErrorReport error_metrics(const DiscreteProblem& dp, const std::vector<Field>& u, const GridSample& s) {
    ErrorReport rep;
    rep.grid_n = s.n;
    rep.quadrature_ids = dp.rule_ids;
    rep.exact_available = dp.spec->has_exact();
    if (!rep.exact_available) return rep;
    const NormParts p = subdomain_norms(dp, u);
    double ea = 0, xa = 0, el = 0, xl = 0;
    for (std::size_t k = 0; k < p.err_a2.size(); ++k) {
        ea += p.err_a2[k];
        xa += p.exact_a2[k];
        el += p.err_l2[k];
        xl += p.exact_l2[k];
    }
    rep.e_E = std::sqrt(std::max(ea, 0.0) / xa);
    rep.e_L2 = std::sqrt(std::max(el, 0.0) / xl);
    rep.e_test = e_test_formula(s.u_n, s.u);
    for (std::size_t q = 0; q < s.u.size(); ++q) {
        const double e = std::abs(s.u_n[q] - s.u[q]);
        if (e > rep.max_err) {
            rep.max_err = e;
            rep.max_err_at = s.pts[q];
            rep.max_err_subdomain = s.sub[q];
        }
    }
    return rep;
}

ErrorReport error_metrics(const DiscreteProblem& dp, const std::vector<Field>& u, const TrialComposition& trial, int n) {
    if (!dp.spec->has_exact()) {
        ErrorReport rep;
        rep.grid_n = n;
        rep.quadrature_ids = dp.rule_ids;
        return rep;
    }
    return error_metrics(dp, u, sample_grid(trial, n));
}

std::vector<Field> region_fields(const DiscreteProblem& dp, const BranchFunction& fn) {
    std::vector<Field> out;
    out.reserve(dp.regions.size());
    for (const Region& r : dp.regions) {
        const Points& pts = r.grid->pts;
        Field f(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t q = 0; q < pts.size(); ++q) {
            const Jet2 j = fn(r.subdomain, pts[q][0], pts[q][1]);
            const auto i = static_cast<Eigen::Index>(q);
            f.v[i] = j.v;
            f.gx[i] = j.gx;
            f.gy[i] = j.gy;
            f.l[i] = j.lap;
        }
        out.push_back(std::move(f));
    }
    return out;
}

double integration_error_probe(std::shared_ptr<const ProblemSpec> spec, const QuadConfig& q, const BranchFunction& field,
                               LossKind kind, int factor) {
    const QuadConfig qr = q.refined(factor);
    if (factor == 1) return 0.0;
    const DiscreteProblem coarse = discretize(spec, q), fine = discretize(spec, qr);
    const double lc = evaluate_loss(kind, coarse, region_fields(coarse, field), false).value.total;
    const double lf = evaluate_loss(kind, fine, region_fields(fine, field), false).value.total;
    return std::abs(lc - lf);
}

// ---------------------------------------------------------------- configs

namespace {

json quad_to_json(const QuadConfig& q) {
    return {{"kind", q.kind},
            {"points", q.points},
            {"subintervals", q.subintervals},
            {"plan", q.plan},
            {"jacobi_points", q.jacobi_points},
            {"refined_lo", q.refined_lo},
            {"refined_hi", q.refined_hi},
            {"refined_subintervals", q.refined_subintervals},
            {"radial_subintervals", q.radial_subintervals},
            {"radial_points", q.radial_points},
            {"n_theta", q.n_theta}};
}

void quad_from_json(const json& j, QuadConfig& q) {
    q.kind = j.value("kind", q.kind);
    q.points = j.value("points", q.points);
    q.subintervals = j.value("subintervals", q.subintervals);
    q.plan = j.value("plan", q.plan);
    q.jacobi_points = j.value("jacobi_points", q.jacobi_points);
    q.refined_lo = j.value("refined_lo", q.refined_lo);
    q.refined_hi = j.value("refined_hi", q.refined_hi);
    q.refined_subintervals = j.value("refined_subintervals", q.refined_subintervals);
    q.radial_subintervals = j.value("radial_subintervals", q.radial_subintervals);
    q.radial_points = j.value("radial_points", q.radial_points);
    q.n_theta = j.value("n_theta", q.n_theta);
}

json train_to_json(const TrainConfig& t) {
    return {{"adam_steps", t.adam_steps}, {"adam_lr", t.adam_lr},     {"lbfgs_steps", t.lbfgs_steps},
            {"lbfgs_lr", t.lbfgs_lr},     {"lbfgs_history", t.lbfgs_history}, {"seed", t.seed},
            {"loss", to_string(t.loss)},  {"galerkin_every", t.galerkin_every}, {"rcond", t.rcond},
            {"gradient", t.gradient},
            {"milestones", t.milestones}, {"gamma", t.gamma}};
}

void train_from_json(const json& j, TrainConfig& t) {
    t.adam_steps = j.value("adam_steps", t.adam_steps);
    t.adam_lr = j.value("adam_lr", t.adam_lr);
    t.lbfgs_steps = j.value("lbfgs_steps", t.lbfgs_steps);
    t.lbfgs_lr = j.value("lbfgs_lr", t.lbfgs_lr);
    t.lbfgs_history = j.value("lbfgs_history", t.lbfgs_history);
    t.seed = j.value("seed", t.seed);
    if (j.contains("loss")) t.loss = loss_from_string(j.at("loss").get<std::string>());
    t.galerkin_every = j.value("galerkin_every", t.galerkin_every);
    t.rcond = j.value("rcond", t.rcond);
    t.gradient = j.value("gradient", t.gradient);
    t.milestones = j.value("milestones", t.milestones);
    t.gamma = j.value("gamma", t.gamma);
    t.log_every = j.value("log_every", t.log_every);
}

ArchitectureSpec tnn(int p, std::vector<int> hidden) {
    ArchitectureSpec a;
    a.family = Family::tnn;
    a.output_dim = p;
    a.hidden_widths = std::move(hidden);
    a.first_layer_scale = 5.0;
    return a;
}

std::string canonical_test(const std::string& problem, const std::string& test) {
    if (!test.empty()) return test;
    for (const auto& e : problem_catalog())
        if (e.name == problem) return e.tests.front();
    throw std::invalid_argument("unknown problem '" + problem + "'");
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    return {{"schema_version", c.schema_version},
            {"problem", c.problem},
            {"test", c.test},
            {"scale", c.scale},
            {"params", c.params},
            {"arch", arch_to_json(c.arch)},
            {"quad", quad_to_json(c.quad)},
            {"train", train_to_json(c.train)},
            {"grid_n", c.grid_n},
            {"probe_factor", c.probe_factor},
            {"lift",
             {{"arch", arch_to_json(c.lift_arch)},
              {"steps", c.lift_fit.steps},
              {"lr", c.lift_fit.lr},
              {"milestones", c.lift_fit.milestones},
              {"gamma", c.lift_fit.gamma},
              {"seed", c.lift_fit.seed},
              {"solve_output_layer", c.lift_fit.solve_output_layer},
              {"subintervals", c.lift_subintervals},
              {"points", c.lift_points}}}};
}

ExperimentConfig config_from_json(const json& j) {
    const int version = j.value("schema_version", 1);
    if (version != 1) throw std::invalid_argument("unsupported config schema_version " + std::to_string(version));
    std::string problem = j.value("problem", std::string());
    std::string test = j.value("test", std::string());
    if (problem.empty()) {
        if (test.empty()) throw std::invalid_argument("config needs a problem or a test label");
        problem = problem_for_test(test);
    }
    ExperimentConfig c = default_config(problem, test, j.value("scale", std::string("desk")));
    if (j.contains("params")) c.params = j.at("params");
    if (j.contains("arch")) c.arch = arch_from_json(j.at("arch"));
    if (j.contains("quad")) quad_from_json(j.at("quad"), c.quad);
    if (j.contains("train")) train_from_json(j.at("train"), c.train);
    c.grid_n = j.value("grid_n", c.grid_n);
    c.probe_factor = j.value("probe_factor", c.probe_factor);
    if (j.contains("lift")) {
        const json& l = j.at("lift");
        if (l.contains("arch")) c.lift_arch = arch_from_json(l.at("arch"));
        c.lift_fit.steps = l.value("steps", c.lift_fit.steps);
        c.lift_fit.lr = l.value("lr", c.lift_fit.lr);
        c.lift_fit.milestones = l.value("milestones", c.lift_fit.milestones);
        c.lift_fit.gamma = l.value("gamma", c.lift_fit.gamma);
        c.lift_fit.seed = l.value("seed", c.lift_fit.seed);
        c.lift_fit.solve_output_layer = l.value("solve_output_layer", c.lift_fit.solve_output_layer);
        c.lift_subintervals = l.value("subintervals", c.lift_subintervals);
        c.lift_points = l.value("points", c.lift_points);
    }
    return c;
}

std::vector<std::string> experiment_names() {
    std::vector<std::string> out;
    for (const auto& e : problem_catalog())
        for (const auto& t : e.tests) out.push_back(t);
    return out;
}

ExperimentConfig default_config(const std::string& problem, const std::string& test_in, const std::string& scale) {
    if (scale != "desk" && scale != "paper") throw std::invalid_argument("scale must be desk or paper");
    const bool paper = scale == "paper";
    ExperimentConfig c;
    c.problem = problem;
    c.test = canonical_test(problem, test_in);
    c.scale = scale;
    c.arch = paper ? tnn(100, {50, 50, 50}) : tnn(20, {20, 20, 20});
    c.quad.kind = "lobatto";
    c.quad.points = paper ? 16 : 8;
    c.quad.subintervals = paper ? 100 : 40;
    c.train.adam_steps = paper ? 5000 : 2000;
    c.train.adam_lr = 1e-3;
    c.train.lbfgs_steps = paper ? 100 : 50;
    c.train.lbfgs_lr = 0.1;
    c.train.gradient = "auto";
    c.grid_n = 301;
    c.lift_arch.family = Family::fnn2d;
    c.lift_arch.hidden_widths = paper ? std::vector<int>{50, 50, 50} : std::vector<int>{30, 30, 30};
    c.lift_fit.steps = paper ? 50000 : 5000;
    c.lift_subintervals = paper ? 100 : 40;
    c.lift_points = paper ? 16 : 8;

    if (problem == "two_material" || problem == "two_material_highfreq") {
        if (problem == "two_material_highfreq") c.arch.hidden_widths.push_back(c.arch.hidden_widths.back());
    } else if (problem == "four_material") {
        c.arch = paper ? tnn(100, {50, 50, 50, 50}) : tnn(20, {20, 20, 20});
        c.grid_n = 401;
    } else if (problem == "circle_inclusion") {
        c.arch = paper ? tnn(100, {50, 50, 50, 50}) : tnn(20, {20, 20, 20});
        c.quad.points = 8;
        c.quad.subintervals = 20;
        c.quad.radial_subintervals = 20;
        c.quad.radial_points = 8;
        c.quad.n_theta = 160;
        c.train.adam_lr = 1e-2;
        c.train.lbfgs_lr = 1.0;
        if (paper) c.train.lbfgs_steps = 2000;
        c.grid_n = 401;
    } else if (problem == "singular_laplace") {
        c.arch = paper ? tnn(100, {100, 100, 100}) : tnn(20, {20, 20, 20});
        c.quad.kind = "legendre";
        c.quad.points = 8;
        c.quad.subintervals = paper ? 100 : 40;
        c.quad.plan = "jacobi";
        c.quad.jacobi_points = 200;
        if (paper) {
            c.train.adam_steps = 50000;
            c.train.lbfgs_steps = 10000;
        }
        c.grid_n = 1001;
    } else if (problem == "reaction_diffusion") {
        c.arch = tnn(10, {20, 20});
        c.quad.subintervals = paper ? 40 : 10;
        c.train.adam_steps = paper ? 5000 : 300;
        c.train.lbfgs_steps = paper ? 100 : 20;
    } else {
        throw std::invalid_argument("unknown problem '" + problem + "'");
    }
    return c;
}

// ------------------------------------------------------------- experiments

void write_history_csv(const std::string& path, const std::vector<HistoryRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fprintf(f, "step,phase,loss_total,volume_residual,interface_jump,energy,load,ritz_gap,e_E,e_L2,err_a,eta,pinv\n");
    for (const auto& r : rows)
        std::fprintf(f, "%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.step, r.phase.c_str(),
                     r.loss.total, r.loss.volume_residual, r.loss.interface_jump, r.loss.energy, r.loss.load, r.ritz_gap,
                     r.e_E, r.e_L2, r.err_a, r.eta, r.pinv ? 1 : 0);
    std::fclose(f);
}

namespace {

void write_grid_csv(const std::string& path, const GridSample& s) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write " + path);
    std::fprintf(f, "x1,x2,u_N,u_exact,abs_err\n");
    for (std::size_t q = 0; q < s.pts.size(); ++q)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", s.pts[q][0], s.pts[q][1], s.u_n[q], s.u[q],
                     std::abs(s.u_n[q] - s.u[q]));
    std::fclose(f);
}

// Loss of the trained (theta, c) on a freshly discretized problem.
double loss_on(std::shared_ptr<const ProblemSpec> spec, const QuadConfig& q, const std::vector<ArchitectureSpec>& archs,
               const ParameterVector& theta, const Vec& c, const std::optional<BoundaryFit>& lift, LossKind kind) {
    DiscreteProblem dp = discretize(spec, q);
    if (lift) attach_lift(dp, lift->arch, lift->params);
    SubspaceModel m(dp, archs);
    m.forward(theta);
    return evaluate_loss(kind, dp, m.fields(c), false).value.total;
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN(); }

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult res;
    res.config = cfg;
    auto spec = std::make_shared<const ProblemSpec>(catalog(cfg.problem, cfg.test, cfg.params));
    DiscreteProblem dp = discretize(spec, cfg.quad);

    if (spec->has_lift()) {
        const Rule1D edge = compose(gauss_lobatto(cfg.lift_points), 0.0, 1.0, cfg.lift_subintervals);
        const BoundaryRule br = rectangle_boundary(edge, spec->x0, spec->x1, spec->y0, spec->y1);
        res.lift = fit_boundary_network(spec->boundary, cfg.lift_arch, br, cfg.lift_fit);
        attach_lift(dp, res.lift->arch, res.lift->params);
    }

    const std::vector<ArchitectureSpec> archs(spec->terms.size(), cfg.arch);
    SubspaceModel model(dp, archs);
    TrainConfig tc = cfg.train;
    if (!out_dir.empty() && !tc.dump_system_dir.empty() && std::filesystem::path(tc.dump_system_dir).is_relative())
        tc.dump_system_dir = (std::filesystem::path(out_dir) / tc.dump_system_dir).string();
    res.state = run_algorithm3(model, tc, nullptr);
    const TrainState& st = res.state;

    // trained trial function on the test grid
    std::vector<ParameterVector> tp;
    for (std::size_t k = 0; k < archs.size(); ++k) tp.push_back(model.term_params(st.theta, static_cast<int>(k)));
    const std::vector<double> coeffs(st.c.data(), st.c.data() + st.c.size());
    res.trial =
        res.lift ? compose_trial(spec, archs, tp, coeffs, res.lift->arch, res.lift->params) : compose_trial(spec, archs, tp, coeffs);
    const TrialComposition& trial = res.trial;
    const auto u = model.fields(st.c);
    const GridSample gs = sample_grid(trial, cfg.grid_n);
    res.report = error_metrics(dp, u, gs);

    if (cfg.probe_factor >= 1) {
        const double lc = evaluate_loss(cfg.train.loss, dp, u, false).value.total;
        const double lf = cfg.probe_factor == 1
                              ? lc
                              : loss_on(spec, cfg.quad.refined(cfg.probe_factor), archs, st.theta, st.c, res.lift, cfg.train.loss);
        res.probe = std::abs(lc - lf);
    }

    // Ritz values are unbounded below; the decrease is measured on the
    // energy gap L + 1/2 ||u||_a^2 when it is available.
    const auto& h = st.history;
    const bool gap = cfg.train.loss == LossKind::ritz;
    res.loss_first = gap ? finite_or_nan(h.front().ritz_gap) : h.front().loss.total;
    res.loss_last = gap ? finite_or_nan(h.back().ritz_gap) : h.back().loss.total;
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json s;
    s["schema_version"] = 1;
    s["config"] = to_json(cfg);
    s["seed"] = cfg.train.seed;
    s["errors"] = {{"exact_available", res.report.exact_available},
                   {"e_E", num(res.report.exact_available ? res.report.e_E : NAN)},
                   {"e_L2", num(res.report.exact_available ? res.report.e_L2 : NAN)},
                   {"e_test", num(res.report.exact_available ? res.report.e_test : NAN)},
                   {"grid_n", res.report.grid_n},
                   {"max_err", num(res.report.max_err)},
                   {"max_err_at", res.report.max_err_at},
                   {"max_err_subdomain", res.report.max_err_subdomain}};
    s["quadrature_ids"] = res.report.quadrature_ids;
    s["loss"] = {{"kind", to_string(cfg.train.loss)},
                 {"final_total", num(h.back().loss.total)},
                 {"decrease_measure", gap ? "ritz_gap" : "loss_total"},
                 {"first", num(res.loss_first)},
                 {"last", num(res.loss_last)},
                 {"orders_of_decrease", num(std::log10(res.loss_first / res.loss_last))}};
    s["integration_error_probe"] = res.probe >= 0 ? json{{"factor", cfg.probe_factor}, {"value", num(res.probe)}} : json(nullptr);
    s["training"] = {{"steps", static_cast<int>(h.size()) - 1},
                     {"monotonicity_violations", st.monotonicity_violations},
                     {"pseudo_inverse_events", st.pinv_events},
                     {"train_seconds", st.seconds}};
    if (res.lift) s["boundary_fit"] = {{"relative_error", res.lift->error}, {"steps", cfg.lift_fit.steps}};
    s["wall_seconds"] = res.seconds;
    res.summary = s;

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path o(out_dir);
        write_history_csv((o / "history.csv").string(), h);
        write_grid_csv((o / "grid.csv").string(), gs);
        Checkpoint ck;
        ck.archs = archs;
        ck.params = st.theta;
        for (std::size_t k = 0; k < archs.size(); ++k) ck.seeds.push_back(cfg.train.seed + k);
        json extra = {{"coefficients", coeffs}, {"problem", cfg.problem}, {"test", cfg.test}};
        if (res.lift) {
            ck.archs.push_back(res.lift->arch);
            ck.seeds.push_back(cfg.lift_fit.seed);
            ck.params.insert(ck.params.end(), res.lift->params.begin(), res.lift->params.end());
            extra["lift_network"] = static_cast<int>(archs.size());
        }
        ck.extra_json = extra.dump();
        write_checkpoint((o / "params.ckpt").string(), ck);
        std::ofstream os(o / "summary.json");
        os << s.dump(2) << '\n';
    }
    return res;
}

ExperimentResult run_experiment(const std::string& name, const std::string& scale, const std::string& out_dir) {
    return run_experiment(default_config(problem_for_test(name), name, scale), out_dir);
}

}  // namespace nsg
