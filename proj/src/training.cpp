#include "nsg/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace nsg {

void adam_step(ParameterVector& theta, AdamState& st, const std::vector<double>& grad, double lr, double beta1,
               double beta2, double eps) {
    if (grad.size() != theta.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
    if (st.m.empty()) {
        st.m.assign(theta.size(), 0.0);
        st.v.assign(theta.size(), 0.0);
    }
    ++st.t;
    for (double g : grad)
        if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient at step " + std::to_string(st.t));
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        st.m[i] = beta1 * st.m[i] + (1 - beta1) * grad[i];
        st.v[i] = beta2 * st.v[i] + (1 - beta2) * grad[i] * grad[i];
        const double mh = st.m[i] / bc1, vh = st.v[i] / bc2;
        theta[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

namespace {

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

Vec two_loop(const LbfgsState& st, const Vec& g) {
    Vec q = g;
    const std::size_t k = st.s.size();
    std::vector<double> a(k), rho(k);
    for (std::size_t i = k; i-- > 0;) {
        rho[i] = 1.0 / st.y[i].dot(st.s[i]);
        a[i] = rho[i] * st.s[i].dot(q);
        q -= a[i] * st.y[i];
    }
    if (k > 0) q *= st.s.back().dot(st.y.back()) / st.y.back().squaredNorm();
    for (std::size_t i = 0; i < k; ++i) {
        const double b = rho[i] * st.y[i].dot(q);
        q += (a[i] - b) * st.s[i];
    }
    return -q;
}

}  // namespace

LbfgsResult lbfgs_step(ParameterVector& theta, LbfgsState& st, const Objective& f, double lr, double c1, int max_trials) {
    LbfgsResult res;
    std::vector<double> gv;
    const double f0 = f(theta, &gv);
    res.f_before = res.f_after = f0;
    const Vec g = to_vec(gv);
    if (!std::isfinite(f0) || !g.allFinite()) throw std::runtime_error("lbfgs_step: non-finite loss or gradient");
    if (g.squaredNorm() == 0.0) return res;
    ++st.iterations;
    Vec d = two_loop(st, g);
    double slope = g.dot(d);
    if (!(slope < 0)) {  // lost descent: restart from steepest descent
        st.s.clear();
        st.y.clear();
        d = -g;
        slope = -g.squaredNorm();
    }
    const Vec x0 = to_vec(theta);
    double t = lr;
    for (int k = 0; k < max_trials; ++k, t *= 0.5) {
        ++res.trials;
        const Vec x = x0 + t * d;
        ParameterVector xt(x.data(), x.data() + x.size());
        double ft;
        try {
            ft = f(xt, nullptr);
        } catch (const std::runtime_error&) {  // non-finite network state: shrink
            continue;
        }
        if (std::isfinite(ft) && ft <= f0 + c1 * t * slope) {
            std::vector<double> g1;
            f(xt, &g1);
            const Vec s = x - x0, y = to_vec(g1) - g;
            if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
                st.s.push_back(s);
                st.y.push_back(y);
                while (static_cast<int>(st.s.size()) > st.history) {
                    st.s.pop_front();
                    st.y.pop_front();
                }
            } else {  // negative curvature along s: the stored model is stale
                st.s.clear();
                st.y.clear();
            }
            theta = std::move(xt);
            res.f_after = ft;
            res.moved = true;
            return res;
        }
    }
    // line search failed: short gradient step, forget curvature
    ++st.fallbacks;
    res.fallback = true;
    st.s.clear();
    st.y.clear();
    const Vec x = x0 - lr * 1e-2 * g;
    theta.assign(x.data(), x.data() + x.size());
    res.f_after = f(theta, nullptr);
    res.moved = true;
    return res;
}

double scheduled_lr(double lr, int step, int total, const std::vector<double>& milestones, double gamma) {
    for (double m : milestones)
        if (step >= static_cast<int>(std::floor(m * total))) lr *= gamma;
    return lr;
}

void TrainConfig::validate() const {
    if (adam_steps < 0 || lbfgs_steps < 0) throw std::invalid_argument("training steps must be >= 0");
    if (!(adam_lr > 0) || !(lbfgs_lr > 0)) throw std::invalid_argument("learning rates must be > 0");
    if (galerkin_every < 1) throw std::invalid_argument("galerkin_every must be >= 1");
    if (lbfgs_history < 1) throw std::invalid_argument("lbfgs_history must be >= 1");
    if (!(rcond > 0)) throw std::invalid_argument("rcond must be > 0");
    if (gradient != "frozen" && gradient != "total" && gradient != "auto")
        throw std::invalid_argument("gradient must be frozen, total or auto, got " + gradient);
    if (total_gradient() && galerkin_every != 1) throw std::invalid_argument("total gradient needs galerkin_every = 1");
}

Objective frozen_c_objective(SubspaceModel& model, LossKind kind, const Vec& c) {
    return [&model, kind, c](const ParameterVector& th, std::vector<double>* grad) {
        model.forward(th);
        const auto ev = evaluate_loss(kind, model.problem(), model.fields(c), grad != nullptr);
        if (grad) *grad = model.backward(th, c, ev.adjoint);
        return ev.value.total;
    };
}

Vec coefficient_gradient(const SubspaceModel& model, const std::vector<Field>& adj) {
    Vec g = Vec::Zero(model.num_basis());
    for (std::size_t r = 0; r < model.num_regions(); ++r) {
        const RegionBasis& B = model.basis(static_cast<int>(r));
        if (B.P == 0) continue;
        const Vec loc = B.contract(*model.problem().regions[r].grid, adj[r]);
        for (int i = 0; i < B.P; ++i) g[B.rows[i]] += loc[i];
    }
    return g;
}

ParameterVector total_gradient(const SubspaceModel& model, const ParameterVector& theta, const GalerkinSystem& sys,
                               const std::vector<Field>& adj, double rcond) {
    const DiscreteProblem& dp = model.problem();
    ParameterVector g = model.backward(theta, sys.c, adj);
    // lambda = A^{-1} dL/dc; the c(theta) part is d/dtheta lambda^T (B - A c)
    // at fixed lambda and c.
    GalerkinSystem adjsys;
    adjsys.A = sys.A;
    adjsys.B = coefficient_gradient(model, adj);
    if (adjsys.B.squaredNorm() == 0.0) return g;
    const Vec lambda = solve(adjsys, rcond);
    const auto u = model.fields(sys.c);
    auto v = model.fields(lambda);
    for (std::size_t r = 0; r < v.size(); ++r)
        if (!dp.regions[r].lift.empty()) {
            v[r].v -= dp.regions[r].lift.v;
            v[r].gx -= dp.regions[r].lift.gx;
            v[r].gy -= dp.regions[r].lift.gy;
            v[r].l -= dp.regions[r].lift.l;
        }
    // through v = sum lambda phi: l(v) - a(u, v) has adjoint -(a(u, .) - l)
    auto adj_v = ritz_loss(dp, u, true).adjoint;
    // through u = lift + sum c phi: adjoint -a(., v)
    std::vector<Field> adj_u(dp.regions.size());
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& R = dp.regions[r];
        adj_u[r] = Field(R.size());
        for (auto* f : {&adj_v[r].v, &adj_v[r].gx, &adj_v[r].gy, &adj_v[r].l})
            if (f->size() == 0) f->setZero(R.size());
        adj_v[r].v = -adj_v[r].v;
        adj_v[r].gx = -adj_v[r].gx;
        adj_v[r].gy = -adj_v[r].gy;
        adj_v[r].l = -adj_v[r].l;
        if (R.role != RegionRole::volume) continue;
        adj_u[r].gx = -R.alpha * R.w.cwiseProduct(v[r].gx);
        adj_u[r].gy = -R.alpha * R.w.cwiseProduct(v[r].gy);
        adj_u[r].v = -R.beta * R.w.cwiseProduct(v[r].v);
    }
    const ParameterVector gv = model.backward(theta, lambda, adj_v);
    const ParameterVector gu = model.backward(theta, sys.c, adj_u);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gv[i] + gu[i];
    return g;
}

Objective galerkin_objective(SubspaceModel& model, LossKind kind, double rcond) {
    return [&model, kind, rcond](const ParameterVector& th, std::vector<double>* grad) {
        model.forward(th);
        GalerkinSystem sys = assemble(model);
        solve(sys, rcond);
        const auto ev = evaluate_loss(kind, model.problem(), model.fields(sys.c), grad != nullptr);
        if (grad) *grad = total_gradient(model, th, sys, ev.adjoint, rcond);
        return ev.value.total;
    };
}

namespace {

struct ExactNorms {
    double energy2 = 0.0, l2 = 0.0;
    bool available = false;
};

ExactNorms exact_norms(const DiscreteProblem& dp) {
    ExactNorms n;
    n.available = dp.spec->has_exact();
    if (!n.available) return n;
    for (const auto& r : dp.regions) {
        if (r.role != RegionRole::volume) continue;
        const Field& e = r.exact;
        n.energy2 += r.w.dot(r.alpha * (e.gx.cwiseAbs2() + e.gy.cwiseAbs2()) + r.beta * e.v.cwiseAbs2());
        n.l2 += r.w.dot(e.v.cwiseAbs2());
    }
    return n;
}

void record(HistoryRow& row, const DiscreteProblem& dp, const std::vector<Field>& u, const ExactNorms& norms) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const bool lift = dp.regions.empty() ? false : !dp.regions.front().lift.empty();
    try {
        const auto rz = ritz_loss(dp, u).value;
        row.loss.energy = rz.energy;
        row.loss.load = rz.load;
        row.ritz_gap = norms.available && !lift ? rz.total + 0.5 * norms.energy2 : nan;
    } catch (const std::invalid_argument&) {
        row.ritz_gap = nan;
    }
    row.e_E = row.e_L2 = row.err_a = row.eta = nan;
    if (norms.available) {
        double ea = 0.0, el = 0.0;
        for (std::size_t r = 0; r < dp.regions.size(); ++r) {
            const Region& R = dp.regions[r];
            if (R.role != RegionRole::volume) continue;
            const Vec dv = R.exact.v - u[r].v, dx = R.exact.gx - u[r].gx, dy = R.exact.gy - u[r].gy;
            ea += R.w.dot(R.alpha * (dx.cwiseAbs2() + dy.cwiseAbs2()) + R.beta * dv.cwiseAbs2());
            el += R.w.dot(dv.cwiseAbs2());
        }
        row.err_a = std::sqrt(std::max(ea, 0.0));
        row.e_E = row.err_a / std::sqrt(norms.energy2);
        row.e_L2 = std::sqrt(std::max(el, 0.0) / norms.l2);
    }
    bool pointwise = dp.spec->beta > 0 && dp.spec->interfaces.empty();
    for (const auto& r : dp.regions)
        if (r.role == RegionRole::volume && r.f.size() != r.size()) pointwise = false;
    if (pointwise) row.eta = std::sqrt(eta_squared(dp, u, u));
}

}  // namespace

TrainState run_algorithm3(SubspaceModel& model, const TrainConfig& cfg, const ParameterVector* theta0, const StepCallback& cb) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const DiscreteProblem& dp = model.problem();
    TrainState st;
    st.theta = theta0 ? *theta0 : model.init(cfg.seed);
    if (st.theta.size() != model.num_params()) throw std::invalid_argument("run_algorithm3: parameter count mismatch");
    st.lbfgs.history = cfg.lbfgs_history;
    const ExactNorms norms = exact_norms(dp);
    const int M = cfg.adam_steps + cfg.lbfgs_steps;
    if (!cfg.dump_system_dir.empty()) std::filesystem::create_directories(cfg.dump_system_dir);

    for (int l = 0; l <= M; ++l) {
        st.step = l;
        model.forward(st.theta);
        HistoryRow row;
        row.step = l;
        row.phase = l == 0 ? "init" : (l <= cfg.adam_steps ? "adam" : "lbfgs");
        GalerkinSystem sys;
        if (l % cfg.galerkin_every == 0 || st.c.size() == 0) {
            sys = assemble(model);
            try {
                solve(sys, cfg.rcond);
            } catch (const DegenerateSubspace& e) {
                throw DegenerateSubspace(std::string(e.what()) + " (step " + std::to_string(l) + ")");
            }
            // optimality of the solve: never above the previous coefficients
            if (st.c.size() == sys.c.size()) {
                const double before = ritz_quadratic(sys, st.c), after = ritz_quadratic(sys, sys.c);
                const double scale = std::abs(before) + std::abs(after) + 1e-300;
                if (after > before + 1e-9 * scale) ++st.monotonicity_violations;
            }
            row.pinv = sys.pseudo_inverse;
            if (sys.pseudo_inverse) {
                ++st.pinv_events;
                if (cfg.log_every > 0 && l % cfg.log_every == 0)
                    std::fprintf(stderr, "step %d: pseudo-inverse solve, %d eigenvalues truncated\n", l, sys.truncated);
            }
            if (!cfg.dump_system_dir.empty()) {
                char name[64];
                std::snprintf(name, sizeof name, "/system_%06d.csv", l);
                dump_system(cfg.dump_system_dir + name, sys);
            }
            st.c = sys.c;
        }
        const auto u = model.fields(st.c);
        const bool need_grad = l < M;
        auto ev = evaluate_loss(cfg.loss, dp, u, need_grad && l < cfg.adam_steps);
        row.loss = ev.value;
        record(row, dp, u, norms);
        st.history.push_back(row);
        if (cfg.log_every > 0 && (l % cfg.log_every == 0 || l == M))
            std::fprintf(stderr, "step %6d %-5s loss %.6e e_E %.3e\n", l, row.phase.c_str(), row.loss.total, row.e_E);
        if (cb && !cb(st, model)) break;
        if (!need_grad) break;
        const bool total = cfg.total_gradient();
        if (l < cfg.adam_steps) {
            const auto g = total ? total_gradient(model, st.theta, sys, ev.adjoint, cfg.rcond)
                                 : model.backward(st.theta, st.c, ev.adjoint);
            const double lr = scheduled_lr(cfg.adam_lr, l, cfg.adam_steps, cfg.milestones, cfg.gamma);
            try {
                adam_step(st.theta, st.adam, g, lr);
            } catch (const std::runtime_error& e) {
                throw std::runtime_error(std::string(e.what()) + " (training step " + std::to_string(l) + ")");
            }
        } else {
            const auto obj = total ? galerkin_objective(model, cfg.loss, cfg.rcond) : frozen_c_objective(model, cfg.loss, st.c);
            const auto res = lbfgs_step(st.theta, st.lbfgs, obj, cfg.lbfgs_lr);
            if (res.fallback && cfg.log_every > 0) std::fprintf(stderr, "step %d: line search failed, gradient step\n", l);
        }
    }
    model.forward(st.theta);
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return st;
}

BoundaryFit fit_boundary_network(const std::function<double(double, double)>& b, const ArchitectureSpec& arch,
                                 const BoundaryRule& rule, const BoundaryFitConfig& cfg) {
    arch.validate();
    if (arch.family == Family::tnn || arch.output_dim != 1) throw std::invalid_argument("boundary network must be a scalar 2D network");
    if (cfg.steps < 0 || !(cfg.lr > 0)) throw std::invalid_argument("boundary fit: invalid steps or learning rate");
    const Eigen::Index n = static_cast<Eigen::Index>(rule.points.size());
    Mat x(2, n);
    Vec target(n), w(n);
    for (Eigen::Index q = 0; q < n; ++q) {
        x(0, q) = rule.points[q][0];
        x(1, q) = rule.points[q][1];
        target[q] = b(rule.points[q][0], rule.points[q][1]);
        w[q] = rule.weights[q];
    }
    const double nb = w.dot(target.cwiseAbs2());
    const bool relative = nb > 0;

    BoundaryFit fit;
    fit.arch = arch;
    fit.params = init_params(arch, cfg.seed);
    const Network net(arch);
    const SineMlp& mlp = net.mlp();
    const int L = mlp.num_layers() - 1;
    const std::size_t wo = mlp.w_offset(L), bo = mlp.b_offset(L);
    const int width = mlp.fan_in(L);
    // zero output layer: the initial network is identically zero
    for (int j = 0; j < width; ++j) fit.params[wo + j] = 0.0;
    fit.params[bo] = 0.0;

    auto error_of = [&](const Vec& v) {
        const double e = w.dot((v - target).cwiseAbs2());
        return relative ? std::sqrt(e / nb) : std::sqrt(e);
    };
    AdamState adam;
    const Vec sw = w.cwiseSqrt();
    for (int step = 0; step <= cfg.steps; ++step) {
        SineMlp::Tape tape;
        Jets y = mlp.forward(fit.params.data(), x, &tape, false);
        if (cfg.solve_output_layer) {
            // features of the last hidden layer, plus a constant column for the bias
            Mat H(n, width + 1);
            for (std::size_t ch = 0; ch < tape.chunks.size(); ++ch) {
                const Mat& h = tape.chunks[ch].h.back().v;
                H.block(tape.starts[ch], 0, h.cols(), width) = h.transpose();
            }
            H.col(width).setOnes();
            const Vec sol = (sw.asDiagonal() * H).colPivHouseholderQr().solve(sw.cwiseProduct(target));
            for (int j = 0; j < width; ++j) fit.params[wo + j] = sol[j];
            fit.params[bo] = sol[width];
            y.v = (H * sol).transpose();
        }
        const Vec v = y.v.row(0).transpose();
        fit.error = error_of(v);
        fit.history.push_back(fit.error);
        if (step == cfg.steps || fit.error == 0.0) break;
        // gradient of the squared misfit (normalized when relative)
        Jets adj(1, n, 0);
        adj.v.row(0) = (2.0 * w.cwiseProduct(v - target) / (relative ? nb : 1.0)).transpose();
        std::vector<double> g(fit.params.size(), 0.0);
        mlp.backward(fit.params.data(), tape, adj, g.data());
        if (cfg.solve_output_layer) {
            for (int j = 0; j < width; ++j) g[wo + j] = 0.0;
            g[bo] = 0.0;
        }
        adam_step(fit.params, adam, g, scheduled_lr(cfg.lr, step, cfg.steps, cfg.milestones, cfg.gamma));
    }
    return fit;
}

}  // namespace nsg
