#include "nsg/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace nsg {

LossKind loss_from_string(const std::string& s) {
    if (s == "ritz") return LossKind::ritz;
    if (s == "posterior" || s == "residual" || s == "interface_posterior") return LossKind::posterior;
    throw std::invalid_argument("unknown loss '" + s + "' (expected ritz or posterior)");
}

std::string to_string(LossKind k) { return k == LossKind::ritz ? "ritz" : "posterior"; }

namespace {

void check_fields(const DiscreteProblem& dp, const std::vector<Field>& u) {
    if (u.size() != dp.regions.size()) throw std::invalid_argument("loss: one field per region expected");
    for (std::size_t r = 0; r < u.size(); ++r)
        if (u[r].size() != dp.regions[r].size()) throw std::invalid_argument("loss: field size mismatch on region " + dp.regions[r].name);
}

std::vector<Field> zero_adjoint(const DiscreteProblem& dp) {
    std::vector<Field> a;
    for (const auto& r : dp.regions) a.emplace_back(r.size());
    return a;
}

bool has_interface_regions(const DiscreteProblem& dp) {
    for (const auto& r : dp.regions)
        if (r.role == RegionRole::interface) return true;
    return false;
}

Vec normal_derivative(const Region& r, const Field& u) { return r.nx.cwiseProduct(u.gx) + r.ny.cwiseProduct(u.gy); }

// Adds sum w (g - [alpha y.n])^2 where y = (gx, gy) of the given fields.
double jump_term(const DiscreteProblem& dp, const std::vector<Field>& y, std::vector<Field>* adj) {
    double total = 0.0;
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& A = dp.regions[r];
        if (A.role != RegionRole::interface || !A.side_a) continue;
        const Region& B = dp.regions[A.partner];
        const Vec e = A.g - (A.alpha * normal_derivative(A, y[r]) - B.alpha * normal_derivative(B, y[A.partner]));
        total += A.w.dot(e.cwiseProduct(e));
        if (adj) {
            const Vec s = 2.0 * A.w.cwiseProduct(e);
            (*adj)[r].gx -= A.alpha * s.cwiseProduct(A.nx);
            (*adj)[r].gy -= A.alpha * s.cwiseProduct(A.ny);
            (*adj)[A.partner].gx += B.alpha * s.cwiseProduct(B.nx);
            (*adj)[A.partner].gy += B.alpha * s.cwiseProduct(B.ny);
        }
    }
    return total;
}

}  // namespace

LossEval ritz_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint) {
    check_fields(dp, u);
    if (!dp.spec->interfaces.empty() && !has_interface_regions(dp))
        throw std::invalid_argument("ritz_loss: problem has interfaces but no Gamma rule");
    LossEval out;
    if (want_adjoint) out.adjoint = zero_adjoint(dp);
    double energy = 0.0, load = 0.0;
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& R = dp.regions[r];
        const Field& f = u[r];
        if (R.role == RegionRole::volume) {
            const Vec e = R.alpha * (f.gx.cwiseAbs2() + f.gy.cwiseAbs2()) + R.beta * f.v.cwiseAbs2();
            energy += 0.5 * R.w.dot(e);
            if (want_adjoint) {
                out.adjoint[r].gx = R.alpha * R.w.cwiseProduct(f.gx);
                out.adjoint[r].gy = R.alpha * R.w.cwiseProduct(f.gy);
                out.adjoint[r].v = R.beta * R.w.cwiseProduct(f.v);
            }
        }
        if (R.role != RegionRole::interface && R.load.size()) {
            load += R.load.dot(f.v);
            if (want_adjoint) out.adjoint[r].v -= R.load;
        }
        if (R.role == RegionRole::interface && R.side_a) {
            const Vec wg = R.w.cwiseProduct(R.g);
            load += wg.dot(f.v);
            if (want_adjoint) out.adjoint[r].v -= wg;
        }
    }
    out.value.energy = energy;
    out.value.load = load;
    out.value.total = energy - load;
    return out;
}

LossEval residual_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint) {
    check_fields(dp, u);
    LossEval out;
    if (want_adjoint) out.adjoint = zero_adjoint(dp);
    double total = 0.0;
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& R = dp.regions[r];
        if (R.role != RegionRole::volume) continue;
        if (R.f.size() != R.size())
            throw std::invalid_argument("residual loss needs the source at the quadrature points of region " + R.name);
        const Vec res = R.f - R.beta * u[r].v + R.alpha * u[r].l;
        total += R.w.dot(res.cwiseAbs2());
        if (want_adjoint) {
            const Vec s = 2.0 * R.w.cwiseProduct(res);
            out.adjoint[r].v = -R.beta * s;
            out.adjoint[r].l = R.alpha * s;
        }
    }
    out.value.volume_residual = total;
    out.value.total = total;
    return out;
}

LossEval interface_loss(const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint) {
    if (!has_interface_regions(dp)) throw std::invalid_argument("interface loss needs one-sided Gamma regions");
    LossEval out = residual_loss(dp, u, want_adjoint);
    out.value.interface_jump = jump_term(dp, u, want_adjoint ? &out.adjoint : nullptr);
    out.value.total = out.value.volume_residual + out.value.interface_jump;
    return out;
}

LossEval evaluate_loss(LossKind kind, const DiscreteProblem& dp, const std::vector<Field>& u, bool want_adjoint) {
    if (kind == LossKind::ritz) return ritz_loss(dp, u, want_adjoint);
    if (has_interface_regions(dp)) return interface_loss(dp, u, want_adjoint);
    return residual_loss(dp, u, want_adjoint);
}

double eta_squared(const DiscreteProblem& dp, const std::vector<Field>& psi, const std::vector<Field>& y, bool weighted) {
    check_fields(dp, psi);
    check_fields(dp, y);
    double total = 0.0;
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& R = dp.regions[r];
        if (R.role != RegionRole::volume) continue;
        if (weighted && !(R.beta > 0)) throw std::invalid_argument("weighted estimator needs beta > 0");
        if (R.f.size() != R.size()) throw std::invalid_argument("estimator needs the source at the quadrature points");
        const Vec res = R.f - R.beta * psi[r].v + R.alpha * y[r].l;
        const Vec dx = y[r].gx - psi[r].gx, dy = y[r].gy - psi[r].gy;
        const double scale = weighted ? 1.0 / R.beta : 1.0;
        total += R.w.dot(scale * res.cwiseAbs2() + R.alpha * (dx.cwiseAbs2() + dy.cwiseAbs2()));
    }
    if (has_interface_regions(dp)) total += jump_term(dp, y, nullptr);
    return total;
}

double boundary_fit_loss(const Vec& bN, const Vec& b, const Vec& w) {
    if (bN.size() != b.size() || b.size() != w.size()) throw std::invalid_argument("boundary_fit_loss: size mismatch");
    const double nb = w.dot(b.cwiseAbs2());
    if (!(nb > 0)) throw std::invalid_argument("boundary_fit_loss: boundary data has zero norm");
    return std::sqrt(w.dot((bN - b).cwiseAbs2()) / nb);
}

}  // namespace nsg
