#include "nsg/basis.hpp"

#include <stdexcept>

namespace nsg {

namespace {

using Eigen::Index;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Field channel as an nx x ny matrix (points are x-outer).
Eigen::Map<const RowMat> grid_view(const Vec& v, const Grid& g) { return {v.data(), g.nx(), g.ny()}; }
Eigen::Map<RowMat> grid_view(Vec& v, const Grid& g) { return {v.data(), g.nx(), g.ny()}; }

Mat row_coords(const std::vector<double>& v) {
    return Eigen::Map<const Mat>(v.data(), 1, static_cast<Index>(v.size()));
}

}  // namespace

Vec RegionBasis::gather(const Vec& c) const {
    Vec out(P);
    for (int i = 0; i < P; ++i) out[i] = c[rows[i]];
    return out;
}

Field RegionBasis::synthesize(const Grid& g, const Vec& c) const {
    const Index m = g.size();
    Field F(m);
    if (P == 0) return F;
    if (separable) {
        const Mat cy0 = c.asDiagonal() * Y[0];
        const Mat cy1 = c.asDiagonal() * Y[1];
        const Mat cy2 = c.asDiagonal() * Y[2];
        grid_view(F.v, g).noalias() = X[0].transpose() * cy0;
        grid_view(F.gx, g).noalias() = X[1].transpose() * cy0;
        grid_view(F.gy, g).noalias() = X[0].transpose() * cy1;
        grid_view(F.l, g).noalias() = X[2].transpose() * cy0 + X[0].transpose() * cy2;
        return F;
    }
    F.v.noalias() = D.v.transpose() * c;
    F.gx.noalias() = D.g[0].transpose() * c;
    F.gy.noalias() = D.g[1].transpose() * c;
    F.l.noalias() = D.l.transpose() * c;
    return F;
}

Vec RegionBasis::contract(const Grid& g, const Field& G) const {
    Vec out = Vec::Zero(P);
    if (P == 0) return out;
    auto has = [](const Vec& v) { return v.size() > 0; };
    if (separable) {
        Mat acc0 = Mat::Zero(P, g.ny());  // pairs with Y0
        if (has(G.v)) acc0.noalias() += X[0] * grid_view(G.v, g);
        if (has(G.gx)) acc0.noalias() += X[1] * grid_view(G.gx, g);
        if (has(G.l)) acc0.noalias() += X[2] * grid_view(G.l, g);
        out += acc0.cwiseProduct(Y[0]).rowwise().sum();
        if (has(G.gy)) out += (X[0] * grid_view(G.gy, g)).cwiseProduct(Y[1]).rowwise().sum();
        if (has(G.l)) out += (X[0] * grid_view(G.l, g)).cwiseProduct(Y[2]).rowwise().sum();
        return out;
    }
    if (has(G.v)) out.noalias() += D.v * G.v;
    if (has(G.gx)) out.noalias() += D.g[0] * G.gx;
    if (has(G.gy)) out.noalias() += D.g[1] * G.gy;
    if (has(G.l)) out.noalias() += D.l * G.l;
    return out;
}

Mat RegionBasis::gram(const Region& r) const {
    if (P == 0) return Mat(0, 0);
    if (separable) {
        if (!r.separable_weights()) throw std::logic_error("gram: separable basis needs separable weights");
        const auto wx = Eigen::Map<const Vec>(r.wx.data(), static_cast<Index>(r.wx.size()));
        const auto wy = Eigen::Map<const Vec>(r.wy.data(), static_cast<Index>(r.wy.size()));
        auto g = [](const Mat& a, const auto& w, const Mat& b) -> Mat { return a * w.asDiagonal() * b.transpose(); };
        const Mat x00 = g(X[0], wx, X[0]), y00 = g(Y[0], wy, Y[0]);
        Mat A = r.alpha * (g(X[1], wx, X[1]).cwiseProduct(y00) + x00.cwiseProduct(g(Y[1], wy, Y[1])));
        if (r.beta != 0.0) A += r.beta * x00.cwiseProduct(y00);
        return A;
    }
    auto g = [&](const Mat& a) -> Mat { return a * r.w.asDiagonal() * a.transpose(); };
    Mat A = r.alpha * (g(D.g[0]) + g(D.g[1]));
    if (r.beta != 0.0) A += r.beta * g(D.v);
    return A;
}

SubspaceModel::SubspaceModel(const DiscreteProblem& dp, std::vector<ArchitectureSpec> archs)
    : dp_(&dp), archs_(std::move(archs)) {
    const ProblemSpec& s = *dp.spec;
    if (archs_.size() != s.terms.size())
        throw std::invalid_argument("SubspaceModel: " + s.name + " needs " + std::to_string(s.terms.size()) + " networks");
    for (const auto& a : archs_) {
        a.validate();
        boff_.push_back(P_);
        poff_.push_back(nparams_);
        nets_.emplace_back(a);
        P_ += a.output_dim;
        nparams_ += nets_.back().num_params();
    }
    bases_.resize(dp.regions.size());
    for (std::size_t r = 0; r < dp.regions.size(); ++r) {
        const Region& reg = dp.regions[r];
        RegionBasis& B = bases_[r];
        const Grid& g = *reg.grid;
        B.separable = g.tensor;
        for (int t : reg.terms) B.separable = B.separable && nets_[t].is_tnn() && s.terms[t].factor.separable;
        for (int t : reg.terms) {
            TermBlock blk;
            blk.term = t;
            blk.row0 = B.P;
            blk.p = archs_[t].output_dim;
            for (int j = 0; j < blk.p; ++j) B.rows.push_back(boff_[t] + j);
            B.P += blk.p;
            const Factor& f = s.terms[t].factor;
            if (B.separable) {
                blk.fx.resize(3, g.nx());
                blk.fy.resize(3, g.ny());
                for (Index i = 0; i < g.nx(); ++i) {
                    const Jet1 j = f.fx(g.xs[i]);
                    blk.fx.col(i) << j.v, j.d1, j.d2;
                }
                for (Index i = 0; i < g.ny(); ++i) {
                    const Jet1 j = f.fy(g.ys[i]);
                    blk.fy.col(i) << j.v, j.d1, j.d2;
                }
            } else {
                blk.fac.resize(4, g.size());
                for (Index q = 0; q < g.size(); ++q) {
                    const Jet2 j = f(g.pts[q][0], g.pts[q][1]);
                    blk.fac.col(q) << j.v, j.gx, j.gy, j.lap;
                }
            }
            B.blocks.push_back(std::move(blk));
        }
    }
}

ParameterVector SubspaceModel::init(std::uint64_t seed) const {
    ParameterVector th;
    th.reserve(nparams_);
    for (std::size_t k = 0; k < archs_.size(); ++k) {
        const auto p = init_params(archs_[k], seed + k);
        th.insert(th.end(), p.begin(), p.end());
    }
    return th;
}

ParameterVector SubspaceModel::term_params(const ParameterVector& theta, int term) const {
    const auto b = theta.begin() + static_cast<std::ptrdiff_t>(poff_[term]);
    return {b, b + static_cast<std::ptrdiff_t>(nets_[term].num_params())};
}

void SubspaceModel::forward(const ParameterVector& theta) {
    if (theta.size() != nparams_) throw std::invalid_argument("SubspaceModel::forward: parameter count mismatch");
    for (std::size_t r = 0; r < bases_.size(); ++r) {
        RegionBasis& B = bases_[r];
        const Grid& g = *dp_->regions[r].grid;
        if (B.separable) {
            for (int k = 0; k < 3; ++k) {
                B.X[k].resize(B.P, g.nx());
                B.Y[k].resize(B.P, g.ny());
            }
        } else {
            B.D = Jets(B.P, g.size(), 2);
        }
        Mat xr, yr;
        if (B.separable) {
            xr = row_coords(g.xs);
            yr = row_coords(g.ys);
        } else {
            xr.resize(1, g.size());
            yr.resize(1, g.size());
            for (Index q = 0; q < g.size(); ++q) {
                xr(0, q) = g.pts[q][0];
                yr(0, q) = g.pts[q][1];
            }
        }
        for (auto& blk : B.blocks) {
            const Network& net = nets_[blk.term];
            const double* th = theta.data() + poff_[blk.term];
            if (B.separable) {
                blk.a = net.subnet(0).forward(th, xr, &blk.ta);
                blk.b = net.subnet(1).forward(th + net.subnet_offset(1), yr, &blk.tb);
                auto put = [&](Mat* Z, const Jets& n, const Mat& f) {
                    const auto f0 = f.row(0).array(), f1 = f.row(1).array(), f2 = f.row(2).array();
                    const auto v = n.v.array(), d = n.g[0].array(), l = n.l.array();
                    Z[0].middleRows(blk.row0, blk.p) = v.rowwise() * f0;
                    Z[1].middleRows(blk.row0, blk.p) = v.rowwise() * f1 + d.rowwise() * f0;
                    Z[2].middleRows(blk.row0, blk.p) = v.rowwise() * f2 + 2.0 * (d.rowwise() * f1) + l.rowwise() * f0;
                };
                put(B.X, blk.a, blk.fx);
                put(B.Y, blk.b, blk.fy);
                continue;
            }
            if (net.is_tnn()) {
                blk.a = net.subnet(0).forward(th, xr, &blk.ta);
                blk.b = net.subnet(1).forward(th + net.subnet_offset(1), yr, &blk.tb);
                blk.net = Jets(blk.p, g.size(), 2);
                blk.net.v = blk.a.v.cwiseProduct(blk.b.v);
                blk.net.g[0] = blk.a.g[0].cwiseProduct(blk.b.v);
                blk.net.g[1] = blk.a.v.cwiseProduct(blk.b.g[0]);
                blk.net.l = blk.a.l.cwiseProduct(blk.b.v) + blk.a.v.cwiseProduct(blk.b.l);
            } else {
                Mat x(2, g.size());
                x.row(0) = xr;
                x.row(1) = yr;
                blk.net = net.mlp().forward(th, x, &blk.ta);
            }
            const auto F0 = blk.fac.row(0).array(), Fx = blk.fac.row(1).array(), Fy = blk.fac.row(2).array(),
                       Fl = blk.fac.row(3).array();
            const auto v = blk.net.v.array(), gx = blk.net.g[0].array(), gy = blk.net.g[1].array(), l = blk.net.l.array();
            B.D.v.middleRows(blk.row0, blk.p) = v.rowwise() * F0;
            B.D.g[0].middleRows(blk.row0, blk.p) = v.rowwise() * Fx + gx.rowwise() * F0;
            B.D.g[1].middleRows(blk.row0, blk.p) = v.rowwise() * Fy + gy.rowwise() * F0;
            B.D.l.middleRows(blk.row0, blk.p) =
                v.rowwise() * Fl + 2.0 * (gx.rowwise() * Fx + gy.rowwise() * Fy) + l.rowwise() * F0;
        }
    }
}

std::vector<Field> SubspaceModel::fields(const Vec& c) const {
    std::vector<Field> out;
    out.reserve(bases_.size());
    for (std::size_t r = 0; r < bases_.size(); ++r) {
        const Region& reg = dp_->regions[r];
        Field F = bases_[r].synthesize(*reg.grid, bases_[r].gather(c));
        if (!reg.lift.empty()) F += reg.lift;
        out.push_back(std::move(F));
    }
    return out;
}

ParameterVector SubspaceModel::backward(const ParameterVector& theta, const Vec& c, const std::vector<Field>& adj) const {
    if (adj.size() != bases_.size()) throw std::invalid_argument("SubspaceModel::backward: one adjoint per region expected");
    ParameterVector grad(nparams_, 0.0);
    for (std::size_t r = 0; r < bases_.size(); ++r) {
        const RegionBasis& B = bases_[r];
        if (B.P == 0) continue;
        const Grid& g = *dp_->regions[r].grid;
        const Field& A = adj[r];
        if (A.size() != g.size()) throw std::invalid_argument("SubspaceModel::backward: adjoint size mismatch");
        const Vec cl = B.gather(c);
        const auto cd = cl.asDiagonal();
        if (B.separable) {
            const auto U = grid_view(A.v, g), Ux = grid_view(A.gx, g), Uy = grid_view(A.gy, g), UL = grid_view(A.l, g);
            Mat Xb[3], Yb[3];
            Xb[0] = cd * (B.Y[0] * U.transpose() + B.Y[1] * Uy.transpose() + B.Y[2] * UL.transpose());
            Xb[1] = cd * (B.Y[0] * Ux.transpose());
            Xb[2] = cd * (B.Y[0] * UL.transpose());
            Yb[0] = cd * (B.X[0] * U + B.X[1] * Ux + B.X[2] * UL);
            Yb[1] = cd * (B.X[0] * Uy);
            Yb[2] = cd * (B.X[0] * UL);
            for (const auto& blk : B.blocks) {
                const Network& net = nets_[blk.term];
                const double* th = theta.data() + poff_[blk.term];
                double* gr = grad.data() + poff_[blk.term];
                auto pull = [&](const Mat* Zb, const Mat& f, Index n) {
                    Jets a(blk.p, n, 1);
                    const auto f0 = f.row(0).array(), f1 = f.row(1).array(), f2 = f.row(2).array();
                    const auto z0 = Zb[0].middleRows(blk.row0, blk.p).array(), z1 = Zb[1].middleRows(blk.row0, blk.p).array(),
                               z2 = Zb[2].middleRows(blk.row0, blk.p).array();
                    a.v = z0.rowwise() * f0 + z1.rowwise() * f1 + z2.rowwise() * f2;
                    a.g[0] = z1.rowwise() * f0 + 2.0 * (z2.rowwise() * f1);
                    a.l = z2.rowwise() * f0;
                    return a;
                };
                net.subnet(0).backward(th, blk.ta, pull(Xb, blk.fx, g.nx()), gr);
                net.subnet(1).backward(th + net.subnet_offset(1), blk.tb, pull(Yb, blk.fy, g.ny()),
                                       gr + net.subnet_offset(1));
            }
            continue;
        }
        for (const auto& blk : B.blocks) {
            const Network& net = nets_[blk.term];
            const double* th = theta.data() + poff_[blk.term];
            double* gr = grad.data() + poff_[blk.term];
            const auto cb = cl.segment(blk.row0, blk.p);
            // adjoints of phi = F * N, then of N
            const auto F0 = blk.fac.row(0).array(), Fx = blk.fac.row(1).array(), Fy = blk.fac.row(2).array(),
                       Fl = blk.fac.row(3).array();
            const Eigen::Array<double, 1, Eigen::Dynamic> av = A.v.transpose().array(), ax = A.gx.transpose().array(),
                                                          ay = A.gy.transpose().array(), al = A.l.transpose().array();
            const Eigen::Array<double, 1, Eigen::Dynamic> nv = F0 * av + Fx * ax + Fy * ay + Fl * al, ngx = F0 * ax + 2.0 * Fx * al,
                                                          ngy = F0 * ay + 2.0 * Fy * al, nl = F0 * al;
            Jets N(blk.p, g.size(), 2);
            N.v.noalias() = cb * nv.matrix();
            N.g[0].noalias() = cb * ngx.matrix();
            N.g[1].noalias() = cb * ngy.matrix();
            N.l.noalias() = cb * nl.matrix();
            if (!net.is_tnn()) {
                net.mlp().backward(th, blk.ta, N, gr);
                continue;
            }
            const Jets& a = blk.a;
            const Jets& b = blk.b;
            Jets abar(blk.p, g.size(), 1), bbar(blk.p, g.size(), 1);
            abar.v = N.v.cwiseProduct(b.v) + N.g[1].cwiseProduct(b.g[0]) + N.l.cwiseProduct(b.l);
            abar.g[0] = N.g[0].cwiseProduct(b.v);
            abar.l = N.l.cwiseProduct(b.v);
            bbar.v = N.v.cwiseProduct(a.v) + N.g[0].cwiseProduct(a.g[0]) + N.l.cwiseProduct(a.l);
            bbar.g[0] = N.g[1].cwiseProduct(a.v);
            bbar.l = N.l.cwiseProduct(a.v);
            net.subnet(0).backward(th, blk.ta, abar, gr);
            net.subnet(1).backward(th + net.subnet_offset(1), blk.tb, bbar, gr + net.subnet_offset(1));
        }
    }
    return grad;
}

}  // namespace nsg
