#include "nsg/galerkin.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>

namespace nsg {

GalerkinSystem assemble(const DiscreteProblem& dp, const std::vector<RegionBasis>& bases, int P) {
    if (bases.size() != dp.regions.size()) throw std::invalid_argument("assemble: one basis per region expected");
    GalerkinSystem sys;
    sys.A = Mat::Zero(P, P);
    sys.B = Vec::Zero(P);
    for (std::size_t r = 0; r < bases.size(); ++r) {
        const Region& reg = dp.regions[r];
        const RegionBasis& b = bases[r];
        if (b.P == 0) continue;
        const Eigen::Index m = reg.size();
        if (!b.separable && b.D.cols() != m)
            throw std::invalid_argument("assemble: basis evaluated at " + std::to_string(b.D.cols()) + " points, region '" +
                                        reg.name + "' has " + std::to_string(m));
        Field G;
        if (reg.role == RegionRole::interface) {
            if (!reg.side_a) continue;  // <g, v> once per piece of Gamma
            G.v = reg.w.cwiseProduct(reg.g);
        } else {
            G.v = reg.load.size() ? reg.load : Vec::Zero(m);
            if (reg.role == RegionRole::volume && !reg.lift.empty()) {
                if (reg.beta != 0.0) G.v -= reg.beta * reg.w.cwiseProduct(reg.lift.v);
                G.gx = -reg.alpha * reg.w.cwiseProduct(reg.lift.gx);
                G.gy = -reg.alpha * reg.w.cwiseProduct(reg.lift.gy);
            }
        }
        const Vec bl = b.contract(*reg.grid, G);
        Mat Al;
        if (reg.role == RegionRole::volume) Al = b.gram(reg);
        for (int i = 0; i < b.P; ++i) {
            sys.B[b.rows[i]] += bl[i];
            if (Al.size())
                for (int j = 0; j < b.P; ++j) sys.A(b.rows[i], b.rows[j]) += Al(i, j);
        }
    }
    sys.A = (0.5 * (sys.A + sys.A.transpose())).eval();
    return sys;
}

const Vec& solve(GalerkinSystem& sys, double rcond) {
    const Eigen::Index p = sys.A.rows();
    if (sys.A.cols() != p || sys.B.size() != p) throw std::invalid_argument("solve: inconsistent system shape");
    sys.pseudo_inverse = false;
    sys.truncated = 0;
    sys.eigenvalues.resize(0);
    Eigen::LLT<Mat> llt(sys.A);
    if (llt.info() == Eigen::Success) {
        const double rc = llt.rcond();
        if (rc >= rcond) {
            sys.c = llt.solve(sys.B);
            sys.condition_estimate = 1.0 / rc;
            return sys.c;
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(sys.A);
    if (es.info() != Eigen::Success) throw DegenerateSubspace("eigendecomposition of the stiffness matrix failed");
    sys.eigenvalues = es.eigenvalues();
    const double lmax = sys.eigenvalues.cwiseAbs().maxCoeff();
    const double cut = rcond * lmax;
    Vec proj = es.eigenvectors().transpose() * sys.B;
    double lmin = lmax;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double l = sys.eigenvalues[i];
        if (l > cut && l > 0) {
            proj[i] /= l;
            lmin = std::min(lmin, l);
        } else {
            proj[i] = 0.0;
            ++sys.truncated;
        }
    }
    if (sys.truncated == p || !(lmax > 0)) throw DegenerateSubspace("degenerate subspace: every eigenvalue is below the truncation threshold");
    sys.c = es.eigenvectors() * proj;
    sys.pseudo_inverse = true;
    sys.condition_estimate = lmax / lmin;
    return sys.c;
}

double residual_inf(const GalerkinSystem& sys) { return (sys.A * sys.c - sys.B).cwiseAbs().maxCoeff(); }

double ritz_quadratic(const GalerkinSystem& sys, const Vec& d) { return 0.5 * d.dot(sys.A * d) - d.dot(sys.B); }

void dump_system(const std::string& path, const GalerkinSystem& sys) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "kind,i,j,value\n" << std::setprecision(17);
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i)
        for (Eigen::Index j = 0; j < sys.A.cols(); ++j) os << "A," << i << ',' << j << ',' << sys.A(i, j) << '\n';
    for (Eigen::Index i = 0; i < sys.B.size(); ++i) os << "B," << i << ",0," << sys.B[i] << '\n';
    for (Eigen::Index i = 0; i < sys.c.size(); ++i) os << "c," << i << ",0," << sys.c[i] << '\n';
    Vec ev = sys.eigenvalues;
    if (ev.size() == 0 && sys.A.size()) ev = Eigen::SelfAdjointEigenSolver<Mat>(sys.A, Eigen::EigenvaluesOnly).eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) os << "eig," << i << ",0," << ev[i] << '\n';
}

}  // namespace nsg
