#include <cmath>

#include "nsg/diffnet.hpp"

namespace nsg {

namespace {

struct PointJet {
    std::vector<double> v, l;
    std::vector<std::vector<double>> g;  // g[c][unit]
};

// One point through an MLP, unit by unit.
PointJet mlp_point(const SineMlp& net, const double* theta, const double* x) {
    const int d = net.in_dim();
    PointJet h;
    h.v.assign(x, x + d);
    h.g.assign(d, std::vector<double>(d, 0.0));
    for (int c = 0; c < d; ++c) h.g[c][c] = 1.0;
    h.l.assign(d, 0.0);
    const int nh = net.num_layers() - 1;
    std::vector<PointJet> hidden;
    for (int k = 0; k <= nh; ++k) {
        const int fi = net.fan_in(k), fo = net.fan_out(k);
        const double* W = theta + net.w_offset(k);  // column-major fo x fi
        const double* b = theta + net.b_offset(k);
        PointJet z;
        z.v.assign(fo, 0.0);
        z.l.assign(fo, 0.0);
        z.g.assign(d, std::vector<double>(fo, 0.0));
        for (int r = 0; r < fo; ++r) {
            double sv = b[r], sl = 0.0;
            for (int j = 0; j < fi; ++j) {
                sv += W[r + j * fo] * h.v[j];
                sl += W[r + j * fo] * h.l[j];
            }
            z.v[r] = sv;
            z.l[r] = sl;
            for (int c = 0; c < d; ++c) {
                double sg = 0.0;
                for (int j = 0; j < fi; ++j) sg += W[r + j * fo] * h.g[c][j];
                z.g[c][r] = sg;
            }
        }
        if (k == nh) return z;
        PointJet a = z;
        for (int r = 0; r < fo; ++r) {
            const double sn = std::sin(z.v[r]), co = std::cos(z.v[r]);
            double g2 = 0.0;
            for (int c = 0; c < d; ++c) {
                g2 += z.g[c][r] * z.g[c][r];
                a.g[c][r] = co * z.g[c][r];
            }
            a.v[r] = sn;
            a.l[r] = co * z.l[r] - sn * g2;
        }
        const int skip = net.skip_period();
        if (skip > 0 && k >= skip && k % skip == 0) {
            const PointJet& e = hidden[k - skip];
            for (int r = 0; r < fo; ++r) {
                a.v[r] += e.v[r];
                a.l[r] += e.l[r];
                for (int c = 0; c < d; ++c) a.g[c][r] += e.g[c][r];
            }
        }
        hidden.push_back(a);
        h = a;
    }
    return h;
}

}  // namespace

BasisEvaluation eval_basis_reference(const ArchitectureSpec& arch, const ParameterVector& params, const Points& points) {
    Network net(arch);
    const int p = net.rank();
    const auto m = static_cast<Eigen::Index>(points.size());
    BasisEvaluation out(p, m, 2);
    for (Eigen::Index q = 0; q < m; ++q) {
        const double* x = points[q].data();
        if (!net.is_tnn()) {
            PointJet y = mlp_point(net.mlp(), params.data(), x);
            for (int r = 0; r < p; ++r) {
                out.v(r, q) = y.v[r];
                out.g[0](r, q) = y.g[0][r];
                out.g[1](r, q) = y.g[1][r];
                out.l(r, q) = y.l[r];
            }
        } else {
            PointJet a = mlp_point(net.subnet(0), params.data(), x);
            PointJet b = mlp_point(net.subnet(1), params.data() + net.subnet_offset(1), x + 1);
            for (int r = 0; r < p; ++r) {
                out.v(r, q) = a.v[r] * b.v[r];
                out.g[0](r, q) = a.g[0][r] * b.v[r];
                out.g[1](r, q) = a.v[r] * b.g[0][r];
                out.l(r, q) = a.l[r] * b.v[r] + a.v[r] * b.l[r];
            }
        }
    }
    return out;
}

}  // namespace nsg
