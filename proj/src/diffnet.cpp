#include "nsg/diffnet.hpp"

#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace nsg {

using Eigen::Index;
using Eigen::Map;

std::string to_string(Family f) {
    switch (f) {
        case Family::fnn2d: return "fnn2d";
        case Family::resnet2d: return "resnet2d";
        case Family::tnn: return "tnn";
    }
    return "?";
}

Family family_from_string(const std::string& s) {
    if (s == "fnn2d") return Family::fnn2d;
    if (s == "resnet2d") return Family::resnet2d;
    if (s == "tnn") return Family::tnn;
    throw std::invalid_argument("unknown network family: " + s);
}

void ArchitectureSpec::validate() const {
    if (activation != "sin") throw std::invalid_argument("only the sin activation is supported, got " + activation);
    if (output_dim < 1) throw std::invalid_argument("output_dim must be positive");
    if (hidden_widths.empty()) throw std::invalid_argument("at least one hidden layer required");
    for (int w : hidden_widths)
        if (w < 1) throw std::invalid_argument("hidden widths must be positive");
    if (skip_period < 0) throw std::invalid_argument("skip_period must be >= 0");
    if (!(first_layer_scale > 0)) throw std::invalid_argument("first_layer_scale must be > 0");
    if (family == Family::fnn2d && skip_period != 0)
        throw std::invalid_argument("skip_period requires family resnet2d (or tnn subnetworks)");
    if (family == Family::resnet2d && skip_period < 1) throw std::invalid_argument("resnet2d requires skip_period >= 1");
    if (family == Family::tnn) {
        if (input_dim != 2) throw std::invalid_argument("tnn needs input_dim 2 (two 1D subnetworks)");
    } else if (input_dim != 2) {
        throw std::invalid_argument("fnn2d/resnet2d need input_dim 2");
    }
    if (skip_period > 0) {
        for (std::size_t k = skip_period; k < hidden_widths.size(); k += skip_period)
            if (hidden_widths[k] != hidden_widths[k - skip_period])
                throw std::invalid_argument("residual connection between layers of different width");
    }
}

Jets::Jets(Index rows, Index cols, int dim) : v(Mat::Zero(rows, cols)), g(dim, Mat::Zero(rows, cols)), l(Mat::Zero(rows, cols)) {
    if (dim == 0) l.resize(0, 0);
}

void Jets::set_zero() {
    v.setZero();
    for (auto& m : g) m.setZero();
    l.setZero();
}

SineMlp::SineMlp(int in_dim, std::vector<int> hidden, int out_dim, int skip_period)
    : in_(in_dim), out_(out_dim), skip_(skip_period) {
    widths_.push_back(in_dim);
    widths_.insert(widths_.end(), hidden.begin(), hidden.end());
    widths_.push_back(out_dim);
    std::size_t off = 0;
    for (std::size_t k = 0; k + 1 < widths_.size(); ++k) {
        w_off_.push_back(off);
        off += static_cast<std::size_t>(widths_[k]) * widths_[k + 1];
        b_off_.push_back(off);
        off += widths_[k + 1];
    }
    num_params_ = off;
}

namespace {

bool has_skip(int k, int skip) { return skip > 0 && k >= skip && k % skip == 0; }

void check_finite(const Jets& j, int layer) {
    bool ok = j.v.allFinite() && (j.l.size() == 0 || j.l.allFinite());
    for (const auto& g : j.g) ok = ok && g.allFinite();
    if (!ok) throw std::runtime_error("non-finite activation in layer " + std::to_string(layer));
}

}  // namespace

Jets SineMlp::forward_chunk(const double* theta, const Mat& x, ChunkTape* tape, bool derivs) const {
    const int d = derivs ? in_ : 0;
    const Index m = x.cols();
    const int nh = num_layers() - 1;
    std::vector<Jets> hs(nh);
    std::vector<Jets> zs(tape ? nh : 0);

    for (int k = 0; k < nh; ++k) {
        // aligned copies: Eigen's reduction order depends on pointer alignment
        const Mat W = Map<const Mat>(theta + w_off_[k], widths_[k + 1], widths_[k]);
        const Vec b = Map<const Vec>(theta + b_off_[k], widths_[k + 1]);
        Jets z;
        z.v.noalias() = W * (k == 0 ? x : hs[k - 1].v);
        z.v.colwise() += b;
        z.g.resize(d);
        if (d > 0) {
            if (k == 0) {
                for (int c = 0; c < d; ++c) z.g[c] = W.col(c).replicate(1, m);
                z.l = Mat::Zero(widths_[k + 1], m);
            } else {
                for (int c = 0; c < d; ++c) z.g[c].noalias() = W * hs[k - 1].g[c];
                z.l.noalias() = W * hs[k - 1].l;
            }
        }
        Mat s = z.v.array().sin().matrix();
        Mat co = z.v.array().cos().matrix();
        Jets h;
        h.v = s;
        h.g.resize(d);
        Mat g2;
        if (d > 0) {
            g2 = Mat::Zero(z.v.rows(), m);
            for (int c = 0; c < d; ++c) {
                g2.array() += z.g[c].array().square();
                h.g[c] = (co.array() * z.g[c].array()).matrix();
            }
            h.l = (co.array() * z.l.array() - s.array() * g2.array()).matrix();
        }
        if (has_skip(k, skip_)) {
            h.v += hs[k - skip_].v;
            for (int c = 0; c < d; ++c) h.g[c] += hs[k - skip_].g[c];
            if (d > 0) h.l += hs[k - skip_].l;
        }
        check_finite(h, k);
        if (tape) {
            tape->s.push_back(std::move(s));
            tape->c.push_back(std::move(co));
            tape->z_g2.push_back(std::move(g2));
            zs[k] = std::move(z);
        }
        hs[k] = std::move(h);
    }

    const int L = nh;
    const Mat W = Map<const Mat>(theta + w_off_[L], widths_[L + 1], widths_[L]);
    const Vec b = Map<const Vec>(theta + b_off_[L], widths_[L + 1]);
    Jets y;
    y.v.noalias() = W * hs[L - 1].v;
    y.v.colwise() += b;
    y.g.resize(d);
    for (int c = 0; c < d; ++c) y.g[c].noalias() = W * hs[L - 1].g[c];
    if (d > 0) y.l.noalias() = W * hs[L - 1].l;
    check_finite(y, L);

    if (tape) {
        tape->x = x;
        tape->z = std::move(zs);
        tape->h = std::move(hs);
    }
    return y;
}

Jets SineMlp::forward(const double* theta, const Mat& x, Tape* tape, bool derivs) const {
    if (x.rows() != in_) throw std::invalid_argument("SineMlp::forward: input dimension mismatch");
    const Index m = x.cols();
    const Index nchunks = (m + kChunk - 1) / kChunk;
    const int d = derivs ? in_ : 0;
    Jets out(out_, m, d);
    if (tape) {
        tape->chunks.assign(nchunks, ChunkTape{});
        tape->starts.resize(nchunks);
        tape->derivs = derivs;
    }
    std::string err;
#pragma omp parallel for schedule(static)
    for (Index ch = 0; ch < nchunks; ++ch) {
        const Index s = ch * kChunk;
        const Index len = std::min(kChunk, m - s);
        try {
            Jets y = forward_chunk(theta, x.middleCols(s, len), tape ? &tape->chunks[ch] : nullptr, derivs);
            out.v.middleCols(s, len) = y.v;
            for (int c = 0; c < d; ++c) out.g[c].middleCols(s, len) = y.g[c];
            if (d > 0) out.l.middleCols(s, len) = y.l;
        } catch (const std::exception& e) {
#pragma omp critical
            if (err.empty()) err = e.what();
        }
        if (tape) tape->starts[ch] = s;
    }
    if (!err.empty()) throw std::runtime_error(err);
    return out;
}

void SineMlp::backward_chunk(const double* theta, const ChunkTape& t, const Jets& adj, double* grad) const {
    const int d = adj.dim();
    const int nh = num_layers() - 1;
    const Index m = adj.cols();
    std::vector<Jets> hbar(nh);
    for (int k = 0; k < nh; ++k) hbar[k] = Jets(widths_[k + 1], m, d);

    {
        const int L = nh;
        const Mat W = Map<const Mat>(theta + w_off_[L], widths_[L + 1], widths_[L]);
        const Jets& h = t.h[L - 1];
        Mat gW = adj.v * h.v.transpose();
        for (int c = 0; c < d; ++c) gW.noalias() += adj.g[c] * h.g[c].transpose();
        if (d > 0) gW.noalias() += adj.l * h.l.transpose();
        const Vec gb = adj.v.rowwise().sum();
        Map<Mat>(grad + w_off_[L], widths_[L + 1], widths_[L]) += gW;
        Map<Vec>(grad + b_off_[L], widths_[L + 1]) += gb;
        hbar[L - 1].v.noalias() += W.transpose() * adj.v;
        for (int c = 0; c < d; ++c) hbar[L - 1].g[c].noalias() += W.transpose() * adj.g[c];
        if (d > 0) hbar[L - 1].l.noalias() += W.transpose() * adj.l;
    }

    for (int k = nh - 1; k >= 0; --k) {
        const Jets& A = hbar[k];
        if (has_skip(k, skip_)) {
            Jets& dst = hbar[k - skip_];
            dst.v += A.v;
            for (int c = 0; c < d; ++c) dst.g[c] += A.g[c];
            if (d > 0) dst.l += A.l;
        }
        const auto s = t.s[k].array();
        const auto co = t.c[k].array();
        const Jets& z = t.z[k];
        Jets zb;
        zb.g.resize(d);
        if (d > 0) {
            Mat acc = A.v.array() * co - A.l.array() * (co * t.z_g2[k].array() + s * z.l.array());
            for (int c = 0; c < d; ++c) {
                acc.array() -= s * A.g[c].array() * z.g[c].array();
                zb.g[c] = (A.g[c].array() * co - 2.0 * A.l.array() * s * z.g[c].array()).matrix();
            }
            zb.v = std::move(acc);
            zb.l = (A.l.array() * co).matrix();
        } else {
            zb.v = (A.v.array() * co).matrix();
        }

        const Mat W = Map<const Mat>(theta + w_off_[k], widths_[k + 1], widths_[k]);
        Mat gW;
        Map<Vec>(grad + b_off_[k], widths_[k + 1]) += Vec(zb.v.rowwise().sum());
        if (k == 0) {
            gW = zb.v * t.x.transpose();
            for (int c = 0; c < d; ++c) gW.col(c) += zb.g[c].rowwise().sum();
        } else {
            const Jets& h = t.h[k - 1];
            gW = zb.v * h.v.transpose();
            for (int c = 0; c < d; ++c) gW.noalias() += zb.g[c] * h.g[c].transpose();
            if (d > 0) gW.noalias() += zb.l * h.l.transpose();
            hbar[k - 1].v.noalias() += W.transpose() * zb.v;
            for (int c = 0; c < d; ++c) hbar[k - 1].g[c].noalias() += W.transpose() * zb.g[c];
            if (d > 0) hbar[k - 1].l.noalias() += W.transpose() * zb.l;
        }
        Map<Mat>(grad + w_off_[k], widths_[k + 1], widths_[k]) += gW;
    }
}

void SineMlp::backward(const double* theta, const Tape& tape, const Jets& adj, double* grad) const {
    const Index nchunks = static_cast<Index>(tape.chunks.size());
    const int d = tape.derivs ? in_ : 0;
    if (adj.rows() != out_ || adj.dim() != d) throw std::invalid_argument("SineMlp::backward: adjoint shape mismatch");
    std::vector<std::vector<double>> part(nchunks, std::vector<double>(num_params_, 0.0));
#pragma omp parallel for schedule(static)
    for (Index ch = 0; ch < nchunks; ++ch) {
        const Index s = tape.starts[ch];
        const Index len = tape.chunks[ch].x.cols();
        Jets a;
        a.v = adj.v.middleCols(s, len);
        a.g.resize(d);
        for (int c = 0; c < d; ++c) a.g[c] = adj.g[c].middleCols(s, len);
        if (d > 0) a.l = adj.l.middleCols(s, len);
        backward_chunk(theta, tape.chunks[ch], a, part[ch].data());
    }
    for (Index ch = 0; ch < nchunks; ++ch)
        for (std::size_t i = 0; i < num_params_; ++i) grad[i] += part[ch][i];
}

Network::Network(const ArchitectureSpec& arch) : arch_(arch) {
    arch_.validate();
    if (arch_.family == Family::tnn) {
        nets_.emplace_back(1, arch_.hidden_widths, arch_.output_dim, arch_.skip_period);
        nets_.emplace_back(1, arch_.hidden_widths, arch_.output_dim, arch_.skip_period);
    } else {
        nets_.emplace_back(2, arch_.hidden_widths, arch_.output_dim, arch_.skip_period);
    }
}

std::size_t Network::num_params() const {
    std::size_t n = 0;
    for (const auto& m : nets_) n += m.num_params();
    return n;
}

std::vector<LayoutEntry> Network::layout() const {
    std::vector<LayoutEntry> out;
    std::size_t base = 0;
    for (std::size_t s = 0; s < nets_.size(); ++s) {
        const auto& m = nets_[s];
        for (int k = 0; k < m.num_layers(); ++k) {
            out.push_back({static_cast<int>(s), k, 'W', base + m.w_offset(k), m.fan_out(k), m.fan_in(k)});
            out.push_back({static_cast<int>(s), k, 'b', base + m.b_offset(k), m.fan_out(k), 1});
        }
        base += m.num_params();
    }
    return out;
}

std::size_t param_count(const ArchitectureSpec& arch) { return Network(arch).num_params(); }

std::vector<LayoutEntry> param_layout(const ArchitectureSpec& arch) { return Network(arch).layout(); }

ParameterVector init_params(const ArchitectureSpec& arch, std::uint64_t seed) {
    Network net(arch);
    ParameterVector p(net.num_params());
    std::mt19937_64 rng(seed);
    for (const auto& e : net.layout()) {
        if (e.kind == 'W') {
            const double bound = std::sqrt(6.0 / (e.rows + e.cols)) * (e.layer == 0 ? arch.first_layer_scale : 1.0);
            std::uniform_real_distribution<double> u(-bound, bound);
            for (int i = 0; i < e.rows * e.cols; ++i) p[e.offset + i] = u(rng);
        } else {
            std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
            for (int i = 0; i < e.rows; ++i) p[e.offset + i] = u(rng);
        }
    }
    return p;
}

namespace {

Mat points_matrix(const Points& pts) {
    Mat x(2, static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        x(0, i) = pts[i][0];
        x(1, i) = pts[i][1];
    }
    return x;
}

void check_params(const Network& net, const ParameterVector& params) {
    if (params.size() != net.num_params())
        throw std::invalid_argument("parameter vector length does not match the architecture");
}

}  // namespace

BasisEvaluation eval_basis(const ArchitectureSpec& arch, const ParameterVector& params, const Points& points) {
    Network net(arch);
    check_params(net, params);
    const Mat x = points_matrix(points);
    if (!net.is_tnn()) return net.mlp().forward(params.data(), x, nullptr);
    Jets a = net.subnet(0).forward(params.data(), x.row(0), nullptr);
    Jets b = net.subnet(1).forward(params.data() + net.subnet_offset(1), x.row(1), nullptr);
    Jets out(net.rank(), x.cols(), 2);
    out.v = a.v.cwiseProduct(b.v);
    out.g[0] = a.g[0].cwiseProduct(b.v);
    out.g[1] = a.v.cwiseProduct(b.g[0]);
    out.l = a.l.cwiseProduct(b.v) + a.v.cwiseProduct(b.l);
    return out;
}

BasisEvaluation eval_tnn_on_grid(const ArchitectureSpec& arch, const ParameterVector& params,
                                 const std::vector<double>& grid_x, const std::vector<double>& grid_y) {
    Network net(arch);
    if (!net.is_tnn()) throw std::invalid_argument("eval_tnn_on_grid requires the tnn family");
    check_params(net, params);
    const Index nx = static_cast<Index>(grid_x.size()), ny = static_cast<Index>(grid_y.size());
    Jets a = net.subnet(0).forward(params.data(), Map<const Mat>(grid_x.data(), 1, nx), nullptr);
    Jets b = net.subnet(1).forward(params.data() + net.subnet_offset(1), Map<const Mat>(grid_y.data(), 1, ny), nullptr);
    const int p = net.rank();
    Jets out(p, nx * ny, 2);
    for (Index i = 0; i < nx; ++i) {
        for (Index j = 0; j < ny; ++j) {
            const Index q = i * ny + j;
            for (int r = 0; r < p; ++r) {
                out.v(r, q) = a.v(r, i) * b.v(r, j);
                out.g[0](r, q) = a.g[0](r, i) * b.v(r, j);
                out.g[1](r, q) = a.v(r, i) * b.g[0](r, j);
                out.l(r, q) = a.l(r, i) * b.v(r, j) + a.v(r, i) * b.l(r, j);
            }
        }
    }
    return out;
}

ParameterVector loss_param_gradient(const ArchitectureSpec& arch, const ParameterVector& params, const Points& points,
                                    const BasisEvaluation& adj) {
    Network net(arch);
    check_params(net, params);
    const Mat x = points_matrix(points);
    if (adj.rows() != net.rank() || adj.cols() != x.cols() || adj.dim() != 2)
        throw std::invalid_argument("loss_param_gradient: adjoint shape mismatch");
    ParameterVector grad(net.num_params(), 0.0);
    if (!net.is_tnn()) {
        SineMlp::Tape tape;
        net.mlp().forward(params.data(), x, &tape);
        net.mlp().backward(params.data(), tape, adj, grad.data());
        return grad;
    }
    SineMlp::Tape ta, tb;
    Jets a = net.subnet(0).forward(params.data(), x.row(0), &ta);
    Jets b = net.subnet(1).forward(params.data() + net.subnet_offset(1), x.row(1), &tb);
    Jets abar(a.rows(), a.cols(), 1), bbar(b.rows(), b.cols(), 1);
    abar.v = adj.v.cwiseProduct(b.v) + adj.g[1].cwiseProduct(b.g[0]) + adj.l.cwiseProduct(b.l);
    abar.g[0] = adj.g[0].cwiseProduct(b.v);
    abar.l = adj.l.cwiseProduct(b.v);
    bbar.v = adj.v.cwiseProduct(a.v) + adj.g[0].cwiseProduct(a.g[0]) + adj.l.cwiseProduct(a.l);
    bbar.g[0] = adj.g[1].cwiseProduct(a.v);
    bbar.l = adj.l.cwiseProduct(a.v);
    net.subnet(0).backward(params.data(), ta, abar, grad.data());
    net.subnet(1).backward(params.data() + net.subnet_offset(1), tb, bbar, grad.data() + net.subnet_offset(1));
    return grad;
}

nlohmann::json arch_to_json(const ArchitectureSpec& a) {
    return {{"family", to_string(a.family)},   {"input_dim", a.input_dim},
            {"output_dim", a.output_dim},      {"hidden_widths", a.hidden_widths},
            {"activation", a.activation},      {"skip_period", a.skip_period},
            {"first_layer_scale", a.first_layer_scale}};
}

ArchitectureSpec arch_from_json(const nlohmann::json& j) {
    ArchitectureSpec a;
    a.family = family_from_string(j.at("family").get<std::string>());
    a.input_dim = j.value("input_dim", 2);
    a.output_dim = j.at("output_dim").get<int>();
    a.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
    a.activation = j.value("activation", a.activation);
    a.skip_period = j.value("skip_period", a.skip_period);
    a.first_layer_scale = j.value("first_layer_scale", a.first_layer_scale);
    return a;
}

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
    nlohmann::json h;
    h["format_version"] = 1;
    h["dtype"] = "float64-le";
    h["count"] = ck.params.size();
    nlohmann::json nets = nlohmann::json::array();
    std::size_t off = 0;
    for (std::size_t i = 0; i < ck.archs.size(); ++i) {
        nlohmann::json n;
        n["arch"] = arch_to_json(ck.archs[i]);
        n["seed"] = i < ck.seeds.size() ? ck.seeds[i] : 0;
        n["offset"] = off;
        nlohmann::json lay = nlohmann::json::array();
        for (const auto& e : param_layout(ck.archs[i]))
            lay.push_back({{"subnet", e.subnet}, {"layer", e.layer}, {"kind", std::string(1, e.kind)},
                           {"offset", off + e.offset}, {"rows", e.rows}, {"cols", e.cols}});
        n["layout"] = lay;
        off += param_count(ck.archs[i]);
        nets.push_back(n);
    }
    if (off != ck.params.size()) throw std::invalid_argument("checkpoint: parameter count mismatch");
    h["networks"] = nets;
    h["extra"] = nlohmann::json::parse(ck.extra_json);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << h.dump() << '\n';
    os.write(reinterpret_cast<const char*>(ck.params.data()), static_cast<std::streamsize>(ck.params.size() * sizeof(double)));
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(is, line);
    const auto h = nlohmann::json::parse(line);
    if (h.at("format_version").get<int>() != 1) throw std::runtime_error("unsupported checkpoint version");
    Checkpoint ck;
    for (const auto& n : h.at("networks")) {
        ck.archs.push_back(arch_from_json(n.at("arch")));
        ck.seeds.push_back(n.at("seed").get<std::uint64_t>());
    }
    ck.extra_json = h.at("extra").dump();
    ck.params.resize(h.at("count").get<std::size_t>());
    is.read(reinterpret_cast<char*>(ck.params.data()), static_cast<std::streamsize>(ck.params.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated checkpoint " + path);
    return ck;
}

}  // namespace nsg
