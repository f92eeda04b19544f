#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace nsg {

enum class Family { fnn2d, resnet2d, tnn };

std::string to_string(Family f);
Family family_from_string(const std::string& s);

struct ArchitectureSpec {
    Family family = Family::fnn2d;
    int input_dim = 2;
    int output_dim = 1;  // p
    std::vector<int> hidden_widths;
    std::string activation = "sin";
    int skip_period = 0;  // 0: no residual connections
    // multiplies the Glorot bound of the first weight layer; wider input
    // frequencies keep the initial basis from being numerically low rank
    double first_layer_scale = 1.0;

    void validate() const;
};

// Rows are basis functions / units, columns are points.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Value, gradient and Laplacian channels of a batch of functions.
struct Jets {
    Mat v;
    std::vector<Mat> g;
    Mat l;

    Jets() = default;
    Jets(Eigen::Index rows, Eigen::Index cols, int dim);
    Eigen::Index rows() const { return v.rows(); }
    Eigen::Index cols() const { return v.cols(); }
    int dim() const { return static_cast<int>(g.size()); }
    void set_zero();
};

using BasisEvaluation = Jets;

struct LayoutEntry {
    int subnet;
    int layer;
    char kind;  // 'W' or 'b'
    std::size_t offset;
    int rows;
    int cols;
};

using ParameterVector = std::vector<double>;

// Fully connected sin network R^in -> R^out with a linear output layer.
class SineMlp {
public:
    SineMlp() = default;
    SineMlp(int in_dim, std::vector<int> hidden, int out_dim, int skip_period);

    std::size_t num_params() const { return num_params_; }
    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
    int skip_period() const { return skip_; }
    int fan_in(int layer) const { return widths_[layer]; }
    int fan_out(int layer) const { return widths_[layer + 1]; }
    std::size_t w_offset(int layer) const { return w_off_[layer]; }
    std::size_t b_offset(int layer) const { return b_off_[layer]; }

    struct ChunkTape {
        std::vector<Jets> h;  // h[k]: output of hidden layer k
        std::vector<Mat> z_g2;
        std::vector<Jets> z;
        std::vector<Mat> s, c;
        Mat x;
    };
    struct Tape {
        std::vector<ChunkTape> chunks;
        std::vector<Eigen::Index> starts;
        bool derivs = true;
    };

    // x is in_dim x M. With derivs == false only the value channel is filled.
    Jets forward(const double* theta, const Mat& x, Tape* tape, bool derivs = true) const;
    // Accumulates dL/dtheta into grad given adjoints of the output jets.
    void backward(const double* theta, const Tape& tape, const Jets& adj, double* grad) const;

    static constexpr Eigen::Index kChunk = 256;

private:
    Jets forward_chunk(const double* theta, const Mat& x, ChunkTape* tape, bool derivs) const;
    void backward_chunk(const double* theta, const ChunkTape& tape, const Jets& adj, double* grad) const;

    int in_ = 0, out_ = 0, skip_ = 0;
    std::vector<int> widths_;
    std::vector<std::size_t> w_off_, b_off_;
    std::size_t num_params_ = 0;
};

// A network as used for one trial-function term: either a single 2D MLP or
// a rank-p tensor network built from two 1D MLPs.
class Network {
public:
    Network() = default;
    explicit Network(const ArchitectureSpec& arch);

    const ArchitectureSpec& arch() const { return arch_; }
    std::size_t num_params() const;
    int rank() const { return arch_.output_dim; }
    bool is_tnn() const { return arch_.family == Family::tnn; }
    const SineMlp& mlp() const { return nets_[0]; }
    const SineMlp& subnet(int k) const { return nets_[k]; }
    std::size_t subnet_offset(int k) const { return k == 0 ? 0 : nets_[0].num_params(); }

    std::vector<LayoutEntry> layout() const;

private:
    ArchitectureSpec arch_;
    std::vector<SineMlp> nets_;
};

std::size_t param_count(const ArchitectureSpec& arch);
std::vector<LayoutEntry> param_layout(const ArchitectureSpec& arch);
ParameterVector init_params(const ArchitectureSpec& arch, std::uint64_t seed);

using Points = std::vector<std::array<double, 2>>;

BasisEvaluation eval_basis(const ArchitectureSpec& arch, const ParameterVector& params, const Points& points);
BasisEvaluation eval_tnn_on_grid(const ArchitectureSpec& arch, const ParameterVector& params,
                                 const std::vector<double>& grid_x, const std::vector<double>& grid_y);
ParameterVector loss_param_gradient(const ArchitectureSpec& arch, const ParameterVector& params,
                                    const Points& points, const BasisEvaluation& adjoint);

// Straightforward per-point evaluation kept as a reference for the batched kernels.
BasisEvaluation eval_basis_reference(const ArchitectureSpec& arch, const ParameterVector& params,
                                     const Points& points);

nlohmann::json arch_to_json(const ArchitectureSpec& a);
ArchitectureSpec arch_from_json(const nlohmann::json& j);

// Checkpoint: one line of JSON header, then raw little-endian float64 values.
struct Checkpoint {
    std::vector<ArchitectureSpec> archs;
    std::vector<std::uint64_t> seeds;
    ParameterVector params;
    std::string extra_json = "{}";
};
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace nsg
