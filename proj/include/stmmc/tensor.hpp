#ifndef STMMC_TENSOR_HPP
#define STMMC_TENSOR_HPP

#include "stmmc/common.hpp"
#include "stmmc/random.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace stmmc {

enum class Activation { relu, identity, sigmoid };

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

Matrix apply_activation(Matrix pre, Activation act);

/// Multiplies `grad` in place by the activation derivative, expressed through the activation's output.
void activation_backward(Matrix& grad, const Matrix& output, Activation act);

/// A learnable matrix with its gradient and Adam moment estimates.
struct Param {
    std::string name;
    Matrix value;
    Matrix grad;
    Matrix adam_m;
    Matrix adam_v;
    long step_count = 0;

    Param() = default;
    Param(std::string n, Index rows, Index cols);

    void zero_grad() { grad.setZero(); }
};

/// Fills `p.value` from U(-r, r), r = sqrt(6 / (rows + cols)).
void glorot_uniform(Param& p, Rng& rng);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

/// One bias-corrected Adam update on each parameter, then zeroes its gradient.
void adam_step(std::span<Param* const> params, const AdamConfig& cfg);

/// Intermediates a GCN layer keeps for its backward pass. One cache per forward call,
/// so a layer can be applied to several inputs (e.g. original and corrupted) before backward.
struct LayerCache {
    const SparseMatrix* adjacency = nullptr;
    Matrix aggregated;  // A * Z_in
    Matrix output;      // activation(A * Z_in * W + B)

    bool filled() const { return adjacency != nullptr; }
};

/// Z_out = act(A * Z_in * W + B), B broadcast over rows.
class GcnLayer {
public:
    GcnLayer() = default;
    GcnLayer(const std::string& name, Index in_dim, Index out_dim, Activation act);

    Index in_dim() const { return weight.value.rows(); }
    Index out_dim() const { return weight.value.cols(); }

    Matrix forward(const SparseMatrix& adjacency, const Matrix& input, LayerCache& cache) const;

    /// Accumulates into weight.grad and bias.grad; returns the gradient with respect to the layer input
    /// (an empty matrix when `input_grad` is false).
    Matrix backward(const Matrix& grad_output, const LayerCache& cache, bool input_grad = true);

    Param weight;
    Param bias;
    Activation activation = Activation::relu;
};

/// Scores an (embedding, summary) pair as sigmoid(z^T W g).
class BilinearDiscriminator {
public:
    BilinearDiscriminator() = default;
    BilinearDiscriminator(const std::string& name, Index dim);

    double probability(const Vector& z, const Vector& g) const;

    /// Row-wise logits z_i^T W g_i.
    Vector logits(const Matrix& z, const Matrix& g) const;

    /// Backward of logits(): accumulates into weight.grad, dz and dg.
    void backward(const Matrix& z, const Matrix& g, const Vector& grad_logits, Matrix& dz, Matrix& dg);

    Param weight;
};

/**
 * Checkpoint layout (all integers little-endian):
 *   "STMMCKPT" | u32 version = 1 | u32 count |
 *   count x { u32 name_len | name | u64 rows | u64 cols | rows*cols f64, row-major }
 */
std::string encode_checkpoint(std::span<const Param* const> params);
std::map<std::string, Matrix> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params);
std::map<std::string, Matrix> load_checkpoint(const std::filesystem::path& path);

} // namespace stmmc

#endif
