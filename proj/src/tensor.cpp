#include "stmmc/tensor.hpp"

#include "stmmc/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace stmmc {

Matrix apply_activation(Matrix pre, Activation act) {
    switch (act) {
    case Activation::relu:
        return pre.cwiseMax(0.0);
    case Activation::sigmoid:
        return pre.unaryExpr([](double v) { return sigmoid(v); });
    case Activation::identity:
        break;
    }
    return pre;
}

void activation_backward(Matrix& grad, const Matrix& output, Activation act) {
    switch (act) {
    case Activation::relu:
        grad = (output.array() > 0.0).select(grad, 0.0);
        break;
    case Activation::sigmoid:
        grad.array() *= output.array() * (1.0 - output.array());
        break;
    case Activation::identity:
        break;
    }
}

Param::Param(std::string n, Index rows, Index cols)
    : name(std::move(n)),
      value(Matrix::Zero(rows, cols)),
      grad(Matrix::Zero(rows, cols)),
      adam_m(Matrix::Zero(rows, cols)),
      adam_v(Matrix::Zero(rows, cols)) {}

void glorot_uniform(Param& p, Rng& rng) {
    const double r = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
    for (Index i = 0; i < p.value.rows(); ++i) {
        for (Index j = 0; j < p.value.cols(); ++j) {
            p.value(i, j) = rng.uniform(-r, r);
        }
    }
}

void AdamConfig::validate() const {
    if (!(learning_rate >= 0.0) || !(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
        throw ConfigError("invalid Adam configuration");
    }
}

void adam_step(std::span<Param* const> params, const AdamConfig& cfg) {
    for (Param* p : params) {
        ++p->step_count;
        const double t = static_cast<double>(p->step_count);
        const double c1 = 1.0 - std::pow(cfg.beta1, t);
        const double c2 = 1.0 - std::pow(cfg.beta2, t);
        p->adam_m = cfg.beta1 * p->adam_m + (1.0 - cfg.beta1) * p->grad;
        p->adam_v = cfg.beta2 * p->adam_v + (1.0 - cfg.beta2) * p->grad.cwiseProduct(p->grad);
        p->value.array() -= cfg.learning_rate * (p->adam_m.array() / c1) / ((p->adam_v.array() / c2).sqrt() + cfg.epsilon);
        p->zero_grad();
    }
}

GcnLayer::GcnLayer(const std::string& name, Index in_dim, Index out_dim, Activation act)
    : weight(name + ".weight", in_dim, out_dim), bias(name + ".bias", 1, out_dim), activation(act) {}

Matrix GcnLayer::forward(const SparseMatrix& adjacency, const Matrix& input, LayerCache& cache) const {
    if (adjacency.rows() != adjacency.cols() || adjacency.cols() != input.rows()) {
        throw ShapeError("GCN layer: adjacency " + shape_string(adjacency.rows(), adjacency.cols()) + " vs input " +
                         shape_string(input.rows(), input.cols()));
    }
    if (input.cols() != in_dim()) {
        throw ShapeError("GCN layer " + weight.name + ": input width " + std::to_string(input.cols()) + ", expected " +
                         std::to_string(in_dim()));
    }
    cache.adjacency = &adjacency;
    cache.aggregated = adjacency * input;
    Matrix pre = cache.aggregated * weight.value;
    pre.rowwise() += bias.value.row(0);
    cache.output = apply_activation(std::move(pre), activation);
    return cache.output;
}

Matrix GcnLayer::backward(const Matrix& grad_output, const LayerCache& cache, bool input_grad) {
    if (!cache.filled()) {
        throw Error("GCN layer " + weight.name + ": backward called without a preceding forward");
    }
    if (grad_output.rows() != cache.output.rows() || grad_output.cols() != cache.output.cols()) {
        throw ShapeError("GCN layer " + weight.name + ": output gradient shape mismatch");
    }
    Matrix delta = grad_output;
    activation_backward(delta, cache.output, activation);
    weight.grad.noalias() += cache.aggregated.transpose() * delta;
    bias.grad += delta.colwise().sum();
    if (!input_grad) {
        return {};
    }
    const Matrix back = delta * weight.value.transpose();
    return cache.adjacency->transpose() * back;
}

BilinearDiscriminator::BilinearDiscriminator(const std::string& name, Index dim) : weight(name + ".weight", dim, dim) {}

double BilinearDiscriminator::probability(const Vector& z, const Vector& g) const {
    return sigmoid(z.dot(weight.value * g));
}

Vector BilinearDiscriminator::logits(const Matrix& z, const Matrix& g) const {
    if (z.cols() != weight.value.rows() || g.cols() != weight.value.cols() || z.rows() != g.rows()) {
        throw ShapeError("discriminator: embedding " + shape_string(z.rows(), z.cols()) + " and summary " +
                         shape_string(g.rows(), g.cols()) + " do not match weight " +
                         shape_string(weight.value.rows(), weight.value.cols()));
    }
    return (z * weight.value).cwiseProduct(g).rowwise().sum();
}

void BilinearDiscriminator::backward(const Matrix& z, const Matrix& g, const Vector& grad_logits, Matrix& dz,
                                     Matrix& dg) {
    const Matrix scaled_g = grad_logits.asDiagonal() * g;
    weight.grad.noalias() += z.transpose() * scaled_g;
    dz.noalias() += scaled_g * weight.value.transpose();
    dg.noalias() += grad_logits.asDiagonal() * (z * weight.value);
}

namespace {

constexpr char checkpoint_magic[8] = {'S', 'T', 'M', 'M', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::string& out, T v) {
    static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) {
        throw DataError("truncated checkpoint");
    }
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

} // namespace

std::string encode_checkpoint(std::span<const Param* const> params) {
    std::string out(checkpoint_magic, sizeof(checkpoint_magic));
    put<std::uint32_t>(out, 1);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
        out += p->name;
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
        put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
        for (Index i = 0; i < p->value.rows(); ++i) {
            for (Index j = 0; j < p->value.cols(); ++j) {
                put<double>(out, p->value(i, j));
            }
        }
    }
    return out;
}

std::map<std::string, Matrix> decode_checkpoint(const std::string& bytes) {
    if (bytes.size() < sizeof(checkpoint_magic) || std::memcmp(bytes.data(), checkpoint_magic, sizeof(checkpoint_magic)) != 0) {
        throw DataError("not a checkpoint file (bad magic)");
    }
    std::size_t pos = sizeof(checkpoint_magic);
    const auto version = take<std::uint32_t>(bytes, pos);
    if (version != 1) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto count = take<std::uint32_t>(bytes, pos);
    std::map<std::string, Matrix> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto len = take<std::uint32_t>(bytes, pos);
        if (pos + len > bytes.size()) {
            throw DataError("truncated checkpoint");
        }
        std::string name = bytes.substr(pos, len);
        pos += len;
        const auto rows = static_cast<Index>(take<std::uint64_t>(bytes, pos));
        const auto cols = static_cast<Index>(take<std::uint64_t>(bytes, pos));
        Matrix m(rows, cols);
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < cols; ++j) {
                m(i, j) = take<double>(bytes, pos);
            }
        }
        out.emplace(std::move(name), std::move(m));
    }
    if (pos != bytes.size()) {
        throw DataError("trailing bytes after checkpoint payload");
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params) {
    write_file_atomic(path, encode_checkpoint(params));
}

std::map<std::string, Matrix> load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_text_file(path));
}

} // namespace stmmc
