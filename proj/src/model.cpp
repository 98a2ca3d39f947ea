#include "stmmc/model.hpp"

#include <algorithm>
#include <cmath>

namespace stmmc {

void LossWeights::validate() const {
    if (!(theta1 >= 0.0) || !(theta2 >= 0.0)) {
        throw ConfigError("loss weights must be nonnegative");
    }
}

MpgaModel::MpgaModel(Index gene_dim, Index image_dim, const std::vector<Index>& hidden_dims, std::uint64_t seed) {
    if (hidden_dims.empty()) {
        throw ConfigError("the encoder needs at least one layer");
    }
    if (gene_dim < 1 || image_dim < 1 || std::any_of(hidden_dims.begin(), hidden_dims.end(), [](Index d) { return d < 1; })) {
        throw ConfigError("layer widths must be positive");
    }
    Rng rng(seed);
    const auto depth = hidden_dims.size();
    Index gene_in = gene_dim;
    Index image_in = image_dim;
    for (std::size_t l = 0; l < depth; ++l) {
        const Activation act = l + 1 == depth ? Activation::identity : Activation::relu;
        gene_layers.emplace_back("gene." + std::to_string(l), gene_in, hidden_dims[l], act);
        image_layers.emplace_back("image." + std::to_string(l), image_in, hidden_dims[l], act);
        gene_in = hidden_dims[l];
        image_in = hidden_dims[l];
    }
    for (auto& layer : gene_layers) {
        glorot_uniform(layer.weight, rng);
    }
    for (auto& layer : image_layers) {
        glorot_uniform(layer.weight, rng);
    }
    fusion_logits = Param("fusion.logits", 1, static_cast<Index>(depth));
    decoder = GcnLayer("decoder", hidden_dims.back(), gene_dim, Activation::identity);
    glorot_uniform(decoder.weight, rng);
    disc_gene = BilinearDiscriminator("disc.gene", hidden_dims.back());
    disc_image = BilinearDiscriminator("disc.image", hidden_dims.back());
    glorot_uniform(disc_gene.weight, rng);
    glorot_uniform(disc_image.weight, rng);
}

std::vector<Param*> MpgaModel::autoencoder_parameters() {
    std::vector<Param*> out;
    for (auto* stack : {&gene_layers, &image_layers}) {
        for (auto& layer : *stack) {
            out.push_back(&layer.weight);
            out.push_back(&layer.bias);
        }
    }
    out.push_back(&fusion_logits);
    out.push_back(&decoder.weight);
    out.push_back(&decoder.bias);
    return out;
}

std::vector<Param*> MpgaModel::parameters() {
    auto out = autoencoder_parameters();
    out.push_back(&disc_gene.weight);
    out.push_back(&disc_image.weight);
    return out;
}

std::vector<const Param*> MpgaModel::parameters() const {
    auto mutable_params = const_cast<MpgaModel*>(this)->parameters();
    return {mutable_params.begin(), mutable_params.end()};
}

ModelInputs ModelInputs::make(Matrix gene, Matrix image, SpatialGraph gene_graph, SpatialGraph image_graph) {
    const Index n = gene.rows();
    if (image.rows() != n || gene_graph.n_nodes != n || image_graph.n_nodes != n) {
        throw ShapeError("model inputs disagree on the number of spots");
    }
    if (!gene.allFinite() || !image.allFinite()) {
        throw DataError("model inputs contain non-finite values");
    }
    ModelInputs in;
    in.gene = std::move(gene);
    in.image = std::move(image);
    in.gene_graph = gene_graph.is_normalized() ? std::move(gene_graph) : normalize_adjacency(std::move(gene_graph));
    in.image_graph = image_graph.is_normalized() ? std::move(image_graph) : normalize_adjacency(std::move(image_graph));
    in.gene_community = community_operator(in.gene_graph);
    in.image_community = community_operator(in.image_graph);
    return in;
}

BranchPass encode_branch(const std::vector<GcnLayer>& layers, const SparseMatrix& adjacency, const Matrix& input) {
    BranchPass pass;
    pass.caches.resize(layers.size());
    const Matrix* current = &input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        layers[l].forward(adjacency, *current, pass.caches[l]);
        current = &pass.caches[l].output;
    }
    return pass;
}

Matrix fuse(const Matrix& z_gene, const Matrix& z_image, double alpha) {
    if (z_gene.rows() != z_image.rows() || z_gene.cols() != z_image.cols()) {
        throw ShapeError("fusion of " + shape_string(z_gene.rows(), z_gene.cols()) + " and " +
                         shape_string(z_image.rows(), z_image.cols()));
    }
    return alpha * z_gene + (1.0 - alpha) * z_image;
}

ForwardState encode(const MpgaModel& model, const Matrix& gene, const Matrix& image, const SparseMatrix& gene_adjacency,
                    const SparseMatrix& image_adjacency) {
    if (gene.cols() != model.gene_dim() || image.cols() != model.image_dim()) {
        throw ShapeError("encoder expects " + std::to_string(model.gene_dim()) + " gene and " +
                         std::to_string(model.image_dim()) + " image columns, got " + std::to_string(gene.cols()) +
                         " and " + std::to_string(image.cols()));
    }
    ForwardState state;
    state.gene = encode_branch(model.gene_layers, gene_adjacency, gene);
    state.image = encode_branch(model.image_layers, image_adjacency, image);
    for (Index l = 0; l < model.depth(); ++l) {
        state.fused.push_back(fuse(state.gene.output(l), state.image.output(l), model.alpha(l)));
    }
    return state;
}

Matrix decode(const MpgaModel& model, const Matrix& z_final, const SparseMatrix& gene_adjacency, LayerCache& cache) {
    return model.decoder.forward(gene_adjacency, z_final, cache);
}

double reconstruction_loss(const Matrix& target, const Matrix& reconstruction) {
    if (target.rows() != reconstruction.rows() || target.cols() != reconstruction.cols()) {
        throw ShapeError("reconstruction loss on " + shape_string(target.rows(), target.cols()) + " vs " +
                         shape_string(reconstruction.rows(), reconstruction.cols()));
    }
    return (target - reconstruction).squaredNorm();
}

namespace {

double clamp_probability(double p) {
    return std::clamp(p, probability_floor, 1.0 - probability_floor);
}

/// Gradient of -log(p) (positive) or -log(1 - p) (negative) with respect to the logit,
/// zero where the clamp is active.
double bce_logit_grad(double p, bool positive) {
    if (p < probability_floor || p > 1.0 - probability_floor) {
        return 0.0;
    }
    return positive ? p - 1.0 : p;
}

/// Adds the gradient of scale * pairwise_contrast for one branch into dpositive, dnegative and dsummary.
void contrast_backward(const Matrix& positive, const Matrix& negative, const Matrix& summary,
                       BilinearDiscriminator& disc, double scale, Matrix& dpositive, Matrix& dnegative,
                       Matrix& dsummary) {
    const Vector pos_logits = disc.logits(positive, summary);
    const Vector neg_logits = disc.logits(negative, summary);
    Vector pos_grad(pos_logits.size());
    Vector neg_grad(neg_logits.size());
    for (Index i = 0; i < pos_logits.size(); ++i) {
        pos_grad(i) = scale * bce_logit_grad(sigmoid(pos_logits(i)), true);
        neg_grad(i) = scale * bce_logit_grad(sigmoid(neg_logits(i)), false);
    }
    disc.backward(positive, summary, pos_grad, dpositive, dsummary);
    disc.backward(negative, summary, neg_grad, dnegative, dsummary);
}

void backward_branch(std::vector<GcnLayer>& layers, const BranchPass& pass, Matrix grad) {
    for (std::size_t l = layers.size(); l-- > 0;) {
        grad = layers[l].backward(grad, pass.caches[l], l > 0);
    }
}

} // namespace

double pairwise_contrast(std::span<const ContrastPairs> branches) {
    if (branches.empty()) {
        return 0.0;
    }
    const Index n = branches.front().positive.rows();
    double sum = 0.0;
    for (const auto& b : branches) {
        const Vector pos = b.discriminator.logits(b.positive, b.summary);
        const Vector neg = b.discriminator.logits(b.negative, b.summary);
        for (Index i = 0; i < n; ++i) {
            sum += std::log(clamp_probability(sigmoid(pos(i)))) + std::log(1.0 - clamp_probability(sigmoid(neg(i))));
        }
    }
    return -sum / static_cast<double>(n);
}

double contrastive_loss(const ForwardState& state, const MpgaModel& model) {
    const ContrastPairs branches[] = {
        {state.gene.embedding(), state.gene_corrupt.embedding(), state.community_gene, model.disc_gene},
        {state.image.embedding(), state.image_corrupt.embedding(), state.community_image, model.disc_image},
    };
    return pairwise_contrast(branches);
}

double symmetric_contrastive_loss(const ForwardState& state, const MpgaModel& model) {
    const ContrastPairs branches[] = {
        {state.gene_corrupt.embedding(), state.gene.embedding(), state.community_gene_corrupt, model.disc_gene},
        {state.image_corrupt.embedding(), state.image.embedding(), state.community_image_corrupt, model.disc_image},
    };
    return pairwise_contrast(branches);
}

double total_loss(double reconstruction, double contrastive, double contrastive_corrupt, const LossWeights& weights) {
    return weights.theta1 * reconstruction + weights.theta2 * (contrastive + contrastive_corrupt);
}

ForwardState forward(const MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan) {
    const SparseMatrix& ag = inputs.gene_graph.normalized_adjacency;
    const SparseMatrix& ai = inputs.image_graph.normalized_adjacency;
    ForwardState state = encode(model, inputs.gene, inputs.image, ag, ai);
    state.reconstruction = decode(model, state.fused.back(), ag, state.decoder_cache);
    if (plan != nullptr) {
        state.gene_corrupt = encode_branch(model.gene_layers, ag, corrupt_features(inputs.gene, *plan));
        state.image_corrupt = encode_branch(model.image_layers, ai, corrupt_features(inputs.image, *plan));
        state.community_gene = inputs.gene_community * state.gene.embedding();
        state.community_image = inputs.image_community * state.image.embedding();
        state.community_gene_corrupt = inputs.gene_community * state.gene_corrupt.embedding();
        state.community_image_corrupt = inputs.image_community * state.image_corrupt.embedding();
    }
    return state;
}

namespace {

LossBreakdown losses_of(const ForwardState& state, const MpgaModel& model, const ModelInputs& inputs, bool contrast,
                        const LossWeights& weights) {
    LossBreakdown loss;
    loss.reconstruction = reconstruction_loss(inputs.gene, state.reconstruction);
    if (contrast) {
        loss.contrastive = contrastive_loss(state, model);
        loss.contrastive_corrupt = symmetric_contrastive_loss(state, model);
    }
    loss.total = total_loss(loss.reconstruction, loss.contrastive, loss.contrastive_corrupt, weights);
    return loss;
}

} // namespace

LossBreakdown evaluate_loss(const MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan,
                            const LossWeights& weights) {
    const ForwardState state = forward(model, inputs, plan);
    return losses_of(state, model, inputs, plan != nullptr, weights);
}

LossBreakdown forward_backward(MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan,
                               const LossWeights& weights) {
    const ForwardState state = forward(model, inputs, plan);
    const LossBreakdown loss = losses_of(state, model, inputs, plan != nullptr, weights);

    const Index n = inputs.n_spots();
    const Index last = model.depth() - 1;
    const Matrix& z_gene = state.gene.embedding();
    const Matrix& z_image = state.image.embedding();

    // Reconstruction path: decoder, then the last-layer fusion.
    const Matrix d_recon = (2.0 * weights.theta1) * (state.reconstruction - inputs.gene);
    const Matrix d_fused = model.decoder.backward(d_recon, state.decoder_cache);
    const double alpha = model.alpha(last);
    Matrix d_gene = alpha * d_fused;
    Matrix d_image = (1.0 - alpha) * d_fused;
    model.fusion_logits.grad(0, last) += d_fused.cwiseProduct(z_gene - z_image).sum() * alpha * (1.0 - alpha);

    if (plan != nullptr) {
        const double scale = weights.theta2 / static_cast<double>(n);
        const Index f = model.embedding_dim();
        Matrix d_gene_corrupt = Matrix::Zero(n, f);
        Matrix d_image_corrupt = Matrix::Zero(n, f);
        Matrix d_comm_gene = Matrix::Zero(n, f);
        Matrix d_comm_image = Matrix::Zero(n, f);
        Matrix d_comm_gene_corrupt = Matrix::Zero(n, f);
        Matrix d_comm_image_corrupt = Matrix::Zero(n, f);

        const Matrix& zc_gene = state.gene_corrupt.embedding();
        const Matrix& zc_image = state.image_corrupt.embedding();
        contrast_backward(z_gene, zc_gene, state.community_gene, model.disc_gene, scale, d_gene, d_gene_corrupt,
                          d_comm_gene);
        contrast_backward(z_image, zc_image, state.community_image, model.disc_image, scale, d_image, d_image_corrupt,
                          d_comm_image);
        contrast_backward(zc_gene, z_gene, state.community_gene_corrupt, model.disc_gene, scale, d_gene_corrupt,
                          d_gene, d_comm_gene_corrupt);
        contrast_backward(zc_image, z_image, state.community_image_corrupt, model.disc_image, scale, d_image_corrupt,
                          d_image, d_comm_image_corrupt);

        d_gene += inputs.gene_community.transpose() * d_comm_gene;
        d_image += inputs.image_community.transpose() * d_comm_image;
        d_gene_corrupt += inputs.gene_community.transpose() * d_comm_gene_corrupt;
        d_image_corrupt += inputs.image_community.transpose() * d_comm_image_corrupt;

        backward_branch(model.gene_layers, state.gene_corrupt, std::move(d_gene_corrupt));
        backward_branch(model.image_layers, state.image_corrupt, std::move(d_image_corrupt));
    }
    backward_branch(model.gene_layers, state.gene, std::move(d_gene));
    backward_branch(model.image_layers, state.image, std::move(d_image));
    return loss;
}

} // namespace stmmc
