#ifndef STMMC_MODEL_HPP
#define STMMC_MODEL_HPP

#include "stmmc/common.hpp"
#include "stmmc/graph.hpp"
#include "stmmc/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace stmmc {

struct LossWeights {
    double theta1 = 10.0; // reconstruction
    double theta2 = 1.0;  // both contrastive terms

    void validate() const;
};

/**
 * Two parallel GCN encoders (gene and image branch) of equal depth L and
 * equal per-layer widths, a per-layer convex fusion weight
 * alpha_l = sigmoid(fusion_logits[l]), a one-layer graph decoder back to
 * the gene space, and one bilinear discriminator per branch.
 *
 * Encoder layers use ReLU except the last, which is linear; its output is
 * the per-branch embedding that the discriminators see. The decoder is
 * linear.
 */
class MpgaModel {
public:
    MpgaModel() = default;
    MpgaModel(Index gene_dim, Index image_dim, const std::vector<Index>& hidden_dims, std::uint64_t seed);

    Index depth() const { return static_cast<Index>(gene_layers.size()); }
    Index embedding_dim() const { return gene_layers.back().out_dim(); }
    Index gene_dim() const { return gene_layers.front().in_dim(); }
    Index image_dim() const { return image_layers.front().in_dim(); }
    double alpha(Index layer) const { return sigmoid(fusion_logits.value(0, layer)); }

    std::vector<Param*> parameters();
    std::vector<const Param*> parameters() const;
    /// Everything except the two discriminators.
    std::vector<Param*> autoencoder_parameters();

    std::vector<GcnLayer> gene_layers;
    std::vector<GcnLayer> image_layers;
    Param fusion_logits; // 1 x L
    GcnLayer decoder;
    BilinearDiscriminator disc_gene;
    BilinearDiscriminator disc_image;
};

/// Node features and normalized graphs for both branches, plus the neighbour-mean operators.
struct ModelInputs {
    Matrix gene;
    Matrix image;
    SpatialGraph gene_graph;
    SpatialGraph image_graph;
    SparseMatrix gene_community;
    SparseMatrix image_community;

    /// Normalizes the graphs if needed and validates shapes.
    static ModelInputs make(Matrix gene, Matrix image, SpatialGraph gene_graph, SpatialGraph image_graph);
    Index n_spots() const { return gene.rows(); }
};

/// Per-layer embeddings of one encoder branch for one input.
struct BranchPass {
    std::vector<LayerCache> caches;

    const Matrix& output(Index layer) const { return caches[static_cast<std::size_t>(layer)].output; }
    const Matrix& embedding() const { return caches.back().output; }
};

struct ForwardState {
    BranchPass gene;
    BranchPass image;
    std::vector<Matrix> fused;        // Z^(l), l = 1..L
    BranchPass gene_corrupt;          // empty unless contrastive terms were computed
    BranchPass image_corrupt;
    Matrix community_gene;            // g  (gene branch)
    Matrix community_image;           // g  (image branch)
    Matrix community_gene_corrupt;    // g* (gene branch)
    Matrix community_image_corrupt;   // g* (image branch)
    LayerCache decoder_cache;
    Matrix reconstruction;
};

struct LossBreakdown {
    double reconstruction = 0.0;
    double contrastive = 0.0;
    double contrastive_corrupt = 0.0;
    double total = 0.0;
};

BranchPass encode_branch(const std::vector<GcnLayer>& layers, const SparseMatrix& adjacency, const Matrix& input);

/// Runs both encoder stacks on the original features and fuses every layer.
ForwardState encode(const MpgaModel& model, const Matrix& gene, const Matrix& image, const SparseMatrix& gene_adjacency,
                    const SparseMatrix& image_adjacency);

/// alpha * z_gene + (1 - alpha) * z_image
Matrix fuse(const Matrix& z_gene, const Matrix& z_image, double alpha);

/// Graph decoder over the proximity graph, linear output.
Matrix decode(const MpgaModel& model, const Matrix& z_final, const SparseMatrix& gene_adjacency, LayerCache& cache);

/// Sum over spots of squared Euclidean reconstruction error (not averaged).
double reconstruction_loss(const Matrix& target, const Matrix& reconstruction);

inline constexpr double probability_floor = 1e-7;

/// One branch's contribution to a contrastive term: positives (positive_z_i, summary_i)
/// and negatives (negative_z_i, summary_i).
struct ContrastPairs {
    const Matrix& positive;
    const Matrix& negative;
    const Matrix& summary;
    const BilinearDiscriminator& discriminator;
};

/// -1/N * sum over branches and spots of [log p(positive) + log(1 - p(negative))],
/// probabilities clamped to [1e-7, 1 - 1e-7].
double pairwise_contrast(std::span<const ContrastPairs> branches);

/// Original-graph term: positives (z, g), negatives (z*, g).
double contrastive_loss(const ForwardState& state, const MpgaModel& model);
/// Corrupted-graph term: positives (z*, g*), negatives (z, g*).
double symmetric_contrastive_loss(const ForwardState& state, const MpgaModel& model);

double total_loss(double reconstruction, double contrastive, double contrastive_corrupt, const LossWeights& weights);

/**
 * Full forward pass. When `plan` is non-null the corrupted passes and both
 * contrastive terms are computed; otherwise they are reported as zero.
 */
ForwardState forward(const MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan);

LossBreakdown evaluate_loss(const MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan,
                            const LossWeights& weights);

/// Forward plus backward; gradients of the total loss are accumulated into every parameter's grad.
LossBreakdown forward_backward(MpgaModel& model, const ModelInputs& inputs, const CorruptionPlan* plan,
                               const LossWeights& weights);

} // namespace stmmc

#endif
