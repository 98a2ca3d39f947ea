#ifndef STMMC_TRAINER_HPP
#define STMMC_TRAINER_HPP

#include "stmmc/ingest.hpp"
#include "stmmc/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stmmc {

struct TrainConfig {
    int epochs = 600;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    std::vector<Index> hidden_dims = {512, 64};
    int pca_dim = 50;
    int k_neighbors = 3;
    int m_keep = 3000;
    LossWeights loss_weights;
    bool use_image_modality = true;
    bool use_contrastive = true;
    bool use_smoothing = true;
    int b_smooth = 50;
    int n_clusters = 7;
    bool normalize = true;
    bool scale = true;        // z-score each kept gene before training
    int cluster_pca_dim = 20; // 0 disables the reduction before the mixture model
    int patch_width = default_patch_width;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0; // 1-based
    LossBreakdown loss;
    std::vector<double> alphas;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;

    /// "epoch,l_rec,l_cl,l_cl_c,l_total,alpha_1..alpha_L"
    std::string to_csv() const;
};

/// Model-ready data: processed expression (normalized, HVG-selected) and both graphs.
struct PreparedData {
    ExpressionMatrix expression;
    ModelInputs inputs;
};

/**
 * Normalizes expression (if enabled), keeps the top-variance genes, builds
 * the proximity graph on coordinates and the similarity graph on PCA scores
 * of the processed expression. Kept genes (if `scale`) and image features
 * are standardized per column.
 * With the image modality disabled, the second branch receives the
 * processed expression instead, still over the similarity graph.
 */
PreparedData prepare_inputs(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features,
                            const CoordinateSet& coords, const TrainConfig& cfg);

/// Zero-mean, unit-variance columns (population variance); constant columns become zero.
Matrix standardize_columns(const Matrix& x);

struct TrainResult {
    MpgaModel model;
    Matrix reconstruction;
    TrainHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Full-graph training with a fresh corruption permutation each epoch. Throws DivergenceError on a NaN loss.
TrainResult train_model(const ModelInputs& inputs, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// prepare_inputs followed by train_model.
TrainResult train(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features,
                  const CoordinateSet& coords, const TrainConfig& cfg);

} // namespace stmmc

#endif
