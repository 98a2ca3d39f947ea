#ifndef STMMC_PIPELINE_HPP
#define STMMC_PIPELINE_HPP

#include "stmmc/cluster.hpp"
#include "stmmc/ingest.hpp"
#include "stmmc/trainer.hpp"

#include <optional>

namespace stmmc {

struct PipelineResult {
    ExpressionMatrix processed;   // normalized, HVG-selected training target
    TrainResult training;
    LabelVector cluster_labels;   // mixture-model assignment
    LabelVector labels;           // after smoothing, when enabled
};

/// Mixture-model clustering of the reconstruction, PCA-reduced to cfg.cluster_pca_dim first (0 = no reduction).
LabelVector cluster_reconstruction(const Matrix& reconstruction, const TrainConfig& cfg);

/// preprocess -> train -> cluster -> smooth.
PipelineResult run_pipeline(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features,
                            const CoordinateSet& coords, const TrainConfig& cfg);

} // namespace stmmc

#endif
