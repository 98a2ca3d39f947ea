#include "stmmc/pipeline.hpp"

#include "stmmc/preprocess.hpp"
#include "stmmc/random.hpp"

#include <algorithm>

namespace stmmc {

namespace {

constexpr std::uint64_t clustering_stream = 3;

} // namespace

LabelVector cluster_reconstruction(const Matrix& reconstruction, const TrainConfig& cfg) {
    Matrix reduced = reconstruction;
    if (cfg.cluster_pca_dim > 0) {
        const Index d = std::min<Index>({cfg.cluster_pca_dim, reconstruction.rows(), reconstruction.cols()});
        reduced = fit_pca(reconstruction, d).transform(reconstruction);
    }
    return gmm_cluster(reduced, cfg.n_clusters, derive_seed(cfg.seed, clustering_stream)).labels;
}

PipelineResult run_pipeline(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features,
                            const CoordinateSet& coords, const TrainConfig& cfg) {
    PreparedData data = prepare_inputs(expr, features, coords, cfg);
    PipelineResult result;
    result.training = train_model(data.inputs, cfg);
    result.processed = std::move(data.expression);
    result.cluster_labels = cluster_reconstruction(result.training.reconstruction, cfg);
    result.labels = cfg.use_smoothing ? smooth_labels(result.cluster_labels, coords, cfg.b_smooth) : result.cluster_labels;
    return result;
}

} // namespace stmmc
