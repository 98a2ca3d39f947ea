#include "stmmc/trainer.hpp"

#include "stmmc/io.hpp"
#include "stmmc/preprocess.hpp"
#include "stmmc/random.hpp"

#include <algorithm>
#include <cmath>

namespace stmmc {

namespace {

constexpr std::uint64_t init_stream = 1;
constexpr std::uint64_t corruption_stream = 2;

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (!(learning_rate >= 0.0)) {
        throw ConfigError("learning_rate must be nonnegative");
    }
    if (hidden_dims.empty() || std::any_of(hidden_dims.begin(), hidden_dims.end(), [](Index d) { return d < 1; })) {
        throw ConfigError("hidden_dims must be a nonempty list of positive widths");
    }
    if (pca_dim < 1 || k_neighbors < 1 || m_keep < 1 || patch_width < 1 || cluster_pca_dim < 0) {
        throw ConfigError("pca_dim, k_neighbors, m_keep and patch_width must be positive");
    }
    if (b_smooth < 1) {
        throw ConfigError("b_smooth must be at least 1");
    }
    if (n_clusters < 2) {
        throw ConfigError("n_clusters must be at least 2");
    }
    loss_weights.validate();
}

std::string TrainHistory::to_csv() const {
    std::string out = "epoch,l_rec,l_cl,l_cl_c,l_total";
    const std::size_t depth = epochs.empty() ? 0 : epochs.front().alphas.size();
    for (std::size_t l = 0; l < depth; ++l) {
        out += ",alpha_" + std::to_string(l + 1);
    }
    out += '\n';
    for (const auto& e : epochs) {
        out += std::to_string(e.epoch) + "," + format_real(e.loss.reconstruction) + "," + format_real(e.loss.contrastive) +
               "," + format_real(e.loss.contrastive_corrupt) + "," + format_real(e.loss.total);
        for (double a : e.alphas) {
            out += "," + format_real(a);
        }
        out += '\n';
    }
    return out;
}

Matrix standardize_columns(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    const auto n = static_cast<double>(x.rows());
    for (Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).sum() / n;
        const double var = (x.col(j).array() - mean).square().sum() / n;
        if (var > 0.0) {
            out.col(j) = (x.col(j).array() - mean) / std::sqrt(var);
        } else {
            out.col(j).setZero();
        }
    }
    return out;
}

PreparedData prepare_inputs(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features,
                            const CoordinateSet& coords, const TrainConfig& cfg) {
    cfg.validate();
    expr.validate();
    if (coords.size() != expr.n_spots() || coords.spot_ids != expr.spot_ids) {
        throw DataError("coordinates are not aligned with the expression matrix");
    }
    if (cfg.use_image_modality) {
        if (!features) {
            throw DataError("image modality enabled but no image features were provided");
        }
        if (features->values.rows() != expr.n_spots() || features->spot_ids != expr.spot_ids) {
            throw DataError("image features are not aligned with the expression matrix");
        }
        features->validate();
    }

    PreparedData out;
    out.expression = select_hvg(cfg.normalize ? normalize_expression(expr) : expr, cfg.m_keep);
    if (cfg.scale) {
        out.expression.values = standardize_columns(out.expression.values);
    }
    const Matrix& gene = out.expression.values;

    const Index pca_dim = std::min<Index>({cfg.pca_dim, gene.rows(), gene.cols()});
    const PcaBasis basis = fit_pca(gene, pca_dim);
    SpatialGraph similarity = knn_graph(basis.transform(gene), cfg.k_neighbors, GraphKind::similarity);
    SpatialGraph proximity = knn_graph(coords.coords, cfg.k_neighbors, GraphKind::proximity);

    Matrix image = cfg.use_image_modality ? standardize_columns(features->values) : gene;
    out.inputs = ModelInputs::make(gene, std::move(image), std::move(proximity), std::move(similarity));
    return out;
}

TrainResult train_model(const ModelInputs& inputs, const TrainConfig& cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    TrainResult result{MpgaModel(inputs.gene.cols(), inputs.image.cols(), cfg.hidden_dims, derive_seed(cfg.seed, init_stream)),
                       Matrix(), TrainHistory()};
    MpgaModel& model = result.model;
    const AdamConfig adam{cfg.learning_rate};
    const auto n = static_cast<int>(inputs.n_spots());
    const auto params = cfg.use_contrastive ? model.parameters() : model.autoencoder_parameters();

    result.history.epochs.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::optional<CorruptionPlan> plan;
        if (cfg.use_contrastive) {
            plan = CorruptionPlan::from_seed(n, derive_seed(derive_seed(cfg.seed, corruption_stream), static_cast<std::uint64_t>(epoch)));
        }
        const LossBreakdown loss = forward_backward(model, inputs, plan ? &*plan : nullptr, cfg.loss_weights);
        if (!std::isfinite(loss.total)) {
            throw DivergenceError("training diverged: total loss is not finite at epoch " + std::to_string(epoch), epoch);
        }
        adam_step(params, adam);

        EpochRecord record;
        record.epoch = epoch;
        record.loss = loss;
        for (Index l = 0; l < model.depth(); ++l) {
            record.alphas.push_back(model.alpha(l));
        }
        if (on_epoch) {
            on_epoch(record);
        }
        result.history.epochs.push_back(std::move(record));
    }
    result.reconstruction = forward(model, inputs, nullptr).reconstruction;
    return result;
}

TrainResult train(const ExpressionMatrix& expr, const std::optional<FeatureMatrix>& features, const CoordinateSet& coords,
                  const TrainConfig& cfg) {
    const PreparedData data = prepare_inputs(expr, features, coords, cfg);
    return train_model(data.inputs, cfg);
}

} // namespace stmmc
