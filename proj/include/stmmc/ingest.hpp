#ifndef STMMC_INGEST_HPP
#define STMMC_INGEST_HPP

#include "stmmc/common.hpp"
#include "stmmc/image.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stmmc {

/// N spots x M genes of nonnegative expression values.
struct ExpressionMatrix {
    Matrix values;
    std::vector<std::string> spot_ids;
    std::vector<std::string> gene_ids;

    Index n_spots() const { return values.rows(); }
    Index n_genes() const { return values.cols(); }

    /// Throws DataError if any invariant is violated (shape, finiteness, sign, unique ids).
    void validate() const;
};

/// Spot positions, one (x, y) row per spot.
struct CoordinateSet {
    Matrix coords; // N x 2
    std::vector<std::string> spot_ids;

    Index size() const { return coords.rows(); }
    void validate() const;
};

enum class FeatureSource { precomputed, patch_stats };

struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> spot_ids;
    FeatureSource source = FeatureSource::precomputed;

    void validate() const;
};

struct Dataset {
    ExpressionMatrix expression;
    CoordinateSet coordinates;
    std::optional<FeatureMatrix> features;
};

ExpressionMatrix read_expression(const std::filesystem::path& path);
CoordinateSet read_coordinates(const std::filesystem::path& path);
FeatureMatrix read_features(const std::filesystem::path& path);

/**
 * Loads the three modalities and aligns coordinates and features to the
 * spot order of the expression file. Any spot present in one file but not
 * another is an error.
 */
Dataset load_dataset(const std::filesystem::path& expr_path,
                     const std::filesystem::path& coord_path,
                     const std::optional<std::filesystem::path>& feat_path = std::nullopt);

/// Row indices that reorder `ids` into the order of `reference`; throws if the id sets differ.
std::vector<Index> alignment_order(const std::vector<std::string>& reference,
                                   const std::vector<std::string>& ids,
                                   const std::string& what);

inline constexpr int default_patch_width = 96;
inline constexpr int patch_feature_count = 12;

/**
 * Fallback image features: for the square patch centred on each spot, the
 * per-channel mean, standard deviation, min and max (in that order, R/G/B
 * within each group), all divided by 255. Patches crossing the border are
 * clipped to the image.
 */
FeatureMatrix extract_patch_features(const RgbImage& image, const CoordinateSet& coords,
                                     int patch_width = default_patch_width);

std::string expression_csv(const ExpressionMatrix& expr);
std::string coordinates_csv(const CoordinateSet& coords);
std::string features_csv(const FeatureMatrix& feats);

} // namespace stmmc

#endif
