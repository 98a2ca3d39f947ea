#ifndef STMMC_CLUSTER_HPP
#define STMMC_CLUSTER_HPP

#include "stmmc/common.hpp"
#include "stmmc/ingest.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stmmc {

struct LabelVector {
    std::vector<int> labels;
    int k = 0;

    std::size_t size() const { return labels.size(); }
    /// Throws DataError unless every label lies in [0, k).
    void validate() const;
};

/// Labels in order of first appearance become 0, 1, 2, ...; k is kept.
LabelVector canonical_relabel(const LabelVector& labels);

struct KMeansResult {
    LabelVector labels;
    Matrix centers; // k x d
    int iterations = 0;
    double inertia = 0.0; // sum of squared distances to the assigned centres
};

/// k-means++ seeding followed by Lloyd iterations (at most `max_iterations`), restarted
/// `restarts` times from derived seeds; the lowest-inertia run is returned.
KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iterations = 100, int restarts = 10);

struct GmmModel {
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    Vector weights;
    std::vector<double> log_likelihood; // per EM iteration
    bool converged = false;
    int reinitializations = 0;
};

struct GmmOptions {
    double regularization = 1e-6;
    double tolerance = 1e-6;
    int max_iterations = 300;
};

struct GmmResult {
    LabelVector labels;
    GmmModel model;
};

/**
 * Full-covariance Gaussian mixture fitted by EM, initialized from seeded
 * k-means. Every covariance carries a ridge of `regularization * I`. Stops
 * when the total log-likelihood gains less than `tolerance` or after
 * `max_iterations`. A component whose total responsibility drops below one
 * point is re-seeded once at the worst-explained point; a second collapse is
 * an error. Labels are the argmax responsibility, renumbered by first
 * appearance.
 */
GmmResult gmm_cluster(const Matrix& x, int k, std::uint64_t seed, const GmmOptions& options = {});

/**
 * One simultaneous majority pass: each spot takes the most frequent input
 * label among its b nearest spots (self excluded). If the spot's own label
 * is among the tied modes it is kept, otherwise the smallest tied label wins.
 */
LabelVector smooth_labels(const LabelVector& labels, const CoordinateSet& coords, int b);

/// "spot_id,label"
std::string labels_csv(const std::vector<std::string>& spot_ids, const LabelVector& labels);

struct LabeledSpots {
    std::vector<std::string> spot_ids;
    LabelVector labels;
};

LabeledSpots read_labels(const std::filesystem::path& path);

} // namespace stmmc

#endif
