#include "stmmc/cluster.hpp"

#include "stmmc/graph.hpp"
#include "stmmc/io.hpp"
#include "stmmc/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

namespace stmmc {

void LabelVector::validate() const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k) {
            throw DataError("label " + std::to_string(labels[i]) + " at position " + std::to_string(i) +
                            " outside [0, " + std::to_string(k) + ")");
        }
    }
}

LabelVector canonical_relabel(const LabelVector& in) {
    std::vector<int> mapping(static_cast<std::size_t>(std::max(in.k, 0)), -1);
    int next = 0;
    LabelVector out;
    out.k = in.k;
    out.labels.reserve(in.labels.size());
    for (int l : in.labels) {
        auto& m = mapping[static_cast<std::size_t>(l)];
        if (m < 0) {
            m = next++;
        }
        out.labels.push_back(m);
    }
    return out;
}

namespace {

Matrix kmeans_plus_plus(const Matrix& x, int k, Rng& rng) {
    const Index n = x.rows();
    Matrix centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
    Vector best = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        const double total = best.sum();
        Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            pick = n - 1;
            for (Index i = 0; i < n; ++i) {
                target -= best(i);
                if (target < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
        }
        centers.row(c) = x.row(pick);
        best = best.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }
    return centers;
}

/// log N(x_i | mean, cov) for every row; returns false if cov is not positive definite.
bool gaussian_log_density(const Matrix& x, const Vector& mean, const Matrix& cov, Vector& out) {
    const Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        return false;
    }
    const Index d = x.cols();
    const Matrix centered = (x.rowwise() - mean.transpose()).transpose();
    const Matrix solved = llt.matrixL().solve(centered);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double constant = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
    out = constant - 0.5 * solved.colwise().squaredNorm().transpose().array();
    return true;
}

} // namespace

namespace {

KMeansResult lloyd(const Matrix& x, int k, std::uint64_t seed, int max_iterations) {
    const Index n = x.rows();
    Rng rng(seed);
    KMeansResult result;
    result.centers = kmeans_plus_plus(x, k, rng);
    result.labels.k = k;
    result.labels.labels.assign(static_cast<std::size_t>(n), -1);
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            (result.centers.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
            auto& label = result.labels.labels[static_cast<std::size_t>(i)];
            if (label != static_cast<int>(best)) {
                label = static_cast<int>(best);
                changed = true;
            }
        }
        result.iterations = it + 1;
        if (!changed) {
            break;
        }
        Matrix sums = Matrix::Zero(k, x.cols());
        Vector counts = Vector::Zero(k);
        for (Index i = 0; i < n; ++i) {
            const int l = result.labels.labels[static_cast<std::size_t>(i)];
            sums.row(l) += x.row(i);
            counts(l) += 1.0;
        }
        for (int c = 0; c < k; ++c) {
            if (counts(c) > 0.0) {
                result.centers.row(c) = sums.row(c) / counts(c);
            }
        }
    }
    result.inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
        result.inertia += (x.row(i) - result.centers.row(result.labels.labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return result;
}

} // namespace

KMeansResult kmeans(const Matrix& x, int k, std::uint64_t seed, int max_iterations, int restarts) {
    const Index n = x.rows();
    if (k < 1 || k > n) {
        throw DataError("k-means needs 1 <= k <= N (k = " + std::to_string(k) + ", N = " + std::to_string(n) + ")");
    }
    KMeansResult best;
    for (int r = 0; r < std::max(1, restarts); ++r) {
        KMeansResult run = lloyd(x, k, derive_seed(seed, static_cast<std::uint64_t>(r)), max_iterations);
        if (r == 0 || run.inertia < best.inertia) {
            best = std::move(run);
        }
    }
    return best;
}

GmmResult gmm_cluster(const Matrix& x, int k, std::uint64_t seed, const GmmOptions& options) {
    const Index n = x.rows();
    const Index d = x.cols();
    if (k < 1 || k > n) {
        throw DataError("mixture model needs 1 <= k <= N (k = " + std::to_string(k) + ", N = " + std::to_string(n) + ")");
    }
    if (!x.allFinite()) {
        throw DataError("mixture model input contains non-finite values");
    }
    const Matrix ridge = options.regularization * Matrix::Identity(d, d);
    const RowVector global_mean = x.colwise().mean();
    const Matrix global_centered = x.rowwise() - global_mean;
    const Matrix global_cov = global_centered.transpose() * global_centered / static_cast<double>(n) + ridge;

    // Initial responsibilities from hard k-means assignments.
    const KMeansResult init = kmeans(x, k, seed);
    Matrix resp = Matrix::Zero(n, k);
    for (Index i = 0; i < n; ++i) {
        resp(i, init.labels.labels[static_cast<std::size_t>(i)]) = 1.0;
    }

    GmmModel model;
    model.means.assign(static_cast<std::size_t>(k), Vector::Zero(d));
    model.covariances.assign(static_cast<std::size_t>(k), global_cov);
    model.weights = Vector::Constant(k, 1.0 / k);
    Matrix log_joint(n, k);
    Vector row_ll(n);

    auto m_step = [&]() -> int {
        int collapsed = -1;
        for (int c = 0; c < k; ++c) {
            const double nk = resp.col(c).sum();
            if (nk < 1.0) {
                collapsed = c;
                continue;
            }
            const Vector mean = (resp.col(c).transpose() * x).transpose() / nk;
            const Matrix centered = x.rowwise() - mean.transpose();
            model.means[static_cast<std::size_t>(c)] = mean;
            model.covariances[static_cast<std::size_t>(c)] =
                centered.transpose() * resp.col(c).asDiagonal() * centered / nk + ridge;
            model.weights(c) = nk / static_cast<double>(n);
        }
        return collapsed;
    };

    auto e_step = [&]() -> bool {
        Vector logp;
        for (int c = 0; c < k; ++c) {
            if (!gaussian_log_density(x, model.means[static_cast<std::size_t>(c)], model.covariances[static_cast<std::size_t>(c)], logp)) {
                return false;
            }
            log_joint.col(c) = logp.array() + std::log(std::max(model.weights(c), std::numeric_limits<double>::min()));
        }
        for (Index i = 0; i < n; ++i) {
            const double mx = log_joint.row(i).maxCoeff();
            const double lse = mx + std::log((log_joint.row(i).array() - mx).exp().sum());
            row_ll(i) = lse;
            resp.row(i) = (log_joint.row(i).array() - lse).exp();
        }
        return true;
    };

    auto reseed = [&](int c) {
        if (model.reinitializations > 0) {
            throw Error("mixture component " + std::to_string(c) + " collapsed again after re-initialization");
        }
        ++model.reinitializations;
        Index worst = 0;
        if (model.log_likelihood.empty()) {
            // Farthest point from the global mean.
            global_centered.rowwise().squaredNorm().maxCoeff(&worst);
        } else {
            row_ll.minCoeff(&worst);
        }
        model.means[static_cast<std::size_t>(c)] = x.row(worst).transpose();
        model.covariances[static_cast<std::size_t>(c)] = global_cov;
        model.weights(c) = 1.0 / k;
        model.weights /= model.weights.sum();
    };

    if (const int c = m_step(); c >= 0) {
        reseed(c);
    }
    double previous = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < options.max_iterations; ++it) {
        if (!e_step()) {
            throw Error("mixture covariance lost positive definiteness");
        }
        const double ll = row_ll.sum();
        model.log_likelihood.push_back(ll);
        if (ll - previous < options.tolerance && it > 0) {
            model.converged = true;
            break;
        }
        previous = ll;
        if (const int c = m_step(); c >= 0) {
            reseed(c);
            previous = -std::numeric_limits<double>::infinity();
        }
    }

    GmmResult result;
    result.labels.k = k;
    result.labels.labels.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        Index best = 0;
        resp.row(i).maxCoeff(&best);
        result.labels.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    result.labels = canonical_relabel(result.labels);
    result.model = std::move(model);
    return result;
}

LabelVector smooth_labels(const LabelVector& labels, const CoordinateSet& coords, int b) {
    const auto n = static_cast<Index>(labels.size());
    if (coords.size() != n) {
        throw DataError("smoothing: " + std::to_string(n) + " labels but " + std::to_string(coords.size()) + " coordinates");
    }
    if (b < 1 || b >= n) {
        throw DataError("smoothing needs 1 <= b < N (b = " + std::to_string(b) + ", N = " + std::to_string(n) + ")");
    }
    labels.validate();
    const auto neighbors = nearest_neighbors(coords.coords, b);
    LabelVector out = labels;
    std::vector<int> votes(static_cast<std::size_t>(labels.k), 0);
    for (Index i = 0; i < n; ++i) {
        std::fill(votes.begin(), votes.end(), 0);
        for (int j : neighbors[static_cast<std::size_t>(i)]) {
            ++votes[static_cast<std::size_t>(labels.labels[static_cast<std::size_t>(j)])];
        }
        const int top = *std::max_element(votes.begin(), votes.end());
        const int own = labels.labels[static_cast<std::size_t>(i)];
        if (votes[static_cast<std::size_t>(own)] == top) {
            continue;
        }
        out.labels[static_cast<std::size_t>(i)] =
            static_cast<int>(std::find(votes.begin(), votes.end(), top) - votes.begin());
    }
    return out;
}

std::string labels_csv(const std::vector<std::string>& spot_ids, const LabelVector& labels) {
    if (spot_ids.size() != labels.size()) {
        throw DataError("labels and spot ids differ in length");
    }
    std::string out = "spot_id,label\n";
    for (std::size_t i = 0; i < spot_ids.size(); ++i) {
        out += spot_ids[i] + "," + std::to_string(labels.labels[i]) + "\n";
    }
    return out;
}

LabeledSpots read_labels(const std::filesystem::path& path) {
    const Table t = read_table(path);
    if (t.header.size() != 2 || t.header[0] != "spot_id" || t.header[1] != "label") {
        throw DataError(t.path + ": malformed header, expected 'spot_id,label'");
    }
    LabeledSpots out;
    std::unordered_set<std::string> seen;
    int max_label = -1;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string where = t.path + " line " + std::to_string(t.line_numbers[r]);
        if (row.size() != 2) {
            throw DataError(where + ": expected 2 fields");
        }
        if (!seen.insert(row[0]).second) {
            throw DataError(where + ": duplicate spot_id " + row[0]);
        }
        const double v = parse_real(row[1], where);
        if (v < 0 || v != std::floor(v) || v > std::numeric_limits<int>::max()) {
            throw DataError(where + ": label must be a nonnegative integer");
        }
        out.spot_ids.push_back(row[0]);
        out.labels.labels.push_back(static_cast<int>(v));
        max_label = std::max(max_label, static_cast<int>(v));
    }
    out.labels.k = max_label + 1;
    return out;
}

} // namespace stmmc
