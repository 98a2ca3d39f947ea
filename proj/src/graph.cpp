#include "stmmc/graph.hpp"

#include "stmmc/parallel.hpp"
#include "stmmc/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace stmmc {

SpatialGraph graph_from_edges(Index n_nodes, const std::vector<std::pair<int, int>>& edges, GraphKind kind) {
    std::set<std::pair<int, int>> unique;
    for (auto [i, j] : edges) {
        if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes) {
            throw DataError("edge (" + std::to_string(i) + ", " + std::to_string(j) + ") out of range");
        }
        if (i == j) {
            throw DataError("self-loop at node " + std::to_string(i));
        }
        unique.emplace(std::min(i, j), std::max(i, j));
    }
    SpatialGraph g;
    g.n_nodes = n_nodes;
    g.kind = kind;
    g.edges.assign(unique.begin(), unique.end());
    g.neighbors.assign(static_cast<std::size_t>(n_nodes), {});
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(g.edges.size() * 2);
    for (auto [i, j] : g.edges) {
        g.neighbors[static_cast<std::size_t>(i)].push_back(j);
        g.neighbors[static_cast<std::size_t>(j)].push_back(i);
        triplets.emplace_back(i, j, 1.0);
        triplets.emplace_back(j, i, 1.0);
    }
    for (auto& nb : g.neighbors) {
        std::sort(nb.begin(), nb.end());
    }
    g.adjacency.resize(n_nodes, n_nodes);
    g.adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

std::vector<std::vector<int>> nearest_neighbors(const Matrix& points, int k) {
    const Index n = points.rows();
    if (k < 1 || n <= k) {
        throw DataError("nearest-neighbour search needs N > k >= 1 (N = " + std::to_string(n) + ", k = " +
                        std::to_string(k) + ")");
    }
    if (!points.allFinite()) {
        throw DataError("nearest-neighbour search on non-finite points");
    }
    std::vector<std::vector<int>> result(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t s) {
        const auto i = static_cast<Index>(s);
        std::vector<std::pair<double, int>> dist;
        dist.reserve(static_cast<std::size_t>(n - 1));
        for (Index j = 0; j < n; ++j) {
            if (j != i) {
                dist.emplace_back((points.row(i) - points.row(j)).squaredNorm(), static_cast<int>(j));
            }
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        auto& out = result[s];
        out.reserve(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) {
            out.push_back(dist[static_cast<std::size_t>(r)].second);
        }
    });
    return result;
}

SpatialGraph knn_graph(const Matrix& points, int k, GraphKind kind) {
    const auto nn = nearest_neighbors(points, k);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(nn.size() * static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < nn.size(); ++i) {
        for (int j : nn[i]) {
            edges.emplace_back(static_cast<int>(i), j);
        }
    }
    return graph_from_edges(points.rows(), edges, kind);
}

SpatialGraph normalize_adjacency(SpatialGraph g) {
    const Index n = g.n_nodes;
    Vector inv_sqrt_degree(n);
    for (Index i = 0; i < n; ++i) {
        inv_sqrt_degree(i) = 1.0 / std::sqrt(static_cast<double>(g.neighbors[static_cast<std::size_t>(i)].size() + 1));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(g.edges.size() * 2 + static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        triplets.emplace_back(i, i, inv_sqrt_degree(i) * inv_sqrt_degree(i));
        for (int j : g.neighbors[static_cast<std::size_t>(i)]) {
            triplets.emplace_back(i, j, inv_sqrt_degree(i) * inv_sqrt_degree(j));
        }
    }
    g.normalized_adjacency.resize(n, n);
    g.normalized_adjacency.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

SparseMatrix community_operator(const SpatialGraph& g) {
    const Index n = g.n_nodes;
    std::vector<Eigen::Triplet<double>> triplets;
    for (Index i = 0; i < n; ++i) {
        const auto& nb = g.neighbors[static_cast<std::size_t>(i)];
        if (nb.empty()) {
            triplets.emplace_back(i, i, 1.0);
            continue;
        }
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int j : nb) {
            triplets.emplace_back(i, j, w);
        }
    }
    SparseMatrix c(n, n);
    c.setFromTriplets(triplets.begin(), triplets.end());
    return c;
}

Matrix community_representation(const Matrix& z, const SpatialGraph& g) {
    if (z.rows() != g.n_nodes) {
        throw ShapeError("community representation: embedding has " + std::to_string(z.rows()) + " rows but graph has " +
                         std::to_string(g.n_nodes) + " nodes");
    }
    return community_operator(g) * z;
}

CorruptionPlan CorruptionPlan::from_seed(int n, std::uint64_t seed) {
    Rng rng(seed);
    return {rng.permutation(n), seed};
}

CorruptionPlan CorruptionPlan::identity(int n) {
    CorruptionPlan plan;
    plan.permutation.resize(static_cast<std::size_t>(n));
    std::iota(plan.permutation.begin(), plan.permutation.end(), 0);
    return plan;
}

CorruptionPlan CorruptionPlan::inverse() const {
    CorruptionPlan inv;
    inv.seed = seed;
    inv.permutation.resize(permutation.size());
    for (std::size_t i = 0; i < permutation.size(); ++i) {
        inv.permutation[static_cast<std::size_t>(permutation[i])] = static_cast<int>(i);
    }
    return inv;
}

bool CorruptionPlan::is_valid() const {
    std::vector<char> seen(permutation.size(), 0);
    for (int p : permutation) {
        if (p < 0 || static_cast<std::size_t>(p) >= permutation.size() || seen[static_cast<std::size_t>(p)]) {
            return false;
        }
        seen[static_cast<std::size_t>(p)] = 1;
    }
    return true;
}

Matrix corrupt_features(const Matrix& x, const CorruptionPlan& plan) {
    if (static_cast<Index>(plan.permutation.size()) != x.rows()) {
        throw ShapeError("corruption plan of length " + std::to_string(plan.permutation.size()) + " applied to " +
                         std::to_string(x.rows()) + " rows");
    }
    Matrix out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        out.row(i) = x.row(plan.permutation[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::string edge_list_csv(const SpatialGraph& g) {
    std::string out = "i,j\n";
    for (auto [i, j] : g.edges) {
        out += std::to_string(i) + "," + std::to_string(j) + "\n";
    }
    return out;
}

} // namespace stmmc
