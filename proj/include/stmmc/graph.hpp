#ifndef STMMC_GRAPH_HPP
#define STMMC_GRAPH_HPP

#include "stmmc/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace stmmc {

enum class GraphKind { proximity, similarity };

/**
 * Undirected simple graph over N spots.
 *
 * `adjacency` is the symmetric 0/1 matrix without self-loops.
 * `normalized_adjacency` is D^{-1/2} (A + I) D^{-1/2}, where D is the degree
 * matrix of A + I; it is empty until normalize_adjacency() has been applied.
 */
struct SpatialGraph {
    Index n_nodes = 0;
    GraphKind kind = GraphKind::proximity;
    std::vector<std::pair<int, int>> edges;    // i < j, sorted
    std::vector<std::vector<int>> neighbors;   // sorted, self excluded
    SparseMatrix adjacency;
    SparseMatrix normalized_adjacency;

    bool is_normalized() const { return normalized_adjacency.rows() == n_nodes && n_nodes > 0; }
};

/// Builds a graph from undirected edges; duplicates and orientation are ignored, self-loops rejected.
SpatialGraph graph_from_edges(Index n_nodes, const std::vector<std::pair<int, int>>& edges,
                              GraphKind kind = GraphKind::proximity);

/**
 * For each row of `points`, the indices of its k nearest other rows by
 * Euclidean distance, nearest first; equal distances go to the lower index.
 */
std::vector<std::vector<int>> nearest_neighbors(const Matrix& points, int k);

/// k-nearest-neighbour graph, symmetrised by union. Requires N > k.
SpatialGraph knn_graph(const Matrix& points, int k, GraphKind kind = GraphKind::proximity);

/// Returns a copy of `g` with normalized_adjacency filled in.
SpatialGraph normalize_adjacency(SpatialGraph g);

/// Row-stochastic operator whose product with Z gives each node's neighbour-mean embedding.
/// An isolated node maps to its own row.
SparseMatrix community_operator(const SpatialGraph& g);

/// Mean embedding over each node's one-step neighbours (self excluded); isolated nodes keep their own row.
Matrix community_representation(const Matrix& z, const SpatialGraph& g);

/// Node shuffle used to build a corrupted graph: same topology, permuted features.
struct CorruptionPlan {
    std::vector<int> permutation;
    std::uint64_t seed = 0;

    /// Seeded Fisher-Yates shuffle of [0, n).
    static CorruptionPlan from_seed(int n, std::uint64_t seed);
    static CorruptionPlan identity(int n);
    CorruptionPlan inverse() const;
    bool is_valid() const;
};

/// Row i of the result is row permutation[i] of `x`.
Matrix corrupt_features(const Matrix& x, const CorruptionPlan& plan);

/// Debug dump: header "i,j" then one zero-based undirected edge per line.
std::string edge_list_csv(const SpatialGraph& g);

} // namespace stmmc

#endif
