#include "stmmc/graph.hpp"
#include "stmmc/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>
#include <set>

using namespace stmmc;

namespace {

std::set<std::pair<int, int>> edge_set(const SpatialGraph& g) {
    return {g.edges.begin(), g.edges.end()};
}

} // namespace

TEST_CASE("collinear points with K=1 break ties toward the lower index") {
    Matrix p(4, 2);
    p << 0, 0, 1, 0, 2, 0, 3, 0;
    const auto nn = nearest_neighbors(p, 1);
    CHECK(nn[1][0] == 0);
    CHECK(nn[2][0] == 1);
    const auto g = knn_graph(p, 1);
    CHECK(edge_set(g) == std::set<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
}

TEST_CASE("K = N-1 gives the complete graph") {
    std::mt19937_64 gen(2);
    const Matrix p = oracle::random_matrix(6, 2, gen);
    const auto g = knn_graph(p, 5);
    CHECK(g.edges.size() == 15);
    CHECK_THROWS(knn_graph(p, 6));
}

TEST_CASE("KNN edges match the all-pairs oracle and every node has degree at least K") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 gen(seed);
        const Matrix p = oracle::random_matrix(20, 2, gen);
        const auto g = knn_graph(p, 3);
        CHECK(edge_set(g) == oracle::knn_edges(p, 3));
        for (const auto& nb : g.neighbors) CHECK(nb.size() >= 3);
        const Matrix a = Matrix(g.adjacency);
        CHECK(a == a.transpose());
        CHECK(a.diagonal().isZero());
    }
}

TEST_CASE("KNN graph is equivariant under node relabelling") {
    std::mt19937_64 gen(9);
    const Matrix p = oracle::random_matrix(15, 2, gen);
    const auto perm = Rng(4).permutation(15);
    Matrix q(15, 2);
    for (int i = 0; i < 15; ++i) q.row(i) = p.row(perm[static_cast<std::size_t>(i)]);
    const auto gp = knn_graph(p, 3);
    const auto gq = knn_graph(q, 3);
    std::set<std::pair<int, int>> mapped;
    for (auto [i, j] : gq.edges) {
        const int a = perm[static_cast<std::size_t>(i)];
        const int b = perm[static_cast<std::size_t>(j)];
        mapped.emplace(std::min(a, b), std::max(a, b));
    }
    CHECK(mapped == edge_set(gp));
}

TEST_CASE("normalized adjacency on hand-computable graphs") {
    const auto two = normalize_adjacency(graph_from_edges(2, {{0, 1}}));
    const Matrix a2 = Matrix(two.normalized_adjacency);
    CHECK((a2 - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);

    const auto empty = normalize_adjacency(graph_from_edges(3, {}));
    CHECK(Matrix(empty.normalized_adjacency) == Matrix::Identity(3, 3));
    CHECK(community_representation(Matrix::Identity(3, 3), empty) == Matrix::Identity(3, 3));
}

TEST_CASE("normalized adjacency matches the entrywise formula and has spectral radius at most 1") {
    std::mt19937_64 gen(17);
    const Matrix p = oracle::random_matrix(10, 2, gen);
    const auto g = normalize_adjacency(knn_graph(p, 3));
    const auto edges = oracle::knn_edges(p, 3);
    const auto nb = oracle::neighbor_lists(10, edges);
    const Matrix a = Matrix(g.normalized_adjacency);
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const bool linked = i == j || edges.count({std::min(i, j), std::max(i, j)}) > 0;
            const double di = static_cast<double>(nb[static_cast<std::size_t>(i)].size() + 1);
            const double dj = static_cast<double>(nb[static_cast<std::size_t>(j)].size() + 1);
            const double expected = linked ? 1.0 / std::sqrt(di * dj) : 0.0;
            CHECK(std::abs(a(i, j) - expected) < 1e-12);
        }
    }
    CHECK(a == a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-8);
}

TEST_CASE("corruption plans are seeded Fisher-Yates shuffles") {
    const auto plan = CorruptionPlan::from_seed(6, 42);
    CHECK(plan.permutation == oracle::fisher_yates(6, 42));
    CHECK(CorruptionPlan::from_seed(6, 42).permutation == plan.permutation);
    CHECK(plan.is_valid());

    std::mt19937_64 gen(1);
    const Matrix x = oracle::random_matrix(6, 3, gen);
    CHECK(corrupt_features(x, CorruptionPlan::identity(6)) == x);
    const Matrix c = corrupt_features(x, plan);
    for (int i = 0; i < 6; ++i) CHECK(c.row(i) == x.row(plan.permutation[static_cast<std::size_t>(i)]));
    CHECK(corrupt_features(c, plan.inverse()) == x);

    CorruptionPlan bad;
    bad.permutation = {0, 0, 1};
    CHECK_FALSE(bad.is_valid());
}

TEST_CASE("community representation is the neighbour mean") {
    const auto g = graph_from_edges(3, {{0, 1}, {0, 2}});
    Matrix z(3, 2);
    z << 9, 9, 1, 0, 0, 1;
    const Matrix c = community_representation(z, g);
    CHECK(c(0, 0) == 0.5);
    CHECK(c(0, 1) == 0.5);
    CHECK(c.row(1) == z.row(0));

    const auto complete = graph_from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    Matrix v(4, 3);
    for (int i = 0; i < 4; ++i) v.row(i) << 1.5, -2, 7;
    CHECK((community_representation(v, complete) - v).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937_64 gen(33);
    std::set<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 5}, {3, 4}, {0, 5}, {1, 6}};
    const auto rg = graph_from_edges(8, {edges.begin(), edges.end()});
    const Matrix zz = oracle::random_matrix(8, 4, gen);
    const Matrix expected = oracle::community_loop(zz, oracle::neighbor_lists(8, edges));
    CHECK((community_representation(zz, rg) - expected).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((Matrix(community_operator(rg) * zz) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("community representation commutes with relabelling") {
    std::mt19937_64 gen(71);
    const Matrix p = oracle::random_matrix(12, 2, gen);
    const Matrix z = oracle::random_matrix(12, 3, gen);
    const auto perm = Rng(5).permutation(12);
    Matrix pq(12, 2), zq(12, 3);
    for (int i = 0; i < 12; ++i) {
        pq.row(i) = p.row(perm[static_cast<std::size_t>(i)]);
        zq.row(i) = z.row(perm[static_cast<std::size_t>(i)]);
    }
    const Matrix a = community_representation(z, knn_graph(p, 3));
    const Matrix b = community_representation(zq, knn_graph(pq, 3));
    for (int i = 0; i < 12; ++i) {
        CHECK((b.row(i) - a.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("graph_from_edges rejects self-loops and out-of-range nodes") {
    CHECK_THROWS(graph_from_edges(3, {{1, 1}}));
    CHECK_THROWS(graph_from_edges(3, {{0, 3}}));
    const auto g = graph_from_edges(3, {{1, 0}, {0, 1}});
    CHECK(g.edges.size() == 1);
    CHECK(edge_list_csv(g) == "i,j\n0,1\n");
}
