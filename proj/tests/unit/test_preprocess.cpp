#include "stmmc/preprocess.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <numeric>
#include <random>

using namespace stmmc;

namespace {

ExpressionMatrix wrap(const Matrix& values) {
    ExpressionMatrix e;
    e.values = values;
    for (Index i = 0; i < values.rows(); ++i) e.spot_ids.push_back("s" + std::to_string(i));
    for (Index j = 0; j < values.cols(); ++j) e.gene_ids.push_back("g" + std::to_string(j));
    return e;
}

double sample_variance(const Matrix& x, Index col) {
    double mean = 0;
    for (Index i = 0; i < x.rows(); ++i) mean += x(i, col);
    mean /= static_cast<double>(x.rows());
    double s = 0;
    for (Index i = 0; i < x.rows(); ++i) s += (x(i, col) - mean) * (x(i, col) - mean);
    return s / static_cast<double>(x.rows() - 1);
}

} // namespace

TEST_CASE("select_hvg keeps the highest-variance genes in descending order") {
    // Column variances 0, 2, 1, 3 (sample variance of two values a, b is (a-b)^2 / 2).
    Matrix x(2, 4);
    x << 1, 0, 0, 0,
         1, 2, std::sqrt(2.0), std::sqrt(6.0);
    const auto out = select_hvg(wrap(x), 2);
    REQUIRE(out.gene_ids.size() == 2);
    CHECK(out.gene_ids[0] == "g3");
    CHECK(out.gene_ids[1] == "g1");
    CHECK(out.values.col(0) == x.col(3));

    const auto all = select_hvg(wrap(x), 4);
    CHECK(all.gene_ids == std::vector<std::string>{"g3", "g1", "g2", "g0"});
    const auto clamped = select_hvg(wrap(x), 10);
    CHECK(clamped.gene_ids == all.gene_ids);
}

TEST_CASE("select_hvg breaks variance ties by original gene order") {
    Matrix x(2, 3);
    x << 0, 1, 0,
         1, 2, 1;
    const auto out = select_hvg(wrap(x), 3);
    CHECK(out.gene_ids == std::vector<std::string>{"g0", "g1", "g2"});
}

TEST_CASE("select_hvg matches a brute-force variance ranking") {
    std::mt19937_64 gen(3);
    const Matrix x = oracle::random_matrix(10, 6, gen, 0.0, 5.0);
    std::vector<std::pair<double, Index>> ranked;
    for (Index j = 0; j < 6; ++j) ranked.emplace_back(-sample_variance(x, j), j);
    std::sort(ranked.begin(), ranked.end());
    const auto out = select_hvg(wrap(x), 3);
    for (Index r = 0; r < 3; ++r) {
        CHECK(out.gene_ids[static_cast<std::size_t>(r)] == "g" + std::to_string(ranked[static_cast<std::size_t>(r)].second));
    }
    const Vector v = column_variances(out.values);
    for (Index r = 1; r < v.size(); ++r) CHECK(v(r) <= v(r - 1));
    for (Index j = 0; j < 6; ++j) CHECK(column_variances(x)(j) == doctest::Approx(sample_variance(x, j)).epsilon(1e-12));
}

TEST_CASE("normalize_expression scales to 10,000 then applies log1p") {
    Matrix x(2, 4);
    x << 1, 1, 1, 1,
         1000, 2000, 3000, 4000;
    const auto out = normalize_expression(wrap(x));
    for (Index j = 0; j < 4; ++j) {
        CHECK(out.values(0, j) == doctest::Approx(std::log(1.0 + 2500.0)).epsilon(1e-14));
        CHECK(out.values(1, j) == doctest::Approx(std::log1p(x(1, j))).epsilon(1e-14));
    }

    std::mt19937_64 gen(8);
    const Matrix r = oracle::random_matrix(5, 4, gen, 0.1, 20.0);
    const auto n = normalize_expression(wrap(r));
    for (Index i = 0; i < 5; ++i) {
        double total = 0;
        for (Index j = 0; j < 4; ++j) total += r(i, j);
        double pre_log = 0;
        for (Index j = 0; j < 4; ++j) {
            const double scaled = r(i, j) * 10000.0 / total;
            CHECK(n.values(i, j) == doctest::Approx(std::log1p(scaled)).epsilon(1e-13));
            pre_log += std::expm1(n.values(i, j));
        }
        CHECK(std::abs(pre_log - 10000.0) / 10000.0 < 1e-6);
    }
}

TEST_CASE("normalize_expression names a zero-count spot") {
    Matrix x(2, 2);
    x << 1, 2,
         0, 0;
    CHECK_THROWS_WITH_AS(normalize_expression(wrap(x)), doctest::Contains("s1"), DataError);
}

TEST_CASE("PCA of rank-1 data spans the line") {
    Matrix x(5, 3);
    const RowVector dir = (RowVector(3) << 1, 2, 2).finished() / 3.0;
    for (Index i = 0; i < 5; ++i) x.row(i) = static_cast<double>(i) * 1.5 * dir + RowVector::Constant(3, 4.0);
    const auto pca = fit_pca(x, 2);
    CHECK(std::abs(pca.components.row(0).dot(dir)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pca.explained_variance(1) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(std::abs(pca.explained_variance(1)) < 1e-20);
    CHECK((pca.inverse_transform(pca.transform(x)) - x).norm() < 1e-10);
}

TEST_CASE("PCA of centred orthogonal columns aligns with the dominant column") {
    Matrix x(4, 2);
    x << 3, 1,
        -3, 1,
         3, -1,
        -3, -1;
    const auto pca = fit_pca(x, 2);
    CHECK(pca.components(0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(pca.components(0, 1)) < 1e-12);
    CHECK(pca.components(1, 1) == doctest::Approx(1.0));
    CHECK(pca.explained_variance(0) == doctest::Approx(12.0));
    CHECK(pca.explained_variance(1) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("PCA residual equals the discarded covariance eigenvalues") {
    std::mt19937_64 gen(21);
    const Matrix x = oracle::random_matrix(30, 8, gen);

    // Covariance from explicit loops, eigenvalues from a symmetric solver.
    Matrix centred = x;
    for (Index j = 0; j < 8; ++j) {
        double mean = 0;
        for (Index i = 0; i < 30; ++i) mean += x(i, j);
        mean /= 30;
        for (Index i = 0; i < 30; ++i) centred(i, j) -= mean;
    }
    const Matrix scatter = oracle::matmul(centred.transpose(), centred);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(scatter);
    const Vector ev = eig.eigenvalues(); // ascending
    double discarded = 0;
    for (Index i = 0; i < 4; ++i) discarded += ev(i);

    const auto pca = fit_pca(x, 4);
    const double residual = (pca.inverse_transform(pca.transform(x)) - x).squaredNorm();
    CHECK(residual == doctest::Approx(discarded).epsilon(1e-10));
    for (Index r = 0; r < 4; ++r) {
        CHECK(pca.explained_variance(r) == doctest::Approx(ev(7 - r) / 29).epsilon(1e-10));
    }

    const Matrix gram = pca.components * pca.components.transpose();
    CHECK((gram - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);

    double previous = std::numeric_limits<double>::infinity();
    for (Index d = 1; d <= 8; ++d) {
        const auto p = fit_pca(x, d);
        const double err = (p.inverse_transform(p.transform(x)) - x).norm();
        CHECK(err <= previous + 1e-12);
        previous = err;
    }
}

TEST_CASE("fit_pca rejects an out-of-range dimension") {
    const Matrix x = Matrix::Ones(3, 2);
    CHECK_THROWS(fit_pca(x, 3));
    CHECK_THROWS(fit_pca(x, 0));
}
