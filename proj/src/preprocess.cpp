#include "stmmc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace stmmc {

Vector column_variances(const Matrix& x) {
    const Index n = x.rows();
    Vector var = Vector::Zero(x.cols());
    if (n < 2) {
        return var;
    }
    for (Index j = 0; j < x.cols(); ++j) {
        double mean = 0.0;
        for (Index i = 0; i < n; ++i) {
            mean += x(i, j);
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double d = x(i, j) - mean;
            ss += d * d;
        }
        var(j) = ss / static_cast<double>(n - 1);
    }
    return var;
}

ExpressionMatrix select_hvg(const ExpressionMatrix& expr, Index keep) {
    if (keep < 1) {
        throw DataError("number of genes to keep must be at least 1");
    }
    if (keep > expr.n_genes()) {
        std::cerr << "warning: requested " << keep << " highly variable genes but only " << expr.n_genes()
                  << " are available; keeping all\n";
        keep = expr.n_genes();
    }
    const Vector var = column_variances(expr.values);
    std::vector<Index> order(static_cast<std::size_t>(expr.n_genes()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return var(a) > var(b); });

    ExpressionMatrix out;
    out.spot_ids = expr.spot_ids;
    out.values.resize(expr.n_spots(), keep);
    out.gene_ids.reserve(static_cast<std::size_t>(keep));
    for (Index j = 0; j < keep; ++j) {
        const Index src = order[static_cast<std::size_t>(j)];
        out.values.col(j) = expr.values.col(src);
        out.gene_ids.push_back(expr.gene_ids[static_cast<std::size_t>(src)]);
    }
    return out;
}

ExpressionMatrix normalize_expression(const ExpressionMatrix& expr) {
    ExpressionMatrix out = expr;
    for (Index i = 0; i < expr.n_spots(); ++i) {
        double total = 0.0;
        for (Index j = 0; j < expr.n_genes(); ++j) {
            total += expr.values(i, j);
        }
        if (!(total > 0.0)) {
            throw DataError("spot " + expr.spot_ids[static_cast<std::size_t>(i)] + " has zero total expression");
        }
        const double scale = library_size_target / total;
        for (Index j = 0; j < expr.n_genes(); ++j) {
            out.values(i, j) = std::log1p(expr.values(i, j) * scale);
        }
    }
    return out;
}

Matrix PcaBasis::transform(const Matrix& x) const {
    return (x.rowwise() - means) * components.transpose();
}

Matrix PcaBasis::inverse_transform(const Matrix& scores) const {
    return (scores * components).rowwise() + means;
}

PcaBasis fit_pca(const Matrix& x, Index d) {
    const Index n = x.rows();
    const Index m = x.cols();
    if (d < 1 || d > std::min(n, m)) {
        throw DataError("PCA dimension " + std::to_string(d) + " must lie in [1, min(N, M)] for a " +
                        shape_string(n, m) + " matrix");
    }
    if (!x.allFinite()) {
        throw DataError("PCA input contains non-finite values");
    }
    PcaBasis basis;
    basis.means = x.colwise().mean();
    const Matrix centered = x.rowwise() - basis.means;
    Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const Matrix& v = svd.matrixV();

    basis.components.resize(d, m);
    basis.explained_variance.resize(d);
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (Index k = 0; k < d; ++k) {
        RowVector axis = v.col(k).transpose();
        Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0.0) {
            axis = -axis;
        }
        basis.components.row(k) = axis;
        basis.explained_variance(k) = sv(k) * sv(k) / denom;
    }
    return basis;
}

} // namespace stmmc
