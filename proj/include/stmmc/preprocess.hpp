#ifndef STMMC_PREPROCESS_HPP
#define STMMC_PREPROCESS_HPP

#include "stmmc/common.hpp"
#include "stmmc/ingest.hpp"

namespace stmmc {

/// Per-column sample variance (denominator N-1; zero when N == 1), accumulated in row order.
Vector column_variances(const Matrix& x);

/**
 * Keeps the `keep` genes of largest sample variance, ordered by descending
 * variance with ties broken by original column index. `keep` larger than
 * the gene count is clamped, with a warning on stderr.
 */
ExpressionMatrix select_hvg(const ExpressionMatrix& expr, Index keep);

inline constexpr double library_size_target = 10000.0;

/// Scales each spot to a total of 10,000 then applies log(1 + v). Throws on a zero-count spot.
ExpressionMatrix normalize_expression(const ExpressionMatrix& expr);

/// Principal axes of a column-centred data matrix.
struct PcaBasis {
    Matrix components;          // d x M, orthonormal rows
    RowVector means;            // length M
    Vector explained_variance;  // length d, nonincreasing

    Index dim() const { return components.rows(); }

    /// (x - means) * components^T
    Matrix transform(const Matrix& x) const;
    /// scores * components + means
    Matrix inverse_transform(const Matrix& scores) const;
};

/// Top-`d` principal components via thin SVD. Requires d <= min(N, M).
/// Each component's sign is fixed so its largest-magnitude entry is positive.
PcaBasis fit_pca(const Matrix& x, Index d);

} // namespace stmmc

#endif
