#ifndef STMMC_METRICS_HPP
#define STMMC_METRICS_HPP

#include "stmmc/cluster.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stmmc {

/// Cross-tabulation of two labelings over the same items.
struct ContingencyTable {
    std::vector<std::vector<std::int64_t>> counts; // rows: labels of a, cols: labels of b
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;

    /// Label ids are compacted, so unused ids do not produce empty rows or columns.
    static ContingencyTable build(const std::vector<int>& a, const std::vector<int>& b);
};

/// Adjusted Rand index. Returns 1 when the expected and maximum indices coincide
/// (e.g. both labelings single-cluster or both all-singletons).
double ari(const LabelVector& a, const LabelVector& b);

/// Mutual information over the arithmetic mean of the two entropies (natural log).
/// Both entropies zero gives 1; exactly one zero gives 0.
double nmi(const LabelVector& a, const LabelVector& b);

/// "metric,value" rows for ARI and NMI.
std::string evaluation_csv(double ari_value, double nmi_value);

} // namespace stmmc

#endif
