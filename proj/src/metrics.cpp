#include "stmmc/metrics.hpp"

#include "stmmc/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stmmc {

namespace {

std::vector<int> compact(const std::vector<int>& labels, std::size_t& distinct) {
    std::map<int, int> ids;
    for (int l : labels) {
        ids.emplace(l, 0);
    }
    int next = 0;
    for (auto& [label, id] : ids) {
        id = next++;
    }
    distinct = ids.size();
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        out.push_back(ids[l]);
    }
    return out;
}

double choose2(std::int64_t n) {
    return 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
}

void check_lengths(const LabelVector& a, const LabelVector& b, std::size_t minimum) {
    if (a.size() != b.size()) {
        throw DataError("labelings differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    if (a.size() < minimum) {
        throw DataError("labelings need at least " + std::to_string(minimum) + " items");
    }
}

} // namespace

ContingencyTable ContingencyTable::build(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw DataError("labelings differ in length");
    }
    std::size_t ra = 0;
    std::size_t cb = 0;
    const auto ca = compact(a, ra);
    const auto cc = compact(b, cb);
    ContingencyTable t;
    t.counts.assign(ra, std::vector<std::int64_t>(cb, 0));
    t.row_sums.assign(ra, 0);
    t.col_sums.assign(cb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++t.counts[static_cast<std::size_t>(ca[i])][static_cast<std::size_t>(cc[i])];
        ++t.row_sums[static_cast<std::size_t>(ca[i])];
        ++t.col_sums[static_cast<std::size_t>(cc[i])];
    }
    t.total = static_cast<std::int64_t>(a.size());
    return t;
}

double ari(const LabelVector& a, const LabelVector& b) {
    check_lengths(a, b, 2);
    const auto t = ContingencyTable::build(a.labels, b.labels);
    double sum_cells = 0.0;
    for (const auto& row : t.counts) {
        for (auto c : row) {
            sum_cells += choose2(c);
        }
    }
    double sum_rows = 0.0;
    for (auto r : t.row_sums) {
        sum_rows += choose2(r);
    }
    double sum_cols = 0.0;
    for (auto c : t.col_sums) {
        sum_cols += choose2(c);
    }
    const double expected = sum_rows * sum_cols / choose2(t.total);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) {
        return 1.0;
    }
    return (sum_cells - expected) / (maximum - expected);
}

double nmi(const LabelVector& a, const LabelVector& b) {
    check_lengths(a, b, 1);
    const auto t = ContingencyTable::build(a.labels, b.labels);
    const auto n = static_cast<double>(t.total);
    // Terms are summed in sorted order so the result does not depend on how clusters are numbered.
    auto sorted_sum = [](std::vector<double> terms) {
        std::sort(terms.begin(), terms.end());
        double s = 0.0;
        for (double v : terms) {
            s += v;
        }
        return s;
    };
    auto entropy = [n, &sorted_sum](const std::vector<std::int64_t>& sums) {
        std::vector<double> terms;
        for (auto s : sums) {
            if (s > 0) {
                const double p = static_cast<double>(s) / n;
                terms.push_back(-p * std::log(p));
            }
        }
        return sorted_sum(std::move(terms));
    };
    const double ha = entropy(t.row_sums);
    const double hb = entropy(t.col_sums);
    if (t.row_sums.size() == 1 && t.col_sums.size() == 1) {
        return 1.0;
    }
    if (t.row_sums.size() == 1 || t.col_sums.size() == 1) {
        return 0.0;
    }
    std::vector<double> terms;
    for (std::size_t i = 0; i < t.counts.size(); ++i) {
        for (std::size_t j = 0; j < t.counts[i].size(); ++j) {
            const auto c = t.counts[i][j];
            if (c > 0) {
                const double pij = static_cast<double>(c) / n;
                terms.push_back(pij * std::log(pij * n * n / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j]))));
            }
        }
    }
    const double mi = sorted_sum(std::move(terms));
    return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

std::string evaluation_csv(double ari_value, double nmi_value) {
    return "metric,value\nARI," + format_real(ari_value) + "\nNMI," + format_real(nmi_value) + "\n";
}

} // namespace stmmc
