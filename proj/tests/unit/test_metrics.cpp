#include "stmmc/metrics.hpp"
#include "stmmc/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace stmmc;

namespace {

LabelVector lv(std::vector<int> v) {
    int k = 0;
    for (int l : v) k = std::max(k, l + 1);
    return LabelVector{std::move(v), k};
}

std::vector<int> random_labels(int n, int k, std::mt19937_64& gen) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    std::vector<int> v(static_cast<std::size_t>(n));
    for (auto& l : v) l = pick(gen);
    return v;
}

} // namespace

TEST_CASE("ARI on hand-checkable labelings") {
    CHECK(ari(lv({0, 0, 1, 1}), lv({1, 1, 0, 0})) == 1.0);
    CHECK(ari(lv({0, 0, 0, 0}), lv({0, 0, 0, 0})) == 1.0);
    const double v = ari(lv({0, 0, 1, 1}), lv({0, 0, 1, 2}));
    CHECK(std::abs(v - oracle::ari_pairs({0, 0, 1, 1}, {0, 0, 1, 2})) < 1e-12);
    CHECK(v == doctest::Approx(4.0 / 7.0));
}

TEST_CASE("NMI on hand-checkable labelings") {
    CHECK(nmi(lv({0, 0, 1, 1}), lv({1, 1, 0, 0})) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(nmi(lv({0, 0, 1, 1}), lv({0, 1, 0, 1}))) < 1e-12);
    CHECK(std::abs(nmi(lv({0, 0, 1, 1}), lv({0, 1, 0, 1})) - oracle::nmi_table({0, 0, 1, 1}, {0, 1, 0, 1})) < 1e-12);
    CHECK(nmi(lv({0, 0, 0}), lv({0, 0, 0})) == 1.0);
    CHECK(nmi(lv({0, 0, 0}), lv({0, 1, 2})) == 0.0);
}

TEST_CASE("metrics match their oracles on random labelings") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = random_labels(50, 2 + trial % 5, gen);
        const auto b = random_labels(50, 2 + trial % 4, gen);
        CHECK(std::abs(ari(lv(a), lv(b)) - oracle::ari_pairs(a, b)) < 1e-12);
        CHECK(std::abs(nmi(lv(a), lv(b)) - oracle::nmi_table(a, b)) < 1e-12);
        CHECK(ari(lv(a), lv(b)) == ari(lv(b), lv(a)));
        CHECK(nmi(lv(a), lv(b)) == nmi(lv(b), lv(a)));
        const double n = nmi(lv(a), lv(b));
        CHECK(n >= 0.0);
        CHECK(n <= 1.0);
    }
}

TEST_CASE("metrics ignore the names of the clusters") {
    std::mt19937_64 gen(5);
    const auto a = random_labels(40, 4, gen);
    const auto b = random_labels(40, 3, gen);
    const std::vector<int> rename = {3, 0, 2, 1};
    std::vector<int> a2;
    for (int l : a) a2.push_back(rename[static_cast<std::size_t>(l)]);
    CHECK(ari(lv(a2), lv(b)) == ari(lv(a), lv(b)));
    CHECK(nmi(lv(a2), lv(b)) == nmi(lv(a), lv(b)));
}

TEST_CASE("independent labelings score near zero on average") {
    std::mt19937_64 gen(8);
    double total = 0;
    for (int t = 0; t < 100; ++t) total += ari(lv(random_labels(50, 4, gen)), lv(random_labels(50, 4, gen)));
    CHECK(std::abs(total / 100) < 0.05);
}

TEST_CASE("contingency table marginals") {
    const auto t = ContingencyTable::build({5, 5, 9, 9, 9}, {0, 1, 1, 1, 0});
    REQUIRE(t.counts.size() == 2);
    CHECK(t.counts[0] == std::vector<std::int64_t>{1, 1});
    CHECK(t.counts[1] == std::vector<std::int64_t>{1, 2});
    CHECK(t.row_sums == std::vector<std::int64_t>{2, 3});
    CHECK(t.col_sums == std::vector<std::int64_t>{2, 3});
    CHECK(t.total == 5);
    CHECK_THROWS(ContingencyTable::build({0, 1}, {0}));
}

TEST_CASE("evaluation CSV layout") {
    CHECK(evaluation_csv(1.0, 0.5) == "metric,value\nARI,1\nNMI,0.5\n");
}
