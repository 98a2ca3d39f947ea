#include "stmmc/synth.hpp"

#include "stmmc/io.hpp"
#include "stmmc/random.hpp"

#include <cmath>
#include <cstdio>
#include <queue>
#include <tuple>

namespace stmmc {

void SynthSpec::validate() const {
    if (rows < 1 || cols < 1 || n_domains < 1 || n_genes < 1 || image_dim < 1) {
        throw ConfigError("synthetic spec: all counts must be at least 1");
    }
    if (rows * cols < n_domains) {
        throw ConfigError("synthetic spec: more domains than spots");
    }
    if (!(noise_sd >= 0.0) || !(baseline >= 0.0) || !(spacing > 0.0)) {
        throw ConfigError("synthetic spec: noise_sd and baseline must be nonnegative, spacing positive");
    }
}

namespace {

constexpr double separation_factor = 1.0;

std::vector<int> grow_domains(const SynthSpec& spec, Rng& rng) {
    const int n = spec.rows * spec.cols;
    const auto order = rng.permutation(n);
    // Centres are taken in shuffled order, skipping any closer than min_sep to an accepted one;
    // min_sep shrinks until enough centres fit.
    std::vector<int> centers;
    double min_sep = separation_factor * std::sqrt(static_cast<double>(n) / spec.n_domains);
    while (true) {
        centers.clear();
        for (int cand : order) {
            bool ok = true;
            for (int c : centers) {
                const double dr = cand / spec.cols - c / spec.cols;
                const double dc = cand % spec.cols - c % spec.cols;
                if (dr * dr + dc * dc < min_sep * min_sep) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                centers.push_back(cand);
                if (static_cast<int>(centers.size()) == spec.n_domains) {
                    break;
                }
            }
        }
        if (static_cast<int>(centers.size()) == spec.n_domains) {
            break;
        }
        min_sep *= 0.9;
    }

    using Entry = std::tuple<double, int, int>; // squared distance to the domain centre, domain, spot
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
    auto dist2 = [&](int spot, int domain) {
        const int c = centers[static_cast<std::size_t>(domain)];
        const double dr = spot / spec.cols - c / spec.cols;
        const double dc = spot % spec.cols - c % spec.cols;
        return dr * dr + dc * dc;
    };
    for (int d = 0; d < spec.n_domains; ++d) {
        frontier.emplace(0.0, d, centers[static_cast<std::size_t>(d)]);
    }
    std::vector<int> domain(static_cast<std::size_t>(n), -1);
    while (!frontier.empty()) {
        const auto [dist, d, spot] = frontier.top();
        frontier.pop();
        if (domain[static_cast<std::size_t>(spot)] >= 0) {
            continue;
        }
        domain[static_cast<std::size_t>(spot)] = d;
        const int r = spot / spec.cols;
        const int c = spot % spec.cols;
        const int nbrs[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& nb : nbrs) {
            if (nb[0] < 0 || nb[0] >= spec.rows || nb[1] < 0 || nb[1] >= spec.cols) {
                continue;
            }
            const int next = nb[0] * spec.cols + nb[1];
            if (domain[static_cast<std::size_t>(next)] < 0) {
                frontier.emplace(dist2(next, d), d, next);
            }
        }
    }
    return domain;
}

} // namespace

SynthDataset generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const int n = spec.rows * spec.cols;
    const auto domain = grow_domains(spec, rng);

    SynthDataset ds;
    auto& ids = ds.expression.spot_ids;
    for (int i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "spot_%04d", i);
        ids.emplace_back(buf);
    }
    for (int g = 0; g < spec.n_genes; ++g) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "gene_%03d", g);
        ds.expression.gene_ids.emplace_back(buf);
    }

    ds.coordinates.spot_ids = ids;
    ds.coordinates.coords.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        ds.coordinates.coords(i, 0) = (i % spec.cols) * spec.spacing;
        ds.coordinates.coords(i, 1) = (i / spec.cols) * spec.spacing;
    }

    const int block = std::max(1, spec.n_genes / spec.n_domains);
    ds.expression.values.resize(n, spec.n_genes);
    for (int i = 0; i < n; ++i) {
        const int d = domain[static_cast<std::size_t>(i)];
        for (int g = 0; g < spec.n_genes; ++g) {
            const bool marker = g >= d * block && g < (d + 1) * block;
            const double mean = spec.baseline + (marker ? spec.signature_strength : 0.0);
            ds.expression.values(i, g) = std::max(0.0, mean + spec.noise_sd * rng.normal());
        }
    }

    Matrix domain_means(spec.n_domains, spec.image_dim);
    for (int d = 0; d < spec.n_domains; ++d) {
        for (int j = 0; j < spec.image_dim; ++j) {
            domain_means(d, j) = spec.image_signal * rng.normal();
        }
    }
    ds.features.spot_ids = ids;
    ds.features.source = FeatureSource::precomputed;
    ds.features.values.resize(n, spec.image_dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < spec.image_dim; ++j) {
            ds.features.values(i, j) = domain_means(domain[static_cast<std::size_t>(i)], j) + rng.normal();
        }
    }

    ds.labels.k = spec.n_domains;
    ds.labels.labels = domain;
    return ds;
}

void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data) {
    write_file_atomic(dir / "expression.csv", expression_csv(data.expression));
    write_file_atomic(dir / "coords.csv", coordinates_csv(data.coordinates));
    write_file_atomic(dir / "features.csv", features_csv(data.features));
    write_file_atomic(dir / "labels.csv", labels_csv(data.expression.spot_ids, data.labels));
}

} // namespace stmmc
