#ifndef STMMC_SYNTH_HPP
#define STMMC_SYNTH_HPP

#include "stmmc/cluster.hpp"
#include "stmmc/ingest.hpp"

#include <cstdint>
#include <filesystem>

namespace stmmc {

/// Parameters of a planted spatial-domain dataset on a rows x cols spot lattice.
struct SynthSpec {
    int rows = 20;
    int cols = 20;
    int n_domains = 4;
    int n_genes = 60;
    double signature_strength = 1.0; // mean shift of a domain's marker genes
    double noise_sd = 0.5;
    double baseline = 2.0;           // mean expression of non-marker genes
    int image_dim = 12;
    double image_signal = 1.0;       // scale of the per-domain feature means
    double spacing = 10.0;           // lattice pitch in coordinate units
    std::uint64_t seed = 7;

    void validate() const;
};

struct SynthDataset {
    ExpressionMatrix expression;
    CoordinateSet coordinates;
    FeatureMatrix features;
    LabelVector labels;
};

/**
 * Domain centres are drawn in seeded random order, rejecting any closer than
 * sqrt(spots / n_domains) lattice steps to an accepted centre (the distance
 * shrinks by 10% until all centres fit), which keeps domain sizes comparable.
 * Domains grow outward from the centres, each lattice spot going
 * to the nearest centre (Euclidean) that can reach it through already
 * claimed 4-neighbours, so every domain is 4-connected. Domain d raises its
 * own disjoint block of n_genes / n_domains marker genes by
 * signature_strength. Expression is Gaussian around the means, clamped at
 * zero. Image features are a per-domain N(0, image_signal^2) mean vector
 * plus unit Gaussian noise.
 */
SynthDataset generate(const SynthSpec& spec);

/// Writes expression.csv, coords.csv, features.csv and labels.csv into `dir`.
void write_synthetic(const std::filesystem::path& dir, const SynthDataset& data);

} // namespace stmmc

#endif
