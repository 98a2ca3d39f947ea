#ifndef STMMC_RANDOM_HPP
#define STMMC_RANDOM_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace stmmc {

/**
 * Seeded random source with platform-independent output.
 *
 * The standard distributions are implementation-defined, so golden files
 * generated with them would differ between standard libraries. Only the
 * raw 64-bit engine (whose sequence is fixed by the standard) is used here.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, bound). Unbiased (rejection sampling).
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller; caches the second variate.
    double normal();

    /// Fisher-Yates shuffle of [0, n): for i = n-1 down to 1, swap(i, below(i + 1)).
    std::vector<int> permutation(int n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a stream tag (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace stmmc

#endif
