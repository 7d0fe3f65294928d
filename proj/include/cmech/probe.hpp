#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cmech {

inline constexpr std::uint64_t default_seed = 0x5EED;

/// mt19937_64 with a portable mapping to doubles (53 high bits).
class Rng {
public:
    explicit Rng(std::uint64_t seed = default_seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

using Points = std::vector<std::vector<double>>;

/// `count` pseudo-random points in [lo, hi]^dim.
Points random_points(std::size_t dim, std::size_t count = 20, std::uint64_t seed = default_seed,
                     double lo = -2.0, double hi = 2.0);

/// Scrambled Halton points in [lo, hi]^dim; the seed draws per-axis offsets.
Points halton_points(std::size_t dim, std::size_t count = 64, std::uint64_t seed = default_seed,
                     double lo = -2.0, double hi = 2.0);

/// Random polynomial observable as expression text over `names`: a constant plus
/// `terms` monomials of total degree <= `degree`, coefficients in [-1, 1].
std::string random_polynomial(const std::vector<std::string>& names, Rng& rng, std::size_t degree = 2,
                              std::size_t terms = 4);

}  // namespace cmech
