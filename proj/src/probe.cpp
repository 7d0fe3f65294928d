#include "cmech/probe.hpp"

#include <cmath>

#include "cmech/calculus.hpp"

namespace cmech {

Points random_points(std::size_t dim, std::size_t count, std::uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    Points pts(count, std::vector<double>(dim));
    for (auto& p : pts)
        for (auto& c : p) c = rng.uniform(lo, hi);
    return pts;
}

namespace {

double radical_inverse(std::size_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

}  // namespace

Points halton_points(std::size_t dim, std::size_t count, std::uint64_t seed, double lo, double hi) {
    Rng rng(seed);
    std::vector<double> shift(dim);
    for (auto& s : shift) s = rng.uniform();
    Points pts(count, std::vector<double>(dim));
    for (std::size_t k = 0; k < count; ++k)
        for (std::size_t d = 0; d < dim; ++d) {
            double h = radical_inverse(k + 1, kPrimes[d % std::size(kPrimes)]) + shift[d];
            h -= std::floor(h);
            pts[k][d] = lo + (hi - lo) * h;
        }
    return pts;
}

std::string random_polynomial(const std::vector<std::string>& names, Rng& rng, std::size_t degree,
                              std::size_t terms) {
    std::string out = "(" + format_double(rng.uniform(-1.0, 1.0)) + ")";
    for (std::size_t t = 0; t < terms; ++t) {
        std::size_t deg = 1 + rng.index(degree);
        out += " + (" + format_double(rng.uniform(-1.0, 1.0)) + ")";
        for (std::size_t d = 0; d < deg; ++d) out += "*" + names[rng.index(names.size())];
    }
    return out;
}

}  // namespace cmech
