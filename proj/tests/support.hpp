// Shared helpers for the test suite: ulp-distance comparison and seeded
// random inputs that do not depend on library code under test.

#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "leapnet/linalg.hpp"

namespace testutil {

// Number of representable doubles between a and b (0 when bit-equal or both
// zero); max() when either is NaN. Works across signs by mapping the bit
// patterns onto a single monotone integer line.
inline std::uint64_t ulp_distance(double a, double b) {
    if (a == b) return 0;
    if (std::isnan(a) || std::isnan(b))
        return std::numeric_limits<std::uint64_t>::max();
    auto key = [](double x) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        return (bits >> 63) ? ~bits : bits | 0x8000000000000000ULL;
    };
    const std::uint64_t ka = key(a), kb = key(b);
    return ka > kb ? ka - kb : kb - ka;
}

inline double ulp_of(double x) {
    return std::nextafter(std::abs(x), std::numeric_limits<double>::infinity()) -
           std::abs(x);
}

inline double urand(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

inline leapnet::Vector random_vector(std::mt19937_64& rng, std::size_t n,
                                     double lo = -1.0, double hi = 1.0) {
    leapnet::Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = urand(rng, lo, hi);
    return v;
}

inline leapnet::Matrix random_matrix(std::mt19937_64& rng, std::size_t rows,
                                     std::size_t cols, double lo = -1.0,
                                     double hi = 1.0) {
    leapnet::Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = urand(rng, lo, hi);
    return m;
}

inline std::vector<std::size_t> random_sizes(std::mt19937_64& rng,
                                             std::size_t layers,
                                             std::size_t max_width) {
    std::vector<std::size_t> sizes(layers);
    for (auto& s : sizes) s = 1 + rng() % max_width;
    return sizes;
}

}  // namespace testutil
