// Analytical cost model for one layer of a full pass: the dominant per-layer
// costs f1 (weighted input), f2 (backward error propagation) and f3 (weight
// gradient) give a sequential layer cost f = f1 + f2 + f3, a k-thread cost
// f' = f1 + f2 + f3/k, and a relative speedup (f - f')/f = (1 - 1/k) f3/f.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "leapnet/linalg.hpp"

namespace leapnet {

// Per-layer phase costs, in seconds when measured or abstract units when
// hypothetical. Components must be nonnegative and not all zero.
struct PhaseCosts {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
};

namespace detail {

inline void validate(const PhaseCosts& c) {
    check(std::isfinite(c.f1) && std::isfinite(c.f2) && std::isfinite(c.f3),
          "PhaseCosts: components must be finite");
    check(c.f1 >= 0.0 && c.f2 >= 0.0 && c.f3 >= 0.0,
          "PhaseCosts: components must be >= 0");
    check(c.f1 + c.f2 + c.f3 > 0.0, "PhaseCosts: f1 + f2 + f3 must be > 0");
}

}  // namespace detail

inline double total_cost(const PhaseCosts& c) {
    detail::validate(c);
    return c.f1 + c.f2 + c.f3;
}

inline double threaded_cost(const PhaseCosts& c, std::size_t k) {
    detail::validate(c);
    detail::check(k >= 1, "threaded_cost: thread count must be >= 1");
    return c.f1 + c.f2 + c.f3 / static_cast<double>(k);
}

// (1 - 1/k) * f3 / f, in [0, 1).
inline double relative_speedup(const PhaseCosts& c, std::size_t k) {
    detail::validate(c);
    detail::check(k >= 1, "relative_speedup: thread count must be >= 1");
    const double f = c.f1 + c.f2 + c.f3;
    return (1.0 - 1.0 / static_cast<double>(k)) * (c.f3 / f);
}

// Smallest integer k with k >= 1/epsilon, i.e. ceil(1/epsilon) in exact
// arithmetic. The naive ceil(1.0/epsilon) can land one off when 1/epsilon is
// near an integer (the division rounds); the fma-based correction decides
// k*epsilon >= 1 with a single rounding of the exact product, which cannot
// flip its sign. Exact for results up to 2^53.
inline std::uint64_t threads_for_speedup(double epsilon) {
    detail::check(std::isfinite(epsilon) && epsilon > 0.0 && epsilon <= 1.0,
                  "threads_for_speedup: epsilon must be in (0, 1]");
    auto at_least_inverse = [epsilon](std::uint64_t k) {
        return std::fma(static_cast<double>(k), epsilon, -1.0) >= 0.0;
    };
    auto k = static_cast<std::uint64_t>(std::ceil(1.0 / epsilon));
    if (k < 1) k = 1;
    while (k > 1 && at_least_inverse(k - 1)) --k;
    while (!at_least_inverse(k)) ++k;
    return k;
}

}  // namespace leapnet
