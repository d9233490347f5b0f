#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "leapnet/costmodel.hpp"
#include "support.hpp"

using namespace leapnet;
using testutil::ulp_distance;
using testutil::ulp_of;

TEST_CASE("total_cost sums the phases") {
    REQUIRE(total_cost({1, 1, 1}) == 3.0);
    REQUIRE(total_cost({0, 0, 5}) == 5.0);
    REQUIRE(total_cost({0.2, 0.3, 0.5}) == 1.0);
}

TEST_CASE("threaded_cost divides only the gradient phase") {
    REQUIRE(threaded_cost({1, 1, 6}, 3) == 4.0);
    REQUIRE(threaded_cost({0.4, 1.5, 0}, 7) == total_cost({0.4, 1.5, 0}));

    std::mt19937_64 rng(5);
    for (int i = 0; i < 20; ++i) {
        PhaseCosts c{testutil::urand(rng, 0, 10), testutil::urand(rng, 0, 10),
                     testutil::urand(rng, 0, 10)};
        REQUIRE(threaded_cost(c, 1) == total_cost(c));
    }

    REQUIRE_THROWS_AS(threaded_cost({1, 1, 1}, 0), std::invalid_argument);
}

TEST_CASE("relative_speedup matches the closed form") {
    REQUIRE(relative_speedup({2, 3, 4}, 1) == 0.0);
    REQUIRE(relative_speedup({0, 0, 5}, 4) == 0.75);
    REQUIRE(relative_speedup({0, 0, 0.3}, 4) == 0.75);

    // (1 - 1/3) * (1/3) against 2/9 frozen from exact rational arithmetic.
    REQUIRE(ulp_distance(relative_speedup({1, 1, 1}, 3),
                         0x1.c71c71c71c71cp-3) <= 1);

    REQUIRE_THROWS_AS(relative_speedup({1, 1, 1}, 0), std::invalid_argument);
}

TEST_CASE("relative_speedup is monotone in k and approaches f3/f") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 10; ++i) {
        PhaseCosts c{testutil::urand(rng, 0, 4), testutil::urand(rng, 0, 4),
                     testutil::urand(rng, 0.01, 4)};
        double prev = relative_speedup(c, 1);
        REQUIRE(prev == 0.0);
        for (std::size_t k = 2; k <= 100; ++k) {
            const double cur = relative_speedup(c, k);
            REQUIRE(cur > prev);  // strict, since f3 > 0
            REQUIRE(cur < 1.0);
            prev = cur;
        }
        const double limit = c.f3 / (c.f1 + c.f2 + c.f3);
        REQUIRE(std::abs(relative_speedup(c, 1000000) - limit) <= 1e-5);
    }
}

TEST_CASE("cost saved equals (1 - 1/k) f3 at the scale of f") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        PhaseCosts c{testutil::urand(rng, 0, 10), testutil::urand(rng, 0, 10),
                     testutil::urand(rng, 0, 10)};
        const std::size_t k = 1 + rng() % 64;
        const double saved = total_cost(c) - threaded_cost(c, k);
        const double expected =
            (1.0 - 1.0 / static_cast<double>(k)) * c.f3;
        // Two sum roundings plus the f3/k division bound the discrepancy by
        // a couple of ulp at the scale of f.
        REQUIRE(std::abs(saved - expected) <= 2 * ulp_of(total_cost(c)));
    }
}

TEST_CASE("threads_for_speedup is the exact ceiling of 1/epsilon") {
    REQUIRE(threads_for_speedup(0.25) == 4);
    REQUIRE(threads_for_speedup(1.0) == 1);
    REQUIRE(threads_for_speedup(0.3) == 4);
    REQUIRE(threads_for_speedup(0.5) == 2);
    REQUIRE(threads_for_speedup(0.1) == 10);
    REQUIRE(threads_for_speedup(1.0 / 64.0) == 64);
    REQUIRE(threads_for_speedup(0.9) == 2);

    // The stored doubles for 1/3 and 1e-6 are below the real values, so the
    // exact ceiling lands one above the naive answer.
    REQUIRE(threads_for_speedup(1.0 / 3.0) == 4);
    REQUIRE(threads_for_speedup(1e-6) == 1000001);
}

TEST_CASE("threads_for_speedup satisfies its defining inequality") {
    std::mt19937_64 rng(8);
    auto meets = [](std::uint64_t k, double eps) {
        return std::fma(static_cast<double>(k), eps, -1.0) >= 0.0;
    };
    for (int i = 0; i < 500; ++i) {
        const double eps = testutil::urand(rng, 1e-9, 1.0);
        const std::uint64_t k = threads_for_speedup(eps);
        REQUIRE(k >= 1);
        REQUIRE(meets(k, eps));
        if (k > 1) REQUIRE_FALSE(meets(k - 1, eps));
    }

    // Whenever 1/epsilon is exactly an integer, k * epsilon reaches 1, so
    // the guaranteed fraction 1 - 1/k meets the 1 - epsilon target.
    for (double eps : {1.0, 0.5, 0.25, 0.125, 1.0 / 64.0, 1.0 / 1024.0}) {
        const auto k = threads_for_speedup(eps);
        REQUIRE(static_cast<double>(k) * eps == 1.0);
    }
}

TEST_CASE("threads_for_speedup validates epsilon") {
    REQUIRE_THROWS_AS(threads_for_speedup(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(threads_for_speedup(-0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(threads_for_speedup(1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(threads_for_speedup(std::nan("")), std::invalid_argument);
}

TEST_CASE("phase costs are validated") {
    REQUIRE_THROWS_AS(total_cost({-1, 1, 1}), std::invalid_argument);
    REQUIRE_THROWS_AS(total_cost({0, 0, 0}), std::invalid_argument);
    REQUIRE_THROWS_AS(total_cost({std::nan(""), 1, 1}), std::invalid_argument);
    REQUIRE_THROWS_AS(
        total_cost({std::numeric_limits<double>::infinity(), 1, 1}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(relative_speedup({1, -2, 1}, 2), std::invalid_argument);
}
