#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "leapnet/leapfrog.hpp"
#include "leapnet/oracle.hpp"
#include "support.hpp"

using namespace leapnet;

TEST_CASE("build_schedule matches the enumerated examples") {
    SECTION("L = 10, k = 3") {
        LeapfrogSchedule s = build_schedule(10, 3);
        REQUIRE(s.parent_layers == std::vector<std::size_t>{8, 9, 10});
        REQUIRE(s.thread_layers.size() == 3);
        REQUIRE(s.thread_layers[0] == std::vector<std::size_t>{7, 4});
        REQUIRE(s.thread_layers[1] == std::vector<std::size_t>{6, 3});
        REQUIRE(s.thread_layers[2] == std::vector<std::size_t>{5, 2});
        REQUIRE(s.thread_start_delta == std::vector<std::size_t>{10, 9, 8});
    }

    SECTION("L = 10, k = 1") {
        LeapfrogSchedule s = build_schedule(10, 1);
        REQUIRE(s.parent_layers == std::vector<std::size_t>{10});
        REQUIRE(s.thread_layers[0] ==
                std::vector<std::size_t>{9, 8, 7, 6, 5, 4, 3, 2});
    }

    SECTION("L = 3, k = 5 clips at layer 2") {
        LeapfrogSchedule s = build_schedule(3, 5);
        REQUIRE(s.parent_layers == std::vector<std::size_t>{2, 3});
        for (const auto& t : s.thread_layers) REQUIRE(t.empty());
        REQUIRE(active_workers(s) == 0);
    }
}

TEST_CASE("build_schedule validates its arguments") {
    REQUIRE_THROWS_AS(build_schedule(1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(build_schedule(10, 0), std::invalid_argument);
}

TEST_CASE("schedules partition the layers with balanced, k-strided threads") {
    for (std::size_t L = 2; L <= 50; ++L) {
        for (std::size_t k = 1; k <= 50; ++k) {
            LeapfrogSchedule s = build_schedule(L, k);
            INFO("L=" << L << " k=" << k);
            REQUIRE(check_schedule_coverage(s));

            std::size_t lo = L, hi = 0;
            for (const auto& t : s.thread_layers) {
                lo = std::min(lo, t.size());
                hi = std::max(hi, t.size());
                for (std::size_t i = 1; i < t.size(); ++i)
                    REQUIRE(t[i - 1] - t[i] == k);
            }
            REQUIRE(hi - lo <= 1);
        }
    }
}

TEST_CASE("leapfrog with one thread matches the sequential pass") {
    Network net = Network::new_random({5, 9, 9, 9, 3}, 41);
    auto [x, y] = seeded_sample(net, 41);
    ForwardTrace t = net.forward(x);
    GradientSet leap = backprop_leapfrog(net, t, y, 1);
    REQUIRE(bit_equal(leap, backprop_sequential(net, t, y)));
    REQUIRE(leap.complete());
}

TEST_CASE("leapfrog matches the sequential pass on a deep net") {
    Network net = Network::new_random({4, 8, 8, 8, 8, 2}, 43);
    auto [x, y] = seeded_sample(net, 43);
    ForwardTrace t = net.forward(x);
    REQUIRE(bit_equal(backprop_leapfrog(net, t, y, 3),
                      backprop_sequential(net, t, y)));
}

TEST_CASE("oversubscribed thread counts warn and skip idle threads") {
    Network net = Network::new_random({3, 6, 6, 6, 2}, 47);
    auto [x, y] = seeded_sample(net, 47);
    ForwardTrace t = net.forward(x);

    std::ostringstream warn;
    GradientSet leap = backprop_leapfrog(net, t, y, 100, &warn);
    REQUIRE(bit_equal(leap, backprop_sequential(net, t, y)));
    REQUIRE_THAT(warn.str(), Catch::Matchers::ContainsSubstring(
                                 "exceeds the useful thread count"));
    REQUIRE(active_workers(build_schedule(5, 100)) == 0);

    // k under the useful maximum stays silent.
    std::ostringstream quiet;
    backprop_leapfrog(net, t, y, 2, &quiet);
    REQUIRE(quiet.str().empty());
}

TEST_CASE("thread deltas replay the sequential recurrence bit for bit") {
    Network net = Network::new_random({6, 10, 10, 10, 10, 10, 4}, 53);
    auto [x, y] = seeded_sample(net, 53);
    ForwardTrace t = net.forward(x);

    // delta^l recomputed directly.
    const std::size_t L = net.layer_count();
    std::vector<Vector> deltas;
    deltas.push_back(output_delta(t, y));
    for (std::size_t l = L - 1; l >= 2; --l)
        deltas.push_back(delta_step(net, t, l, deltas.back()));

    GradientSet leap = backprop_leapfrog(net, t, y, 3);
    for (std::size_t l = 2; l <= L; ++l)
        REQUIRE(bit_equal(leap.nabla_b(l), deltas[L - l]));
}

TEST_CASE("leapfrog equals sequential across shapes and thread counts") {
    std::mt19937_64 rng(20240915);
    const std::size_t ks[] = {1, 2, 3, 4, 7, 64};
    for (int iter = 0; iter < 12; ++iter) {
        const std::size_t L = 2 + rng() % 11;
        const auto sizes = testutil::random_sizes(rng, L, 24);
        Network net = Network::new_random(sizes, 900 + iter);
        auto [x, y] = seeded_sample(net, 900 + iter);
        ForwardTrace t = net.forward(x);
        GradientSet seq = backprop_sequential(net, t, y);
        for (std::size_t k : ks) {
            INFO("L=" << L << " k=" << k << " iter=" << iter);
            REQUIRE(bit_equal(backprop_leapfrog(net, t, y, k), seq));
        }
    }
}

TEST_CASE("a failing worker aborts the pass with a descriptive error") {
    // z^3 of the wrong length makes delta_step throw inside the workers
    // (layer 3 is below the parent's range for k = 2 and L = 6).
    Network net = Network::new_random({2, 3, 3, 3, 3, 2}, 59);
    auto [x, y] = seeded_sample(net, 59);
    ForwardTrace good = net.forward(x);

    std::vector<Vector> as, zs;
    for (std::size_t l = 1; l <= 6; ++l) as.push_back(good.activation(l));
    for (std::size_t l = 2; l <= 6; ++l) zs.push_back(good.z(l));
    zs[1] = Vector(1);  // z^3
    ForwardTrace bad(std::move(as), std::move(zs));

    REQUIRE_THROWS_WITH(backprop_leapfrog(net, bad, y, 2),
                        Catch::Matchers::ContainsSubstring("worker thread"));
}

TEST_CASE("leapfrog validates thread count and trace shape") {
    Network net = Network::new_random({2, 3, 2}, 61);
    auto [x, y] = seeded_sample(net, 61);
    ForwardTrace t = net.forward(x);
    REQUIRE_THROWS_AS(backprop_leapfrog(net, t, y, 0), std::invalid_argument);

    Network other = Network::new_random({2, 3, 3, 2}, 61);
    REQUIRE_THROWS_AS(backprop_leapfrog(other, t, y, 1),
                      std::invalid_argument);
}
