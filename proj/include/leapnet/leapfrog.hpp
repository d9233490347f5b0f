// Leapfrogging backward pass: a parent thread plus k workers share one
// preallocated GradientSet. The parent computes delta for the top k layers
// and emits their gradients; each worker j replays the delta recurrence from
// its hand-off layer L-j downward but emits gradients only at layers spaced
// k apart, the per-worker emission sets interleaving so that every layer in
// 2..L is written exactly once.
//
// Workers recompute deltas other workers also compute; that redundancy is
// deliberate. Every delta is produced by the identical kernel sequence the
// sequential pass uses, so the result is elementwise bit-identical to
// backprop_sequential.

#pragma once

#include <algorithm>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "leapnet/backprop.hpp"
#include "leapnet/linalg.hpp"
#include "leapnet/network.hpp"

namespace leapnet {

// Assignment of gradient-emission layers to the parent and to each of the k
// workers, for a network of L layers.
struct LeapfrogSchedule {
    std::size_t layer_count = 0;   // L
    std::size_t thread_count = 0;  // k

    // Parent emissions: {max(2, L-k+1), ..., L}, ascending.
    std::vector<std::size_t> parent_layers;

    // Worker j emissions: {L-k-j - m*k : m >= 0} clipped to [2, L-k], in
    // descending order (the order the worker reaches them). May be empty.
    std::vector<std::vector<std::size_t>> thread_layers;

    // Layer L-j whose delta the parent hands to worker j; 0 when L-j < 2
    // (such a worker is necessarily empty and never spawned).
    std::vector<std::size_t> thread_start_delta;
};

inline LeapfrogSchedule build_schedule(std::size_t L, std::size_t k) {
    detail::check(L >= 2, "build_schedule: need at least 2 layers, got " +
                              std::to_string(L));
    detail::check(k >= 1, "build_schedule: thread count must be >= 1");
    LeapfrogSchedule s;
    s.layer_count = L;
    s.thread_count = k;
    const std::size_t parent_low = L + 1 > k ? std::max<std::size_t>(2, L - k + 1) : 2;
    for (std::size_t l = parent_low; l <= L; ++l) s.parent_layers.push_back(l);
    s.thread_layers.resize(k);
    s.thread_start_delta.resize(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        if (L > j && L - j >= 2) s.thread_start_delta[j] = L - j;
        // Emissions at L-k-j, L-2k-j, ... while still >= 2.
        if (L < k + j + 2) continue;
        for (std::size_t l = L - k - j; l >= 2; ) {
            s.thread_layers[j].push_back(l);
            if (l < k + 2) break;
            l -= k;
        }
    }
    return s;
}

// Number of workers that would actually be spawned (those with at least one
// emission layer).
inline std::size_t active_workers(const LeapfrogSchedule& s) {
    std::size_t n = 0;
    for (const auto& layers : s.thread_layers)
        if (!layers.empty()) ++n;
    return n;
}

// Threaded backward pass per the leapfrogging schedule. Returns a complete
// GradientSet elementwise bit-identical to backprop_sequential(net, trace, y).
//
// The parent computes delta^L..delta^{max(2, L-k+1)}, emitting gradients at
// each of those layers, and records a private copy of delta^{L-j} for each
// worker j. Workers read net/trace, write only their own layer slots of the
// shared GradientSet, and are joined before the result is read. If k exceeds
// the useful maximum, the surplus workers are not spawned and a warning is
// written to `warnings` (when given).
inline GradientSet backprop_leapfrog(const Network& net,
                                     const ForwardTrace& trace, const Vector& y,
                                     std::size_t k,
                                     std::ostream* warnings = nullptr) {
    detail::check(k >= 1, "backprop_leapfrog: thread count must be >= 1");
    detail::check(trace.layer_count() == net.layer_count(),
                  "backprop_leapfrog: trace has " +
                      std::to_string(trace.layer_count()) + " layers, network " +
                      std::to_string(net.layer_count()));
    const std::size_t L = net.layer_count();
    const LeapfrogSchedule sched = build_schedule(L, k);

    GradientSet grads(net);

    // Parent: delta chain over its own emission layers, top down. Hand-off
    // copies are taken before any worker starts.
    std::vector<Vector> start_delta;  // start_delta[j] = delta^{L-j}
    start_delta.reserve(k);
    {
        Vector delta = output_delta(trace, y);
        start_delta.push_back(delta);
        auto [nw, nb] = layer_gradients(trace, L, delta);
        grads.set_layer(L, std::move(nw), std::move(nb));
        const std::size_t parent_low = sched.parent_layers.front();
        for (std::size_t l = L - 1; l >= parent_low && l >= 2; --l) {
            delta = delta_step(net, trace, l, delta);
            if (start_delta.size() < k) start_delta.push_back(delta);
            auto [w, b] = layer_gradients(trace, l, delta);
            grads.set_layer(l, std::move(w), std::move(b));
        }
    }

    const std::size_t spawned = active_workers(sched);
    if (spawned < k && warnings) {
        *warnings << "leapfrog: k=" << k << " exceeds the useful thread count for L="
                  << L << "; spawning " << spawned << " worker(s)\n";
    }

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(k);
    workers.reserve(spawned);
    for (std::size_t j = 0; j < k; ++j) {
        if (sched.thread_layers[j].empty()) continue;
        workers.emplace_back([&net, &trace, &grads, &sched, &errors, j,
                              delta = start_delta[j]]() mutable {
            try {
                std::size_t layer = sched.thread_start_delta[j];
                for (std::size_t emit : sched.thread_layers[j]) {
                    while (layer > emit) {
                        delta = delta_step(net, trace, layer - 1, delta);
                        --layer;
                    }
                    auto [nw, nb] = layer_gradients(trace, emit, delta);
                    grads.set_layer(emit, std::move(nw), std::move(nb));
                }
            } catch (...) {
                errors[j] = std::current_exception();
            }
        });
    }
    for (auto& t : workers) t.join();

    for (std::size_t j = 0; j < k; ++j) {
        if (!errors[j]) continue;
        try {
            std::rethrow_exception(errors[j]);
        } catch (const std::exception& e) {
            throw std::runtime_error("backprop_leapfrog: worker thread " +
                                     std::to_string(j) + " failed: " + e.what());
        }
    }
    if (!grads.complete())
        throw std::logic_error("backprop_leapfrog: gradient set incomplete after join");
    return grads;
}

}  // namespace leapnet
