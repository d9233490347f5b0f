// Empirical harness: measures the per-hidden-layer phase costs f1/f2/f3 by
// timing the exact kernels inside an instrumented sequential pass, times
// sequential versus leapfrog backward passes across thread counts, and emits
// a CSV comparing measured relative speedup with the analytic prediction.
//
// Every timed leapfrog pass is asserted bit-equal to the sequential pass
// before its timing is reported; timings from an incorrect pass would be
// meaningless.

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "leapnet/backprop.hpp"
#include "leapnet/costmodel.hpp"
#include "leapnet/leapfrog.hpp"
#include "leapnet/network.hpp"

namespace leapnet {

struct BenchRow {
    std::size_t L = 0;     // layer count
    std::size_t N = 0;     // hidden width (first hidden layer)
    std::size_t k = 0;     // thread count
    std::size_t reps = 0;  // repetitions behind each median
    double t_forward = 0.0;        // seconds, median
    double t_backward_seq = 0.0;   // seconds, median
    double t_backward_leap = 0.0;  // seconds, median
    double f1 = 0.0;               // per-hidden-layer seconds, median
    double f2 = 0.0;
    double f3 = 0.0;
    double predicted_speedup = 0.0;  // (1 - 1/k) f3 / f from measured costs
    double measured_speedup = 0.0;   // (t_seq - t_leap) / (t_forward + t_seq)
};

inline constexpr std::string_view bench_csv_header =
    "L,N,k,reps,t_forward_s,t_backward_seq_s,t_backward_leap_s,"
    "f1_s,f2_s,f3_s,predicted_speedup,measured_speedup";

namespace detail {

using bench_clock = std::chrono::steady_clock;

inline double seconds_since(bench_clock::time_point t0) {
    return std::chrono::duration<double>(bench_clock::now() - t0).count();
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + mid, xs.end());
    double m = xs[mid];
    if (xs.size() % 2 == 0) {
        std::nth_element(xs.begin(), xs.begin() + mid - 1, xs.begin() + mid);
        m = 0.5 * (m + xs[mid - 1]);
    }
    return m;
}

// Keeps results observable so the timed kernels cannot be optimized away.
inline volatile double bench_sink = 0.0;

// glibc by default hands worker threads a separate malloc arena whose heap
// segments are unmapped again on every cross-thread free, and trims the main
// heap between passes. Both make the timed passes pay page faults that depend
// on which pass allocated last rather than on the kernels, so comparative
// timings are forced onto one persistent arena. No-op on other libcs.
inline void quiesce_allocator() {
#if defined(__GLIBC__)
    mallopt(M_ARENA_MAX, 1);
    mallopt(M_TRIM_THRESHOLD, -1);
    mallopt(M_MMAP_MAX, 0);
#endif
}

}  // namespace detail

// Median wall time per hidden layer of the three dominant kernels, over
// `reps` instrumented sequential passes after one untimed warmup:
//   f1: matvec + bias add + sigmoid      (weighted input and activation)
//   f2: matvec_transpose + hadamard      (error propagation; sigmoid' of the
//                                         cached z is precomputed untimed)
//   f3: outer product + delta copy       (layer gradients)
// Requires at least one hidden layer (L >= 3).
inline PhaseCosts measure_phase_costs(const Network& net, const Vector& x,
                                      const Vector& y, std::size_t reps,
                                      std::ostream* warnings = nullptr) {
    detail::check(reps >= 1, "measure_phase_costs: reps must be >= 1");
    detail::quiesce_allocator();
    const std::size_t L = net.layer_count();
    detail::check(L >= 3,
                  "measure_phase_costs: per-hidden-layer costs need at least "
                  "one hidden layer (L >= 3), got L = " +
                      std::to_string(L));
    if (warnings) {
        if (reps < 3)
            *warnings << "measure_phase_costs: reps=" << reps
                      << " is below the recommended minimum of 3\n";
        std::size_t lo = net.layer_size(2), hi = net.layer_size(2);
        for (std::size_t l = 2; l < L; ++l) {
            lo = std::min(lo, net.layer_size(l));
            hi = std::max(hi, net.layer_size(l));
        }
        if (lo != hi)
            *warnings << "measure_phase_costs: hidden widths vary (" << lo
                      << ".." << hi
                      << "); per-layer medians mix unequal layer costs\n";
    }

    {  // warmup, untimed
        const ForwardTrace t = net.forward(x);
        const GradientSet g = backprop_sequential(net, t, y);
        detail::bench_sink = g.nabla_b(L)[0];
    }

    std::vector<double> f1s, f2s, f3s;
    f1s.reserve(reps * (L - 2));
    f2s.reserve(reps * (L - 2));
    f3s.reserve(reps * (L - 2));
    double checksum = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        // Forward, timing each hidden layer's z and activation.
        std::vector<Vector> as;
        std::vector<Vector> zs;
        as.reserve(L);
        zs.reserve(L - 1);
        as.push_back(x);
        for (std::size_t l = 2; l <= L; ++l) {
            const auto t0 = detail::bench_clock::now();
            Vector z = add(matvec(net.weight(l), as.back()), net.bias(l));
            Vector a = sigmoid(z);
            const double dt = detail::seconds_since(t0);
            if (l < L) f1s.push_back(dt);
            as.push_back(std::move(a));
            zs.push_back(std::move(z));
        }
        const ForwardTrace trace(std::move(as), std::move(zs));

        // Backward, timing each hidden layer's error step and gradients.
        Vector delta = output_delta(trace, y);
        {
            auto [nw, nb] = layer_gradients(trace, L, delta);
            checksum += nw(0, 0) + nb[0];
        }
        for (std::size_t l = L - 1; l >= 2; --l) {
            const Vector sp = sigmoid_prime(trace.z(l));
            const auto t0 = detail::bench_clock::now();
            Vector next = hadamard(matvec_transpose(net.weight(l + 1), delta), sp);
            f2s.push_back(detail::seconds_since(t0));
            delta = std::move(next);
            const auto t1 = detail::bench_clock::now();
            auto [nw, nb] = layer_gradients(trace, l, delta);
            f3s.push_back(detail::seconds_since(t1));
            checksum += nw(0, 0) + nb[0];
        }
    }
    detail::bench_sink = checksum;
    return PhaseCosts{detail::median(std::move(f1s)),
                      detail::median(std::move(f2s)),
                      detail::median(std::move(f3s))};
}

// Builds a seeded network and input/target, measures phase costs, then for
// each requested k times the sequential and leapfrog backward passes (median
// over reps, one untimed warmup each). Gradients of every timed leapfrog run
// are checked bit-equal to the sequential ones before any timing is kept.
inline std::vector<BenchRow> bench_compare(
    const std::vector<std::size_t>& layer_sizes, std::uint64_t seed,
    const std::vector<std::size_t>& k_list, std::size_t reps,
    std::ostream* warnings = nullptr) {
    detail::check(reps >= 1, "bench_compare: reps must be >= 1");
    for (std::size_t k : k_list)
        detail::check(k >= 1, "bench_compare: thread counts must be >= 1");
    detail::quiesce_allocator();

    const Network net = Network::new_random(layer_sizes, seed);
    const auto [x, y] = seeded_sample(net, seed);
    const PhaseCosts costs = measure_phase_costs(net, x, y, reps, warnings);

    std::vector<BenchRow> rows;
    rows.reserve(k_list.size());
    for (std::size_t k : k_list) {
        {  // warmup, untimed but still gated
            const ForwardTrace t = net.forward(x);
            const GradientSet gs = backprop_sequential(net, t, y);
            const GradientSet gl = backprop_leapfrog(net, t, y, k, warnings);
            if (!bit_equal(gs, gl))
                throw std::runtime_error(
                    "bench_compare: gradient mismatch between sequential and "
                    "leapfrog passes at k=" +
                    std::to_string(k));
        }
        std::vector<double> tf, ts, tl;
        tf.reserve(reps);
        ts.reserve(reps);
        tl.reserve(reps);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto t0 = detail::bench_clock::now();
            const ForwardTrace trace = net.forward(x);
            tf.push_back(detail::seconds_since(t0));

            const auto t1 = detail::bench_clock::now();
            const GradientSet gs = backprop_sequential(net, trace, y);
            ts.push_back(detail::seconds_since(t1));

            const auto t2 = detail::bench_clock::now();
            const GradientSet gl = backprop_leapfrog(net, trace, y, k);
            tl.push_back(detail::seconds_since(t2));

            if (!bit_equal(gs, gl))
                throw std::runtime_error(
                    "bench_compare: gradient mismatch between sequential and "
                    "leapfrog passes at k=" +
                    std::to_string(k) + ", rep " + std::to_string(rep));
            detail::bench_sink = gl.nabla_b(net.layer_count())[0];
        }
        BenchRow row;
        row.L = layer_sizes.size();
        row.N = layer_sizes[1];
        row.k = k;
        row.reps = reps;
        row.t_forward = detail::median(std::move(tf));
        row.t_backward_seq = detail::median(std::move(ts));
        row.t_backward_leap = detail::median(std::move(tl));
        row.f1 = costs.f1;
        row.f2 = costs.f2;
        row.f3 = costs.f3;
        row.predicted_speedup = relative_speedup(costs, k);
        row.measured_speedup = (row.t_backward_seq - row.t_backward_leap) /
                               (row.t_forward + row.t_backward_seq);
        rows.push_back(row);
    }
    return rows;
}

namespace detail {

// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline void write_csv(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << bench_csv_header << '\n';
    for (const BenchRow& r : rows) {
        os << r.L << ',' << r.N << ',' << r.k << ',' << r.reps << ','
           << detail::format_double(r.t_forward) << ','
           << detail::format_double(r.t_backward_seq) << ','
           << detail::format_double(r.t_backward_leap) << ','
           << detail::format_double(r.f1) << ','
           << detail::format_double(r.f2) << ','
           << detail::format_double(r.f3) << ','
           << detail::format_double(r.predicted_speedup) << ','
           << detail::format_double(r.measured_speedup) << '\n';
    }
    if (!os) throw std::runtime_error("write_csv: write failed");
}

inline void write_csv(const std::vector<BenchRow>& rows,
                      const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("write_csv: cannot open '" + path.string() +
                                 "' for writing");
    write_csv(rows, os);
}

}  // namespace leapnet
