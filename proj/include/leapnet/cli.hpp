// Command-line driver: `gen`, `verify`, `bench`, and `model` subcommands
// wiring the library together. Exit statuses are a stable contract:
//   0  success
//   1  check or runtime failure (message on the error stream)
//   2  usage error (unknown subcommand/flag, missing required flag)

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "leapnet/backprop.hpp"
#include "leapnet/bench.hpp"
#include "leapnet/costmodel.hpp"
#include "leapnet/leapfrog.hpp"
#include "leapnet/network.hpp"
#include "leapnet/oracle.hpp"

namespace leapnet::cli {

namespace detail {

inline std::string sizes_to_string(const std::vector<std::size_t>& sizes) {
    std::string s;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(sizes[i]);
    }
    return s;
}

inline std::string fixed3(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

inline int run_gen(const std::vector<std::size_t>& layers, std::uint64_t seed,
                   const std::string& out_path, std::ostream& out) {
    const Network net = Network::new_random(layers, seed);
    net.save(std::filesystem::path(out_path));
    out << "wrote network (layers " << sizes_to_string(layers) << ", seed "
        << seed << ") to " << out_path << '\n';
    return 0;
}

inline int run_verify(const std::string& net_path, std::size_t k,
                      std::uint64_t seed, double tol, std::ostream& out) {
    const Network net = Network::load(std::filesystem::path(net_path));
    out << "net: " << net_path << " (layers "
        << sizes_to_string(net.layer_sizes()) << ")\n";
    const auto [x, y] = seeded_sample(net, seed);
    const ForwardTrace trace = net.forward(x);
    const GradientSet seq = backprop_sequential(net, trace, y);
    const GradientSet leap = backprop_leapfrog(net, trace, y, k, &out);

    const bool exact = bit_equal(seq, leap);
    out << "leapfrog k=" << k << " vs sequential: "
        << (exact ? "bit-exact" : "MISMATCH") << '\n';

    const GradientSet fd = finite_diff_gradients(net, x, y, 1e-5);
    const GradCheckReport rep = compare_gradients(seq, fd, tol, 1e-8);
    out << "sequential vs finite differences (rel tol " << tol
        << ", abs floor 1e-08): " << rep.describe() << '\n';

    const bool ok = exact && rep.pass;
    out << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
    return ok ? 0 : 1;
}

inline int run_bench(const std::vector<std::size_t>& layers,
                     std::uint64_t seed, const std::vector<std::size_t>& ks,
                     std::size_t reps, const std::string& csv_path,
                     std::ostream& out, std::ostream& err) {
    const std::vector<BenchRow> rows = bench_compare(layers, seed, ks, reps, &err);
    out << "layers " << sizes_to_string(layers) << ", seed " << seed
        << ", reps " << reps << " (medians, seconds)\n";
    out << "  k  t_forward  t_bwd_seq  t_bwd_leap  f1         f2         f3"
           "         predicted  measured\n";
    for (const BenchRow& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line,
                      "%3zu  %s  %s  %s   %s  %s  %s  %+.6f  %+.6f", r.k,
                      fixed3(r.t_forward).c_str(),
                      fixed3(r.t_backward_seq).c_str(),
                      fixed3(r.t_backward_leap).c_str(), fixed3(r.f1).c_str(),
                      fixed3(r.f2).c_str(), fixed3(r.f3).c_str(),
                      r.predicted_speedup, r.measured_speedup);
        out << line << '\n';
    }
    if (!csv_path.empty()) {
        write_csv(rows, std::filesystem::path(csv_path));
        out << "wrote CSV to " << csv_path << '\n';
    }
    return 0;
}

}  // namespace detail

// Runs the CLI on `args` (program name excluded). Streams are injected so
// tests can capture output.
inline int run(std::vector<std::string> args, std::ostream& out,
               std::ostream& err) {
    CLI::App app{"dense feedforward network kernels with leapfrogged "
                 "multi-threaded backpropagation"};
    app.require_subcommand(1);

    std::vector<std::size_t> gen_layers;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    CLI::App* gen = app.add_subcommand("gen", "generate a seeded random network file");
    gen->add_option("--layers", gen_layers, "layer sizes, comma-separated")
        ->required()
        ->delimiter(',');
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--out", gen_out, "output network file")->required();

    std::string ver_net;
    std::size_t ver_k = 1;
    std::uint64_t ver_seed = 0;
    double ver_tol = 1e-6;
    CLI::App* verify = app.add_subcommand(
        "verify", "check leapfrog vs sequential and sequential vs finite differences");
    verify->add_option("--net", ver_net, "network file")->required();
    verify->add_option("--k", ver_k, "leapfrog thread count")->required();
    verify->add_option("--seed", ver_seed, "seed for the input/target sample")
        ->required();
    verify->add_option("--tol", ver_tol,
                       "relative tolerance for the finite-difference check")
        ->capture_default_str();

    std::vector<std::size_t> bench_layers;
    std::uint64_t bench_seed = 0;
    std::vector<std::size_t> bench_ks;
    std::size_t bench_reps = 0;
    std::string bench_csv;
    CLI::App* bench = app.add_subcommand(
        "bench", "time sequential vs leapfrog passes and the phase costs");
    bench->add_option("--layers", bench_layers, "layer sizes, comma-separated")
        ->required()
        ->delimiter(',');
    bench->add_option("--seed", bench_seed, "RNG seed")->required();
    bench->add_option("--k", bench_ks, "thread counts, comma-separated")
        ->required()
        ->delimiter(',');
    bench->add_option("--reps", bench_reps, "repetitions per median")->required();
    bench->add_option("--csv", bench_csv, "also write rows to this CSV file");

    double m_f1 = 0.0, m_f2 = 0.0, m_f3 = 0.0;
    std::size_t m_k = 0;
    double m_eps = 0.0;
    CLI::App* model = app.add_subcommand("model", "analytic cost model queries");
    CLI::Option* o_f1 = model->add_option("--f1", m_f1, "forward phase cost");
    CLI::Option* o_f2 = model->add_option("--f2", m_f2, "error propagation cost");
    CLI::Option* o_f3 = model->add_option("--f3", m_f3, "gradient emission cost");
    CLI::Option* o_k = model->add_option("--k", m_k, "thread count");
    CLI::Option* o_eps = model->add_option(
        "--epsilon", m_eps, "target threaded f3 fraction; prints the thread count");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        err << "run with --help for usage\n";
        return 2;
    }

    try {
        if (gen->parsed())
            return detail::run_gen(gen_layers, gen_seed, gen_out, out);
        if (verify->parsed())
            return detail::run_verify(ver_net, ver_k, ver_seed, ver_tol, out);
        if (bench->parsed())
            return detail::run_bench(bench_layers, bench_seed, bench_ks,
                                     bench_reps, bench_csv, out, err);
        // model: either --epsilon alone, or all of --f1/--f2/--f3/--k
        const bool eps_mode = o_eps->count() > 0;
        const bool cost_mode = o_f1->count() && o_f2->count() &&
                               o_f3->count() && o_k->count();
        if (eps_mode && (o_f1->count() || o_f2->count() || o_f3->count() ||
                         o_k->count())) {
            err << "error: model takes either --epsilon or --f1/--f2/--f3/--k, "
                   "not both\n";
            return 2;
        }
        if (eps_mode) {
            out << "k = " << threads_for_speedup(m_eps) << '\n';
            return 0;
        }
        if (cost_mode) {
            const PhaseCosts c{m_f1, m_f2, m_f3};
            out << "f  = " << leapnet::detail::format_double(total_cost(c)) << '\n';
            out << "f' = " << leapnet::detail::format_double(threaded_cost(c, m_k))
                << '\n';
            out << "relative speedup = "
                << leapnet::detail::format_double(relative_speedup(c, m_k))
                << '\n';
            return 0;
        }
        err << "error: model requires --epsilon, or all of --f1 --f2 --f3 --k\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc) - 1 : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args), out, err);
}

}  // namespace leapnet::cli
