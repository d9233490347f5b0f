// Independent ground truth: central finite-difference gradients computed by
// perturbing one parameter at a time through fresh forward passes, an
// elementwise gradient comparator, and a brute-force coverage check for
// leapfrog schedules. None of these share code with the backward pass they
// validate.

#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "leapnet/backprop.hpp"
#include "leapnet/leapfrog.hpp"
#include "leapnet/linalg.hpp"
#include "leapnet/network.hpp"

namespace leapnet {

struct GradCheckReport {
    double max_relative_error = 0.0;
    double max_absolute_error = 0.0;

    // Worst offender: layer, whether it is a bias entry, and its row/col
    // (col is 0 for bias entries).
    std::size_t worst_layer = 0;
    bool worst_is_bias = false;
    std::size_t worst_row = 0;
    std::size_t worst_col = 0;

    bool pass = false;

    std::string describe() const {
        std::ostringstream os;
        os << (pass ? "PASS" : "FAIL")
           << ": max relative error " << max_relative_error
           << ", max absolute error " << max_absolute_error
           << ", worst at layer " << worst_layer
           << (worst_is_bias ? " bias[" + std::to_string(worst_row) + "]"
                             : " weight[" + std::to_string(worst_row) + "][" +
                                   std::to_string(worst_col) + "]");
        return os.str();
    }
};

// Central differences: for every weight and bias theta, (C(theta+h) -
// C(theta-h)) / (2h) with C the quadratic cost of a fresh forward pass.
// Works on a private copy; the input network is never touched, and the copy
// has each parameter restored to its original bits after perturbation.
inline GradientSet finite_diff_gradients(const Network& net, const Vector& x,
                                         const Vector& y, double h) {
    detail::check(h > 0.0, "finite_diff_gradients: step size must be > 0");
    Network work = net;
    const std::size_t L = work.layer_count();
    auto cost_now = [&work, &x, &y]() {
        const ForwardTrace t = work.forward(x);
        return quadratic_cost(t.activation(work.layer_count()), y);
    };
    auto central = [&](double& theta) {
        const double orig = theta;
        theta = orig + h;
        const double c_plus = cost_now();
        theta = orig - h;
        const double c_minus = cost_now();
        theta = orig;
        return (c_plus - c_minus) / (2.0 * h);
    };
    GradientSet grads(net);
    for (std::size_t l = 2; l <= L; ++l) {
        Matrix nw(work.layer_size(l), work.layer_size(l - 1));
        for (std::size_t i = 0; i < nw.rows(); ++i)
            for (std::size_t j = 0; j < nw.cols(); ++j)
                nw(i, j) = central(work.weight(l)(i, j));
        Vector nb(work.layer_size(l));
        for (std::size_t i = 0; i < nb.size(); ++i)
            nb[i] = central(work.bias(l)[i]);
        grads.set_layer(l, std::move(nw), std::move(nb));
    }
    return grads;
}

// Elementwise comparison with relative error |a-b| / max(|a|, |b|); an
// element passes when its relative error is within rel_tol or its absolute
// error is within abs_floor. The worst offender is the element with the
// largest relative error among those not excused by the floor.
inline GradCheckReport compare_gradients(const GradientSet& g1,
                                         const GradientSet& g2, double rel_tol,
                                         double abs_floor) {
    detail::check(g1.layer_sizes() == g2.layer_sizes(),
                  "compare_gradients: gradient sets have different shapes");
    GradCheckReport rep;
    rep.pass = true;
    rep.worst_layer = 2;
    double worst_effective = -1.0;
    auto visit = [&](double a, double b, std::size_t layer, bool is_bias,
                     std::size_t row, std::size_t col) {
        const double abs_err = std::abs(a - b);
        const double denom = std::max(std::abs(a), std::abs(b));
        const double rel_err = denom > 0.0 ? abs_err / denom : 0.0;
        rep.max_absolute_error = std::max(rep.max_absolute_error, abs_err);
        rep.max_relative_error = std::max(rep.max_relative_error, rel_err);
        if (!(rel_err <= rel_tol || abs_err <= abs_floor)) rep.pass = false;
        const double effective = abs_err <= abs_floor ? 0.0 : rel_err;
        if (effective > worst_effective) {
            worst_effective = effective;
            rep.worst_layer = layer;
            rep.worst_is_bias = is_bias;
            rep.worst_row = row;
            rep.worst_col = col;
        }
    };
    for (std::size_t l = 2; l <= g1.layer_count(); ++l) {
        const Matrix& w1 = g1.nabla_w(l);
        const Matrix& w2 = g2.nabla_w(l);
        for (std::size_t i = 0; i < w1.rows(); ++i)
            for (std::size_t j = 0; j < w1.cols(); ++j)
                visit(w1(i, j), w2(i, j), l, false, i, j);
        const Vector& b1 = g1.nabla_b(l);
        const Vector& b2 = g2.nabla_b(l);
        for (std::size_t i = 0; i < b1.size(); ++i)
            visit(b1[i], b2[i], l, true, i, 0);
    }
    return rep;
}

// True iff the emission multiset over the parent and all workers is exactly
// {2, ..., L}, each layer once.
inline bool check_schedule_coverage(const LeapfrogSchedule& s) {
    if (s.layer_count < 2) return false;
    std::vector<std::size_t> count(s.layer_count + 1, 0);
    auto tally = [&](std::size_t l) {
        if (l < 2 || l > s.layer_count) return false;
        ++count[l];
        return true;
    };
    for (std::size_t l : s.parent_layers)
        if (!tally(l)) return false;
    for (const auto& layers : s.thread_layers)
        for (std::size_t l : layers)
            if (!tally(l)) return false;
    for (std::size_t l = 2; l <= s.layer_count; ++l)
        if (count[l] != 1) return false;
    return true;
}

}  // namespace leapnet
