// Reference sequential backward pass for the quadratic cost, split into
// per-step kernels (output_delta, delta_step, layer_gradients) that the
// threaded executor reuses verbatim. Sharing the kernels is what makes the
// two passes bit-comparable.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "leapnet/linalg.hpp"
#include "leapnet/network.hpp"

namespace leapnet {

// Per-layer gradients nabla_w^l and nabla_b^l for l in 2..L, with a
// write-once completion flag per layer. The slots are preallocated to the
// network's shapes; distinct layers may be filled concurrently by different
// threads (each slot is a distinct object, and the flags are full bytes).
class GradientSet {
public:
    explicit GradientSet(const Network& net) : sizes_(net.layer_sizes()) {
        for (std::size_t l = 2; l <= sizes_.size(); ++l) {
            nabla_w_.emplace_back(sizes_[l - 1], sizes_[l - 2]);
            nabla_b_.emplace_back(sizes_[l - 1]);
        }
        filled_.assign(sizes_.size() - 1, 0);
    }

    std::size_t layer_count() const { return sizes_.size(); }
    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

    const Matrix& nabla_w(std::size_t l) const { return nabla_w_[checked(l) - 2]; }
    const Vector& nabla_b(std::size_t l) const { return nabla_b_[checked(l) - 2]; }

    bool filled(std::size_t l) const { return filled_[checked(l) - 2] != 0; }

    bool complete() const {
        for (auto f : filled_)
            if (!f) return false;
        return true;
    }

    // Stores the gradients for layer l. Each layer may be written exactly
    // once; a second write is a scheduling bug and throws.
    void set_layer(std::size_t l, Matrix nw, Vector nb) {
        const std::size_t i = checked(l) - 2;
        if (filled_[i])
            throw std::logic_error("GradientSet: layer " + std::to_string(l) +
                                   " already filled");
        detail::check(nw.rows() == sizes_[l - 1] && nw.cols() == sizes_[l - 2],
                      "GradientSet: layer " + std::to_string(l) +
                          " weight gradient is " + std::to_string(nw.rows()) +
                          "x" + std::to_string(nw.cols()) + ", expected " +
                          std::to_string(sizes_[l - 1]) + "x" +
                          std::to_string(sizes_[l - 2]));
        detail::check(nb.size() == sizes_[l - 1],
                      "GradientSet: layer " + std::to_string(l) +
                          " bias gradient has length " +
                          std::to_string(nb.size()) + ", expected " +
                          std::to_string(sizes_[l - 1]));
        nabla_w_[i] = std::move(nw);
        nabla_b_[i] = std::move(nb);
        filled_[i] = 1;
    }

private:
    std::size_t checked(std::size_t l) const {
        detail::check(l >= 2 && l <= sizes_.size(),
                      "GradientSet: layer " + std::to_string(l) +
                          " out of range [2, " + std::to_string(sizes_.size()) +
                          "]");
        return l;
    }

    std::vector<std::size_t> sizes_;
    std::vector<Matrix> nabla_w_;
    std::vector<Vector> nabla_b_;
    std::vector<std::uint8_t> filled_;  // not vector<bool>: one byte per slot
};

inline bool bit_equal(const GradientSet& a, const GradientSet& b) {
    if (a.layer_sizes() != b.layer_sizes()) return false;
    for (std::size_t l = 2; l <= a.layer_count(); ++l) {
        if (a.filled(l) != b.filled(l)) return false;
        if (!bit_equal(a.nabla_w(l), b.nabla_w(l))) return false;
        if (!bit_equal(a.nabla_b(l), b.nabla_b(l))) return false;
    }
    return true;
}

// C = 1/2 * sum_i (a[i] - y[i])^2, summed in ascending i order.
inline double quadratic_cost(const Vector& a, const Vector& y) {
    detail::check(a.size() == y.size(),
                  "quadratic_cost: length mismatch: " + std::to_string(a.size()) +
                      " vs " + std::to_string(y.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - y[i];
        acc += d * d;
    }
    return 0.5 * acc;
}

// delta^L = (a^L - y) (.) sigmoid'(z^L); (a - y) is the gradient of the
// quadratic cost with respect to the output activations.
inline Vector output_delta(const ForwardTrace& trace, const Vector& y) {
    const std::size_t L = trace.layer_count();
    detail::check(y.size() == trace.activation(L).size(),
                  "output_delta: target length " + std::to_string(y.size()) +
                      " does not match output size " +
                      std::to_string(trace.activation(L).size()));
    return hadamard(sub(trace.activation(L), y), sigmoid_prime(trace.z(L)));
}

// delta^l = ((w^{l+1})^T delta^{l+1}) (.) sigmoid'(z^l), for 2 <= l <= L-1.
inline Vector delta_step(const Network& net, const ForwardTrace& trace,
                         std::size_t l, const Vector& delta_next) {
    detail::check(l >= 2 && l + 1 <= net.layer_count(),
                  "delta_step: layer " + std::to_string(l) +
                      " out of range [2, " +
                      std::to_string(net.layer_count() - 1) + "]");
    detail::check(delta_next.size() == net.layer_size(l + 1),
                  "delta_step: delta for layer " + std::to_string(l + 1) +
                      " has length " + std::to_string(delta_next.size()) +
                      ", expected " + std::to_string(net.layer_size(l + 1)));
    return hadamard(matvec_transpose(net.weight(l + 1), delta_next),
                    sigmoid_prime(trace.z(l)));
}

// nabla_b^l = delta^l (a copy), nabla_w^l = delta^l (a^{l-1})^T.
inline std::pair<Matrix, Vector> layer_gradients(const ForwardTrace& trace,
                                                 std::size_t l,
                                                 const Vector& delta) {
    detail::check(l >= 2 && l <= trace.layer_count(),
                  "layer_gradients: layer " + std::to_string(l) +
                      " out of range [2, " + std::to_string(trace.layer_count()) +
                      "]");
    return {outer(delta, trace.activation(l - 1)), delta};
}

// Full backward pass: delta^L, then delta^l for l = L-1 down to 2, emitting
// gradients at every layer along the way.
inline GradientSet backprop_sequential(const Network& net,
                                       const ForwardTrace& trace,
                                       const Vector& y) {
    detail::check(trace.layer_count() == net.layer_count(),
                  "backprop_sequential: trace has " +
                      std::to_string(trace.layer_count()) + " layers, network " +
                      std::to_string(net.layer_count()));
    const std::size_t L = net.layer_count();
    GradientSet grads(net);
    Vector delta = output_delta(trace, y);
    {
        auto [nw, nb] = layer_gradients(trace, L, delta);
        grads.set_layer(L, std::move(nw), std::move(nb));
    }
    for (std::size_t l = L - 1; l >= 2; --l) {
        delta = delta_step(net, trace, l, delta);
        auto [nw, nb] = layer_gradients(trace, l, delta);
        grads.set_layer(l, std::move(nw), std::move(nb));
    }
    return grads;
}

}  // namespace leapnet
