// Network representation (layer sizes, weights, biases), seeded random
// construction, the cached forward pass, and file serialization.
//
// Layers are numbered 1..L as is conventional for this kind of net: layer 1
// is the input layer and carries no weights or biases; layer l >= 2 owns a
// weight matrix of shape size(l) x size(l-1) and a bias vector of length
// size(l). Accessors take the 1-based layer number.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "leapnet/linalg.hpp"

namespace leapnet {

// Cached result of one forward pass: weighted inputs z^l for l in 2..L and
// activations a^l for l in 1..L, with a^l = sigmoid(z^l) for l >= 2 and a^1
// equal to the input vector.
class ForwardTrace {
public:
    ForwardTrace(std::vector<Vector> activations, std::vector<Vector> zs)
        : activations_(std::move(activations)), zs_(std::move(zs)) {
        detail::check(activations_.size() >= 2,
                      "ForwardTrace: need at least 2 layers");
        detail::check(zs_.size() + 1 == activations_.size(),
                      "ForwardTrace: layer count mismatch between weighted "
                      "inputs and activations");
    }

    std::size_t layer_count() const { return activations_.size(); }

    // a^l, valid for l in 1..L.
    const Vector& activation(std::size_t l) const {
        detail::check(l >= 1 && l <= activations_.size(),
                      "ForwardTrace: activation layer " + std::to_string(l) +
                          " out of range [1, " +
                          std::to_string(activations_.size()) + "]");
        return activations_[l - 1];
    }

    // z^l, valid for l in 2..L.
    const Vector& z(std::size_t l) const {
        detail::check(l >= 2 && l <= activations_.size(),
                      "ForwardTrace: z layer " + std::to_string(l) +
                          " out of range [2, " +
                          std::to_string(activations_.size()) + "]");
        return zs_[l - 2];
    }

private:
    std::vector<Vector> activations_;
    std::vector<Vector> zs_;
};

class Network {
public:
    Network(std::vector<std::size_t> layer_sizes, std::vector<Matrix> weights,
            std::vector<Vector> biases)
        : sizes_(std::move(layer_sizes)),
          weights_(std::move(weights)),
          biases_(std::move(biases)) {
        detail::check(sizes_.size() >= 2, "Network: need at least 2 layers");
        for (std::size_t i = 0; i < sizes_.size(); ++i)
            detail::check(sizes_[i] >= 1, "Network: layer " +
                                              std::to_string(i + 1) +
                                              " has size 0");
        const std::size_t L = sizes_.size();
        detail::check(weights_.size() == L - 1,
                      "Network: expected " + std::to_string(L - 1) +
                          " weight matrices, got " +
                          std::to_string(weights_.size()));
        detail::check(biases_.size() == L - 1,
                      "Network: expected " + std::to_string(L - 1) +
                          " bias vectors, got " + std::to_string(biases_.size()));
        for (std::size_t l = 2; l <= L; ++l) {
            const Matrix& w = weights_[l - 2];
            detail::check(w.rows() == sizes_[l - 1] && w.cols() == sizes_[l - 2],
                          "Network: layer " + std::to_string(l) +
                              " weight matrix is " + std::to_string(w.rows()) +
                              "x" + std::to_string(w.cols()) + ", expected " +
                              std::to_string(sizes_[l - 1]) + "x" +
                              std::to_string(sizes_[l - 2]));
            detail::check(biases_[l - 2].size() == sizes_[l - 1],
                          "Network: layer " + std::to_string(l) +
                              " bias has length " +
                              std::to_string(biases_[l - 2].size()) +
                              ", expected " + std::to_string(sizes_[l - 1]));
        }
    }

    // Weights and biases drawn independently and uniformly from [-0.5, 0.5).
    //
    // The generator is pinned for cross-platform reproducibility: a
    // std::mt19937_64 seeded with `seed`, each draw mapping the top 53 bits
    // of one engine output to [0, 1) via (u >> 11) * 2^-53, minus 0.5.
    // Draw order: for l = 2..L, the rows of w^l in row-major order, then b^l.
    static Network new_random(const std::vector<std::size_t>& layer_sizes,
                              std::uint64_t seed) {
        detail::check(layer_sizes.size() >= 2,
                      "new_random: need at least 2 layer sizes");
        for (std::size_t s : layer_sizes)
            detail::check(s >= 1, "new_random: layer sizes must be >= 1");
        std::mt19937_64 rng(seed);
        auto draw = [&rng]() {
            return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
        };
        std::vector<Matrix> ws;
        std::vector<Vector> bs;
        for (std::size_t l = 2; l <= layer_sizes.size(); ++l) {
            Matrix w(layer_sizes[l - 1], layer_sizes[l - 2]);
            for (std::size_t i = 0; i < w.rows(); ++i)
                for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = draw();
            Vector b(layer_sizes[l - 1]);
            for (std::size_t i = 0; i < b.size(); ++i) b[i] = draw();
            ws.push_back(std::move(w));
            bs.push_back(std::move(b));
        }
        return Network(layer_sizes, std::move(ws), std::move(bs));
    }

    std::size_t layer_count() const { return sizes_.size(); }
    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }

    std::size_t layer_size(std::size_t l) const {
        detail::check(l >= 1 && l <= sizes_.size(),
                      "layer_size: layer " + std::to_string(l) +
                          " out of range [1, " + std::to_string(sizes_.size()) +
                          "]");
        return sizes_[l - 1];
    }

    // w^l and b^l, valid for l in 2..L. The non-const overloads exist for
    // parameter perturbation (finite differences); shared networks must be
    // treated as immutable.
    const Matrix& weight(std::size_t l) const { return weights_[checked(l) - 2]; }
    Matrix& weight(std::size_t l) { return weights_[checked(l) - 2]; }
    const Vector& bias(std::size_t l) const { return biases_[checked(l) - 2]; }
    Vector& bias(std::size_t l) { return biases_[checked(l) - 2]; }

    // Forward pass: a^1 = x, then z^l = w^l a^{l-1} + b^l and a^l =
    // sigmoid(z^l) for l = 2..L in order, all layers cached.
    ForwardTrace forward(const Vector& x) const {
        detail::check(x.size() == sizes_[0],
                      "forward: input length " + std::to_string(x.size()) +
                          " does not match input layer size " +
                          std::to_string(sizes_[0]));
        std::vector<Vector> as;
        std::vector<Vector> zs;
        as.reserve(sizes_.size());
        zs.reserve(sizes_.size() - 1);
        as.push_back(x);
        for (std::size_t l = 2; l <= sizes_.size(); ++l) {
            Vector z = add(matvec(weight(l), as.back()), bias(l));
            as.push_back(sigmoid(z));
            zs.push_back(std::move(z));
        }
        return ForwardTrace(std::move(as), std::move(zs));
    }

    // Versioned structured-text (JSON) serialization, floats written with
    // full round-trip precision; load(save(net)) is bit-exact.
    void save(std::ostream& os) const {
        nlohmann::json j;
        j["version"] = 1;
        j["layer_sizes"] = sizes_;
        nlohmann::json ws = nlohmann::json::array();
        nlohmann::json bs = nlohmann::json::array();
        for (std::size_t l = 2; l <= sizes_.size(); ++l) {
            const Matrix& w = weight(l);
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t i = 0; i < w.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (std::size_t jj = 0; jj < w.cols(); ++jj)
                    row.push_back(w(i, jj));
                rows.push_back(std::move(row));
            }
            ws.push_back(std::move(rows));
            bs.push_back(bias(l).values());
        }
        j["weights"] = std::move(ws);
        j["biases"] = std::move(bs);
        os << j.dump(2) << '\n';
        if (!os) throw std::runtime_error("save: write failed");
    }

    void save(const std::filesystem::path& path) const {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("save: cannot open '" + path.string() +
                                     "' for writing");
        save(os);
    }

    static Network load(std::istream& is) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(is);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("network file parse error: ") +
                                     e.what());
        }
        try {
            return from_json(j);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("network file parse error: ") +
                                     e.what());
        }
    }

    static Network load(const std::filesystem::path& path) {
        std::ifstream is(path);
        if (!is)
            throw std::runtime_error("load: cannot open '" + path.string() +
                                     "'");
        return load(is);
    }

private:
    std::size_t checked(std::size_t l) const {
        detail::check(l >= 2 && l <= sizes_.size(),
                      "Network: layer " + std::to_string(l) +
                          " out of range [2, " + std::to_string(sizes_.size()) +
                          "]");
        return l;
    }

    static Network from_json(const nlohmann::json& j) {
        auto fail = [](const std::string& msg) -> std::runtime_error {
            return std::runtime_error("network file parse error: " + msg);
        };
        if (!j.is_object()) throw fail("top-level value is not an object");
        if (!j.contains("version") || !j["version"].is_number_integer())
            throw fail("missing integer field 'version'");
        if (j["version"].get<std::int64_t>() != 1)
            throw fail("unsupported version " + j["version"].dump() +
                       " (expected 1)");
        for (const char* field : {"layer_sizes", "weights", "biases"})
            if (!j.contains(field) || !j[field].is_array())
                throw fail(std::string("missing array field '") + field + "'");

        std::vector<std::size_t> sizes;
        for (const auto& s : j["layer_sizes"]) {
            if (!s.is_number_integer() || s.get<std::int64_t>() < 1)
                throw fail("layer_sizes entries must be positive integers");
            sizes.push_back(static_cast<std::size_t>(s.get<std::int64_t>()));
        }
        if (sizes.size() < 2) throw fail("need at least 2 layer sizes");
        const std::size_t L = sizes.size();
        if (j["weights"].size() != L - 1)
            throw fail("expected " + std::to_string(L - 1) +
                       " weight matrices, found " +
                       std::to_string(j["weights"].size()));
        if (j["biases"].size() != L - 1)
            throw fail("expected " + std::to_string(L - 1) +
                       " bias vectors, found " +
                       std::to_string(j["biases"].size()));

        std::vector<Matrix> ws;
        std::vector<Vector> bs;
        for (std::size_t l = 2; l <= L; ++l) {
            const auto& jw = j["weights"][l - 2];
            if (!jw.is_array() || jw.size() != sizes[l - 1])
                throw fail("layer " + std::to_string(l) + " weight matrix has " +
                           std::to_string(jw.size()) + " rows, expected " +
                           std::to_string(sizes[l - 1]));
            Matrix w(sizes[l - 1], sizes[l - 2]);
            for (std::size_t r = 0; r < w.rows(); ++r) {
                const auto& jrow = jw[r];
                if (!jrow.is_array() || jrow.size() != sizes[l - 2])
                    throw fail("layer " + std::to_string(l) + " weight row " +
                               std::to_string(r) + " has length " +
                               std::to_string(jrow.size()) + ", expected " +
                               std::to_string(sizes[l - 2]));
                for (std::size_t c = 0; c < w.cols(); ++c) {
                    const double x = jrow[c].get<double>();
                    if (!std::isfinite(x))
                        throw fail("layer " + std::to_string(l) +
                                   " weight row " + std::to_string(r) +
                                   " has a non-finite entry");
                    w(r, c) = x;
                }
            }
            const auto& jb = j["biases"][l - 2];
            if (!jb.is_array() || jb.size() != sizes[l - 1])
                throw fail("layer " + std::to_string(l) + " bias has length " +
                           std::to_string(jb.size()) + ", expected " +
                           std::to_string(sizes[l - 1]));
            Vector b(sizes[l - 1]);
            for (std::size_t i = 0; i < b.size(); ++i) {
                const double x = jb[i].get<double>();
                if (!std::isfinite(x))
                    throw fail("layer " + std::to_string(l) +
                               " bias has a non-finite entry at index " +
                               std::to_string(i));
                b[i] = x;
            }
            ws.push_back(std::move(w));
            bs.push_back(std::move(b));
        }
        return Network(std::move(sizes), std::move(ws), std::move(bs));
    }

    std::vector<std::size_t> sizes_;
    std::vector<Matrix> weights_;
    std::vector<Vector> biases_;
};

// Deterministic input/target pair sized for `net`, elements uniform in
// [0, 1). The stream is salted so it never replays the weight stream of a
// network built from the same seed.
inline std::pair<Vector, Vector> seeded_sample(const Network& net,
                                               std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    auto draw = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    Vector x(net.layer_size(1));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = draw();
    Vector y(net.layer_size(net.layer_count()));
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = draw();
    return {std::move(x), std::move(y)};
}

inline bool bit_equal(const Network& a, const Network& b) {
    if (a.layer_sizes() != b.layer_sizes()) return false;
    for (std::size_t l = 2; l <= a.layer_count(); ++l) {
        if (!bit_equal(a.weight(l), b.weight(l))) return false;
        if (!bit_equal(a.bias(l), b.bias(l))) return false;
    }
    return true;
}

inline bool bit_equal(const ForwardTrace& a, const ForwardTrace& b) {
    if (a.layer_count() != b.layer_count()) return false;
    for (std::size_t l = 1; l <= a.layer_count(); ++l)
        if (!bit_equal(a.activation(l), b.activation(l))) return false;
    for (std::size_t l = 2; l <= a.layer_count(); ++l)
        if (!bit_equal(a.z(l), b.z(l))) return false;
    return true;
}

}  // namespace leapnet
