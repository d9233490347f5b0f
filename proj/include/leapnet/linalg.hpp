// Dense double-precision kernels used by every other module: matrix-vector
// products, outer product, Hadamard product, elementwise add/sub, sigmoid.
//
// All kernels are pure and evaluate scalar operations in a fixed order
// (ascending index, no blocking, no reassociation), so repeated invocation
// on equal inputs yields bit-identical outputs. That ordering is normative:
// the sequential and threaded backward passes are compared bit-for-bit.

#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace leapnet {

namespace detail {

inline void check(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline void check_finite(double x, const std::string& what, std::size_t index) {
    if (!std::isfinite(x)) {
        throw std::invalid_argument(what + ": non-finite element at index " +
                                    std::to_string(index));
    }
}

}  // namespace detail

// Dense vector of 64-bit floats, length >= 1. Construction from user data
// rejects NaN/Inf; internally computed values are trusted.
class Vector {
public:
    explicit Vector(std::size_t n) : elems_(n, 0.0) {
        detail::check(n >= 1, "Vector: length must be >= 1");
    }

    Vector(std::initializer_list<double> xs)
        : Vector(std::vector<double>(xs)) {}

    explicit Vector(std::vector<double> xs) : elems_(std::move(xs)) {
        detail::check(!elems_.empty(), "Vector: length must be >= 1");
        for (std::size_t i = 0; i < elems_.size(); ++i)
            detail::check_finite(elems_[i], "Vector", i);
    }

    std::size_t size() const { return elems_.size(); }
    double operator[](std::size_t i) const { return elems_[i]; }
    double& operator[](std::size_t i) { return elems_[i]; }
    const std::vector<double>& values() const { return elems_; }

    auto begin() const { return elems_.begin(); }
    auto end() const { return elems_.end(); }

private:
    std::vector<double> elems_;
};

// Dense row-major matrix, rows >= 1 and cols >= 1.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), elems_(rows * cols, 0.0) {
        detail::check(rows >= 1 && cols >= 1,
                      "Matrix: dimensions must be >= 1, got " +
                          std::to_string(rows) + "x" + std::to_string(cols));
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        detail::check(!rows.empty(), "Matrix: no rows");
        detail::check(!rows[0].empty(), "Matrix: empty row 0");
        Matrix m(rows.size(), rows[0].size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            detail::check(rows[i].size() == m.cols_,
                          "Matrix: row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) +
                              " columns, expected " + std::to_string(m.cols_));
            for (std::size_t j = 0; j < m.cols_; ++j) {
                detail::check_finite(rows[i][j], "Matrix", i * m.cols_ + j);
                m(i, j) = rows[i][j];
            }
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const {
        return elems_[i * cols_ + j];
    }
    double& operator()(std::size_t i, std::size_t j) {
        return elems_[i * cols_ + j];
    }
    const std::vector<double>& values() const { return elems_; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> elems_;
};

// result[i] = sum_j W[i][j] * v[j], summed strictly in ascending j order.
inline Vector matvec(const Matrix& w, const Vector& v) {
    detail::check(w.cols() == v.size(),
                  "matvec: shape mismatch: matrix is " + std::to_string(w.rows()) +
                      "x" + std::to_string(w.cols()) + ", vector length is " +
                      std::to_string(v.size()));
    Vector out(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < w.cols(); ++j) acc += w(i, j) * v[j];
        out[i] = acc;
    }
    return out;
}

// result[j] = sum_i W[i][j] * v[i], summed in ascending i order per element.
// Equals matvec(transpose(W), v) without materializing the transpose.
inline Vector matvec_transpose(const Matrix& w, const Vector& v) {
    detail::check(w.rows() == v.size(),
                  "matvec_transpose: shape mismatch: matrix is " +
                      std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                      ", vector length is " + std::to_string(v.size()));
    Vector out(w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        const double vi = v[i];
        for (std::size_t j = 0; j < w.cols(); ++j) out[j] += w(i, j) * vi;
    }
    return out;
}

inline Vector hadamard(const Vector& u, const Vector& v) {
    detail::check(u.size() == v.size(),
                  "hadamard: length mismatch: " + std::to_string(u.size()) +
                      " vs " + std::to_string(v.size()));
    Vector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
    return out;
}

inline Vector add(const Vector& u, const Vector& v) {
    detail::check(u.size() == v.size(),
                  "add: length mismatch: " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
    Vector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + v[i];
    return out;
}

inline Vector sub(const Vector& u, const Vector& v) {
    detail::check(u.size() == v.size(),
                  "sub: length mismatch: " + std::to_string(u.size()) + " vs " +
                      std::to_string(v.size()));
    Vector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
    return out;
}

// result[j][k] = u[j] * v[k].
inline Matrix outer(const Vector& u, const Vector& v) {
    Matrix out(u.size(), v.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double uj = u[j];
        for (std::size_t k = 0; k < v.size(); ++k) out(j, k) = uj * v[k];
    }
    return out;
}

// Logistic function, strictly inside (0, 1) for every finite input.
//
// For x >= 0 the value is computed as 1 - sigmoid(-x); since sigmoid(-x) is
// evaluated by the identical expression the x < 0 branch uses, the pair
// sigmoid(x) + sigmoid(-x) sums to 1.0 exactly except deep in the saturated
// tails, where it is within 1 ulp.
inline double sigmoid_scalar(double x) {
    constexpr double tiny = std::numeric_limits<double>::denorm_min();
    if (x < 0.0) {
        const double t = std::exp(x);  // in (0, 1)
        const double s = t / (1.0 + t);
        return s > 0.0 ? s : tiny;
    }
    const double t = std::exp(-x);  // in (0, 1]
    double p = t / (1.0 + t);       // sigmoid(-x), in (0, 0.5]
    if (p <= 0.0) p = tiny;
    const double s = 1.0 - p;
    return s < 1.0 ? s : std::nextafter(1.0, 0.0);
}

// Derivative evaluated as s*(1-s) with s = sigmoid_scalar(x); in (0, 0.25].
inline double sigmoid_prime_scalar(double x) {
    const double s = sigmoid_scalar(x);
    return s * (1.0 - s);
}

inline Vector sigmoid(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = sigmoid_scalar(v[i]);
    return out;
}

inline Vector sigmoid_prime(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = sigmoid_prime_scalar(v[i]);
    return out;
}

// Bit-pattern equality; distinguishes +0/-0, which operator== on double
// would conflate.
inline bool bit_equal(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

inline bool bit_equal(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!bit_equal(a[i], b[i])) return false;
    return true;
}

inline bool bit_equal(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        if (!bit_equal(a.values()[i], b.values()[i])) return false;
    return true;
}

}  // namespace leapnet
