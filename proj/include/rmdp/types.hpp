#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmdp {

/// Default precision used throughout the library.
using prec_t = double;
/// Vector of reals.
using numvec = std::vector<prec_t>;
/// Vector of indices.
using indvec = std::vector<long>;

constexpr prec_t inf = std::numeric_limits<prec_t>::infinity();

// *******************************************************
// Errors
// *******************************************************

/// A structural invariant of a model does not hold (bad dimensions,
/// non-stochastic rows, discount outside [0,1), ...).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// An uncertainty set turned out to be empty where a distribution is required.
class EmptyUncertainty : public std::runtime_error {
public:
    explicit EmptyUncertainty(const std::string& what) : std::runtime_error(what) {}
};

/// The numerical kernel could not certify its result (singular basis,
/// constraint violation beyond tolerance after recovery attempts, ...).
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative scheme hit its iteration cap before reaching its target gap.
class IterationCapExceeded : public std::runtime_error {
public:
    explicit IterationCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// A grid layout is malformed (start or goal on a hole, size mismatch, ...).
class InvalidLayout : public std::runtime_error {
public:
    explicit InvalidLayout(const std::string& what) : std::runtime_error(what) {}
};

/// Two states that must share an action set do not.
class ActionMismatch : public std::runtime_error {
public:
    explicit ActionMismatch(const std::string& what) : std::runtime_error(what) {}
};

// *******************************************************
// Sparse rows
// *******************************************************

/// One sparse linear-constraint row: strictly ascending column indices
/// paired with coefficients. Zero coefficients may be stored but are
/// never required to be.
struct SparseRow {
    indvec cols;
    numvec vals;

    SparseRow() = default;
    SparseRow(indvec c, numvec v) : cols(std::move(c)), vals(std::move(v)) {}

    size_t size() const { return cols.size(); }

    /// Dot product with a dense vector.
    prec_t dot(const numvec& x) const {
        prec_t r = 0.0;
        for (size_t i = 0; i < cols.size(); ++i) r += vals[i] * x[cols[i]];
        return r;
    }

    bool operator==(const SparseRow&) const = default;

    /// Expands to a dense coefficient vector of length dim.
    numvec dense(long dim) const {
        numvec r(static_cast<size_t>(dim), 0.0);
        for (size_t i = 0; i < cols.size(); ++i) r[cols[i]] += vals[i];
        return r;
    }
};

/// Builds a sparse row from a dense coefficient vector, dropping exact zeros.
inline SparseRow sparse_from_dense(const numvec& dense) {
    SparseRow row;
    for (size_t j = 0; j < dense.size(); ++j)
        if (dense[j] != 0.0) {
            row.cols.push_back(static_cast<long>(j));
            row.vals.push_back(dense[j]);
        }
    return row;
}

// *******************************************************
// Pseudo-random numbers
// *******************************************************

/// xorshift64* generator. Used wherever reproducibility across platforms
/// matters (seeded initial policies, random grid layouts, benchmarks);
/// the standard-library distributions are not bit-stable across
/// implementations.
class Xorshift64 {
public:
    explicit Xorshift64(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next() {
        uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    /// Uniform integer in [0, n). Rejection-free modulo is fine here:
    /// n is tiny relative to 2^64, the bias is far below any tolerance used.
    uint64_t next_below(uint64_t n) { return next() % n; }

    /// Uniform real in [0, 1).
    prec_t next_unit() { return static_cast<prec_t>(next() >> 11) * 0x1.0p-53; }

private:
    uint64_t state_;
};

// *******************************************************
// Small helpers
// *******************************************************

inline prec_t linf_norm(const numvec& x) {
    prec_t r = 0.0;
    for (prec_t v : x) r = std::max(r, std::abs(v));
    return r;
}

inline prec_t linf_dist(const numvec& x, const numvec& y) {
    prec_t r = 0.0;
    for (size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(x[i] - y[i]));
    return r;
}

}  // namespace rmdp
