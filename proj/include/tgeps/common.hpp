#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tgeps {

using NodeId = std::uint32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// -----------------------------------------------------------------------------
// Random streams
// -----------------------------------------------------------------------------

using Rng = std::mt19937_64;

/// splitmix64 finalizer. Used to fan a master seed out to independent
/// per-stage and per-worker streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `index` derived from `master`. derive_seed(s, i) for
/// distinct i never collide for a fixed s (splitmix64 is a bijection).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Well-known stage indices for derive_seed. Fixed so that changing one
/// stage's flags never perturbs another stage's stream.
namespace stage {
inline constexpr std::uint64_t split = 1;
inline constexpr std::uint64_t sample = 2;
inline constexpr std::uint64_t train = 3;
inline constexpr std::uint64_t eval = 4;
inline constexpr std::uint64_t zero_shot = 5;
inline constexpr std::uint64_t generate = 6;
} // namespace stage

/// Uniform integer in [0, n). n must be positive.
template <class Engine>
inline std::size_t uniform_index(Engine& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Uniform double in [0, 1) from the top 53 bits.
template <class Engine>
inline double uniform_unit(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Engine>
inline double uniform_real(Engine& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

/// Fisher-Yates with uniform_index, so the permutation only depends on the
/// engine (std::shuffle's exact draw sequence is library-specific).
template <class T, class Engine>
inline void shuffle(std::vector<T>& v, Engine& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_index(rng, i);
        using std::swap;
        swap(v[i - 1], v[j]);
    }
}

// -----------------------------------------------------------------------------
// Dense row-major matrix
// -----------------------------------------------------------------------------

template <class Real = double>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<Real> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const Real> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }

    Real& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    Real operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<Real> flat() noexcept { return data_; }
    std::span<const Real> flat() const noexcept { return data_; }

    void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

// -----------------------------------------------------------------------------
// Small numeric helpers
// -----------------------------------------------------------------------------

template <class Real>
inline Real dot(std::span<const Real> a, std::span<const Real> b) noexcept {
    Real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double sigmoid(double x) noexcept {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// log(sigmoid(x)) without overflow: -softplus(-x).
inline double log_sigmoid(double x) noexcept {
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline bool all_finite(std::span<const double> v) noexcept {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace tgeps
