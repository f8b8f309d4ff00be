#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsaeem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Labels = std::vector<int>;
using IndexList = std::vector<Index>;

// Error categories line up with the CLI exit codes (1, 2, 3).
enum class ErrorKind { config = 1, data = 2, numerical = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

// Raised when a sampled subset lacks one of the classes; callers resample.
class MissingClassError : public DataError {
public:
    explicit MissingClassError(const std::string& what) : DataError(what) {}
};

/// Seeded random source with platform-independent output.
///
/// Wraps mt19937_64 (whose raw sequence is fixed by the standard) and derives
/// every draw from raw 64-bit words, so results do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n);
    /// Standard exponential draw.
    double exponential();

    template <typename It>
    void shuffle(It first, It last)
    {
        auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = below(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream tag into an independent seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Number of distinct classes assuming labels are 0..C-1.
int count_classes(const Labels& labels);

/// Rows of `x` picked by `rows` (repeats allowed).
Matrix take_rows(const Matrix& x, const IndexList& rows);
/// Columns of `x` picked by `cols`.
Matrix take_cols(const Matrix& x, const IndexList& cols);
Labels take(const Labels& labels, const IndexList& rows);

bool all_finite(const Matrix& m);

} // namespace dsaeem
