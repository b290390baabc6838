#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ggae {

using Scalar = double;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed CSV header (a required column is absent).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Input stream or file held no data at all.
class EmptyInputError : public Error {
 public:
  using Error::Error;
};

// A graph with zero nodes or zero edges where at least one is required.
class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Incompatible matrix shapes; the message names both shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or command configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API precondition violated (missing gradient, non-scalar loss, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared during numeric work. Training code annotates
// the failure with the epoch (and the harness with the run) it surfaced in.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& message, int epoch = -1, int run = -1)
      : Error(message), epoch_(epoch), run_(run) {}
  int epoch() const { return epoch_; }
  int run() const { return run_; }

 private:
  int epoch_;
  int run_;
};

// Deterministic random source. std::mt19937_64 output is pinned by the
// standard; the value transforms below are hand-rolled because the
// std::*_distribution classes are implementation-defined, and identical
// seeds must reproduce identical runs everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  Scalar uniform() { return static_cast<Scalar>(next_u64() >> 11) * 0x1.0p-53; }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller. Consumes exactly two draws per call.
  Scalar normal() {
    const Scalar u1 = static_cast<Scalar>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const Scalar u2 = uniform();
    constexpr Scalar kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  Scalar normal(Scalar mean, Scalar stddev) { return mean + stddev * normal(); }

  // Inclusive bounds. Modulo bias is ~range/2^64, irrelevant here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Fisher-Yates; std::shuffle is implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Glorot-uniform fill, limit sqrt(6 / (fan_in + fan_out)), row-major draw order.
Mat glorot_uniform(Index rows, Index cols, Rng& rng);

}  // namespace ggae
