#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlra {

/// Dimension or structural mismatch in an operation's inputs.
class ShapeError : public std::runtime_error {
  public:
    explicit ShapeError(const std::string &what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent configuration (flags, masks, optimizer switch).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

/// Iterative routine exceeded its sweep budget. Carries the last residual.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(const std::string &what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

/// A sampled core block has a singular value at or below the floor.
/// index() is 1-based, counting singular values in non-increasing order.
class DegenerateSampleError : public std::runtime_error {
  public:
    DegenerateSampleError(const std::string &what, std::size_t index)
        : std::runtime_error(what), index_(index) {}
    std::size_t index() const { return index_; }

  private:
    std::size_t index_;
};

/// Non-finite value where the contract requires finite data.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

/// File format violations (bad magic, truncated payload, version mismatch).
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace nlra
