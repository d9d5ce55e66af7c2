#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace csc {

/// Two tensors (or a tensor and an operator) disagree on shape.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dictionary geometry produces a non-positive or non-integral size.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Consecutive layers of a cascade do not chain. `layer()` is 1-based.
class CascadeGeometryError : public GeometryError {
 public:
  CascadeGeometryError(std::size_t layer, const std::string& what)
      : GeometryError("layer " + std::to_string(layer) + ": " + what), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// An argument is outside the operation's domain (negative sigma, bad budget, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solver produced a non-finite objective. Carries the objective values
/// recorded before the failure.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, std::vector<double> partial_objective)
      : std::runtime_error("objective became non-finite at iteration " + std::to_string(iteration)),
        iteration_(iteration),
        partial_(std::move(partial_objective)) {}

  int iteration() const noexcept { return iteration_; }
  const std::vector<double>& partial_objective() const noexcept { return partial_; }

 private:
  int iteration_;
  std::vector<double> partial_;
};

/// Malformed binary container or image. `offset()` is the byte position
/// where parsing failed.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t offset, const std::string& what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace csc
