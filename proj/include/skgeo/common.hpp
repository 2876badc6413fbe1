#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace skgeo {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A singular elementary operation was evaluated (log/sqrt of a
/// nonpositive argument, a point on the principal branch cut, or a
/// division by zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector/matrix dimensions between operands.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Chart Jacobian is (numerically) singular: the point is not
/// transversal to the projection being inverted.
class SingularJacobian : public Error {
 public:
  using Error::Error;
};

/// Newton iteration exhausted its budget without meeting the target
/// residual.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// An eigenvalue of the metric fell below the zero-classification
/// threshold; the signature cannot be assigned.
class DegenerateMetric : public Error {
 public:
  using Error::Error;
};

/// A supplied frame does not span a subspace of the expected dimension.
class RankDeficientFrame : public Error {
 public:
  using Error::Error;
};

/// Expression text violates the grammar, names an out-of-range
/// variable, or a builtin was requested with an incompatible arity.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& what)
      : Error(what), offset_(offset), expected_(std::move(expected)) {}

  /// Byte offset of the offending token in the input text.
  std::size_t offset() const { return offset_; }
  /// Human-readable description of what the parser expected there.
  const std::string& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

inline void require_same_size(Eigen::Index a, Eigen::Index b, const char* where) {
  if (a != b) {
    throw DimensionMismatch(std::string(where) + ": dimension mismatch (" +
                            std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace skgeo
