#pragma once

// Constant symplectic linear algebra on V = R^{2n} and the two product
// 2-forms plus the pairing metric on V x V* (the phase-space model in
// which graphs of closed 1-forms are Lagrangian).
//
// Gram convention used throughout: a 2-form with antisymmetric
// coefficient matrix A evaluates as u^T A v, and displayed coordinate
// sums run over all ordered index pairs.  Hence
//   Omega1(u, v) = 2 (u.a . v.alpha - v.a . u.alpha)
//   Omega2(u, v) = 2 (u.a^T omega v.a + u.alpha^T omega^{-1} v.alpha)
// Only the vanishing of these forms is geometrically meaningful; fixing
// the factor makes fixtures exact.

#include <vector>

#include "skgeo/common.hpp"

namespace skgeo {

class SymplecticSpace {
 public:
  /// An arbitrary constant symplectic form; must be antisymmetric to
  /// 1e-12 and invertible.
  SymplecticSpace(int n, Mat omega) : n_(n), omega_(std::move(omega)) {
    const Eigen::Index d = 2 * static_cast<Eigen::Index>(n);
    if (n < 1 || omega_.rows() != d || omega_.cols() != d)
      throw DimensionMismatch("symplectic form must be 2n x 2n");
    if ((omega_ + omega_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw Error("symplectic form is not antisymmetric");
    Eigen::FullPivLU<Mat> lu(omega_);
    if (!lu.isInvertible()) throw Error("symplectic form is degenerate");
    omega_inv_ = lu.inverse();
  }

  int n() const { return n_; }
  int dim() const { return 2 * n_; }
  const Mat& omega() const { return omega_; }
  const Mat& omega_inv() const { return omega_inv_; }

 private:
  int n_;
  Mat omega_, omega_inv_;
};

/// The standard basis: omega = sum_j dx_j ^ dx_{n+j}, block form
/// [[0, I], [-I, 0]], with exact integer entries.
inline SymplecticSpace standard_space(int n) {
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return SymplecticSpace(n, std::move(omega));
}

/// The standard 2n x 2n form/inverse as plain matrices, for callers that
/// do not need the validated wrapper.
inline Mat standard_omega(int n) {
  Mat omega = Mat::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Mat::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return omega;
}
inline Mat standard_omega_inv(int n) { return -standard_omega(n); }

/// An element of V x V*: an x-part and a covector part.
struct ProductVector {
  Vec a;      // x-part, size 2n
  Vec alpha;  // xi-part, size 2n
};

inline double eval_Omega1(const ProductVector& u, const ProductVector& v) {
  require_same_size(u.a.size(), v.a.size(), "eval_Omega1");
  require_same_size(u.alpha.size(), v.alpha.size(), "eval_Omega1");
  require_same_size(u.a.size(), u.alpha.size(), "eval_Omega1");
  return 2.0 * (u.a.dot(v.alpha) - v.a.dot(u.alpha));
}

inline double eval_Omega2(const SymplecticSpace& s, const ProductVector& u,
                          const ProductVector& v) {
  require_same_size(u.a.size(), s.omega().rows(), "eval_Omega2");
  require_same_size(v.a.size(), s.omega().rows(), "eval_Omega2");
  require_same_size(u.alpha.size(), s.omega().rows(), "eval_Omega2");
  require_same_size(v.alpha.size(), s.omega().rows(), "eval_Omega2");
  return 2.0 * (u.a.dot(s.omega() * v.a) + u.alpha.dot(s.omega_inv() * v.alpha));
}

/// Polarization of the quadratic pairing form, normalized so the
/// induced metric on the graph of a symmetric matrix H is exactly H.
inline double pairing_metric(const ProductVector& u, const ProductVector& v) {
  require_same_size(u.a.size(), v.alpha.size(), "pairing_metric");
  require_same_size(v.a.size(), u.alpha.size(), "pairing_metric");
  return 0.5 * (u.a.dot(v.alpha) + v.a.dot(u.alpha));
}

struct BilagrangianResidual {
  double r1 = 0.0;             // worst |Omega1| over frame pairs
  double r2 = 0.0;             // worst |Omega2| over frame pairs
  bool transversal_x = false;  // x-parts span V
  bool transversal_xi = false; // xi-parts span V*
};

/// Worst-case values of the two forms over all pairs from a frame that
/// is expected to span a 2n-dimensional subspace of V x V*.
inline BilagrangianResidual bilagrangian_residual(
    const SymplecticSpace& s, const std::vector<ProductVector>& frame) {
  const int d = s.dim();
  if (static_cast<int>(frame.size()) != d)
    throw DimensionMismatch("frame must contain 2n vectors");

  Mat a_parts(d, d), alpha_parts(d, d), stacked(2 * d, d);
  for (int j = 0; j < d; ++j) {
    require_same_size(frame[j].a.size(), d, "bilagrangian_residual");
    require_same_size(frame[j].alpha.size(), d, "bilagrangian_residual");
    a_parts.col(j) = frame[j].a;
    alpha_parts.col(j) = frame[j].alpha;
    stacked.col(j) << frame[j].a, frame[j].alpha;
  }
  if (Eigen::ColPivHouseholderQR<Mat>(stacked).rank() < d)
    throw RankDeficientFrame("frame does not span a 2n-dimensional subspace");

  BilagrangianResidual out;
  out.transversal_x = Eigen::ColPivHouseholderQR<Mat>(a_parts).rank() == d;
  out.transversal_xi = Eigen::ColPivHouseholderQR<Mat>(alpha_parts).rank() == d;

  // Gram matrices of the two forms on the frame.
  const Mat gram1 =
      2.0 * (a_parts.transpose() * alpha_parts - alpha_parts.transpose() * a_parts);
  const Mat gram2 = 2.0 * (a_parts.transpose() * s.omega() * a_parts +
                           alpha_parts.transpose() * s.omega_inv() * alpha_parts);
  out.r1 = gram1.cwiseAbs().maxCoeff();
  out.r2 = gram2.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace skgeo
