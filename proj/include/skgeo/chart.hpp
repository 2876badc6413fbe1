#pragma once

// The complex Lagrangian graph of a prepotential, realized as a
// parametrized submanifold of V x V* with V = R^{2n} standard.
//
// Coordinate dictionary (fixed once for the whole library):
//   w_j = xi_j + i x_{n+j}        parameters, j = 1..n
//   v_j = dF/dw_j = x_j + i xi_{n+j}
// so the chart point carries
//   x  = (Re v, Im w),   xi = (Re w, Im v),
//   phi = sum_{k<=n} x_k xi_k - Re F(w),
// and xi_j = d(phi)/dx_j holds on the graph for all 2n indices.

#include <vector>

#include "skgeo/common.hpp"
#include "skgeo/expression.hpp"
#include "skgeo/symplectic.hpp"

namespace skgeo {

struct ChartPoint {
  CVec w;     // n parameters
  Vec x, xi;  // 2n flat coordinates and their conjugates
  double phi;
  CMat tau;   // holomorphic Hessian of F at w

  int n() const { return static_cast<int>(w.size()); }
};

inline ChartPoint embed(const PrepotentialExpr& f, const CVec& w) {
  require_same_size(w.size(), f.vars(), "embed");
  const int n = f.vars();
  const CJet jet = holo_jet(f, w, 2);

  ChartPoint p;
  p.w = w;
  p.x = Vec(2 * n);
  p.xi = Vec(2 * n);
  p.tau = CMat(n, n);
  for (int j = 0; j < n; ++j) {
    const cplx v = jet.grad(j);
    p.x[j] = v.real();
    p.x[n + j] = w[j].imag();
    p.xi[j] = w[j].real();
    p.xi[n + j] = v.imag();
    for (int k = 0; k < n; ++k) p.tau(j, k) = jet.hess(j, k);
  }
  p.phi = p.x.head(n).dot(p.xi.head(n)) - jet.value().real();
  return p;
}

namespace detail {

/// Jacobians of the chart maps w -> x(w) and w -> xi(w) with respect to
/// the real parameters (Re w_1..Re w_n, Im w_1..Im w_n), in closed form
/// from the holomorphic Hessian.
inline std::pair<Mat, Mat> chart_jacobians(const CMat& tau) {
  const int n = static_cast<int>(tau.rows());
  const Mat re = tau.real(), im = tau.imag();
  Mat a = Mat::Zero(2 * n, 2 * n), b = Mat::Zero(2 * n, 2 * n);
  a.topLeftCorner(n, n) = re;
  a.topRightCorner(n, n) = -im;
  a.bottomRightCorner(n, n) = Mat::Identity(n, n);
  b.topLeftCorner(n, n) = Mat::Identity(n, n);
  b.bottomLeftCorner(n, n) = im;
  b.bottomRightCorner(n, n) = re;
  return {std::move(a), std::move(b)};
}

}  // namespace detail

/// Pushforwards of d/d(Re w_j), d/d(Im w_j) under the embedding, as
/// 2n product vectors (dx-part, dxi-part).
inline std::vector<ProductVector> tangent_frame(const PrepotentialExpr& f,
                                                const CVec& w) {
  const ChartPoint p = embed(f, w);
  auto [a, b] = detail::chart_jacobians(p.tau);
  std::vector<ProductVector> frame;
  frame.reserve(2 * p.n());
  for (int c = 0; c < 2 * p.n(); ++c) frame.push_back({a.col(c), b.col(c)});
  return frame;
}

/// Symmetric tensor of third holomorphic derivatives of the
/// prepotential (packed storage; totally symmetric by construction).
class CubicForm {
 public:
  CubicForm(int n, Eigen::VectorXcd packed)
      : n_(n), packed_(std::move(packed)) {}

  int vars() const { return n_; }
  cplx operator()(int i, int j, int k) const {
    detail::sort3(i, j, k);
    return packed_[sym3_index(i, j, k)];
  }
  double max_abs() const {
    return packed_.size() ? packed_.cwiseAbs().maxCoeff() : 0.0;
  }

 private:
  int n_;
  Eigen::VectorXcd packed_;
};

inline CubicForm cubic_form(const PrepotentialExpr& f, const CVec& w) {
  require_same_size(w.size(), f.vars(), "cubic_form");
  const int n = f.vars();
  const CJet jet = holo_jet(f, w, 3);
  Eigen::VectorXcd packed(sym3_size(n));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= j; ++i)
        packed[sym3_index(i, j, k)] = jet.third(i, j, k);
  return CubicForm(n, std::move(packed));
}

}  // namespace skgeo
