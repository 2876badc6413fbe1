#pragma once

// Hyperkahler structure on (chart of M) x R^{2n}: the three symplectic
// Gram matrices on the (dx, dy) basis, the quaternionic triple built
// from them as transfer-map compositions, the metric, moment maps, the
// 3-dimensional Laplace property of Re F, and the K = -phi identity.
//
// Sign conventions (fixed once, reported in every verification run):
//   sigma1 = [[0, g], [-g, 0]]
//   sigma2 = s2 [[omega, 0], [0, -omega]]          s2 = +1
//   sigma3 = s3 [[0, omega], [omega, 0]]           s3 = -1
//   J1 = sigma3^{-1} sigma2,  J2 = sigma1^{-1} sigma3,
//   J3 = sigma2^{-1} sigma1
//   G(u, v) = sigma_i(J_i u, v)   (any i; = diag(g, g), so G is
//                                  definite exactly when g is)
//   d(mu_{j,i}) = m_i iota(U_j) sigma_i with U_j = -d/dy_j and
//   m = (+1, -1, +1)
// These are pinned by requiring the block forms J3 = [[0,I],[I,0]],
// J2 = [[-I,0],[0,I]], J1 = [[0,Id],[-Id,0]] and an exact pass of the
// quadratic fixtures; one global choice works for every prepotential.

#include <array>

#include "skgeo/common.hpp"
#include "skgeo/special_kahler.hpp"

namespace skgeo {

struct SignVector {
  int sigma2 = +1;
  int sigma3 = -1;
  std::array<int, 3> moment{+1, -1, +1};
  int metric = +1;  // G(u,v) = metric * sigma_i(J_i u, v)
};

inline constexpr SignVector kSignVector{};

namespace detail {

inline std::array<Mat, 3> gram_matrices(const Mat& g, const Mat& omega) {
  const Eigen::Index d = g.rows();
  Mat s1 = Mat::Zero(2 * d, 2 * d), s2 = Mat::Zero(2 * d, 2 * d),
      s3 = Mat::Zero(2 * d, 2 * d);
  s1.topRightCorner(d, d) = g;
  s1.bottomLeftCorner(d, d) = -g;
  s2.topLeftCorner(d, d) = kSignVector.sigma2 * omega;
  s2.bottomRightCorner(d, d) = -kSignVector.sigma2 * omega;
  s3.topRightCorner(d, d) = kSignVector.sigma3 * omega;
  s3.bottomLeftCorner(d, d) = kSignVector.sigma3 * omega;
  return {std::move(s1), std::move(s2), std::move(s3)};
}

}  // namespace detail

struct HKFrame {
  SKPoint base;
  Vec y;  // 2n fibre coordinates (the coefficients are y-independent)
  Mat sigma1, sigma2, sigma3;
  Mat J1, J2, J3;
  Mat G;

  int n() const { return base.n(); }
};

inline HKFrame hk_frame(const PrepotentialExpr& f, const CVec& w, const Vec& y) {
  SKPoint sk = sk_point(f, w);
  require_same_size(y.size(), 2 * sk.n(), "hk_frame");
  const Mat omega = standard_omega(sk.n());

  HKFrame hk;
  hk.base = std::move(sk);
  hk.y = y;
  auto grams = detail::gram_matrices(hk.base.g, omega);
  hk.sigma1 = std::move(grams[0]);
  hk.sigma2 = std::move(grams[1]);
  hk.sigma3 = std::move(grams[2]);
  // Transfer-map compositions; the solve also exercises invertibility.
  hk.J1 = hk.sigma3.partialPivLu().solve(hk.sigma2);
  hk.J2 = hk.sigma1.partialPivLu().solve(hk.sigma3);
  hk.J3 = hk.sigma2.partialPivLu().solve(hk.sigma1);
  hk.G = kSignVector.metric * hk.J1.transpose() * hk.sigma1;
  return hk;
}

/// Worst quaternion-algebra defect of the triple: J_i^2 + Id, the cyclic
/// products J_i J_j - J_k, and the anticommutators.
inline double quaternion_residual(const HKFrame& hk) {
  const Eigen::Index d = hk.J1.rows();
  const Mat id = Mat::Identity(d, d);
  double worst = 0.0;
  auto acc = [&worst](const Mat& m) {
    worst = std::max(worst, m.cwiseAbs().maxCoeff());
  };
  acc(hk.J1 * hk.J1 + id);
  acc(hk.J2 * hk.J2 + id);
  acc(hk.J3 * hk.J3 + id);
  acc(hk.J1 * hk.J2 - hk.J3);
  acc(hk.J2 * hk.J3 - hk.J1);
  acc(hk.J3 * hk.J1 - hk.J2);
  acc(hk.J1 * hk.J2 + hk.J2 * hk.J1);
  acc(hk.J2 * hk.J3 + hk.J3 * hk.J2);
  acc(hk.J3 * hk.J1 + hk.J1 * hk.J3);
  return worst;
}

/// Worst disagreement of sigma_i(J_i ., .) across i = 1, 2, 3 plus the
/// asymmetry of G.
inline double metric_consistency_residual(const HKFrame& hk) {
  const Mat g2 = kSignVector.metric * hk.J2.transpose() * hk.sigma2;
  const Mat g3 = kSignVector.metric * hk.J3.transpose() * hk.sigma3;
  double worst = (g2 - hk.G).cwiseAbs().maxCoeff();
  worst = std::max(worst, (g3 - hk.G).cwiseAbs().maxCoeff());
  worst = std::max(worst, (hk.G - hk.G.transpose()).cwiseAbs().maxCoeff());
  return worst;
}

/// d(sigma1) = 0 reduces to symmetry of d_l g_{jk} in (l, j); sigma2 and
/// sigma3 have constant coefficients and are exactly closed.  Central
/// differences in the x-chart.
inline double closedness_residual(const PrepotentialExpr& f, const CVec& w,
                                  double step = 1e-3) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  std::vector<Mat> dg(d);
  for (int l = 0; l < d; ++l) {
    Vec xp = sk.chart.x, xm = sk.chart.x;
    xp[l] += step;
    xm[l] -= step;
    const Mat gp = sk_point(f, invert_chart(f, xp, sk.chart.w).w).g;
    const Mat gm = sk_point(f, invert_chart(f, xm, sk.chart.w).w).g;
    dg[l] = (gp - gm) / (2.0 * step);
  }
  double worst = 0.0;
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < l; ++j)
      worst = std::max(worst, (dg[l].row(j) - dg[j].row(l)).cwiseAbs().maxCoeff());
  return worst;
}

struct MomentMap {
  Mat mu;  // n x 3, row j = (xi_j, -y_{n+j}, x_{n+j})
  double diff_residual = 0.0;         // d(mu) vs sign-fixed contractions
  double equivariance_residual = 0.0; // d(mu)/dy_j for j <= n, exactly 0
};

namespace detail {

inline Mat moment_rows(const ChartPoint& p, const Vec& y) {
  const int n = p.n();
  Mat mu(n, 3);
  for (int j = 0; j < n; ++j) {
    mu(j, 0) = p.xi[j];
    mu(j, 1) = -y[n + j];
    mu(j, 2) = p.x[n + j];
  }
  return mu;
}

}  // namespace detail

inline MomentMap moment_map(const PrepotentialExpr& f, const CVec& w,
                            const Vec& y, double step = 1e-4) {
  const SKPoint sk = sk_point(f, w);
  const int n = sk.n(), d = 2 * n;
  require_same_size(y.size(), d, "moment_map");
  const auto grams = detail::gram_matrices(sk.g, standard_omega(n));

  MomentMap out;
  out.mu = detail::moment_rows(sk.chart, y);

  // Full (x, y)-gradient of every component by central differences,
  // marching the chart for the x-directions.
  std::vector<Mat> dmu(2 * d);  // dmu[k] = d(mu)/d(coordinate k), n x 3
  for (int k = 0; k < d; ++k) {
    Vec xp = sk.chart.x, xm = sk.chart.x;
    xp[k] += step;
    xm[k] -= step;
    const Mat mp = detail::moment_rows(embed(f, invert_chart(f, xp, sk.chart.w).w), y);
    const Mat mm = detail::moment_rows(embed(f, invert_chart(f, xm, sk.chart.w).w), y);
    dmu[k] = (mp - mm) / (2.0 * step);
  }
  for (int k = 0; k < d; ++k) {
    Vec yp = y, ym = y;
    yp[k] += step;
    ym[k] -= step;
    const Mat mp = detail::moment_rows(sk.chart, yp);
    const Mat mm = detail::moment_rows(sk.chart, ym);
    dmu[d + k] = (mp - mm) / (2.0 * step);
    if (k < n)
      out.equivariance_residual =
          std::max(out.equivariance_residual, (mp - mm).cwiseAbs().maxCoeff());
  }

  const std::array<const Mat*, 3> sigma{&grams[0], &grams[1], &grams[2]};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < 3; ++i) {
      // iota(U_j) sigma_i with U_j = -d/dy_j is the column of the Gram
      // matrix at the y_j slot.
      const Vec expected = kSignVector.moment[i] * sigma[i]->col(d + j);
      for (int k = 0; k < 2 * d; ++k)
        out.diff_residual =
            std::max(out.diff_residual, std::abs(dmu[k](j, i) - expected[k]));
    }
  return out;
}

/// |Laplacian| of p = (u, v, t) -> Re F(c_1 (u+iv), ..., c_n (u+iv)),
/// computed by pushing second-order real jets in the three slot
/// variables through complex arithmetic; the real and imaginary parts
/// propagate independently, so the cancellation is a live check.
inline double harmonic_residual(const PrepotentialExpr& f, const Vec& c,
                                const Vec& p) {
  require_same_size(c.size(), f.vars(), "harmonic_residual");
  require_same_size(p.size(), 3, "harmonic_residual");
  const RJet u = RJet::variable(p[0], 0, 3, 2);
  const RJet v = RJet::variable(p[1], 1, 3, 2);
  std::vector<CRJet> vars;
  vars.reserve(f.vars());
  for (int j = 0; j < f.vars(); ++j) vars.push_back({c[j] * u, c[j] * v});
  const CRJet val = eval_expr(f.root(), vars, [](const cplx& z) {
    return CRJet{RJet::constant(z.real(), 3, 2), RJet::constant(z.imag(), 3, 2)};
  });
  return std::abs(val.re.hess(0, 0) + val.re.hess(1, 1) + val.re.hess(2, 2));
}

struct HKPotential {
  double K = 0.0;           // Re F - sum_{k<=n} x_k xi_k
  double K_plus_phi = 0.0;  // constant (zero in this phi gauge)
};

inline HKPotential hk_potential_check(const PrepotentialExpr& f, const CVec& w) {
  const ChartPoint p = embed(f, w);
  const int n = p.n();
  HKPotential out;
  out.K = f(w).real() - p.x.head(n).dot(p.xi.head(n));
  out.K_plus_phi = out.K + p.phi;
  return out;
}

/// In the J1-holomorphic coordinates z = x + iy the mixed Hessian of the
/// (y-independent) potential phi is g/4.  Recompute that Hessian from
/// the holomorphic Hessian alone (Schur form of (dxi/dparam)(dx/dparam)^{-1})
/// and compare with the sigma1 coefficients, factor included.
inline double j1_potential_residual(const PrepotentialExpr& f, const CVec& w,
                                    const Vec& y) {
  const SKPoint sk = sk_point(f, w);
  require_same_size(y.size(), 2 * sk.n(), "j1_potential_residual");
  const Mat re = sk.chart.tau.real(), im = sk.chart.tau.imag();
  Eigen::FullPivLU<Mat> lu(re);
  if (!lu.isInvertible())
    throw SingularJacobian("Re(tau) singular in j1_potential_residual");
  const Mat re_inv = lu.inverse();
  const int n = sk.n();
  Mat hess(2 * n, 2 * n);
  hess.topLeftCorner(n, n) = re_inv;
  hess.topRightCorner(n, n) = re_inv * im;
  hess.bottomLeftCorner(n, n) = im * re_inv;
  hess.bottomRightCorner(n, n) = im * re_inv * im + re;
  return 0.25 * (hess - sk.g).cwiseAbs().maxCoeff();
}

/// d(Re F)/d(xi_j) = x_j for j <= n, by central differences of Re F in
/// the Re w_j direction (xi_j at fixed x_{n+j}).
inline double legendre_coords_residual(const PrepotentialExpr& f, const CVec& w,
                                       double step = 1e-4) {
  const ChartPoint p = embed(f, w);
  double worst = 0.0;
  for (int j = 0; j < p.n(); ++j) {
    CVec wp = w, wm = w;
    wp[j] += step;
    wm[j] -= step;
    const double fd = (f(wp).real() - f(wm).real()) / (2.0 * step);
    worst = std::max(worst, std::abs(fd - p.x[j]));
  }
  return worst;
}

}  // namespace skgeo
