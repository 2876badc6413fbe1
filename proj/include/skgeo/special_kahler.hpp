#pragma once

// Special pseudo-Kahler structure on a prepotential chart: Hessian
// metric g, complex structure I = omega^{-1} g, flat-coordinate and
// potential identities, the Legendre dual, and recovery of xi by
// integrating the closed 1-forms alpha_k = sum_l omega_{kl} I^l_j dx_j.
//
// g is computed from the chart as (dxi/dparam)(dx/dparam)^{-1}; its
// symmetry is then a genuine consequence of the graph being Lagrangian
// for Omega1, and is reported as a residual before symmetrization.

#include <utility>
#include <vector>

#include "skgeo/chart.hpp"
#include "skgeo/common.hpp"

namespace skgeo {

struct SKPoint {
  ChartPoint chart;
  Mat g;         // symmetric 2n x 2n
  Mat I;         // omega^{-1} g
  double g_asym; // asymmetry of the raw solve, before symmetrization
  int sig_pos, sig_neg;

  int n() const { return chart.n(); }
};

struct NewtonOptions {
  double target = 1e-11;  // accepted residual (infinity norm)
  double tight = 1e-13;   // stop polishing below this
  int max_iterations = 50;
  int max_halvings = 20;
  // A solution is certified only if the Jacobian's LU pivot ratio at
  // the accepted point stays above this; a fold of the chart (the
  // non-transversal locus) drives the ratio to ~1e-8 before the
  // residual underflows, so 1e-7 separates folds from merely
  // ill-conditioned charts.
  double min_pivot_ratio = 1e-7;
};

struct InvertResult {
  CVec w;
  int iterations = 0;
  double residual = 0.0;
};

namespace detail {

inline double linf(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

/// Damped Newton for x(w) = target (xi_mode = false) or xi(w) = target
/// (xi_mode = true), over the real parameters of w.
inline InvertResult newton_invert(const PrepotentialExpr& f, const Vec& target,
                                  const CVec& guess, bool xi_mode,
                                  const NewtonOptions& opts) {
  const int n = f.vars();
  require_same_size(target.size(), 2 * n, "newton_invert");
  require_same_size(guess.size(), n, "newton_invert");

  CVec w = guess;
  ChartPoint p = embed(f, w);
  Vec r = (xi_mode ? p.xi : p.x) - target;
  double rn = linf(r);
  int iterations = 0;

  while (rn >= opts.tight && iterations < opts.max_iterations) {
    auto [a, b] = chart_jacobians(p.tau);
    Eigen::FullPivLU<Mat> lu(xi_mode ? b : a);
    if (!lu.isInvertible())
      throw SingularJacobian("chart Jacobian singular during Newton iteration");
    const Vec delta = lu.solve(r);
    if (!delta.allFinite())
      throw SingularJacobian("chart Jacobian solve produced non-finite step");

    double step = 1.0;
    int halvings = 0;
    bool improved = false;
    while (!improved) {
      CVec w_try = w;
      for (int j = 0; j < n; ++j)
        w_try[j] -= step * cplx(delta[j], delta[n + j]);
      bool usable = true;
      ChartPoint p_try;
      try {
        p_try = embed(f, w_try);
      } catch (const DomainError&) {
        usable = false;
      }
      if (usable) {
        const Vec r_try = (xi_mode ? p_try.xi : p_try.x) - target;
        const double rn_try = linf(r_try);
        if (rn_try < rn) {
          w = w_try;
          p = std::move(p_try);
          r = r_try;
          rn = rn_try;
          improved = true;
          break;
        }
      }
      if (++halvings > opts.max_halvings) break;
      step *= 0.5;
    }
    if (!improved) {
      if (rn < opts.target) break;  // stalled but already acceptable
      throw NoConvergence("Newton stalled at residual " + std::to_string(rn));
    }
    ++iterations;
  }

  if (rn >= opts.target)
    throw NoConvergence("Newton iteration budget exhausted at residual " +
                        std::to_string(rn));

  {
    auto [a, b] = chart_jacobians(p.tau);
    Eigen::FullPivLU<Mat> lu(xi_mode ? b : a);
    const Vec pivots = lu.matrixLU().diagonal().cwiseAbs();
    if (!lu.isInvertible() ||
        pivots.minCoeff() < opts.min_pivot_ratio * pivots.maxCoeff())
      throw SingularJacobian(
          "chart Jacobian nearly singular at the Newton solution "
          "(non-transversal point)");
  }
  return {std::move(w), iterations, rn};
}

}  // namespace detail

/// Solve x(w) = x_target by damped Newton from the supplied guess.
inline InvertResult invert_chart(const PrepotentialExpr& f, const Vec& x_target,
                                 const CVec& w_guess,
                                 const NewtonOptions& opts = {}) {
  return detail::newton_invert(f, x_target, w_guess, false, opts);
}

/// Solve xi(w) = xi_target (the dual projection).
inline InvertResult invert_xi_chart(const PrepotentialExpr& f,
                                    const Vec& xi_target, const CVec& w_guess,
                                    const NewtonOptions& opts = {}) {
  return detail::newton_invert(f, xi_target, w_guess, true, opts);
}

inline SKPoint sk_point(const PrepotentialExpr& f, const CVec& w) {
  ChartPoint p = embed(f, w);
  const int n = p.n();
  auto [a, b] = detail::chart_jacobians(p.tau);
  Eigen::FullPivLU<Mat> lu(a.transpose());
  if (!lu.isInvertible())
    throw SingularJacobian("chart not transversal: dx/dparam is singular");
  const Mat g_raw = lu.solve(b.transpose()).transpose();

  SKPoint sk;
  sk.chart = std::move(p);
  sk.g_asym = (g_raw - g_raw.transpose()).cwiseAbs().maxCoeff();
  sk.g = 0.5 * (g_raw + g_raw.transpose());
  sk.I = standard_omega_inv(n) * sk.g;

  Eigen::SelfAdjointEigenSolver<Mat> es(sk.g, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  const double threshold = 1e-8 * ev.cwiseAbs().maxCoeff();
  sk.sig_pos = sk.sig_neg = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= threshold)
      throw DegenerateMetric("metric eigenvalue " + std::to_string(ev[i]) +
                             " below the zero-classification threshold");
    (ev[i] > 0 ? sk.sig_pos : sk.sig_neg)++;
  }
  return sk;
}

/// Jacobian of the Hamiltonian field a = omega^{-1} dphi against I,
/// with the Jacobian taken by central differences through the chart.
inline double hamiltonian_field_check(const PrepotentialExpr& f, const CVec& w,
                                      double step = 1e-4) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  const Mat winv = standard_omega_inv(sk.n());
  Mat jac(d, d);
  for (int k = 0; k < d; ++k) {
    Vec xp = sk.chart.x, xm = sk.chart.x;
    xp[k] += step;
    xm[k] -= step;
    const CVec wp = invert_chart(f, xp, sk.chart.w).w;
    const CVec wm = invert_chart(f, xm, sk.chart.w).w;
    const Vec ap = winv * embed(f, wp).xi;
    const Vec am = winv * embed(f, wm).xi;
    jac.col(k) = (ap - am) / (2.0 * step);
  }
  return (jac - sk.I).cwiseAbs().maxCoeff();
}

/// Flat-coordinate exterior derivative of I: the worst antisymmetric
/// part of d_m I^j_k over index pairs (m, k), by central differences in
/// the x-chart.
inline double dnabla_I_residual(const PrepotentialExpr& f, const CVec& w,
                                double step = 1e-3) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  std::vector<Mat> di(d);
  for (int m = 0; m < d; ++m) {
    Vec xp = sk.chart.x, xm = sk.chart.x;
    xp[m] += step;
    xm[m] -= step;
    const Mat ip = sk_point(f, invert_chart(f, xp, sk.chart.w).w).I;
    const Mat im = sk_point(f, invert_chart(f, xm, sk.chart.w).w).I;
    di[m] = (ip - im) / (2.0 * step);
  }
  double worst = 0.0;
  for (int m = 0; m < d; ++m)
    for (int k = 0; k < m; ++k)
      worst = std::max(worst, (di[m].col(k) - di[k].col(m)).cwiseAbs().maxCoeff());
  return worst;
}

struct HolomorphicCoords {
  CVec z;                    // z_j = x_j - i sum_k omega^{jk} xi_k
  double type_residual = 0;  // worst |dz_j(I V) - i dz_j(V)| over basis V
};

inline HolomorphicCoords holomorphic_coords(const PrepotentialExpr& f,
                                            const CVec& w) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  const Mat winv = standard_omega_inv(sk.n());
  HolomorphicCoords out;
  out.z = sk.chart.x.cast<cplx>() - cplx(0, 1) * (winv * sk.chart.xi).cast<cplx>();
  // dz has rows Id - iI on the chart; test type (1,0) on the coordinate
  // basis.
  const CMat dz = CMat::Identity(d, d) - cplx(0, 1) * sk.I.cast<cplx>();
  const CMat defect = dz * sk.I.cast<cplx>() - cplx(0, 1) * dz;
  out.type_residual = defect.cwiseAbs().maxCoeff();
  return out;
}

/// Exterior derivative of beta = I dphi (with (I alpha)_j = I^i_j alpha_i)
/// against -omega: returns the worst entry of d(beta) + 2 omega, the
/// factor 2 matching the all-ordered-pairs Gram convention.  Exact for
/// quadratic prepotentials, which fixes the sign convention.
inline double kahler_potential_residual(const PrepotentialExpr& f, const CVec& w,
                                        double step = 1e-3) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  const Mat omega = standard_omega(sk.n());
  auto beta_at = [&](const Vec& x) -> Vec {
    const SKPoint s = sk_point(f, invert_chart(f, x, sk.chart.w).w);
    return s.I.transpose() * s.chart.xi;
  };
  std::vector<Vec> dbeta(d);
  for (int k = 0; k < d; ++k) {
    Vec xp = sk.chart.x, xm = sk.chart.x;
    xp[k] += step;
    xm[k] -= step;
    dbeta[k] = (beta_at(xp) - beta_at(xm)) / (2.0 * step);
  }
  double worst = 0.0;
  for (int k = 0; k < d; ++k)
    for (int j = 0; j < d; ++j)
      worst = std::max(worst,
                       std::abs(dbeta[k][j] - dbeta[j][k] + 2.0 * omega(k, j)));
  return worst;
}

struct LegendreDual {
  double phi_star = 0.0;      // sum_j x_j xi_j - phi
  double grad_residual = 0.0; // worst |d(phi*)/d(xi_j) - x_j|
};

inline LegendreDual legendre_dual(const PrepotentialExpr& f, const CVec& w,
                                  double step = 1e-4) {
  const SKPoint sk = sk_point(f, w);
  const int d = 2 * sk.n();
  auto phi_star_at = [&](const CVec& wp) {
    const ChartPoint p = embed(f, wp);
    return p.x.dot(p.xi) - p.phi;
  };
  LegendreDual out;
  out.phi_star = sk.chart.x.dot(sk.chart.xi) - sk.chart.phi;
  for (int j = 0; j < d; ++j) {
    Vec xip = sk.chart.xi, xim = sk.chart.xi;
    xip[j] += step;
    xim[j] -= step;
    const double fp = phi_star_at(invert_xi_chart(f, xip, sk.chart.w).w);
    const double fm = phi_star_at(invert_xi_chart(f, xim, sk.chart.w).w);
    out.grad_residual = std::max(
        out.grad_residual, std::abs((fp - fm) / (2.0 * step) - sk.chart.x[j]));
  }
  return out;
}

struct XiRecovery {
  Vec xi_end_estimate;
  double mismatch = 0.0;  // against direct evaluation at the endpoint
  CVec w_end;
};

/// Integrate alpha = g dx along a polyline of x-points by composite
/// Simpson quadrature, Newton-marching the chart along the way.
inline XiRecovery recover_xi(const PrepotentialExpr& f,
                             const std::vector<Vec>& path, const CVec& w_guess,
                             int panels_per_segment = 100) {
  if (path.size() < 2) throw Error("recover_xi: path needs at least two points");
  if (panels_per_segment < 1) throw Error("recover_xi: need at least one panel");

  CVec w_cur = invert_chart(f, path.front(), w_guess).w;
  Vec acc = embed(f, w_cur).xi;

  auto g_times = [&](const Vec& x, const Vec& dx) -> Vec {
    w_cur = invert_chart(f, x, w_cur).w;
    return sk_point(f, w_cur).g * dx;
  };

  for (std::size_t s = 0; s + 1 < path.size(); ++s) {
    const Vec& xa = path[s];
    const Vec& xb = path[s + 1];
    const Vec dx = xb - xa;
    const double h = 1.0 / panels_per_segment;
    Vec integral = Vec::Zero(dx.size());
    Vec f_prev = g_times(xa, dx);
    for (int p = 0; p < panels_per_segment; ++p) {
      const double t0 = p * h;
      const Vec f_mid = g_times(xa + (t0 + 0.5 * h) * dx, dx);
      const Vec f_end = g_times(xa + (t0 + h) * dx, dx);
      integral += (h / 6.0) * (f_prev + 4.0 * f_mid + f_end);
      f_prev = f_end;
    }
    acc += integral;
  }

  XiRecovery out;
  out.xi_end_estimate = acc;
  out.w_end = invert_chart(f, path.back(), w_cur).w;
  out.mismatch = (acc - embed(f, out.w_end).xi).cwiseAbs().maxCoeff();
  return out;
}

}  // namespace skgeo
