#pragma once

// Batch verification runner, signature scanner and fixture exporter.
//
// Sampling is materialized up front from a seeded generator, so reports
// are bit-identical for a fixed config regardless of thread count (the
// wall_time_ms field is the one run-dependent quantity).  Aggregation
// after the parallel map is sequential and order-fixed.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "skgeo/hyperkahler.hpp"

namespace skgeo {

inline constexpr int kReportSchemaVersion = 1;

struct RunConfig {
  std::string prepotential = "quad_plus";  // builtin name or expression text
  int n = 1;
  std::vector<Interval> domain;  // (re1, im1, re2, ...); empty = default
  int samples = 200;
  std::uint64_t seed = 1;
  double fd_step = 1e-4;  // gradient checks; exterior-derivative checks use 10x
  std::map<std::string, double> tol_overrides;
  std::string format = "json";
  std::string output;  // empty = stdout
  int quadrature_panels = 100;
  int threads = 0;  // 0 = hardware concurrency; not part of the report

  PrepotentialExpr expr() const {
    return is_builtin_prepotential(prepotential)
               ? builtin_prepotential(prepotential, n)
               : parse_prepotential(prepotential, n);
  }

  std::vector<Interval> resolved_domain() const {
    if (domain.empty()) return default_domain(prepotential, n);
    return domain;
  }

  void validate() const {
    if (n < 1) throw Error("config: n must be >= 1");
    if (samples < 1) throw Error("config: samples must be >= 1");
    if (fd_step <= 0) throw Error("config: fd_step must be positive");
    if (quadrature_panels < 1) throw Error("config: quadrature panels must be >= 1");
    if (format != "json" && format != "csv")
      throw Error("config: format must be 'json' or 'csv'");
    const auto box = resolved_domain();
    if (static_cast<int>(box.size()) != 2 * n)
      throw Error("config: domain must provide 2n intervals");
    for (const Interval& iv : box)
      if (!(iv.hi >= iv.lo)) throw Error("config: empty domain interval");
    for (const auto& [name, tol] : tol_overrides)
      if (!(tol > 0)) throw Error("config: tolerance for '" + name + "' must be > 0");
  }
};

struct CheckResult {
  std::string name;
  long points_evaluated = 0;
  double max_abs_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct FailureRecord {
  std::string check;
  CVec w;
  double residual = 0.0;
};

/// Fixed order and default tolerances of the verification suite.  The
/// dnabla_i / sigma_closedness bounds are the measured suprema of the
/// second-order central-difference truncation at step 1e-3 over every
/// builtin domain box (the identities themselves are exact; see the
/// step-halving checks).
inline const std::vector<std::pair<std::string, double>>& check_defaults() {
  static const std::vector<std::pair<std::string, double>> defaults = {
      {"bilagrangian_r1", 1e-10},
      {"bilagrangian_r2", 1e-10},
      {"g_symmetry", 1e-9},
      {"i_squared", 1e-9},
      {"i_metric_compat", 1e-9},
      {"omega_compat", 1e-9},
      {"g_from_omega_i", 1e-10},
      {"type_one_zero", 1e-9},
      {"signature_constant", 0.5},
      {"dnabla_i", 5e-4},
      {"hamiltonian_field", 1e-5},
      {"kahler_potential", 1e-4},
      {"legendre_grad", 1e-5},
      {"xi_recovery_endpoint", 1e-6},
      {"xi_recovery_path", 1e-6},
      {"quaternion", 1e-9},
      {"metric_consistency", 1e-9},
      {"g_definiteness", 0.5},
      {"sigma_closedness", 5e-4},
      {"moment_map_diff", 1e-5},
      {"moment_map_equivariance", 1e-15},
      {"harmonicity", 1e-10},
      {"k_plus_phi_variance", 1e-18},
      {"df_dxi", 1e-5},
  };
  return defaults;
}

struct VerificationReport {
  RunConfig config;
  SignVector signs;
  std::vector<CheckResult> checks;
  std::vector<FailureRecord> failures;
  double wall_time_ms = 0.0;
  int schema_version = kReportSchemaVersion;
  bool all_points_singular = false;  // run-level condition, exit code 3

  bool passed() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }

  nlohmann::json to_json() const;
  std::string to_csv() const;
  std::string render() const {
    return config.format == "csv" ? to_csv() : to_json().dump(2) + "\n";
  }
};

namespace detail {

class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return (rng_() >> 11) * 0x1.0p-53; }
  double in(const Interval& iv) { return iv.lo + (iv.hi - iv.lo) * uniform(); }

 private:
  std::mt19937_64 rng_;
};

struct SamplePoint {
  CVec w;
  Vec y;   // 2n fibre coordinates
  Vec c;   // harmonic line coefficients
  Vec p3;  // harmonic base point
};

inline std::vector<SamplePoint> materialize_samples(const RunConfig& cfg,
                                                    const std::vector<Interval>& box) {
  SampleStream rs(cfg.seed);
  std::vector<SamplePoint> points(cfg.samples);
  const int n = cfg.n;
  for (SamplePoint& pt : points) {
    pt.w = CVec(n);
    for (int j = 0; j < n; ++j) {
      const double re = rs.in(box[2 * j]);
      const double im = rs.in(box[2 * j + 1]);
      pt.w[j] = cplx(re, im);
    }
    pt.y = Vec(2 * n);
    for (int k = 0; k < 2 * n; ++k) pt.y[k] = rs.in({-1.0, 1.0});
    pt.c = Vec(n);
    for (int k = 0; k < n; ++k) pt.c[k] = rs.in({-2.0, 2.0});
    pt.p3 = Vec(3);
    for (int k = 0; k < 3; ++k) pt.p3[k] = rs.in({-2.0, 2.0});
  }
  return points;
}

template <class F>
void parallel_for(long count, int threads, F&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (;;) {
          const long i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread& th : pool) th.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

struct PointEval {
  bool core_ok = false;
  bool harmonic_ok = false;
  double bila_r1 = 0, bila_r2 = 0, g_sym = 0, i_sq = 0, i_g = 0, om_compat = 0,
         g_from_oi = 0, type10 = 0, dnabla = 0, hamilton = 0, kahler = 0,
         leg_grad = 0, quat = 0, metric_cons = 0, closed = 0, mm_diff = 0,
         mm_equiv = 0, harmonic = 0, df_dxi = 0, k_plus_phi = 0;
  int sig_pos = 0, sig_neg = 0;
  int g_def_mismatch = 0;
};

inline void eval_point(const PrepotentialExpr& f, const SymplecticSpace& space,
                       const SamplePoint& pt, double fd_grad, double fd_ext,
                       PointEval& out) {
  const int n = f.vars();
  const Mat omega = space.omega();
  try {
    const auto res = bilagrangian_residual(space, tangent_frame(f, pt.w));
    out.bila_r1 = res.r1;
    out.bila_r2 = res.r2;
    if (!res.transversal_x || !res.transversal_xi)
      throw SingularJacobian("frame not transversal");

    const SKPoint sk = sk_point(f, pt.w);
    const Mat id = Mat::Identity(2 * n, 2 * n);
    out.g_sym = sk.g_asym;
    out.i_sq = (sk.I * sk.I + id).cwiseAbs().maxCoeff();
    out.i_g = (sk.I.transpose() * sk.g * sk.I - sk.g).cwiseAbs().maxCoeff();
    out.om_compat =
        (sk.I.transpose() * omega * sk.I - omega).cwiseAbs().maxCoeff();
    out.g_from_oi = (omega * sk.I - sk.g).cwiseAbs().maxCoeff();
    out.sig_pos = sk.sig_pos;
    out.sig_neg = sk.sig_neg;

    out.type10 = holomorphic_coords(f, pt.w).type_residual;
    out.dnabla = dnabla_I_residual(f, pt.w, fd_ext);
    out.hamilton = hamiltonian_field_check(f, pt.w, fd_grad);
    out.kahler = kahler_potential_residual(f, pt.w, fd_ext);
    out.leg_grad = legendre_dual(f, pt.w, fd_grad).grad_residual;

    const HKFrame hk = hk_frame(f, pt.w, pt.y);
    out.quat = quaternion_residual(hk);
    out.metric_cons = metric_consistency_residual(hk);
    {
      Eigen::SelfAdjointEigenSolver<Mat> es(hk.G, Eigen::EigenvaluesOnly);
      int gp = 0, gn = 0;
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        (es.eigenvalues()[i] > 0 ? gp : gn)++;
      out.g_def_mismatch =
          std::abs(gp - 2 * sk.sig_pos) + std::abs(gn - 2 * sk.sig_neg);
    }
    out.closed = closedness_residual(f, pt.w, fd_ext);
    const MomentMap mm = moment_map(f, pt.w, pt.y, fd_grad);
    out.mm_diff = mm.diff_residual;
    out.mm_equiv = mm.equivariance_residual;
    out.k_plus_phi = hk_potential_check(f, pt.w).K_plus_phi;
    out.df_dxi = legendre_coords_residual(f, pt.w, fd_grad);
    out.core_ok = true;
  } catch (const Error&) {
    out.core_ok = false;  // singular / degenerate / out of domain: skipped
  }
  try {
    out.harmonic = harmonic_residual(f, pt.c, pt.p3);
    out.harmonic_ok = true;
  } catch (const Error&) {
    out.harmonic_ok = false;
  }
}

struct XiRecoveryChecks {
  long points = 0;
  double endpoint = 0.0;
  double path = 0.0;
  std::optional<CVec> worst_w;
};

/// Two polylines with equal endpoints: the x-image of a straight
/// w-segment and of a quadratic Bezier bent toward the box center.
inline XiRecoveryChecks xi_recovery_checks(const PrepotentialExpr& f,
                                           const std::vector<Interval>& box,
                                           const CVec& wa, const CVec& wb,
                                           int panels) {
  const int n = f.vars();
  CVec ctrl = 0.5 * (wa + wb);
  for (int j = 0; j < n; ++j) {
    const double cre = 0.5 * (box[2 * j].lo + box[2 * j].hi);
    const double cim = 0.5 * (box[2 * j + 1].lo + box[2 * j + 1].hi);
    const double hre = 0.5 * (box[2 * j].hi - box[2 * j].lo);
    const double him = 0.5 * (box[2 * j + 1].hi - box[2 * j + 1].lo);
    const double dre = (cre >= ctrl[j].real() ? 1.0 : -1.0) * 0.2 * hre;
    const double dim = (cim >= ctrl[j].imag() ? 1.0 : -1.0) * 0.2 * him;
    ctrl[j] += cplx(dre, dim);
  }
  const int segments = 8;
  auto x_path = [&](bool bent) {
    std::vector<Vec> path;
    path.reserve(segments + 1);
    for (int k = 0; k <= segments; ++k) {
      const double t = static_cast<double>(k) / segments;
      CVec w = bent ? CVec((1 - t) * (1 - t) * wa + 2 * t * (1 - t) * ctrl +
                           t * t * wb)
                    : CVec((1 - t) * wa + t * wb);
      path.push_back(embed(f, w).x);
    }
    return path;
  };
  const XiRecovery direct = recover_xi(f, x_path(false), wa, panels);
  const XiRecovery bent = recover_xi(f, x_path(true), wa, panels);
  XiRecoveryChecks out;
  out.points = 2;
  out.endpoint = std::max(direct.mismatch, bent.mismatch);
  out.path = (direct.xi_end_estimate - bent.xi_end_estimate).cwiseAbs().maxCoeff();
  out.worst_w = wa;
  return out;
}

inline nlohmann::json cvec_to_json(const CVec& w) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index j = 0; j < w.size(); ++j)
    arr.push_back({w[j].real(), w[j].imag()});
  return arr;
}

inline nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v.size(); ++j) arr.push_back(v[j]);
  return arr;
}

inline nlohmann::json mat_to_json(const Mat& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    arr.push_back(std::move(row));
  }
  return arr;
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json dom = nlohmann::json::array();
  for (const Interval& iv : cfg.resolved_domain()) dom.push_back({iv.lo, iv.hi});
  nlohmann::json tols = nlohmann::json::object();
  for (const auto& [k, v] : cfg.tol_overrides) tols[k] = v;
  return {{"prepotential", cfg.prepotential},
          {"n", cfg.n},
          {"domain", std::move(dom)},
          {"samples", cfg.samples},
          {"seed", cfg.seed},
          {"fd_step", cfg.fd_step},
          {"quadrature_panels", cfg.quadrature_panels},
          {"tol_overrides", std::move(tols)},
          {"format", cfg.format}};
}

inline nlohmann::json signs_to_json(const SignVector& s) {
  return {{"sigma2", s.sigma2},
          {"sigma3", s.sigma3},
          {"moment", {s.moment[0], s.moment[1], s.moment[2]}},
          {"metric", s.metric}};
}

}  // namespace detail

inline nlohmann::json VerificationReport::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const CheckResult& c : checks)
    checks_json.push_back({{"name", c.name},
                           {"points_evaluated", c.points_evaluated},
                           {"max_abs_residual", c.max_abs_residual},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
  nlohmann::json failures_json = nlohmann::json::array();
  for (const FailureRecord& fr : failures)
    failures_json.push_back({{"check", fr.check},
                             {"w", detail::cvec_to_json(fr.w)},
                             {"residual", fr.residual}});
  return {{"config", detail::config_to_json(config)},
          {"sign_vector", detail::signs_to_json(signs)},
          {"checks", std::move(checks_json)},
          {"failures", std::move(failures_json)},
          {"wall_time_ms", wall_time_ms},
          {"schema_version", schema_version}};
}

inline std::string VerificationReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "# skgeo verification report, schema_version=" << schema_version << "\n";
  os << "# prepotential=" << config.prepotential << ", n=" << config.n
     << ", samples=" << config.samples << ", seed=" << config.seed
     << ", fd_step=" << config.fd_step << "\n";
  os << "# sign_vector: sigma2=" << signs.sigma2 << " sigma3=" << signs.sigma3
     << " moment=" << signs.moment[0] << "," << signs.moment[1] << ","
     << signs.moment[2] << " metric=" << signs.metric << "\n";
  os << "check,points_evaluated,max_abs_residual,tolerance,pass\n";
  for (const CheckResult& c : checks)
    os << c.name << "," << c.points_evaluated << "," << c.max_abs_residual << ","
       << c.tolerance << "," << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

inline VerificationReport run_verify(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate();
  const PrepotentialExpr f = cfg.expr();
  const auto box = cfg.resolved_domain();
  const SymplecticSpace space = standard_space(cfg.n);
  const double fd_grad = cfg.fd_step;
  const double fd_ext = 10.0 * cfg.fd_step;

  const auto points = detail::materialize_samples(cfg, box);
  std::vector<detail::PointEval> evals(points.size());
  detail::parallel_for(
      static_cast<long>(points.size()), cfg.threads, [&](long i) {
        detail::eval_point(f, space, points[i], fd_grad, fd_ext, evals[i]);
      });

  // Sequential, order-fixed reductions.
  VerificationReport report;
  report.config = cfg;
  report.signs = kSignVector;

  long core_count = 0, harmonic_count = 0;
  for (const auto& e : evals) {
    core_count += e.core_ok;
    harmonic_count += e.harmonic_ok;
  }
  report.all_points_singular = core_count == 0;

  std::map<std::string, double> tol;
  for (const auto& [name, def] : check_defaults()) tol[name] = def;
  for (const auto& [name, val] : cfg.tol_overrides) {
    if (!tol.count(name)) throw Error("unknown check in tolerance override: " + name);
    tol[name] = val;
  }

  auto add_check = [&](const std::string& name, long pts, double residual,
                       std::optional<CVec> worst_w) {
    CheckResult c{name, pts, residual, tol.at(name), residual < tol.at(name)};
    if (!c.pass && worst_w)
      report.failures.push_back({name, *worst_w, residual});
    report.checks.push_back(std::move(c));
  };

  auto reduce_core = [&](const std::string& name, auto field) {
    double worst = 0.0;
    std::optional<CVec> worst_w;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (!evals[i].core_ok) continue;
      const double r = field(evals[i]);
      if (r >= worst) {
        worst = r;
        worst_w = points[i].w;
      }
    }
    add_check(name, core_count, worst, worst_w);
  };

  using PE = detail::PointEval;
  reduce_core("bilagrangian_r1", [](const PE& e) { return e.bila_r1; });
  reduce_core("bilagrangian_r2", [](const PE& e) { return e.bila_r2; });
  reduce_core("g_symmetry", [](const PE& e) { return e.g_sym; });
  reduce_core("i_squared", [](const PE& e) { return e.i_sq; });
  reduce_core("i_metric_compat", [](const PE& e) { return e.i_g; });
  reduce_core("omega_compat", [](const PE& e) { return e.om_compat; });
  reduce_core("g_from_omega_i", [](const PE& e) { return e.g_from_oi; });
  reduce_core("type_one_zero", [](const PE& e) { return e.type10; });

  {  // distinct signatures among evaluated points, minus one
    std::vector<std::pair<int, int>> seen;
    std::optional<CVec> first_w;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (!evals[i].core_ok) continue;
      if (!first_w) first_w = points[i].w;
      std::pair<int, int> sig{evals[i].sig_pos, evals[i].sig_neg};
      if (std::find(seen.begin(), seen.end(), sig) == seen.end()) seen.push_back(sig);
    }
    const double distinct = seen.empty() ? 0.0 : static_cast<double>(seen.size() - 1);
    add_check("signature_constant", core_count, distinct, first_w);
  }

  reduce_core("dnabla_i", [](const PE& e) { return e.dnabla; });
  reduce_core("hamiltonian_field", [](const PE& e) { return e.hamilton; });
  reduce_core("kahler_potential", [](const PE& e) { return e.kahler; });
  reduce_core("legendre_grad", [](const PE& e) { return e.leg_grad; });

  {  // xi recovery between the first two evaluable points
    detail::XiRecoveryChecks xi;
    std::vector<const CVec*> ok;
    for (std::size_t i = 0; i < evals.size() && ok.size() < 2; ++i)
      if (evals[i].core_ok) ok.push_back(&points[i].w);
    if (ok.size() == 2) {
      try {
        xi = detail::xi_recovery_checks(f, box, *ok[0], *ok[1],
                                        cfg.quadrature_panels);
      } catch (const Error&) {
        xi = {};  // path left the chart: counted as not evaluated
      }
    }
    add_check("xi_recovery_endpoint", xi.points, xi.endpoint, xi.worst_w);
    add_check("xi_recovery_path", xi.points, xi.path, xi.worst_w);
  }

  reduce_core("quaternion", [](const PE& e) { return e.quat; });
  reduce_core("metric_consistency", [](const PE& e) { return e.metric_cons; });
  reduce_core("g_definiteness",
              [](const PE& e) { return static_cast<double>(e.g_def_mismatch); });
  reduce_core("sigma_closedness", [](const PE& e) { return e.closed; });
  reduce_core("moment_map_diff", [](const PE& e) { return e.mm_diff; });
  reduce_core("moment_map_equivariance", [](const PE& e) { return e.mm_equiv; });

  {  // harmonicity over its own evaluable subset
    double worst = 0.0;
    std::optional<CVec> worst_w;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      if (!evals[i].harmonic_ok) continue;
      if (evals[i].harmonic >= worst) {
        worst = evals[i].harmonic;
        worst_w = points[i].w;
      }
    }
    add_check("harmonicity", harmonic_count, worst, worst_w);
  }

  {  // population variance of K + phi
    double sum = 0.0;
    for (const auto& e : evals)
      if (e.core_ok) sum += e.k_plus_phi;
    const double mean = core_count ? sum / core_count : 0.0;
    double var = 0.0;
    for (const auto& e : evals)
      if (e.core_ok) var += (e.k_plus_phi - mean) * (e.k_plus_phi - mean);
    if (core_count) var /= core_count;
    add_check("k_plus_phi_variance", core_count, var, std::nullopt);
  }

  reduce_core("df_dxi", [](const PE& e) { return e.df_dxi; });

  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return report;
}

// ---------------------------------------------------------------------------
// Signature scan over a parameter grid.

struct ScanRow {
  CVec w;
  Vec x;
  bool transversal = false;
  bool degenerate = false;
  double det_g = std::numeric_limits<double>::quiet_NaN();
  Vec eigenvalues;  // empty when not transversal
  int sig_pos = 0, sig_neg = 0;
};

struct ScanTable {
  RunConfig config;
  std::vector<ScanRow> rows;

  nlohmann::json to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const ScanRow& r : rows) {
      nlohmann::json row{{"w", detail::cvec_to_json(r.w)},
                         {"x", detail::vec_to_json(r.x)},
                         {"transversal", r.transversal},
                         {"degenerate", r.degenerate}};
      if (r.transversal) {
        row["det_g"] = r.det_g;
        row["eigenvalues"] = detail::vec_to_json(r.eigenvalues);
        row["signature"] = {r.sig_pos, r.sig_neg};
      } else {
        row["det_g"] = nullptr;
        row["eigenvalues"] = nullptr;
        row["signature"] = nullptr;
      }
      rows_json.push_back(std::move(row));
    }
    return {{"config", detail::config_to_json(config)},
            {"schema_version", kReportSchemaVersion},
            {"rows", std::move(rows_json)}};
  }

  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    const int n = config.n;
    os << "# skgeo signature scan, schema_version=" << kReportSchemaVersion << "\n";
    for (int j = 1; j <= n; ++j) os << "w_re" << j << ",w_im" << j << ",";
    for (int j = 1; j <= 2 * n; ++j) os << "x" << j << ",";
    os << "det_g,";
    for (int j = 1; j <= 2 * n; ++j) os << "eig" << j << ",";
    os << "sig_pos,sig_neg,transversal,degenerate\n";
    for (const ScanRow& r : rows) {
      for (int j = 0; j < n; ++j) os << r.w[j].real() << "," << r.w[j].imag() << ",";
      for (int j = 0; j < 2 * n; ++j) os << r.x[j] << ",";
      if (r.transversal) {
        os << r.det_g << ",";
        for (int j = 0; j < 2 * n; ++j) os << r.eigenvalues[j] << ",";
        os << r.sig_pos << "," << r.sig_neg << ",";
      } else {
        os << "nan,";
        for (int j = 0; j < 2 * n; ++j) os << "nan,";
        os << "nan,nan,";
      }
      os << (r.transversal ? "true" : "false") << ","
         << (r.degenerate ? "true" : "false") << "\n";
    }
    return os.str();
  }

  std::string render() const {
    return config.format == "csv" ? to_csv() : to_json().dump(2) + "\n";
  }
};

/// Grid evaluation of the chart metric: w, x, det g, eigenvalues,
/// signature and the transversality flag, row-major over the axes with
/// the last axis fastest.  Rows at singular points are marked, never
/// dropped.
inline ScanTable run_scan(const RunConfig& cfg, std::vector<int> grid) {
  cfg.validate();
  const auto box = cfg.resolved_domain();
  const int axes = 2 * cfg.n;
  if (grid.size() == 1) grid.assign(axes, grid[0]);
  if (static_cast<int>(grid.size()) != axes)
    throw Error("scan: need one grid count per axis (or a single count)");
  long total = 1;
  for (int c : grid) {
    if (c < 2) throw Error("scan: grid must be >= 2 per axis");
    total *= c;
  }

  const PrepotentialExpr f = cfg.expr();
  ScanTable table;
  table.config = cfg;
  table.rows.resize(total);

  detail::parallel_for(total, cfg.threads, [&](long index) {
    ScanRow& row = table.rows[index];
    // Decode the row-major multi-index.
    std::vector<int> idx(axes);
    long rest = index;
    for (int a = axes - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % grid[a]);
      rest /= grid[a];
    }
    CVec w(cfg.n);
    for (int j = 0; j < cfg.n; ++j) {
      const Interval& re = box[2 * j];
      const Interval& im = box[2 * j + 1];
      const double a = re.lo + (re.hi - re.lo) * idx[2 * j] / (grid[2 * j] - 1);
      const double b =
          im.lo + (im.hi - im.lo) * idx[2 * j + 1] / (grid[2 * j + 1] - 1);
      w[j] = cplx(a, b);
    }
    row.w = w;
    try {
      const ChartPoint p = embed(f, w);
      row.x = p.x;
      auto [ajac, bjac] = detail::chart_jacobians(p.tau);
      Eigen::FullPivLU<Mat> lu(ajac.transpose());
      if (!lu.isInvertible()) return;  // marked: transversal stays false
      const Mat g_raw = lu.solve(bjac.transpose()).transpose();
      const Mat g = 0.5 * (g_raw + g_raw.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
      row.transversal = true;
      row.det_g = g.determinant();
      row.eigenvalues = es.eigenvalues();
      const double threshold = 1e-8 * row.eigenvalues.cwiseAbs().maxCoeff();
      for (int i = 0; i < row.eigenvalues.size(); ++i) {
        if (std::abs(row.eigenvalues[i]) <= threshold)
          row.degenerate = true;
        else
          (row.eigenvalues[i] > 0 ? row.sig_pos : row.sig_neg)++;
      }
    } catch (const Error&) {
      row.x = Vec::Constant(axes, std::numeric_limits<double>::quiet_NaN());
    }
  });
  return table;
}

// ---------------------------------------------------------------------------
// Fixture export: per-point chart data in a stable, versioned schema for
// regression tests and cross-language oracles.

inline nlohmann::json export_fixture(const RunConfig& cfg,
                                     const std::vector<CVec>& points) {
  cfg.validate();
  const PrepotentialExpr f = cfg.expr();
  nlohmann::json records = nlohmann::json::array();
  for (const CVec& w : points) {
    const SKPoint sk = sk_point(f, w);
    const auto hc = holomorphic_coords(f, w);
    const auto pot = hk_potential_check(f, w);
    const CubicForm theta = cubic_form(f, w);
    const int n = sk.n();
    nlohmann::json theta_json = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      nlohmann::json plane = nlohmann::json::array();
      for (int j = 0; j < n; ++j) {
        nlohmann::json line = nlohmann::json::array();
        for (int k = 0; k < n; ++k)
          line.push_back({theta(i, j, k).real(), theta(i, j, k).imag()});
        plane.push_back(std::move(line));
      }
      theta_json.push_back(std::move(plane));
    }
    records.push_back({{"w", detail::cvec_to_json(w)},
                       {"x", detail::vec_to_json(sk.chart.x)},
                       {"xi", detail::vec_to_json(sk.chart.xi)},
                       {"phi", sk.chart.phi},
                       {"g", detail::mat_to_json(sk.g)},
                       {"I", detail::mat_to_json(sk.I)},
                       {"z", detail::cvec_to_json(hc.z)},
                       {"K", pot.K},
                       {"theta", std::move(theta_json)}});
  }
  return {{"schema_version", kReportSchemaVersion},
          {"prepotential", cfg.prepotential},
          {"n", cfg.n},
          {"sign_vector", detail::signs_to_json(kSignVector)},
          {"records", std::move(records)}};
}

/// CSV rendering of a fixture document (flattened row per record).
inline std::string fixture_to_csv(const nlohmann::json& doc) {
  std::ostringstream os;
  os.precision(17);
  const int n = doc.at("n").get<int>();
  os << "# skgeo fixture, schema_version=" << doc.at("schema_version") << "\n";
  for (int j = 1; j <= n; ++j) os << "w_re" << j << ",w_im" << j << ",";
  for (int j = 1; j <= 2 * n; ++j) os << "x" << j << ",";
  for (int j = 1; j <= 2 * n; ++j) os << "xi" << j << ",";
  os << "phi,";
  for (int i = 1; i <= 2 * n; ++i)
    for (int j = 1; j <= 2 * n; ++j) os << "g" << i << j << ",";
  for (int i = 1; i <= 2 * n; ++i)
    for (int j = 1; j <= 2 * n; ++j) os << "I" << i << j << ",";
  for (int j = 1; j <= 2 * n; ++j) os << "z_re" << j << ",z_im" << j << ",";
  os << "K";
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
        os << ",theta_re" << i << j << k << ",theta_im" << i << j << k;
  os << "\n";
  for (const auto& rec : doc.at("records")) {
    for (const auto& c : rec.at("w"))
      os << c[0].get<double>() << "," << c[1].get<double>() << ",";
    for (const auto& v : rec.at("x")) os << v.get<double>() << ",";
    for (const auto& v : rec.at("xi")) os << v.get<double>() << ",";
    os << rec.at("phi").get<double>() << ",";
    for (const auto& row : rec.at("g"))
      for (const auto& v : row) os << v.get<double>() << ",";
    for (const auto& row : rec.at("I"))
      for (const auto& v : row) os << v.get<double>() << ",";
    for (const auto& c : rec.at("z"))
      os << c[0].get<double>() << "," << c[1].get<double>() << ",";
    os << rec.at("K").get<double>();
    for (const auto& plane : rec.at("theta"))
      for (const auto& line : plane)
        for (const auto& c : line)
          os << "," << c[0].get<double>() << "," << c[1].get<double>();
    os << "\n";
  }
  return os.str();
}

}  // namespace skgeo
