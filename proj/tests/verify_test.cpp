#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "skgeo/verify.hpp"

using namespace skgeo;

TEST_CASE("run_verify on quad_plus passes every check") {
  RunConfig cfg;
  cfg.prepotential = "quad_plus";
  cfg.n = 2;
  cfg.samples = 50;
  cfg.seed = 2718;
  VerificationReport rep = run_verify(cfg);
  for (const CheckResult& c : rep.checks) {
    INFO(c.name << " residual " << c.max_abs_residual << " tol " << c.tolerance);
    CHECK(c.pass);
  }
  CHECK(rep.passed());
  CHECK_FALSE(rep.all_points_singular);
}

TEST_CASE("run_verify on the mirrored cubic branch") {
  RunConfig cfg;
  cfg.prepotential = "cubic";
  cfg.n = 1;
  cfg.domain = {{-2.0, -0.5}, {-1.0, 1.0}};
  cfg.samples = 50;
  cfg.seed = 99;
  VerificationReport rep = run_verify(cfg);
  CHECK(rep.passed());
  // The xi_1 < 0 branch carries the opposite-signature metric; the
  // suite reports it as computed.
  RunConfig scan_cfg = cfg;
  ScanTable t = run_scan(scan_cfg, {4});
  for (const ScanRow& r : t.rows) {
    REQUIRE(r.transversal);
    CHECK(r.sig_pos == 0);
    CHECK(r.sig_neg == 2);
  }
}

TEST_CASE("report schema") {
  RunConfig cfg;
  cfg.prepotential = "quad_minus";
  cfg.n = 1;
  cfg.samples = 5;
  VerificationReport rep = run_verify(cfg);

  SECTION("every suite check appears exactly once") {
    std::multiset<std::string> names;
    for (const CheckResult& c : rep.checks) names.insert(c.name);
    CHECK(names.size() == check_defaults().size());
    for (const auto& [name, tol] : check_defaults()) {
      CHECK(names.count(name) == 1);
    }
  }
  SECTION("pass iff residual under tolerance") {
    for (const CheckResult& c : rep.checks)
      CHECK(c.pass == (c.max_abs_residual < c.tolerance));
  }
  SECTION("top-level json keys") {
    nlohmann::json j = rep.to_json();
    for (const char* key : {"config", "sign_vector", "checks", "failures",
                            "wall_time_ms", "schema_version"})
      CHECK(j.contains(key));
    CHECK(j["schema_version"] == 1);
    CHECK(j["sign_vector"]["sigma3"] == -1);
    CHECK(j["checks"].size() == check_defaults().size());
  }
  SECTION("csv rendering lists every check") {
    RunConfig c2 = cfg;
    c2.format = "csv";
    VerificationReport rep2 = run_verify(c2);
    const std::string csv = rep2.render();
    for (const auto& [name, tol] : check_defaults())
      CHECK(csv.find(name) != std::string::npos);
  }
}

TEST_CASE("tolerance overrides") {
  RunConfig cfg;
  cfg.prepotential = "cubic";
  cfg.n = 1;
  cfg.samples = 5;
  // The FD-based residual is genuinely nonzero, so this must fail.
  cfg.tol_overrides["hamiltonian_field"] = 1e-300;
  VerificationReport rep = run_verify(cfg);
  bool found = false;
  for (const CheckResult& c : rep.checks)
    if (c.name == "hamiltonian_field") {
      found = true;
      CHECK_FALSE(c.pass);
      CHECK(c.tolerance == 1e-300);
    }
  REQUIRE(found);
  CHECK_FALSE(rep.passed());
  // Failing checks record their worst point.
  bool failure_recorded = false;
  for (const FailureRecord& fr : rep.failures)
    if (fr.check == "hamiltonian_field") failure_recorded = true;
  CHECK(failure_recorded);

  RunConfig bad = cfg;
  bad.tol_overrides.clear();
  bad.tol_overrides["not_a_check"] = 1.0;
  CHECK_THROWS_AS(run_verify(bad), Error);
}

TEST_CASE("invalid configs are rejected") {
  RunConfig cfg;
  cfg.prepotential = "w1^^2";
  cfg.n = 1;
  CHECK_THROWS_AS(cfg.expr(), ParseError);

  RunConfig zero = cfg;
  zero.prepotential = "quad_plus";
  zero.samples = 0;
  CHECK_THROWS_AS(run_verify(zero), Error);

  RunConfig badfmt = zero;
  badfmt.samples = 1;
  badfmt.format = "xml";
  CHECK_THROWS_AS(run_verify(badfmt), Error);
}

TEST_CASE("all-points-singular is reported distinctly") {
  RunConfig cfg;
  cfg.prepotential = "cubic";
  cfg.n = 1;
  // Entirely on the non-transversal locus Re w1 = 0.
  cfg.domain = {{0.0, 0.0}, {-1.0, 1.0}};
  cfg.samples = 3;
  VerificationReport rep = run_verify(cfg);
  CHECK(rep.all_points_singular);
  for (const CheckResult& c : rep.checks)
    if (c.name == "bilagrangian_r1") CHECK(c.points_evaluated == 0);
}

TEST_CASE("determinism across thread counts") {
  RunConfig cfg;
  cfg.prepotential = "cubic";
  cfg.n = 1;
  cfg.samples = 40;
  cfg.seed = 123456789;
  cfg.threads = 1;
  VerificationReport a = run_verify(cfg);
  cfg.threads = 4;
  VerificationReport b = run_verify(cfg);
  nlohmann::json ja = a.to_json(), jb = b.to_json();
  ja.erase("wall_time_ms");
  jb.erase("wall_time_ms");
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("signature scan") {
  SECTION("cubic grid has unit determinant and definite signature") {
    RunConfig cfg;
    cfg.prepotential = "cubic";
    cfg.n = 1;
    ScanTable t = run_scan(cfg, {20, 20});
    REQUIRE(t.rows.size() == 400);
    for (const ScanRow& r : t.rows) {
      REQUIRE(r.transversal);
      CHECK_FALSE(r.degenerate);
      CHECK(r.det_g == Catch::Approx(1.0).margin(1e-9));
      CHECK(r.sig_pos == 2);
      CHECK(r.sig_neg == 0);
    }
  }
  SECTION("quad_minus grid is negative definite") {
    RunConfig cfg;
    cfg.prepotential = "quad_minus";
    cfg.n = 1;
    ScanTable t = run_scan(cfg, {3, 3});
    for (const ScanRow& r : t.rows) {
      CHECK(r.sig_pos == 0);
      CHECK(r.sig_neg == 2);
    }
  }
  SECTION("grid touching the singular locus marks rows") {
    RunConfig cfg;
    cfg.prepotential = "cubic";
    cfg.n = 1;
    cfg.domain = {{0.0, 2.0}, {-1.0, 1.0}};
    ScanTable t = run_scan(cfg, {5, 3});
    int marked = 0;
    for (const ScanRow& r : t.rows)
      if (!r.transversal || r.degenerate) ++marked;
    CHECK(marked == 3);  // the Re w1 = 0 grid line
    CHECK(t.rows.size() == 15);
    // CSV keeps the marked rows.
    const std::string csv = t.to_csv();
    CHECK(csv.find("false") != std::string::npos);
  }
  SECTION("grid validation") {
    RunConfig cfg;
    cfg.prepotential = "quad_plus";
    cfg.n = 1;
    CHECK_THROWS_AS(run_scan(cfg, {1, 5}), Error);
    CHECK_THROWS_AS(run_scan(cfg, {2, 2, 2}), Error);
  }
}

TEST_CASE("fixture export") {
  SECTION("cubic canonical point") {
    RunConfig cfg;
    cfg.prepotential = "cubic";
    cfg.n = 1;
    CVec w(1);
    w << cplx(1, 2);
    nlohmann::json doc = export_fixture(cfg, {w});
    REQUIRE(doc["records"].size() == 1);
    const auto& rec = doc["records"][0];
    CHECK(rec["x"][0].get<double>() == Catch::Approx(-3.0).margin(1e-12));
    CHECK(rec["x"][1].get<double>() == Catch::Approx(2.0).margin(1e-12));
    CHECK(rec["xi"][0].get<double>() == Catch::Approx(1.0).margin(1e-12));
    CHECK(rec["xi"][1].get<double>() == Catch::Approx(4.0).margin(1e-12));
    CHECK(rec["phi"].get<double>() == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rec["g"][0][0].get<double>() == Catch::Approx(0.5).margin(1e-12));
    CHECK(rec["g"][1][1].get<double>() == Catch::Approx(10.0).margin(1e-12));
    CHECK(rec["I"][0][0].get<double>() == Catch::Approx(-2.0).margin(1e-12));
    CHECK(rec["z"][0][0].get<double>() == Catch::Approx(-3.0).margin(1e-12));
    CHECK(rec["z"][0][1].get<double>() == Catch::Approx(4.0).margin(1e-12));
    CHECK(rec["K"].get<double>() == Catch::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(rec["theta"][0][0][0][0].get<double>() == Catch::Approx(2.0).margin(1e-12));
    // CSV flattening round-trips the header/record shape.
    const std::string csv = fixture_to_csv(doc);
    CHECK(csv.find("theta_re111") != std::string::npos);
  }
  SECTION("quad_plus at w = 1") {
    RunConfig cfg;
    cfg.prepotential = "quad_plus";
    cfg.n = 1;
    CVec w(1);
    w << cplx(1, 0);
    nlohmann::json doc = export_fixture(cfg, {w});
    const auto& rec = doc["records"][0];
    CHECK(rec["x"][0].get<double>() == 1.0);
    CHECK(rec["x"][1].get<double>() == 0.0);
    CHECK(rec["xi"][0].get<double>() == 1.0);
    CHECK(rec["phi"].get<double>() == Catch::Approx(0.5).margin(1e-15));
    CHECK(rec["g"][0][0].get<double>() == Catch::Approx(1.0).margin(1e-14));
    CHECK(rec["g"][0][1].get<double>() == Catch::Approx(0.0).margin(1e-14));
  }
  SECTION("empty point list yields a valid document") {
    RunConfig cfg;
    cfg.prepotential = "quad_plus";
    cfg.n = 1;
    nlohmann::json doc = export_fixture(cfg, {});
    CHECK(doc["records"].is_array());
    CHECK(doc["records"].empty());
    CHECK(doc["schema_version"] == 1);
  }
}
