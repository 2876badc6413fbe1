#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "skgeo/symplectic.hpp"

using namespace skgeo;

namespace {

ProductVector basis_a(int i, int dim) {
  ProductVector v{Vec::Zero(dim), Vec::Zero(dim)};
  v.a[i] = 1.0;
  return v;
}

ProductVector basis_alpha(int i, int dim) {
  ProductVector v{Vec::Zero(dim), Vec::Zero(dim)};
  v.alpha[i] = 1.0;
  return v;
}

std::vector<ProductVector> graph_frame(const Mat& h) {
  const int d = static_cast<int>(h.rows());
  std::vector<ProductVector> frame;
  for (int j = 0; j < d; ++j) {
    ProductVector v{Vec::Zero(d), h.col(j)};
    v.a[j] = 1.0;
    frame.push_back(v);
  }
  return frame;
}

Mat random_symmetric(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Mat h(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) h(i, j) = h(j, i) = u(rng);
  return h;
}

}  // namespace

TEST_CASE("standard symplectic space") {
  SECTION("n=1 block form") {
    SymplecticSpace s = standard_space(1);
    Mat w(2, 2), winv(2, 2);
    w << 0, 1, -1, 0;
    winv << 0, -1, 1, 0;
    CHECK((s.omega() - w).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s.omega_inv() - winv).cwiseAbs().maxCoeff() < 1e-14);
  }
  SECTION("n=2 inverse and antisymmetry") {
    SymplecticSpace s = standard_space(2);
    CHECK((s.omega() * s.omega_inv() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <
          1e-13);
    CHECK((s.omega() + s.omega().transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("construction rejects non-antisymmetric or degenerate forms") {
    Mat bad = Mat::Identity(2, 2);
    CHECK_THROWS_AS(SymplecticSpace(1, bad), Error);
    Mat deg = Mat::Zero(2, 2);
    CHECK_THROWS_AS(SymplecticSpace(1, deg), Error);
  }
}

TEST_CASE("Omega1 evaluation") {
  SECTION("dual pair gives 2") {
    CHECK(eval_Omega1(basis_a(0, 2), basis_alpha(0, 2)) == 2.0);
  }
  SECTION("antisymmetry on equal arguments") {
    ProductVector u{Vec::Random(4), Vec::Random(4)};
    CHECK(eval_Omega1(u, u) == 0.0);
  }
  SECTION("no dx^dx component") {
    CHECK(eval_Omega1(basis_a(0, 2), basis_a(1, 2)) == 0.0);
  }
}

TEST_CASE("Omega2 evaluation") {
  SymplecticSpace s = standard_space(1);
  SECTION("x-block") {
    CHECK(eval_Omega2(s, basis_a(0, 2), basis_a(1, 2)) == 2.0);
  }
  SECTION("xi-block") {
    CHECK(eval_Omega2(s, basis_alpha(0, 2), basis_alpha(1, 2)) == -2.0);
  }
  SECTION("equal arguments vanish") {
    ProductVector u{Vec::Random(2), Vec::Random(2)};
    CHECK(eval_Omega2(s, u, u) == 0.0);
  }
  SECTION("dimension mismatch is an error") {
    CHECK_THROWS_AS(eval_Omega2(s, basis_a(0, 4), basis_a(1, 4)),
                    DimensionMismatch);
  }
}

TEST_CASE("pairing metric") {
  // Polarization identity values.
  CHECK(pairing_metric(basis_a(0, 2), basis_alpha(0, 2)) == 0.5);
  CHECK(pairing_metric(basis_a(0, 2), basis_a(1, 2)) == 0.0);
  ProductVector u{Vec::Zero(2), Vec::Zero(2)};
  u.a[0] = 1.0;
  u.alpha[0] = 1.0;
  CHECK(pairing_metric(u, u) == 1.0);  // u.a . u.alpha
}

TEST_CASE("forms are bilinear and antisymmetric") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  SymplecticSpace s = standard_space(2);
  for (int rep = 0; rep < 50; ++rep) {
    ProductVector u{Vec::Random(4), Vec::Random(4)};
    ProductVector v{Vec::Random(4), Vec::Random(4)};
    ProductVector w{Vec::Random(4), Vec::Random(4)};
    const double l = c(rng);
    ProductVector lin{u.a + l * v.a, u.alpha + l * v.alpha};

    CHECK(std::abs(eval_Omega1(lin, w) - eval_Omega1(u, w) -
                   l * eval_Omega1(v, w)) < 1e-12);
    CHECK(std::abs(eval_Omega1(u, v) + eval_Omega1(v, u)) < 1e-12);
    CHECK(std::abs(eval_Omega2(s, lin, w) - eval_Omega2(s, u, w) -
                   l * eval_Omega2(s, v, w)) < 1e-12);
    CHECK(std::abs(eval_Omega2(s, u, v) + eval_Omega2(s, v, u)) < 1e-12);
  }
}

TEST_CASE("graph frames over symmetric matrices") {
  std::mt19937_64 rng(123);

  SECTION("r1 vanishes exactly for any symmetric H") {
    SymplecticSpace s = standard_space(2);
    for (int rep = 0; rep < 20; ++rep) {
      auto res = bilagrangian_residual(s, graph_frame(random_symmetric(4, rng)));
      CHECK(res.r1 == 0.0);
      CHECK(res.transversal_x);
    }
  }

  SECTION("H = identity solves the compatibility condition at n=1") {
    SymplecticSpace s = standard_space(1);
    auto res = bilagrangian_residual(s, graph_frame(Mat::Identity(2, 2)));
    CHECK(res.r1 == 0.0);
    CHECK(res.r2 < 1e-14);
    CHECK(res.transversal_xi);
  }

  SECTION("r2 = 0 iff (omega^{-1} H)^2 = -I") {
    SymplecticSpace s = standard_space(1);
    // det H = 1 solves the condition at n = 1.
    Mat good(2, 2);
    good << 0.5, 2.0, 2.0, 10.0;
    auto res = bilagrangian_residual(s, graph_frame(good));
    CHECK(res.r2 < 1e-10);
    Mat i2 = s.omega_inv() * good;
    CHECK((i2 * i2 + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);

    for (int rep = 0; rep < 20; ++rep) {
      Mat h = random_symmetric(2, rng);
      Mat ih = s.omega_inv() * h;
      const double defect = (ih * ih + Mat::Identity(2, 2)).cwiseAbs().maxCoeff();
      const double r2 = bilagrangian_residual(s, graph_frame(h)).r2;
      if (defect < 1e-10) {
        CHECK(r2 < 1e-10);
      } else {
        CHECK(r2 > 1e-10);
      }
    }
  }

  SECTION("pairing metric restricted to a graph frame reproduces H") {
    Mat h = random_symmetric(4, rng);
    auto frame = graph_frame(h);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(pairing_metric(frame[i], frame[j]) ==
              Catch::Approx(h(i, j)).margin(1e-14));
  }
}

TEST_CASE("frames with degenerate projections") {
  SymplecticSpace s = standard_space(1);
  SECTION("alpha-parts all zero") {
    std::vector<ProductVector> frame{basis_a(0, 2), basis_a(1, 2)};
    auto res = bilagrangian_residual(s, frame);
    CHECK(res.r2 == 2.0);  // 2 max |omega_ij|
    CHECK_FALSE(res.transversal_xi);
    CHECK(res.transversal_x);
  }
  SECTION("rank-deficient frame is an error") {
    std::vector<ProductVector> frame{basis_a(0, 2), basis_a(0, 2)};
    CHECK_THROWS_AS(bilagrangian_residual(s, frame), RankDeficientFrame);
  }
}
