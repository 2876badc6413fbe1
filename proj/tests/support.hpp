#pragma once

#include <random>
#include <vector>

#include "skgeo/expression.hpp"

namespace skgeo_test {

// Deterministic sampler over a domain box (re1, im1, re2, ...).
class BoxSampler {
 public:
  explicit BoxSampler(std::uint64_t seed) : rng_(seed) {}

  skgeo::CVec draw(const std::vector<skgeo::Interval>& box) {
    const int n = static_cast<int>(box.size()) / 2;
    skgeo::CVec w(n);
    for (int j = 0; j < n; ++j) {
      const double re = in(box[2 * j]);
      const double im = in(box[2 * j + 1]);
      w[j] = skgeo::cplx(re, im);
    }
    return w;
  }

  double in(const skgeo::Interval& iv) {
    return iv.lo + (iv.hi - iv.lo) * ((rng_() >> 11) * 0x1.0p-53);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace skgeo_test
