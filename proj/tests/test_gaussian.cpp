// Copyright 2026 The dihmm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "dihmm/gaussian.hpp"
#include "dihmm/rng.hpp"

using namespace dihmm;

TEST_CASE("gaussian_pdf closed-form values") {
  // Peak of the unit Gaussian and the one-sigma point.
  CHECK(gaussian_pdf(2.0, 2.0, 1.0) == Catch::Approx(0.3989422804014327).margin(1e-12));
  CHECK(gaussian_pdf(3.0, 2.0, 1.0) == Catch::Approx(0.2419707245191434).margin(1e-12));
  // Independently evaluated with 40-digit arithmetic.
  CHECK(gaussian_pdf(0.0, 4.0, 2.0) == Catch::Approx(0.026995483256594022).margin(1e-12));
}

TEST_CASE("gaussian_pdf rejects non-positive sigma") {
  CHECK_THROWS_AS(gaussian_pdf(0.0, 0.0, 0.0), InvalidParameterError);
  CHECK_THROWS_AS(gaussian_pdf(0.0, 0.0, -1.0), InvalidParameterError);
}

TEST_CASE("gaussian_pdf symmetry and peak") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double mu = rng.uniform() * 20.0 - 10.0;
    const double sigma = 0.5 + rng.uniform() * 5.0;
    const double d = rng.uniform() * 8.0;
    const double left = gaussian_pdf(mu - d, mu, sigma);
    const double right = gaussian_pdf(mu + d, mu, sigma);
    CHECK(left == Catch::Approx(right).margin(1e-15));
    CHECK(gaussian_pdf(mu, mu, sigma) >= left);
    CHECK(left > 0.0);
  }
}

TEST_CASE("gaussian_pdf on a parameter grid matches direct evaluation") {
  for (double mu : {-3.0, 0.0, 1.5, 7.0})
    for (double sigma : {0.5, 1.0, 2.5})
      for (double x = -10.0; x <= 10.0; x += 0.5) {
        const double expected = std::exp(-(x - mu) * (x - mu) / (2 * sigma * sigma)) /
                                std::sqrt(2.0 * M_PI * sigma * sigma);
        CHECK(gaussian_pdf(x, mu, sigma) == Catch::Approx(expected).margin(1e-12));
      }
}

namespace {

// Reference: scan a generous integer range and keep ticks at or above the
// floor.
std::pair<int, int> scan_support(double mu, double sigma, double theta) {
  int lo = 1 << 30, hi = -(1 << 30);
  for (int x = 0; x <= 1000; ++x)
    if (gaussian_pdf(x, mu, sigma) >= theta) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  return {lo, hi};
}

}  // namespace

TEST_CASE("truncate_support examples") {
  const IntervalSupport a = truncate_support(2.0, 1.0, 0.24);
  CHECK(a.x_lo == 1);
  CHECK(a.x_hi == 3);

  CHECK_THROWS_AS(truncate_support(2.0, 1.0, 0.5), EmptySupportError);

  // Left edge clamped at zero; pinned by the integer scan oracle.
  const auto expected = scan_support(0.0, 1.0, 0.05);
  const IntervalSupport b = truncate_support(0.0, 1.0, 0.05);
  CHECK(b.x_lo == expected.first);
  CHECK(b.x_hi == expected.second);
  CHECK(b.x_lo == 0);
  CHECK(b.x_hi == 2);
}

TEST_CASE("truncate_support edges straddle the floor") {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const double mu = rng.uniform() * 10.0;
    const double sigma = 0.3 + rng.uniform() * 3.0;
    const double peak = gaussian_pdf(mu, mu, sigma);
    const double theta = peak * (0.001 + 0.9 * rng.uniform());
    IntervalSupport s;
    try {
      s = truncate_support(mu, sigma, theta);
    } catch (const EmptySupportError&) {
      continue;  // rounding can leave no integer above the floor
    }
    CHECK(gaussian_pdf(s.x_lo, mu, sigma) >= theta);
    CHECK(gaussian_pdf(s.x_hi, mu, sigma) >= theta);
    if (s.x_lo > 0) CHECK(gaussian_pdf(s.x_lo - 1, mu, sigma) < theta);
    CHECK(gaussian_pdf(s.x_hi + 1, mu, sigma) < theta);

    const auto scanned = scan_support(mu, sigma, theta);
    CHECK(s.x_lo == scanned.first);
    CHECK(s.x_hi == scanned.second);
  }
}

TEST_CASE("truncate_support shrinks monotonically in theta") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const double mu = rng.uniform() * 8.0;
    const double sigma = 0.3 + rng.uniform() * 2.0;
    const double peak = gaussian_pdf(mu, mu, sigma);
    double t1 = peak * (0.001 + 0.4 * rng.uniform());
    double t2 = peak * (0.001 + 0.9 * rng.uniform());
    if (t1 > t2) std::swap(t1, t2);
    IntervalSupport wide, narrow;
    try {
      wide = truncate_support(mu, sigma, t1);
      narrow = truncate_support(mu, sigma, t2);
    } catch (const EmptySupportError&) {
      continue;
    }
    CHECK(narrow.x_lo >= wide.x_lo);
    CHECK(narrow.x_hi <= wide.x_hi);
  }
}

TEST_CASE("fit_interval_model carries support and samples") {
  const IntervalModel m = fit_interval_model(2.0, 1.0, 0.24, 7);
  CHECK(m.x_lo == 1);
  CHECK(m.x_hi == 3);
  CHECK(m.sample_count == 7);
  CHECK(m.in_support(2));
  CHECK_FALSE(m.in_support(4));
  CHECK(m.min_support_density() ==
        Catch::Approx(gaussian_pdf(1.0, 2.0, 1.0)).margin(1e-15));
}
