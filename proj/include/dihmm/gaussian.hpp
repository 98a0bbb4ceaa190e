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

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "dihmm/error.hpp"

namespace dihmm {

// Gaussian density (1/sqrt(2*pi*sigma^2)) * exp(-(x-mu)^2 / (2*sigma^2)).
inline double gaussian_pdf(double x, double mu, double sigma) {
  if (!(sigma > 0.0))
    throw InvalidParameterError("gaussian_pdf: sigma must be > 0, got " +
                                std::to_string(sigma));
  static constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  const double z = (x - mu) / sigma;
  return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

struct IntervalSupport {
  int x_lo = 0;
  int x_hi = 0;
};

// Largest contiguous integer range around round(mu) where the density stays
// at or above theta_pt, clipped to nonnegative ticks. The scan starts at the
// rounded mean and walks outward until the density drops below the floor.
inline IntervalSupport truncate_support(double mu, double sigma,
                                        double theta_pt) {
  if (!(theta_pt > 0.0))
    throw InvalidParameterError("truncate_support: theta_pt must be > 0");
  const double peak = gaussian_pdf(mu, mu, sigma);
  if (theta_pt >= peak)
    throw EmptySupportError(
        "truncate_support: theta_pt " + std::to_string(theta_pt) +
        " >= peak density " + std::to_string(peak));
  const int center = static_cast<int>(std::llround(mu));
  if (gaussian_pdf(center, mu, sigma) < theta_pt)
    throw EmptySupportError(
        "truncate_support: no integer tick reaches theta_pt");
  IntervalSupport s{center, center};
  while (s.x_lo > 0 && gaussian_pdf(s.x_lo - 1, mu, sigma) >= theta_pt)
    --s.x_lo;
  while (gaussian_pdf(s.x_hi + 1, mu, sigma) >= theta_pt) ++s.x_hi;
  if (s.x_lo < 0) s.x_lo = 0;
  if (s.x_hi < 0)
    throw EmptySupportError("truncate_support: support entirely negative");
  return s;
}

// Truncated Gaussian over the interval length between one ordered state
// pair. The support is fixed at fit time; outside it the model contributes
// nothing and callers fall back to the global minimum density times c.
struct IntervalModel {
  double mu = 0.0;
  double sigma = 1.0;
  int x_lo = 0;
  int x_hi = 0;
  std::int64_t sample_count = 0;

  bool in_support(int length) const { return length >= x_lo && length <= x_hi; }

  double pdf(int length) const { return gaussian_pdf(length, mu, sigma); }

  // Smallest density attained on the integer support.
  double min_support_density() const {
    const double lo = pdf(x_lo);
    const double hi = pdf(x_hi);
    return lo < hi ? lo : hi;
  }

  friend bool operator==(const IntervalModel& a, const IntervalModel& b) = default;
};

// Fits the truncated Gaussian for one state pair from its interval samples.
inline IntervalModel fit_interval_model(double mu, double sigma,
                                        double theta_pt,
                                        std::int64_t sample_count) {
  IntervalModel m;
  m.mu = mu;
  m.sigma = sigma;
  m.sample_count = sample_count;
  const IntervalSupport s = truncate_support(mu, sigma, theta_pt);
  m.x_lo = s.x_lo;
  m.x_hi = s.x_hi;
  return m;
}

}  // namespace dihmm
