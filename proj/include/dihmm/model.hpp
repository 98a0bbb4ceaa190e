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
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dihmm/gaussian.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double log_or_zero(double p) { return p > 0.0 ? std::log(p) : kLogZero; }

enum class Variant { kHsmm, kDihmm };

inline std::string variant_name(Variant v) {
  return v == Variant::kHsmm ? "hsmm" : "dihmm";
}

inline Variant variant_from_name(const std::string& s) {
  if (s == "hsmm") return Variant::kHsmm;
  if (s == "dihmm") return Variant::kDihmm;
  throw DataError("unknown variant '" + s + "'");
}

// Joint transition table over (state, duration) pairs, dense over
// M * D_cap source and target cells. Cells never observed stay 0.
struct TransitionTable {
  int num_states = 0;
  int d_cap = 0;
  std::vector<double> p;  // row major: [source pair][target pair]

  TransitionTable() = default;
  TransitionTable(int m, int dcap)
      : num_states(m), d_cap(dcap),
        p(static_cast<std::size_t>(m) * dcap * m * dcap, 0.0) {}

  int pair_index(int state, int duration) const {
    return state * d_cap + (duration - 1);
  }
  int num_pairs() const { return num_states * d_cap; }

  double at(int from_state, int from_dur, int to_state, int to_dur) const {
    return p[static_cast<std::size_t>(pair_index(from_state, from_dur)) *
                 num_pairs() +
             pair_index(to_state, to_dur)];
  }
  double& at(int from_state, int from_dur, int to_state, int to_dur) {
    return p[static_cast<std::size_t>(pair_index(from_state, from_dur)) *
                 num_pairs() +
             pair_index(to_state, to_dur)];
  }

  double row_sum(int from_state, int from_dur) const {
    const std::size_t row =
        static_cast<std::size_t>(pair_index(from_state, from_dur)) * num_pairs();
    double sum = 0.0;
    for (int j = 0; j < num_pairs(); ++j) sum += p[row + j];
    return sum;
  }

  friend bool operator==(const TransitionTable& a, const TransitionTable& b) = default;
};

// Per-state categorical distribution over the alphabet. The gap symbol is
// never emitted by a state; its column is always 0.
struct EmissionTable {
  int num_states = 0;
  int num_symbols = 0;
  std::vector<double> p;  // row major: [state][symbol]

  EmissionTable() = default;
  EmissionTable(int m, int k)
      : num_states(m), num_symbols(k),
        p(static_cast<std::size_t>(m) * k, 0.0) {}

  double at(int state, int symbol) const {
    return p[static_cast<std::size_t>(state) * num_symbols + symbol];
  }
  double& at(int state, int symbol) {
    return p[static_cast<std::size_t>(state) * num_symbols + symbol];
  }

  friend bool operator==(const EmissionTable& a, const EmissionTable& b) = default;
};

// Decode result. log_likelihood uses natural log; -inf marks a sequence the
// model cannot explain at all. `normalized` is only filled by classify()
// when score normalization across a model set is requested.
struct Score {
  double log_likelihood = kLogZero;
  std::optional<double> normalized;
  std::optional<SegmentSequence> best_path;

  bool impossible() const { return std::isinf(log_likelihood) && log_likelihood < 0; }
};

using StatePair = std::pair<int, int>;  // (from_state, to_state)

// Full parameter set of a trained model: transition and emission tables,
// initial distribution over (state, duration) and, for the interval-aware
// variant, one truncated Gaussian per observed ordered state pair.
struct DihmmModel {
  Variant variant = Variant::kDihmm;
  std::string label;
  Alphabet alphabet;
  int num_states = 0;  // M
  int d_cap = 0;
  std::vector<double> pi;  // dense over M * D_cap (state, duration) pairs
  TransitionTable trans;
  EmissionTable emit;
  std::map<StatePair, IntervalModel> intervals;
  double theta_pt = 1e-4;
  double c = 0.5;
  double sigma_floor = 0.5;

  double pi_at(int state, int duration) const {
    return pi[static_cast<std::size_t>(state) * d_cap + (duration - 1)];
  }
  double& pi_at(int state, int duration) {
    return pi[static_cast<std::size_t>(state) * d_cap + (duration - 1)];
  }

  const IntervalModel* interval_for(int from_state, int to_state) const {
    auto it = intervals.find({from_state, to_state});
    return it == intervals.end() ? nullptr : &it->second;
  }

  // Smallest in-support density over every trained pair; the basis of the
  // out-of-range fallback.
  double min_interval_density() const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [pair, m] : intervals) {
      const double d = m.min_support_density();
      if (d < best) best = d;
    }
    return best;
  }

  friend bool operator==(const DihmmModel& a, const DihmmModel& b) = default;
};

// Interval probability for a transition from `from_state` to `to_state`
// separated by `length` ticks. In-support lengths take the pair's density;
// anything else falls back to the global minimum in-support density
// attenuated by c.
inline double interval_prob(const DihmmModel& model, int from_state,
                            int to_state, int length) {
  if (model.intervals.empty())
    throw UntrainedIntervalError(
        "model '" + model.label + "': no interval model trained");
  const IntervalModel* m = model.interval_for(from_state, to_state);
  if (m != nullptr && m->in_support(length)) return m->pdf(length);
  return model.min_interval_density() * model.c;
}

namespace detail {
inline bool close_to_one(double x) { return std::abs(x - 1.0) <= 1e-9; }
}  // namespace detail

// Checks every structural invariant of a model; throws ModelError naming the
// offending field. Called after training and after deserialization.
inline void validate_model(const DihmmModel& model) {
  model.alphabet.validate();
  if (model.num_states < 1) throw ModelError("M", "must be >= 1");
  if (model.d_cap < 1) throw ModelError("D_cap", "must be >= 1");
  if (!(model.c >= 0.0 && model.c <= 1.0))
    throw ModelError("c", "must lie in [0, 1]");
  if (!(model.theta_pt > 0.0)) throw ModelError("theta_pt", "must be > 0");
  if (!(model.sigma_floor > 0.0)) throw ModelError("sigma_floor", "must be > 0");

  if (static_cast<int>(model.pi.size()) != model.num_states * model.d_cap)
    throw ModelError("pi", "wrong size");
  double pi_sum = 0.0;
  for (double v : model.pi) {
    if (v < 0.0 || v > 1.0) throw ModelError("pi", "entry outside [0, 1]");
    pi_sum += v;
  }
  if (!detail::close_to_one(pi_sum))
    throw ModelError("pi", "sums to " + std::to_string(pi_sum) + ", expected 1");

  if (model.trans.num_states != model.num_states || model.trans.d_cap != model.d_cap)
    throw ModelError("trans", "dimension mismatch");
  for (double v : model.trans.p)
    if (v < 0.0 || v > 1.0) throw ModelError("trans", "entry outside [0, 1]");
  for (int m = 0; m < model.num_states; ++m)
    for (int d = 1; d <= model.d_cap; ++d) {
      const double sum = model.trans.row_sum(m, d);
      if (sum > 0.0 && !detail::close_to_one(sum))
        throw ModelError("trans",
                         "row (" + std::to_string(m) + "," + std::to_string(d) +
                             ") sums to " + std::to_string(sum));
    }

  if (model.emit.num_states != model.num_states ||
      model.emit.num_symbols != model.alphabet.size())
    throw ModelError("emit", "dimension mismatch");
  for (int m = 0; m < model.num_states; ++m) {
    double sum = 0.0;
    for (int k = 0; k < model.emit.num_symbols; ++k) {
      const double v = model.emit.at(m, k);
      if (v < 0.0 || v > 1.0) throw ModelError("emit", "entry outside [0, 1]");
      sum += v;
    }
    if (!detail::close_to_one(sum))
      throw ModelError("emit", "row " + std::to_string(m) + " sums to " +
                                   std::to_string(sum));
    if (model.emit.at(m, model.alphabet.gap_id) != 0.0)
      throw ModelError("emit", "state " + std::to_string(m) +
                                   " emits the gap symbol");
  }

  for (const auto& [pair, im] : model.intervals) {
    const std::string name = "intervals(" + std::to_string(pair.first) + "," +
                             std::to_string(pair.second) + ")";
    if (pair.first < 0 || pair.first >= model.num_states || pair.second < 0 ||
        pair.second >= model.num_states)
      throw ModelError(name, "state out of range");
    if (!(im.sigma > 0.0)) throw ModelError(name, "sigma must be > 0");
    if (im.sigma + 1e-12 < model.sigma_floor)
      throw ModelError(name, "sigma below sigma_floor");
    if (im.x_lo < 0 || im.x_hi < im.x_lo) throw ModelError(name, "bad support");
    if (im.pdf(im.x_lo) < model.theta_pt || im.pdf(im.x_hi) < model.theta_pt)
      throw ModelError(name, "support edge below theta_pt");
    if (im.x_lo > 0 && im.pdf(im.x_lo - 1) >= model.theta_pt)
      throw ModelError(name, "support does not extend to theta_pt on the left");
    if (im.pdf(im.x_hi + 1) >= model.theta_pt)
      throw ModelError(name, "support does not extend to theta_pt on the right");
  }
}

}  // namespace dihmm
