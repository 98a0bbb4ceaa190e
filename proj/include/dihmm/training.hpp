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
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dihmm/model.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

struct TrainingConfig {
  double smoothing_alpha = 0.0;  // additive smoothing on observed rows
  double sigma_floor = 0.5;      // minimum interval std-dev, in ticks
  double theta_pt = 1e-4;        // density floor truncating interval supports
  double c = 0.5;                // out-of-range interval attenuation
  int d_cap = 32;                // maximum modeled duration
  bool forbid_self_transition = true;

  void validate() const {
    if (smoothing_alpha < 0.0)
      throw InvalidParameterError("smoothing_alpha must be >= 0");
    if (!(theta_pt > 0.0)) throw InvalidParameterError("theta_pt must be > 0");
    if (!(c >= 0.0 && c <= 1.0)) throw InvalidParameterError("c must lie in [0, 1]");
    if (!(sigma_floor > 0.0)) throw InvalidParameterError("sigma_floor must be > 0");
    if (d_cap < 1) throw InvalidParameterError("d_cap must be >= 1");
  }
};

// One labeled training pair: the raw ticks and their segmental reading.
struct TrainingExample {
  TickSequence ticks;
  SegmentSequence segments;
};

// Run-length encodes a tick sequence: every maximal run of one event symbol
// becomes a segment of the corresponding state, gap runs become intervals.
inline SegmentSequence segments_from_ticks(const TickSequence& seq,
                                           const Alphabet& alphabet) {
  seq.validate(alphabet);
  SegmentSequence out;
  int t = 0;
  const int n = seq.length();
  while (t < n) {
    const int sym = seq.ticks[t];
    if (alphabet.is_gap(sym)) {
      ++t;
      continue;
    }
    int end = t + 1;
    while (end < n && seq.ticks[end] == sym) ++end;
    out.segments.push_back({alphabet.state_of_symbol(sym), t, end - t});
    t = end;
  }
  return out;
}

// Inverse of segments_from_ticks: paints each segment with its state's
// event symbol onto a gap-filled canvas of total_ticks ticks.
inline TickSequence render_ticks(const SegmentSequence& segments,
                                 int total_ticks, const Alphabet& alphabet,
                                 std::string id = std::string(),
                                 std::string label = std::string()) {
  segments.validate(total_ticks);
  TickSequence seq;
  seq.id = std::move(id);
  seq.label = std::move(label);
  seq.ticks.assign(total_ticks, alphabet.gap_id);
  for (const Segment& s : segments.segments) {
    const int sym = alphabet.symbol_of_state(s.state);
    for (int t = s.start; t < s.end(); ++t) seq.ticks[t] = sym;
  }
  return seq;
}

namespace detail {

// (count + alpha) / (total + alpha * row_size), or 0 on unobserved rows.
inline void normalize_counts(const std::vector<double>& counts, double total,
                             double alpha, std::vector<double*> cells) {
  if (total <= 0.0) return;
  const double denom = total + alpha * static_cast<double>(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    *cells[i] = (counts[i] + alpha) / denom;
}

inline double sample_mean(const std::vector<int>& xs) {
  double sum = 0.0;
  for (int x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

// Unbiased (n-1) standard deviation; 0 for a single sample.
inline double sample_stddev(const std::vector<int>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = sample_mean(xs);
  double ss = 0.0;
  for (int x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace detail

// Maximum-likelihood fit from fully observed segment sequences: transition,
// emission and initial distributions by counting (plus optional additive
// smoothing over observed rows), interval Gaussians from the per-pair gap
// samples. States are identified with the alphabet's event symbols.
inline DihmmModel fit_model(const std::vector<TrainingExample>& data,
                            const Alphabet& alphabet, const TrainingConfig& cfg,
                            Variant variant, std::string label = std::string()) {
  cfg.validate();
  alphabet.validate();
  if (data.empty()) throw DataError("fit_model: no training data");
  if (alphabet.num_event_symbols() < 1)
    throw DataError("fit_model: alphabet has no event symbols");

  DihmmModel model;
  model.variant = variant;
  model.label = std::move(label);
  model.alphabet = alphabet;
  model.num_states = alphabet.num_event_symbols();
  model.d_cap = cfg.d_cap;
  model.theta_pt = cfg.theta_pt;
  model.c = cfg.c;
  model.sigma_floor = cfg.sigma_floor;

  const int M = model.num_states;
  const int D = model.d_cap;
  const int num_pairs = M * D;

  std::vector<double> pi_counts(num_pairs, 0.0);
  std::vector<double> trans_counts(static_cast<std::size_t>(num_pairs) * num_pairs, 0.0);
  std::vector<double> emit_counts(static_cast<std::size_t>(M) * alphabet.size(), 0.0);
  std::map<StatePair, std::vector<int>> interval_samples;

  for (const TrainingExample& ex : data) {
    ex.ticks.validate(alphabet);
    ex.segments.validate(ex.ticks.length());
    if (ex.segments.empty())
      throw DataError("fit_model: sequence '" + ex.ticks.id + "' has no segments");
    for (int n = 0; n < ex.segments.size(); ++n) {
      const Segment& s = ex.segments.segments[n];
      if (s.state < 0 || s.state >= M)
        throw DataError("fit_model: sequence '" + ex.ticks.id + "' segment " +
                        std::to_string(n) + ": state out of range");
      if (s.duration > D)
        throw DataError("fit_model: sequence '" + ex.ticks.id + "' segment " +
                        std::to_string(n) + ": duration " +
                        std::to_string(s.duration) + " exceeds D_cap " +
                        std::to_string(D));
      for (int t = s.start; t < s.end(); ++t) {
        const int sym = ex.ticks.ticks[t];
        if (alphabet.is_gap(sym))
          throw DataError("fit_model: sequence '" + ex.ticks.id +
                          "': gap tick inside segment " + std::to_string(n));
        emit_counts[static_cast<std::size_t>(s.state) * alphabet.size() + sym] += 1.0;
      }
      if (n == 0) {
        pi_counts[s.state * D + (s.duration - 1)] += 1.0;
      } else {
        const Segment& prev = ex.segments.segments[n - 1];
        if (cfg.forbid_self_transition && prev.state == s.state)
          throw DataError("fit_model: sequence '" + ex.ticks.id +
                          "': self-transition of state " +
                          std::to_string(s.state) +
                          " but forbid_self_transition is set");
        const int src = prev.state * D + (prev.duration - 1);
        const int dst = s.state * D + (s.duration - 1);
        trans_counts[static_cast<std::size_t>(src) * num_pairs + dst] += 1.0;
        interval_samples[{prev.state, s.state}].push_back(ex.segments.interval_before(n));
      }
    }
  }

  // Initial distribution: smoothed over every (state, duration) cell.
  model.pi.assign(num_pairs, 0.0);
  {
    double total = 0.0;
    for (double v : pi_counts) total += v;
    std::vector<double*> cells(num_pairs);
    for (int i = 0; i < num_pairs; ++i) cells[i] = &model.pi[i];
    detail::normalize_counts(pi_counts, total, cfg.smoothing_alpha, cells);
  }

  // Transitions: smoothing spreads only over rows with at least one observed
  // successor and, when self-transitions are forbidden, skips same-state cells.
  model.trans = TransitionTable(M, D);
  for (int src = 0; src < num_pairs; ++src) {
    const int src_state = src / D;
    double total = 0.0;
    for (int dst = 0; dst < num_pairs; ++dst)
      total += trans_counts[static_cast<std::size_t>(src) * num_pairs + dst];
    if (total <= 0.0) continue;
    std::vector<double> counts;
    std::vector<double*> cells;
    for (int dst = 0; dst < num_pairs; ++dst) {
      if (cfg.forbid_self_transition && dst / D == src_state) continue;
      counts.push_back(trans_counts[static_cast<std::size_t>(src) * num_pairs + dst]);
      cells.push_back(&model.trans.p[static_cast<std::size_t>(src) * num_pairs + dst]);
    }
    detail::normalize_counts(counts, total, cfg.smoothing_alpha, cells);
  }

  // Emissions: smoothed over event symbols; the gap column stays 0. States
  // never observed get a uniform row so every row remains a distribution.
  model.emit = EmissionTable(M, alphabet.size());
  for (int m = 0; m < M; ++m) {
    double total = 0.0;
    for (int k = 0; k < alphabet.size(); ++k)
      total += emit_counts[static_cast<std::size_t>(m) * alphabet.size() + k];
    std::vector<double> counts;
    std::vector<double*> cells;
    for (int k = 0; k < alphabet.size(); ++k) {
      if (alphabet.is_gap(k)) continue;
      counts.push_back(emit_counts[static_cast<std::size_t>(m) * alphabet.size() + k]);
      cells.push_back(&model.emit.at(m, k));
    }
    if (total > 0.0) {
      detail::normalize_counts(counts, total, cfg.smoothing_alpha, cells);
    } else {
      for (double* cell : cells) *cell = 1.0 / static_cast<double>(cells.size());
    }
  }

  // Interval Gaussians (skipped for the plain duration-only variant).
  if (variant == Variant::kDihmm) {
    for (const auto& [pair, samples] : interval_samples) {
      const double mu = detail::sample_mean(samples);
      const double sigma =
          std::max(detail::sample_stddev(samples), cfg.sigma_floor);
      model.intervals[pair] = fit_interval_model(
          mu, sigma, cfg.theta_pt, static_cast<std::int64_t>(samples.size()));
    }
  }

  validate_model(model);
  return model;
}

// One model per distinct label, each fit on its own subset. `threads` > 1
// fits labels concurrently; the result does not depend on the thread count.
inline std::map<std::string, DihmmModel> fit_label_set(
    const std::vector<TrainingExample>& data, const Alphabet& alphabet,
    const TrainingConfig& cfg, Variant variant, int threads = 1) {
  if (data.empty()) throw DataError("fit_label_set: no training data");
  std::map<std::string, std::vector<TrainingExample>> by_label;
  for (const TrainingExample& ex : data) {
    if (ex.ticks.label.empty())
      throw DataError("fit_label_set: sequence '" + ex.ticks.id + "' has no label");
    by_label[ex.ticks.label].push_back(ex);
  }

  std::vector<std::pair<const std::string*, const std::vector<TrainingExample>*>> jobs;
  for (const auto& [label, subset] : by_label) jobs.push_back({&label, &subset});

  const int n = static_cast<int>(jobs.size());
  std::vector<DihmmModel> fitted(n);
  const int workers = std::max(1, std::min(threads, n));
  std::vector<std::string> errors(workers);
  if (workers == 1) {
    for (int i = 0; i < n; ++i)
      fitted[i] = fit_model(*jobs[i].second, alphabet, cfg, variant, *jobs[i].first);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (int i = w; i < n; i += workers) {
          try {
            fitted[i] =
                fit_model(*jobs[i].second, alphabet, cfg, variant, *jobs[i].first);
          } catch (const std::exception& e) {
            if (errors[w].empty()) errors[w] = e.what();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::string& e : errors)
      if (!e.empty()) throw DataError("fit_label_set: " + e);
  }

  std::map<std::string, DihmmModel> models;
  for (int i = 0; i < n; ++i) models[*jobs[i].first] = std::move(fitted[i]);
  return models;
}

}  // namespace dihmm
