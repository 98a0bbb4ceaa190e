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

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dihmm/model.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

// How ticks between segments are treated during decoding.
//   kStrictGap: interval ticks must carry the gap symbol.
//   kSkip:      interval ticks are unconstrained and unscored.
enum class GapMode { kStrictGap, kSkip };

inline std::string gap_mode_name(GapMode m) {
  return m == GapMode::kStrictGap ? "strict-gap" : "skip";
}

inline GapMode gap_mode_from_name(const std::string& s) {
  if (s == "strict-gap") return GapMode::kStrictGap;
  if (s == "skip") return GapMode::kSkip;
  throw DataError("unknown gap mode '" + s + "'");
}

struct DecodeConfig {
  GapMode gap_mode = GapMode::kStrictGap;
  bool allow_trailing_gap = true;
  bool normalize_scores = false;
  // Extra slack added to the derived interval-search bound (skip mode only;
  // under strict-gap the gap run itself bounds the search).
  int l_cap_slack = 0;
};

// Which dynamic program runs. The duration-only variant comes in two forms:
// the strict recursion where consecutive segments touch, and the
// gap-tolerant form that walks over intervals without scoring them. The
// interval-aware form scores every traversed interval length.
enum class DecodeMode { kHsmmContiguous, kHsmmGapped, kDihmm };

namespace detail {

// Precomputed per-(model, sequence) tables for the segmental Viterbi.
struct DecodeTables {
  int num_states = 0;
  int d_cap = 0;
  int T = 0;
  int l_cap = 0;
  bool use_intervals = false;

  // gap_run[p]: number of consecutive gap ticks immediately before tick p.
  std::vector<int> gap_run;
  std::vector<double> log_pi;  // M * D_cap

  struct Edge {
    int from_state;
    int from_dur;
    double log_p;
  };
  std::vector<std::vector<Edge>> incoming;  // per target (state, dur) pair

  // Emission prefix sums per state: log_emit_prefix[m][t] = sum of finite
  // per-tick log emissions over [0, t); zero_prefix counts impossible ticks.
  std::vector<std::vector<double>> log_emit_prefix;
  std::vector<std::vector<int>> zero_prefix;

  // Interval factor lookup: per pair the in-support log densities.
  std::map<StatePair, std::pair<int, std::vector<double>>> log_interval;  // x_lo, values
  double log_fallback = kLogZero;

  double window_log_emit(int state, int begin, int end) const {
    if (zero_prefix[state][end] != zero_prefix[state][begin]) return kLogZero;
    return log_emit_prefix[state][end] - log_emit_prefix[state][begin];
  }

  double log_interval_factor(int from_state, int to_state, int length) const {
    auto it = log_interval.find({from_state, to_state});
    if (it != log_interval.end()) {
      const int off = length - it->second.first;
      if (off >= 0 && off < static_cast<int>(it->second.second.size()))
        return it->second.second[off];
    }
    return log_fallback;
  }
};

inline DecodeTables build_tables(const DihmmModel& model,
                                 const TickSequence& seq,
                                 const DecodeConfig& cfg, DecodeMode mode) {
  if (seq.ticks.empty())
    throw DataError("decode: sequence '" + seq.id + "' is empty");
  seq.validate(model.alphabet);

  DecodeTables t;
  t.num_states = model.num_states;
  t.d_cap = model.d_cap;
  t.T = seq.length();
  t.use_intervals = mode == DecodeMode::kDihmm;

  t.gap_run.assign(t.T + 1, 0);
  for (int p = 1; p <= t.T; ++p)
    t.gap_run[p] =
        model.alphabet.is_gap(seq.ticks[p - 1]) ? t.gap_run[p - 1] + 1 : 0;

  t.log_pi.resize(model.pi.size());
  for (std::size_t i = 0; i < model.pi.size(); ++i)
    t.log_pi[i] = log_or_zero(model.pi[i]);

  bool any_edge = false;
  t.incoming.resize(static_cast<std::size_t>(t.num_states) * t.d_cap);
  for (int m = 0; m < t.num_states; ++m)
    for (int d = 1; d <= t.d_cap; ++d) {
      auto& edges = t.incoming[static_cast<std::size_t>(m) * t.d_cap + (d - 1)];
      for (int pm = 0; pm < t.num_states; ++pm)
        for (int pd = 1; pd <= t.d_cap; ++pd) {
          const double p = model.trans.at(pm, pd, m, d);
          if (p > 0.0) {
            edges.push_back({pm, pd, std::log(p)});
            any_edge = true;
          }
        }
    }

  t.log_emit_prefix.assign(t.num_states, std::vector<double>(t.T + 1, 0.0));
  t.zero_prefix.assign(t.num_states, std::vector<int>(t.T + 1, 0));
  for (int m = 0; m < t.num_states; ++m)
    for (int p = 1; p <= t.T; ++p) {
      const double e = model.emit.at(m, seq.ticks[p - 1]);
      t.log_emit_prefix[m][p] =
          t.log_emit_prefix[m][p - 1] + (e > 0.0 ? std::log(e) : 0.0);
      t.zero_prefix[m][p] = t.zero_prefix[m][p - 1] + (e > 0.0 ? 0 : 1);
    }

  t.l_cap = cfg.l_cap_slack;
  if (t.use_intervals) {
    if (model.intervals.empty() && any_edge)
      throw UntrainedIntervalError("decode: model '" + model.label +
                                   "' has transitions but no interval model");
    for (const auto& [pair, im] : model.intervals) {
      std::vector<double> vals;
      for (int x = im.x_lo; x <= im.x_hi; ++x)
        vals.push_back(log_or_zero(im.pdf(x)));
      t.log_interval[pair] = {im.x_lo, std::move(vals)};
      t.l_cap = std::max(t.l_cap, im.x_hi + cfg.l_cap_slack);
    }
    if (!model.intervals.empty())
      t.log_fallback = log_or_zero(model.min_interval_density() * model.c);
  } else {
    for (const auto& [pair, im] : model.intervals)
      t.l_cap = std::max(t.l_cap, im.x_hi + cfg.l_cap_slack);
  }
  return t;
}

struct BackPointer {
  enum Kind { kNone, kBase, kTrans } kind = kNone;
  int from_state = 0;
  int from_dur = 0;
  int prev_end = 0;
};

}  // namespace detail

// Segmental Viterbi over (end tick, state, duration) cells.
//
// delta[e][m][D] is the best log probability of a partial explanation whose
// last segment occupies ticks [e-D, e) in state m. A cell is seeded from the
// initial distribution when everything before the window is a legal leading
// region, and extended from predecessor cells across an interval of L ticks
// (L = 0 in the contiguous mode). The final score maximizes over end
// positions that leave a legal trailing region.
//
// Ties are broken toward: base case over transitions, then smaller
// predecessor state, smaller predecessor duration, smaller interval; the
// final cell prefers later end, then smaller state, then smaller duration.
inline Score decode(const DihmmModel& model, const TickSequence& seq,
                    const DecodeConfig& cfg, DecodeMode mode) {
  const detail::DecodeTables tables = detail::build_tables(model, seq, cfg, mode);
  const int M = tables.num_states;
  const int Dcap = tables.d_cap;
  const int T = tables.T;
  const bool strict = cfg.gap_mode == GapMode::kStrictGap;
  const bool contiguous = mode == DecodeMode::kHsmmContiguous;

  auto cell = [&](int e, int m, int d) {
    return (static_cast<std::size_t>(e) * M + m) * Dcap + (d - 1);
  };
  std::vector<double> delta(static_cast<std::size_t>(T + 1) * M * Dcap, kLogZero);
  std::vector<detail::BackPointer> back(delta.size());

  for (int e = 1; e <= T; ++e) {
    for (int m = 0; m < M; ++m) {
      for (int d = 1; d <= std::min(Dcap, e); ++d) {
        const int w = e - d;  // window start
        const double emit = tables.window_log_emit(m, w, e);
        if (emit == kLogZero) continue;

        double best = kLogZero;
        detail::BackPointer bp;

        // Base case: leading region [0, w) must be legal.
        const bool leading_ok = strict ? tables.gap_run[w] >= w : true;
        if (leading_ok) {
          const double cand = tables.log_pi[m * Dcap + (d - 1)] + emit;
          if (cand > best) {
            best = cand;
            bp = {detail::BackPointer::kBase, 0, 0, 0};
          }
        }

        // Transitions from a predecessor ending at w - L.
        const auto& edges = tables.incoming[static_cast<std::size_t>(m) * Dcap + (d - 1)];
        if (!edges.empty()) {
          const int l_max =
              contiguous ? 0
                         : std::min(strict ? tables.gap_run[w] : tables.l_cap,
                                    w - 1);
          for (const auto& edge : edges) {
            for (int l = 0; l <= l_max; ++l) {
              const int prev_end = w - l;
              if (prev_end < edge.from_dur) continue;
              const double prev =
                  delta[cell(prev_end, edge.from_state, edge.from_dur)];
              if (prev == kLogZero) continue;
              double cand = prev + edge.log_p + emit;
              if (tables.use_intervals)
                cand += tables.log_interval_factor(edge.from_state, m, l);
              if (cand > best) {
                best = cand;
                bp = {detail::BackPointer::kTrans, edge.from_state,
                      edge.from_dur, prev_end};
              }
            }
          }
        }

        if (best != kLogZero) {
          delta[cell(e, m, d)] = best;
          back[cell(e, m, d)] = bp;
        }
      }
    }
  }

  // Final scan across legal end positions.
  Score score;
  int best_e = -1, best_m = -1, best_d = -1;
  for (int e = T; e >= 1; --e) {
    if (e < T) {
      if (!cfg.allow_trailing_gap) break;
      if (strict && tables.gap_run[T] < T - e) break;
    }
    for (int m = 0; m < M; ++m)
      for (int d = 1; d <= std::min(Dcap, e); ++d) {
        const double v = delta[cell(e, m, d)];
        if (v > score.log_likelihood) {
          score.log_likelihood = v;
          best_e = e;
          best_m = m;
          best_d = d;
        }
      }
  }

  SegmentSequence path;
  if (best_e >= 0) {
    int e = best_e, m = best_m, d = best_d;
    while (true) {
      path.segments.push_back({m, e - d, d});
      const detail::BackPointer& bp = back[cell(e, m, d)];
      if (bp.kind != detail::BackPointer::kTrans) break;
      e = bp.prev_end;
      m = bp.from_state;
      d = bp.from_dur;
    }
    std::reverse(path.segments.begin(), path.segments.end());
  }
  score.best_path = std::move(path);
  return score;
}

// Extended Viterbi for the duration-only model: consecutive segments touch
// (interval length 0 everywhere). Leading/trailing gap regions are still
// legal so that sequences padded with silence remain scoreable.
inline Score viterbi_hsmm(const DihmmModel& model, const TickSequence& seq,
                          const DecodeConfig& cfg = {}) {
  if (model.variant != Variant::kHsmm)
    throw DataError("viterbi_hsmm: model '" + model.label + "' is not an hsmm");
  return decode(model, seq, cfg, DecodeMode::kHsmmContiguous);
}

// Duration-only scoring that walks across intervals without scoring them.
// This is how an hsmm-variant model is applied to data that contains gaps:
// the alignment machinery matches the interval-aware decoder, but no
// interval factor is ever applied.
inline Score viterbi_hsmm_gapped(const DihmmModel& model,
                                 const TickSequence& seq,
                                 const DecodeConfig& cfg = {}) {
  if (model.variant != Variant::kHsmm)
    throw DataError("viterbi_hsmm_gapped: model '" + model.label +
                    "' is not an hsmm");
  return decode(model, seq, cfg, DecodeMode::kHsmmGapped);
}

// Interval-aware extended Viterbi: every transition additionally searches
// the interval length L and multiplies in the interval probability.
inline Score viterbi_dihmm(const DihmmModel& model, const TickSequence& seq,
                           const DecodeConfig& cfg = {}) {
  if (model.variant != Variant::kDihmm)
    throw DataError("viterbi_dihmm: model '" + model.label + "' is not a dihmm");
  return decode(model, seq, cfg, DecodeMode::kDihmm);
}

// Scores a sequence with whatever decoder matches the model's variant.
inline Score score_sequence(const DihmmModel& model, const TickSequence& seq,
                            const DecodeConfig& cfg = {}) {
  return model.variant == Variant::kDihmm ? viterbi_dihmm(model, seq, cfg)
                                          : viterbi_hsmm_gapped(model, seq, cfg);
}

// Log score of one explicit path under the same legality rules as the
// decoder; -inf when the path is not a legal explanation of the sequence.
// Used to cross-check decoder output and in tests.
inline double score_path(const DihmmModel& model, const TickSequence& seq,
                         const SegmentSequence& path, const DecodeConfig& cfg,
                         DecodeMode mode) {
  seq.validate(model.alphabet);
  const int T = seq.length();
  const bool strict = cfg.gap_mode == GapMode::kStrictGap;
  if (path.empty()) return kLogZero;
  path.validate(T);

  int l_cap = cfg.l_cap_slack;
  for (const auto& [pair, im] : model.intervals)
    l_cap = std::max(l_cap, im.x_hi + cfg.l_cap_slack);

  auto region_is_gap = [&](int begin, int end) {
    for (int p = begin; p < end; ++p)
      if (!model.alphabet.is_gap(seq.ticks[p])) return false;
    return true;
  };

  const Segment& first = path.segments.front();
  if (first.duration > model.d_cap || first.state >= model.num_states)
    return kLogZero;
  if (strict && !region_is_gap(0, first.start)) return kLogZero;

  const int end = path.segments.back().end();
  if (end < T) {
    if (!cfg.allow_trailing_gap) return kLogZero;
    if (strict && !region_is_gap(end, T)) return kLogZero;
  }

  double total = log_or_zero(model.pi_at(first.state, first.duration));
  for (int n = 0; n < path.size(); ++n) {
    const Segment& s = path.segments[n];
    if (s.duration > model.d_cap || s.state >= model.num_states) return kLogZero;
    for (int p = s.start; p < s.end(); ++p)
      total += log_or_zero(model.emit.at(s.state, seq.ticks[p]));
    if (n == 0) continue;
    const Segment& prev = path.segments[n - 1];
    const int l = path.interval_before(n);
    if (mode == DecodeMode::kHsmmContiguous && l != 0) return kLogZero;
    if (mode != DecodeMode::kHsmmContiguous) {
      if (strict) {
        if (!region_is_gap(prev.end(), s.start)) return kLogZero;
      } else if (l > l_cap) {
        return kLogZero;
      }
    }
    total += log_or_zero(
        model.trans.at(prev.state, prev.duration, s.state, s.duration));
    if (mode == DecodeMode::kDihmm)
      total += log_or_zero(interval_prob(model, prev.state, s.state, l));
  }
  return total;
}

// Multi-model classification result.
struct Classification {
  std::string label;          // winning label; empty when unclassifiable
  bool unclassifiable = false;
  std::map<std::string, Score> scores;
};

// Scores `seq` against every model and returns the label with the highest
// log likelihood. Ties go to the lexicographically smallest label; if no
// model can explain the sequence the result is flagged unclassifiable.
inline Classification classify(const std::map<std::string, DihmmModel>& models,
                               const TickSequence& seq,
                               const DecodeConfig& cfg = {}) {
  if (models.empty()) throw DataError("classify: no models");
  const Variant variant = models.begin()->second.variant;
  const Alphabet& alphabet = models.begin()->second.alphabet;
  for (const auto& [label, model] : models) {
    if (model.variant != variant)
      throw DataError("classify: mixed model variants");
    if (!(model.alphabet == alphabet))
      throw DataError("classify: models disagree on the alphabet");
  }

  Classification result;
  double best = kLogZero;
  for (const auto& [label, model] : models) {
    Score s = score_sequence(model, seq, cfg);
    if (!s.impossible() && s.log_likelihood > best) {
      best = s.log_likelihood;
      result.label = label;
    }
    result.scores[label] = std::move(s);
  }
  if (result.label.empty()) {
    result.unclassifiable = true;
    return result;
  }

  if (cfg.normalize_scores) {
    double norm = 0.0;
    for (const auto& [label, s] : result.scores)
      if (!s.impossible()) norm += std::exp(s.log_likelihood - best);
    for (auto& [label, s] : result.scores)
      s.normalized =
          s.impossible() ? 0.0 : std::exp(s.log_likelihood - best) / norm;
  }
  return result;
}

}  // namespace dihmm
