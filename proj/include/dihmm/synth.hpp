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

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dihmm/corpus.hpp"
#include "dihmm/rng.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

// What a jitter shift moves.
//   kAuto:      durations when the total span is fixed, otherwise free
//   kDurations: note lengths, absorbed by the following interval
//   kShifts:    segment onsets, durations untouched (pure timing delays)
//   kFree:      durations and intervals independently, span may change
enum class JitterMode { kAuto, kDurations, kShifts, kFree };

inline JitterMode jitter_mode_from_name(const std::string& s) {
  if (s == "auto") return JitterMode::kAuto;
  if (s == "duration") return JitterMode::kDurations;
  if (s == "shift") return JitterMode::kShifts;
  if (s == "free") return JitterMode::kFree;
  throw DataError("unknown jitter mode '" + s + "'");
}

struct JitterPolicy {
  int max_shift = 0;   // 0 disables jitter
  double prob = 0.0;   // per-site perturbation probability
  JitterMode mode = JitterMode::kAuto;

  bool enabled() const { return max_shift > 0 && prob > 0.0; }
};

// Deterministic generation policy: N segments with durations in
// [d_min, d_max] and N-1 intervals in [l_min, l_max], enumerated in odometer
// order over (d_1..d_N, l_1..l_{N-1}) with the rightmost digit fastest.
struct GenPolicy {
  int num_states = 1;  // N
  int d_min = 1, d_max = 1;
  int l_min = 0, l_max = 0;
  std::optional<int> total_ticks;  // T; combinations must sum to it exactly
  bool pad_to_total = false;       // accept sums <= T, pad with trailing gap
  int count = 1;
  std::uint64_t seed = 0;
  JitterPolicy jitter;
  bool shared_symbol = false;  // one "on" state instead of one per position
  std::string id_prefix = "seq";

  void validate() const {
    if (num_states < 1) throw InvalidParameterError("gen policy: N must be >= 1");
    if (d_min < 1 || d_min > d_max)
      throw InvalidParameterError("gen policy: need 1 <= d_min <= d_max");
    if (l_min < 0 || l_min > l_max)
      throw InvalidParameterError("gen policy: need 0 <= l_min <= l_max");
    if (count < 1) throw InvalidParameterError("gen policy: count must be >= 1");
    if (pad_to_total && !total_ticks)
      throw InvalidParameterError("gen policy: pad_to_total requires T");
    if (shared_symbol && num_states > 1 && l_min < 1)
      throw InvalidParameterError(
          "gen policy: shared symbol with N > 1 requires l_min >= 1");
  }
};

// Alphabet used by generated corpora: gap "_" plus either one "on" symbol
// or one symbol per segment position ("s1", "s2", ...).
inline Alphabet synth_alphabet(int max_states, bool shared_symbol) {
  std::vector<std::string> names{kDefaultGapName};
  if (shared_symbol) {
    names.push_back("on");
  } else {
    for (int i = 1; i <= max_states; ++i)
      names.push_back("s" + std::to_string(i));
  }
  return Alphabet(names, 0);
}

// Every (durations, intervals) combination the policy admits, in odometer
// order. Throws when a fixed T admits no combination.
inline std::vector<SegmentSequence> enumerate_policy(const GenPolicy& policy) {
  policy.validate();
  const int n = policy.num_states;
  const int digits = 2 * n - 1;  // d_1..d_n, l_1..l_{n-1}
  std::vector<int> value(digits);
  auto lo = [&](int i) { return i < n ? policy.d_min : policy.l_min; };
  auto hi = [&](int i) { return i < n ? policy.d_max : policy.l_max; };
  for (int i = 0; i < digits; ++i) value[i] = lo(i);

  std::vector<SegmentSequence> out;
  while (true) {
    int sum = 0;
    for (int v : value) sum += v;
    const bool keep = !policy.total_ticks ||
                      (policy.pad_to_total ? sum <= *policy.total_ticks
                                           : sum == *policy.total_ticks);
    if (keep) {
      SegmentSequence seq;
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        seq.segments.push_back({policy.shared_symbol ? 0 : i, pos, value[i]});
        pos += value[i];
        if (i < n - 1) pos += value[n + i];
      }
      out.push_back(std::move(seq));
    }
    int i = digits - 1;
    while (i >= 0 && value[i] == hi(i)) {
      value[i] = lo(i);
      --i;
    }
    if (i < 0) break;
    ++value[i];
  }
  if (out.empty())
    throw InfeasiblePolicyError(
        "gen policy: no combination reaches T=" +
        std::to_string(policy.total_ticks.value_or(0)));
  return out;
}

// Onset-preserving jitter: a duration change is absorbed by the following
// interval (or the trailing gap for the last segment), so segment starts and
// the total span stay fixed. Shifts that would leave the legal ranges are
// dropped.
inline SegmentSequence jitter_durations(const SegmentSequence& in,
                                        int total_ticks,
                                        const JitterPolicy& jitter, Rng& rng,
                                        int d_lo = 1,
                                        int d_hi = std::numeric_limits<int>::max(),
                                        int l_lo = 1,
                                        int l_hi = std::numeric_limits<int>::max()) {
  SegmentSequence out = in;
  if (!jitter.enabled()) return out;
  for (int i = 0; i < out.size(); ++i) {
    if (!rng.bernoulli(jitter.prob)) continue;
    const int shift = rng.uniform_int(1, jitter.max_shift) *
                      (rng.bernoulli(0.5) ? 1 : -1);
    const int d = out.segments[i].duration + shift;
    if (d < d_lo || d > d_hi) continue;
    if (i + 1 < out.size()) {
      const int l = out.segments[i + 1].start - out.segments[i].start - d;
      if (l < l_lo || l > l_hi) continue;
    } else if (out.segments[i].start + d > total_ticks) {
      continue;
    }
    out.segments[i].duration = d;
  }
  return out;
}

// Pure timing jitter: segment onsets move while every duration stays put.
// Neighboring intervals absorb the shift, so a duration-only model of the
// jittered set is identical to one of the original. Shifts that would close
// a gap below l_lo (or leave [0, total]) are dropped.
inline SegmentSequence jitter_shifts(const SegmentSequence& in, int total_ticks,
                                     const JitterPolicy& jitter, Rng& rng,
                                     int l_lo = 1) {
  SegmentSequence out = in;
  if (!jitter.enabled()) return out;
  for (int i = 0; i < out.size(); ++i) {
    if (!rng.bernoulli(jitter.prob)) continue;
    const int shift = rng.uniform_int(1, jitter.max_shift) *
                      (rng.bernoulli(0.5) ? 1 : -1);
    const int start = out.segments[i].start + shift;
    const int end = start + out.segments[i].duration;
    if (start < 0 || end > total_ticks) continue;
    if (i > 0 && start - out.segments[i - 1].end() < l_lo) continue;
    if (i + 1 < out.size() && out.segments[i + 1].start - end < l_lo) continue;
    out.segments[i].start = start;
  }
  return out;
}

// Independent jitter for unconstrained-length sequences: durations and
// intervals each shift on their own and segment starts are recomputed.
inline SegmentSequence jitter_free(const SegmentSequence& in,
                                   const JitterPolicy& jitter, Rng& rng,
                                   int d_lo = 1,
                                   int d_hi = std::numeric_limits<int>::max(),
                                   int l_lo = 1,
                                   int l_hi = std::numeric_limits<int>::max()) {
  if (!jitter.enabled() || in.empty()) return in;
  std::vector<int> durations, gaps;
  for (int i = 0; i < in.size(); ++i) {
    durations.push_back(in.segments[i].duration);
    if (i > 0) gaps.push_back(in.interval_before(i));
  }
  auto perturb = [&](int v, int lo, int hi) {
    if (!rng.bernoulli(jitter.prob)) return v;
    const int shift = rng.uniform_int(1, jitter.max_shift) *
                      (rng.bernoulli(0.5) ? 1 : -1);
    const int moved = v + shift;
    return (moved < lo || moved > hi) ? v : moved;
  };
  for (int& d : durations) d = perturb(d, d_lo, d_hi);
  for (int& l : gaps) l = perturb(l, l_lo, l_hi);

  SegmentSequence out;
  int pos = in.segments.front().start;
  for (int i = 0; i < in.size(); ++i) {
    if (i > 0) pos += gaps[i - 1];
    out.segments.push_back({in.segments[i].state, pos, durations[i]});
    pos += durations[i];
  }
  return out;
}

namespace detail {

inline std::string zero_padded(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

inline TrainingExample materialize(const SegmentSequence& segments,
                                   int total_ticks, const Alphabet& alphabet,
                                   const std::string& id) {
  TrainingExample ex;
  ex.segments = segments;
  ex.ticks = render_ticks(segments, total_ticks, alphabet, id, id);
  return ex;
}

}  // namespace detail

// Generates the policy's corpus: enumerate, sample down to `count` without
// replacement (seeded, enumeration order preserved), jitter if configured,
// materialize ticks. Items are labeled with their own id.
inline Corpus generate(const GenPolicy& policy) {
  std::vector<SegmentSequence> all = enumerate_policy(policy);
  Rng rng(policy.seed);
  std::vector<int> picked;
  if (policy.count < static_cast<int>(all.size())) {
    picked = sample_without_replacement(static_cast<int>(all.size()),
                                        policy.count, rng);
  } else {
    for (int i = 0; i < static_cast<int>(all.size()); ++i) picked.push_back(i);
  }

  Corpus corpus;
  corpus.alphabet = synth_alphabet(policy.num_states, policy.shared_symbol);
  const int width =
      static_cast<int>(std::to_string(picked.size()).size());
  for (std::size_t i = 0; i < picked.size(); ++i) {
    SegmentSequence segs = all[picked[i]];
    if (policy.jitter.enabled()) {
      Rng jrng(derive_seed(policy.seed, i, 1));
      if (policy.total_ticks) {
        segs = jitter_durations(segs, *policy.total_ticks, policy.jitter, jrng,
                                policy.d_min, policy.d_max,
                                std::max(1, policy.l_min), policy.l_max);
      } else {
        segs = jitter_free(segs, policy.jitter, jrng, policy.d_min,
                           policy.d_max, std::max(1, policy.l_min),
                           policy.l_max);
      }
    }
    const int total =
        policy.total_ticks ? *policy.total_ticks : segs.span_end();
    const std::string id =
        policy.id_prefix + "_" +
        detail::zero_padded(static_cast<int>(i), width);
    corpus.items.push_back(
        detail::materialize(segs, total, corpus.alphabet, id));
  }
  return corpus;
}

// Pools several policies (e.g. N=3 and N=4 of one experiment) into a single
// corpus over one alphabet. With count > 0 the pooled enumeration is sampled
// down to `count`; with count <= 0 each policy contributes its own
// policy.count sequences (balanced sampling).
inline Corpus generate_union(const std::vector<GenPolicy>& policies, int count,
                             std::uint64_t seed,
                             const std::string& id_prefix = "seq") {
  if (policies.empty()) throw InvalidParameterError("generate_union: no policies");
  int max_states = 0;
  for (const GenPolicy& p : policies) {
    p.validate();
    if (p.shared_symbol != policies.front().shared_symbol)
      throw InvalidParameterError("generate_union: mixed symbol modes");
    max_states = std::max(max_states, p.num_states);
  }

  std::vector<std::pair<int, SegmentSequence>> picked_pool;  // (policy, segments)
  if (count > 0) {
    std::vector<std::pair<int, SegmentSequence>> pool;
    for (std::size_t pi = 0; pi < policies.size(); ++pi)
      for (SegmentSequence& s : enumerate_policy(policies[pi]))
        pool.push_back({static_cast<int>(pi), std::move(s)});
    Rng rng(seed);
    if (count < static_cast<int>(pool.size())) {
      for (int i : sample_without_replacement(static_cast<int>(pool.size()),
                                              count, rng))
        picked_pool.push_back(std::move(pool[i]));
    } else {
      picked_pool = std::move(pool);
    }
  } else {
    for (std::size_t pi = 0; pi < policies.size(); ++pi) {
      std::vector<SegmentSequence> all = enumerate_policy(policies[pi]);
      Rng rng(derive_seed(seed, pi, 3));
      std::vector<int> idx;
      if (policies[pi].count < static_cast<int>(all.size())) {
        idx = sample_without_replacement(static_cast<int>(all.size()),
                                         policies[pi].count, rng);
      } else {
        for (int i = 0; i < static_cast<int>(all.size()); ++i) idx.push_back(i);
      }
      for (int i : idx)
        picked_pool.push_back({static_cast<int>(pi), std::move(all[i])});
    }
  }

  Corpus corpus;
  corpus.alphabet = synth_alphabet(max_states, policies.front().shared_symbol);
  const int width =
      static_cast<int>(std::to_string(picked_pool.size()).size());
  for (std::size_t i = 0; i < picked_pool.size(); ++i) {
    const auto& [pidx, segs] = picked_pool[i];
    const GenPolicy& policy = policies[pidx];
    const int total = policy.total_ticks ? *policy.total_ticks : segs.span_end();
    const std::string id =
        id_prefix + "_" + detail::zero_padded(static_cast<int>(i), width);
    corpus.items.push_back(detail::materialize(segs, total, corpus.alphabet, id));
  }
  return corpus;
}

// Sustains every note shorter than floor_ticks into the following gap, the
// way a legato instrument holds short notes: onsets stay put and at least
// min_gap ticks of silence survive before the next note.
inline SegmentSequence apply_duration_floor(const SegmentSequence& in,
                                            int total_ticks, int floor_ticks,
                                            int min_gap = 1) {
  SegmentSequence out = in;
  for (int i = 0; i < out.size(); ++i) {
    Segment& s = out.segments[i];
    const int room = (i + 1 < out.size() ? out.segments[i + 1].start - min_gap
                                         : total_ticks) -
                     s.start;
    s.duration = std::min(std::max(s.duration, floor_ticks),
                          std::max(s.duration, room));
  }
  return out;
}

// The k training renditions of one sequence used by the robustness
// experiments: the original plus k-1 jittered copies. The jitter mode picks
// what varies between renditions (timing shifts, note lengths, or both).
inline std::vector<TrainingExample> training_variants(
    const TrainingExample& ex, const Alphabet& alphabet, int k,
    const JitterPolicy& jitter, int fixed_total, std::uint64_t seed) {
  std::vector<TrainingExample> out{ex};
  const int total = fixed_total >= 0 ? fixed_total : ex.ticks.length();
  JitterMode mode = jitter.mode;
  if (mode == JitterMode::kAuto)
    mode = fixed_total >= 0 ? JitterMode::kDurations : JitterMode::kFree;
  for (int j = 1; j < k; ++j) {
    Rng rng(derive_seed(seed, j, 2));
    SegmentSequence segs;
    switch (mode) {
      case JitterMode::kShifts:
        segs = jitter_shifts(ex.segments, total, jitter, rng);
        break;
      case JitterMode::kFree:
        segs = jitter_free(ex.segments, jitter, rng);
        break;
      default:
        segs = jitter_durations(ex.segments, total, jitter, rng);
        break;
    }
    TrainingExample variant;
    variant.segments = segs;
    variant.ticks = render_ticks(
        segs, mode == JitterMode::kFree ? segs.span_end() : total, alphabet,
        ex.ticks.id + "#v" + std::to_string(j), ex.ticks.label);
    out.push_back(std::move(variant));
  }
  return out;
}

}  // namespace dihmm
