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

#include <cmath>

#include "dihmm/synth.hpp"
#include "dihmm/training.hpp"
#include "test_util.hpp"

using namespace dihmm;

namespace {

const Alphabet kAb({"_", "A", "B"}, 0);

TrainingExample example(const std::string& s, const std::string& id = "t",
                        const std::string& label = "") {
  TickSequence ticks = test::ticks_from_string(s, kAb, id);
  ticks.label = label;
  return {ticks, segments_from_ticks(ticks, kAb)};
}

// Independent renderer used to cross-check render_ticks: paints segment
// symbols onto a character canvas.
std::string paint(const SegmentSequence& segs, int total, const Alphabet& a) {
  std::string out(total, a.names[a.gap_id][0]);
  for (const Segment& s : segs.segments)
    for (int t = s.start; t < s.end(); ++t)
      out[t] = a.names[a.symbol_of_state(s.state)][0];
  return out;
}

}  // namespace

TEST_CASE("segments_from_ticks run-length encodes") {
  const auto segs = segments_from_ticks(test::ticks_from_string("AA__B", kAb), kAb);
  REQUIRE(segs.size() == 2);
  CHECK(segs.segments[0] == Segment{0, 0, 2});
  CHECK(segs.segments[1] == Segment{1, 4, 1});
  CHECK(segs.interval_before(1) == 2);

  const auto solid = segments_from_ticks(test::ticks_from_string("AAA", kAb), kAb);
  REQUIRE(solid.size() == 1);
  CHECK(solid.segments[0] == Segment{0, 0, 3});
  CHECK(solid.intervals().empty());

  // A symbol change splits runs even without a gap between them.
  const auto ab = segments_from_ticks(test::ticks_from_string("AAB", kAb), kAb);
  REQUIRE(ab.size() == 2);
  CHECK(ab.interval_before(1) == 0);

  CHECK(segments_from_ticks(test::ticks_from_string("___", kAb), kAb).empty());
}

TEST_CASE("render and segments_from_ticks invert each other") {
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    // Tick direction: identity for every tick string.
    const int T = rng.uniform_int(1, 14);
    std::string s;
    for (int t = 0; t < T; ++t)
      s += "_AB"[rng.uniform_int(0, 2)];
    const TickSequence ticks = test::ticks_from_string(s, kAb);
    const SegmentSequence segs = segments_from_ticks(ticks, kAb);
    const TickSequence back = render_ticks(segs, T, kAb);
    CHECK(back.ticks == ticks.ticks);
    CHECK(paint(segs, T, kAb) == s);

    // Segment direction: identity when no leading gap and runs are
    // separated (same-state neighbors need a gap to stay distinct).
    SegmentSequence gen;
    int pos = 0;
    const int n = rng.uniform_int(1, 4);
    int prev_state = -1;
    for (int k = 0; k < n; ++k) {
      const int state = rng.uniform_int(0, 1);
      if (k > 0) pos += state == prev_state ? rng.uniform_int(1, 3)
                                            : rng.uniform_int(0, 3);
      const int dur = rng.uniform_int(1, 3);
      gen.segments.push_back({state, pos, dur});
      pos += dur;
      prev_state = state;
    }
    const TickSequence rendered = render_ticks(gen, pos + rng.uniform_int(0, 2), kAb);
    CHECK(segments_from_ticks(rendered, kAb) == gen);
  }
}

TEST_CASE("fit_model single-sequence counting") {
  const DihmmModel m =
      fit_model({example("AA__B")}, kAb, TrainingConfig{}, Variant::kDihmm);
  CHECK(m.num_states == 2);
  CHECK(m.pi_at(0, 2) == 1.0);
  CHECK(m.trans.at(0, 2, 1, 1) == 1.0);
  REQUIRE(m.intervals.count({0, 1}) == 1);
  const IntervalModel& im = m.intervals.at({0, 1});
  CHECK(im.mu == 2.0);
  CHECK(im.sigma == 0.5);  // single sample falls back to the floor
  CHECK(im.sample_count == 1);
  CHECK(m.emit.at(0, 1) == 1.0);
  CHECK(m.emit.at(1, 2) == 1.0);
}

TEST_CASE("fit_model interval statistics use the unbiased form") {
  const DihmmModel m =
      fit_model({example("AA_B", "x"), example("AA___B", "y")}, kAb,
                TrainingConfig{}, Variant::kDihmm);
  const IntervalModel& im = m.intervals.at({0, 1});
  CHECK(im.mu == 2.0);
  CHECK(im.sigma == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  CHECK(im.sample_count == 2);
}

TEST_CASE("fit_model rejects bad input") {
  CHECK_THROWS_AS(fit_model({}, kAb, TrainingConfig{}, Variant::kDihmm), DataError);

  TrainingConfig tight;
  tight.d_cap = 2;
  CHECK_THROWS_AS(fit_model({example("AAA_B")}, kAb, tight, Variant::kDihmm),
                  DataError);
  try {
    fit_model({example("AAA_B", "long")}, kAb, tight, Variant::kDihmm);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("long") != std::string::npos);
    CHECK(std::string(e.what()).find("D_cap") != std::string::npos);
  }

  // Self-transitions are rejected while the default forbids them.
  const Alphabet shared({"_", "A"}, 0);
  TickSequence ticks = test::ticks_from_string("A_A", shared);
  TrainingExample ex{ticks, segments_from_ticks(ticks, shared)};
  CHECK_THROWS_AS(fit_model({ex}, shared, TrainingConfig{}, Variant::kDihmm),
                  DataError);
  TrainingConfig loose;
  loose.forbid_self_transition = false;
  CHECK_NOTHROW(fit_model({ex}, shared, loose, Variant::kDihmm));
}

TEST_CASE("fit_model is idempotent under duplication") {
  // Counting-derived parameters are ratios, so duplicating the data leaves
  // them untouched. The full model (including interval sigmas, whose n-1
  // estimator sees the sample count) is only invariant when every pair has
  // a single interval sample per copy.
  const std::vector<TrainingExample> single{example("AA__B_A", "p")};
  const DihmmModel once =
      fit_model(single, kAb, TrainingConfig{}, Variant::kDihmm);
  for (int k = 2; k <= 4; ++k) {
    std::vector<TrainingExample> repeated;
    for (int i = 0; i < k; ++i)
      repeated.insert(repeated.end(), single.begin(), single.end());
    const DihmmModel again =
        fit_model(repeated, kAb, TrainingConfig{}, Variant::kDihmm);
    CHECK(again.pi == once.pi);
    CHECK(again.trans == once.trans);
    CHECK(again.emit == once.emit);
    for (const auto& [pair, im] : once.intervals)
      CHECK(again.intervals.at(pair).mu == im.mu);
  }

  // With one sample per pair the fitted distributions are reproduced
  // exactly (the stored sample counts grow with the duplicates).
  const std::vector<TrainingExample> simple{example("AA__B", "q")};
  const DihmmModel base =
      fit_model(simple, kAb, TrainingConfig{}, Variant::kDihmm);
  std::vector<TrainingExample> tripled(3, simple[0]);
  const DihmmModel thrice =
      fit_model(tripled, kAb, TrainingConfig{}, Variant::kDihmm);
  CHECK(thrice.pi == base.pi);
  CHECK(thrice.trans == base.trans);
  CHECK(thrice.emit == base.emit);
  for (const auto& [pair, im] : base.intervals) {
    const IntervalModel& other = thrice.intervals.at(pair);
    CHECK(other.mu == im.mu);
    CHECK(other.sigma == im.sigma);
    CHECK(other.x_lo == im.x_lo);
    CHECK(other.x_hi == im.x_hi);
  }
}

TEST_CASE("fit_model interval mean is the exact sample mean") {
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrainingExample> data;
    std::vector<int> gaps;
    const int n = rng.uniform_int(1, 5);
    for (int i = 0; i < n; ++i) {
      const int gap = rng.uniform_int(0, 6);
      gaps.push_back(gap);
      std::string s = "A" + std::string(gap, '_') + "B";
      data.push_back(example(s, "g" + std::to_string(i)));
    }
    const DihmmModel m = fit_model(data, kAb, TrainingConfig{}, Variant::kDihmm);
    double mean = 0.0;
    for (int g : gaps) mean += g;
    mean /= gaps.size();
    CHECK(m.intervals.at({0, 1}).mu == Catch::Approx(mean).margin(1e-12));
  }
}

TEST_CASE("fit_model output always satisfies model invariants") {
  Rng rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    const int T = rng.uniform_int(2, 18);
    std::string s;
    for (int t = 0; t < T; ++t) s += "_AB"[rng.uniform_int(0, 2)];
    if (s.find('A') == std::string::npos && s.find('B') == std::string::npos)
      s[0] = 'A';
    TrainingConfig cfg;
    cfg.smoothing_alpha = rng.bernoulli(0.5) ? 0.0 : rng.uniform();
    cfg.forbid_self_transition = false;
    const Variant v = rng.bernoulli(0.5) ? Variant::kHsmm : Variant::kDihmm;
    // fit_model validates its own output; a throw here is a failure.
    CHECK_NOTHROW(fit_model({example(s)}, kAb, cfg, v));
  }
}

TEST_CASE("smoothing spreads mass only over observed rows") {
  TrainingConfig cfg;
  cfg.smoothing_alpha = 1.0;
  cfg.d_cap = 3;
  const DihmmModel m = fit_model({example("AA_B")}, kAb, cfg, Variant::kDihmm);
  // Source row (A, 2) was observed: every non-self target cell gets mass.
  const double row_size = 1 * 3;    // one other state, three durations
  CHECK(m.trans.at(0, 2, 1, 1) == Catch::Approx((1.0 + 1.0) / (1.0 + row_size)));
  CHECK(m.trans.at(0, 2, 1, 2) == Catch::Approx(1.0 / (1.0 + row_size)));
  CHECK(m.trans.at(0, 2, 0, 1) == 0.0);  // self cells stay empty
  // Unobserved source rows stay all-zero.
  CHECK(m.trans.row_sum(1, 1) == 0.0);
  CHECK(m.trans.row_sum(0, 1) == 0.0);
}

TEST_CASE("hsmm variant skips interval fitting") {
  const DihmmModel m =
      fit_model({example("AA__B")}, kAb, TrainingConfig{}, Variant::kHsmm);
  CHECK(m.intervals.empty());
  CHECK(m.variant == Variant::kHsmm);
}

TEST_CASE("fit_label_set groups by label") {
  std::vector<TrainingExample> data;
  for (int i = 0; i < 2; ++i) {
    data.push_back(example("AA__B", "a" + std::to_string(i), "la"));
    data.push_back(example("A_B", "b" + std::to_string(i), "lb"));
    data.push_back(example("B__A", "c" + std::to_string(i), "lc"));
  }
  const auto models =
      fit_label_set(data, kAb, TrainingConfig{}, Variant::kDihmm);
  REQUIRE(models.size() == 3);
  CHECK(models.at("la").label == "la");

  // Concurrent fitting yields the identical result.
  const auto threaded =
      fit_label_set(data, kAb, TrainingConfig{}, Variant::kDihmm, 4);
  CHECK(threaded == models);

  // A single label degenerates to fit_model.
  std::vector<TrainingExample> solo{example("AA__B", "s", "only")};
  const auto one = fit_label_set(solo, kAb, TrainingConfig{}, Variant::kDihmm);
  REQUIRE(one.size() == 1);
  CHECK(one.at("only") ==
        fit_model(solo, kAb, TrainingConfig{}, Variant::kDihmm, "only"));

  // Unlabeled data is rejected.
  std::vector<TrainingExample> unlabeled{example("AA__B", "u")};
  CHECK_THROWS_AS(
      fit_label_set(unlabeled, kAb, TrainingConfig{}, Variant::kDihmm),
      DataError);
}

TEST_CASE("training on the discrimination policy stays within its ranges") {
  std::vector<GenPolicy> policies;
  for (int n : {3, 4}) {
    GenPolicy p;
    p.num_states = n;
    p.d_min = 1;
    p.d_max = 10;
    p.l_min = 1;
    p.l_max = 4;
    p.total_ticks = 14;
    p.shared_symbol = true;
    policies.push_back(p);
  }
  const Corpus corpus = generate_union(policies, 40, 2026, "seq");
  TrainingConfig cfg;
  cfg.d_cap = 16;
  cfg.forbid_self_transition = false;
  const DihmmModel m =
      fit_model(corpus.items, corpus.alphabet, cfg, Variant::kDihmm, "all");

  // Durations observed in pi and transitions stay within [1, 10].
  for (int d = 1; d <= cfg.d_cap; ++d) {
    const bool in_range = d >= 1 && d <= 10;
    if (!in_range) {
      CHECK(m.pi_at(0, d) == 0.0);
      for (int d2 = 1; d2 <= cfg.d_cap; ++d2) {
        CHECK(m.trans.at(0, d, 0, d2) == 0.0);
        CHECK(m.trans.at(0, d2, 0, d) == 0.0);
      }
    }
  }
  // Interval samples stay within [1, 4] before truncation widening.
  for (const auto& [pair, im] : m.intervals) {
    CHECK(im.mu >= 1.0);
    CHECK(im.mu <= 4.0);
  }
}
