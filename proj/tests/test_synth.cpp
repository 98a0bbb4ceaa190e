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

#include <set>
#include <sstream>

#include "dihmm/synth.hpp"
#include "test_util.hpp"

using namespace dihmm;

TEST_CASE("enumeration follows odometer order") {
  GenPolicy p;
  p.num_states = 2;
  p.d_min = 1;
  p.d_max = 2;
  p.l_min = 1;
  p.l_max = 1;
  p.count = 16;
  const Corpus c = generate(p);
  REQUIRE(c.size() == 4);
  // (d1, l, d2) in odometer order with the rightmost digit fastest:
  // (1,1,1), (1,1,2), (2,1,1), (2,1,2).
  CHECK(c.items[0].segments.segments[0].duration == 1);
  CHECK(c.items[0].segments.segments[1].duration == 1);
  CHECK(c.items[1].segments.segments[0].duration == 1);
  CHECK(c.items[1].segments.segments[1].duration == 2);
  CHECK(c.items[2].segments.segments[0].duration == 2);
  CHECK(c.items[2].segments.segments[1].duration == 1);
  CHECK(c.items[3].segments.segments[0].duration == 2);
  CHECK(c.items[3].segments.segments[1].duration == 2);
  for (const TrainingExample& ex : c.items)
    CHECK(ex.segments.interval_before(1) == 1);
}

TEST_CASE("fixed-length policies keep the exact total") {
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
  const Corpus c = generate_union(policies, 200, 7, "seq");
  REQUIRE(c.size() == 200);
  std::set<std::vector<int>> distinct;
  for (const TrainingExample& ex : c.items) {
    CHECK(ex.ticks.length() == 14);
    // No leading or trailing gap: sum(d) + sum(l) covers all of T.
    CHECK(ex.segments.segments.front().start == 0);
    CHECK(ex.segments.span_end() == 14);
    distinct.insert(ex.ticks.ticks);
    for (const Segment& s : ex.segments.segments) {
      CHECK(s.duration >= 1);
      CHECK(s.duration <= 10);
    }
    for (int l : ex.segments.intervals()) {
      CHECK(l >= 1);
      CHECK(l <= 4);
    }
    const int n = ex.segments.size();
    CHECK((n == 3 || n == 4));
  }
  CHECK(static_cast<int>(distinct.size()) == 200);
}

TEST_CASE("generation is reproducible and enumeration duplicate-free") {
  GenPolicy p;
  p.num_states = 3;
  p.d_min = 1;
  p.d_max = 4;
  p.l_min = 0;
  p.l_max = 2;
  p.count = 50;
  p.seed = 1234;

  const Corpus a = generate(p);
  const Corpus b = generate(p);
  REQUIRE(a.size() == b.size());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.items[i].ticks == b.items[i].ticks);
    CHECK(a.items[i].segments == b.items[i].segments);
  }

  const auto all = enumerate_policy(p);
  std::set<std::vector<int>> seen;
  for (const SegmentSequence& s : all) {
    std::vector<int> key;
    for (const Segment& seg : s.segments) {
      key.push_back(seg.start);
      key.push_back(seg.duration);
    }
    seen.insert(key);
  }
  CHECK(seen.size() == all.size());
}

TEST_CASE("infeasible total is reported") {
  GenPolicy p;
  p.num_states = 2;
  p.d_min = 1;
  p.d_max = 2;
  p.l_min = 1;
  p.l_max = 1;
  p.total_ticks = 50;
  CHECK_THROWS_AS(enumerate_policy(p), InfeasiblePolicyError);
}

TEST_CASE("pad mode admits shorter combinations") {
  GenPolicy p;
  p.num_states = 2;
  p.d_min = 1;
  p.d_max = 3;
  p.l_min = 1;
  p.l_max = 3;
  p.total_ticks = 9;
  p.pad_to_total = true;
  p.count = 1000;
  p.shared_symbol = true;
  const Corpus c = generate(p);
  CHECK(c.size() == 27);  // every (d1, l, d2) combination fits within 9
  for (const TrainingExample& ex : c.items) {
    CHECK(ex.ticks.length() == 9);
    CHECK(ex.segments.span_end() <= 9);
  }
}

TEST_CASE("zero-width jitter is the identity") {
  GenPolicy p;
  p.num_states = 3;
  p.d_min = 1;
  p.d_max = 5;
  p.l_min = 1;
  p.l_max = 3;
  p.count = 30;
  p.seed = 5;
  const Corpus plain = generate(p);
  GenPolicy jp = p;
  jp.jitter = {0, 0.9};
  const Corpus jittered = generate(jp);
  REQUIRE(plain.size() == jittered.size());
  for (int i = 0; i < plain.size(); ++i)
    CHECK(plain.items[i].ticks == jittered.items[i].ticks);
}

TEST_CASE("onset-preserving jitter keeps starts and span") {
  Rng rng(61);
  SegmentSequence segs;
  segs.segments = {{0, 0, 3}, {1, 5, 2}, {2, 9, 4}};
  for (int trial = 0; trial < 100; ++trial) {
    Rng local(rng.next());
    const SegmentSequence out = jitter_durations(segs, 14, {2, 0.8}, local);
    out.validate(14);
    REQUIRE(out.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(out.segments[i].start == segs.segments[i].start);
      CHECK(out.segments[i].duration >= 1);
    }
    for (int i = 1; i < 3; ++i) CHECK(out.interval_before(i) >= 1);
  }
}

TEST_CASE("free jitter respects bounds") {
  Rng rng(67);
  SegmentSequence segs;
  segs.segments = {{0, 0, 2}, {0, 4, 2}, {0, 8, 2}};
  for (int trial = 0; trial < 100; ++trial) {
    Rng local(rng.next());
    const SegmentSequence out = jitter_free(segs, {1, 0.7}, local, 1, 3, 1, 4);
    out.validate();
    for (const Segment& s : out.segments) {
      CHECK(s.duration >= 1);
      CHECK(s.duration <= 3);
    }
    for (int i = 1; i < out.size(); ++i) {
      CHECK(out.interval_before(i) >= 1);
      CHECK(out.interval_before(i) <= 4);
    }
  }
}

TEST_CASE("training_variants starts from the original") {
  GenPolicy p;
  p.num_states = 2;
  p.d_min = 2;
  p.d_max = 4;
  p.l_min = 1;
  p.l_max = 3;
  p.count = 5;
  p.seed = 3;
  const Corpus c = generate(p);
  const int span = c.items[0].ticks.length();
  const auto variants =
      training_variants(c.items[0], c.alphabet, 4, {1, 0.8}, span, 77);
  REQUIRE(variants.size() == 4);
  CHECK(variants[0].ticks.ticks == c.items[0].ticks.ticks);
  for (const TrainingExample& v : variants)
    CHECK(v.ticks.length() == span);
  const auto again =
      training_variants(c.items[0], c.alphabet, 4, {1, 0.8}, span, 77);
  for (int i = 0; i < 4; ++i)
    CHECK(variants[i].ticks.ticks == again[i].ticks.ticks);
}

TEST_CASE("generated corpora survive a write/parse round trip") {
  GenPolicy p;
  p.num_states = 3;
  p.d_min = 1;
  p.d_max = 3;
  p.l_min = 1;
  p.l_max = 2;
  p.count = 10;
  p.seed = 17;
  const Corpus c = generate(p);
  std::ostringstream out;
  write_corpus(c, out);
  std::istringstream in(out.str());
  const Corpus back = parse_corpus(in);
  CHECK(back.alphabet == c.alphabet);
  REQUIRE(back.size() == c.size());
  for (int i = 0; i < c.size(); ++i) {
    CHECK(back.items[i].ticks == c.items[i].ticks);
    CHECK(back.items[i].segments == c.items[i].segments);
  }
}
