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

#include "dihmm/decoding.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace dihmm;

namespace {

// Shared driver: random instances against the exhaustive search.
void check_against_oracle(DecodeMode mode, std::uint64_t seed, int instances) {
  Rng rng(seed);
  int done = 0, finite = 0;
  while (done < instances) {
    const test::OracleInstance inst = test::random_instance(rng, mode);
    const test::OracleResult expected =
        test::oracle_best_score(inst.model, inst.seq, inst.cfg, mode);
    if (!expected.completed) continue;  // pathological blow-up, skip
    ++done;

    const Score got = decode(inst.model, inst.seq, inst.cfg, mode);
    if (std::isinf(expected.log_score)) {
      CHECK(got.impossible());
      continue;
    }
    ++finite;
    CHECK(got.log_likelihood ==
          Catch::Approx(expected.log_score).margin(1e-9));
    // The recovered path must achieve the same score.
    const double rescored =
        score_path(inst.model, inst.seq, *got.best_path, inst.cfg, mode);
    CHECK(rescored == Catch::Approx(expected.log_score).margin(1e-9));
  }
  // The generator must exercise plenty of non-degenerate cases.
  CHECK(finite > instances / 5);
}

}  // namespace

TEST_CASE("contiguous hsmm decoder matches brute force") {
  check_against_oracle(DecodeMode::kHsmmContiguous, 1001, 150);
}

TEST_CASE("gap-tolerant hsmm decoder matches brute force") {
  check_against_oracle(DecodeMode::kHsmmGapped, 1002, 150);
}

TEST_CASE("dihmm decoder matches brute force") {
  check_against_oracle(DecodeMode::kDihmm, 1003, 150);
}

TEST_CASE("trained models match brute force") {
  // End-to-end: models from fit_model rather than hand-assembled tables.
  const Alphabet ab({"_", "A", "B"}, 0);
  Rng rng(1004);
  TrainingConfig cfg;
  cfg.d_cap = 4;
  cfg.forbid_self_transition = false;
  int done = 0;
  while (done < 60) {
    std::vector<TrainingExample> data;
    for (int i = 0; i < rng.uniform_int(1, 3); ++i) {
      const int T = rng.uniform_int(2, 9);
      std::string s;
      for (int t = 0; t < T; ++t) s += "_AB"[rng.uniform_int(0, 2)];
      if (s.find('A') == std::string::npos && s.find('B') == std::string::npos)
        s[0] = 'A';
      TickSequence ticks = test::ticks_from_string(s, ab, "t" + std::to_string(i));
      TrainingExample ex{ticks, segments_from_ticks(ticks, ab)};
      bool too_long = false;
      for (const Segment& seg : ex.segments.segments)
        too_long |= seg.duration > cfg.d_cap;
      if (!too_long) data.push_back(std::move(ex));
    }
    if (data.empty()) continue;
    const DihmmModel model =
        fit_model(data, ab, cfg, Variant::kDihmm, "trained");

    std::string probe;
    const int T = rng.uniform_int(1, 10);
    for (int t = 0; t < T; ++t) probe += "_AB"[rng.uniform_int(0, 2)];
    const TickSequence seq = test::ticks_from_string(probe, ab, "probe");
    DecodeConfig dcfg;
    dcfg.gap_mode = rng.bernoulli(0.5) ? GapMode::kStrictGap : GapMode::kSkip;
    dcfg.allow_trailing_gap = rng.bernoulli(0.75);

    const test::OracleResult expected =
        test::oracle_best_score(model, seq, dcfg, DecodeMode::kDihmm);
    if (!expected.completed) continue;
    ++done;
    const Score got = viterbi_dihmm(model, seq, dcfg);
    if (std::isinf(expected.log_score)) {
      CHECK(got.impossible());
    } else {
      CHECK(got.log_likelihood ==
            Catch::Approx(expected.log_score).margin(1e-9));
    }
  }
}
