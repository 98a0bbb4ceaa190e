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

#include <cstdio>

#include "dihmm/serialize.hpp"
#include "dihmm/synth.hpp"
#include "dihmm/training.hpp"
#include "test_util.hpp"

using namespace dihmm;

namespace {

DihmmModel trained_fixture(Variant variant) {
  const Alphabet a({"_", "A", "B"}, 0);
  TrainingConfig cfg;
  cfg.forbid_self_transition = false;
  std::vector<TrainingExample> data;
  for (const char* s : {"AA__B_", "A___BB", "AA_B__", "B__AA_"}) {
    TickSequence ticks = test::ticks_from_string(s, a, s);
    data.push_back({ticks, segments_from_ticks(ticks, a)});
  }
  return fit_model(data, a, cfg, variant, "fixture");
}

}  // namespace

TEST_CASE("serialize round-trips trained models") {
  for (Variant v : {Variant::kHsmm, Variant::kDihmm}) {
    const DihmmModel model = trained_fixture(v);
    const DihmmModel back = deserialize_model(serialize_model(model));
    CHECK(back == model);
  }
}

TEST_CASE("serialize round-trips generated corpora models") {
  GenPolicy policy;
  policy.num_states = 3;
  policy.d_min = 1;
  policy.d_max = 3;
  policy.l_min = 1;
  policy.l_max = 2;
  policy.count = 12;
  policy.seed = 99;
  const Corpus corpus = generate(policy);
  TrainingConfig cfg;
  cfg.smoothing_alpha = 0.2;
  cfg.d_cap = 8;
  const DihmmModel model =
      fit_model(corpus.items, corpus.alphabet, cfg, Variant::kDihmm, "gen");
  const DihmmModel back = deserialize_model(serialize_model(model));
  CHECK(back == model);
}

TEST_CASE("serialization is byte-stable") {
  const DihmmModel model = trained_fixture(Variant::kDihmm);
  CHECK(serialize_model(model) == serialize_model(model));
}

TEST_CASE("hand-written minimal model parses") {
  const std::string text = R"({
    "format": "dihmm-v1",
    "variant": "hsmm",
    "label": "mini",
    "alphabet": ["_", "A"],
    "gap_symbol": "_",
    "M": 1,
    "D_cap": 4,
    "pi": [{"state": 0, "dur": 2, "p": 1.0}],
    "trans": [],
    "emit": [[0.0, 1.0]],
    "intervals": [],
    "theta_pt": 1e-4,
    "c": 0.5,
    "sigma_floor": 0.5
  })";
  const DihmmModel m = deserialize_model(text);
  CHECK(m.num_states == 1);
  CHECK(m.alphabet.size() == 2);
  CHECK(m.variant == Variant::kHsmm);
  CHECK(m.pi_at(0, 2) == 1.0);
  CHECK(m.intervals.empty());
}

TEST_CASE("load errors name the offending field") {
  DihmmModel model = trained_fixture(Variant::kDihmm);
  nlohmann::ordered_json j = model_to_json(model);

  SECTION("pi sums below one") {
    j["pi"][0]["p"] = j["pi"][0]["p"].get<double>() - 0.1;
    try {
      model_from_json(j);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.field() == "pi");
    }
  }
  SECTION("unknown version tag") {
    j["format"] = "dihmm-v9";
    try {
      model_from_json(j);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.field() == "format");
    }
  }
  SECTION("missing field") {
    j.erase("alphabet");
    CHECK_THROWS_AS(model_from_json(j), LoadError);
  }
  SECTION("gap symbol not in alphabet") {
    j["gap_symbol"] = "zz";
    try {
      model_from_json(j);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(e.field() == "gap_symbol");
    }
  }
  SECTION("transition duration beyond D_cap") {
    j["trans"][0]["to_dur"] = 99;
    CHECK_THROWS_AS(model_from_json(j), LoadError);
  }
  SECTION("malformed document") {
    CHECK_THROWS_AS(deserialize_model("{ not json"), LoadError);
  }
}

TEST_CASE("save and load through a file") {
  const DihmmModel model = trained_fixture(Variant::kDihmm);
  const std::string path = "serialize_test_model.json";
  save_model(model, path);
  const DihmmModel back = load_model(path);
  CHECK(back == model);
  std::remove(path.c_str());
}
