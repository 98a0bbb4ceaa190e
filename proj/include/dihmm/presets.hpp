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

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dihmm/eval.hpp"

namespace dihmm {

// File-driven experiment configuration. Each of the three experiment types
// ships as a checked-in preset so runs are reproducible from the CLI.
struct EvalPreset {
  std::string experiment;  // "discrimination" | "recognition" | "timing"
  std::uint64_t seed = 0;
  std::vector<Variant> variants;
  TrainingConfig training;
  DecodeConfig decode;

  // discrimination + timing
  std::vector<GenPolicy> corpus_policies;
  int corpus_count = 0;
  std::vector<int> k_train;
  JitterPolicy train_jitter;

  // recognition
  std::vector<GenPolicy> pattern_policies;
  int pattern_count = 0;
  // One rendition per floor: a floor of f ticks sustains every shorter note
  // to f (different instruments hold notes differently); jitter adds small
  // per-note length variation on top.
  std::vector<int> train_floors{1, 1, 1};
  std::vector<int> test_floors{1, 1, 1};
  JitterPolicy rendition_jitter;
  std::vector<std::string> setups;  // subset of {"one_bar", "two_bar"}

  // timing
  int repeats = 5;
  double min_sample_seconds = 0.05;
};

namespace detail {

inline GenPolicy policy_from_json(const nlohmann::json& j) {
  GenPolicy p;
  p.num_states = j.at("n").get<int>();
  p.d_min = j.at("d").at(0).get<int>();
  p.d_max = j.at("d").at(1).get<int>();
  p.l_min = j.at("l").at(0).get<int>();
  p.l_max = j.at("l").at(1).get<int>();
  if (j.contains("t") && !j.at("t").is_null()) p.total_ticks = j.at("t").get<int>();
  p.pad_to_total = j.value("pad", false);
  p.shared_symbol = j.value("shared_symbol", false);
  p.count = j.value("count", 1);
  p.validate();
  return p;
}

inline JitterPolicy jitter_from_json(const nlohmann::json& j) {
  JitterPolicy jp;
  jp.max_shift = j.value("max_shift", 0);
  jp.prob = j.value("prob", 0.0);
  jp.mode = jitter_mode_from_name(j.value("mode", "auto"));
  return jp;
}

inline TrainingConfig training_from_json(const nlohmann::json& j) {
  TrainingConfig cfg;
  cfg.smoothing_alpha = j.value("alpha", cfg.smoothing_alpha);
  cfg.sigma_floor = j.value("sigma_floor", cfg.sigma_floor);
  cfg.theta_pt = j.value("theta_pt", cfg.theta_pt);
  cfg.c = j.value("c", cfg.c);
  cfg.d_cap = j.value("d_cap", cfg.d_cap);
  cfg.forbid_self_transition =
      j.value("forbid_self_transition", cfg.forbid_self_transition);
  cfg.validate();
  return cfg;
}

inline DecodeConfig decode_from_json(const nlohmann::json& j) {
  DecodeConfig cfg;
  if (j.contains("gap_mode"))
    cfg.gap_mode = gap_mode_from_name(j.at("gap_mode").get<std::string>());
  cfg.allow_trailing_gap = j.value("allow_trailing_gap", cfg.allow_trailing_gap);
  cfg.normalize_scores = j.value("normalize_scores", cfg.normalize_scores);
  cfg.l_cap_slack = j.value("l_cap_slack", cfg.l_cap_slack);
  return cfg;
}

}  // namespace detail

inline EvalPreset parse_preset(const nlohmann::json& j) {
  EvalPreset p;
  p.experiment = j.at("experiment").get<std::string>();
  if (p.experiment != "discrimination" && p.experiment != "recognition" &&
      p.experiment != "timing")
    throw DataError("preset: unknown experiment '" + p.experiment + "'");
  p.seed = j.value("seed", 0ull);
  for (const auto& v : j.at("variants"))
    p.variants.push_back(variant_from_name(v.get<std::string>()));
  if (j.contains("training"))
    p.training = detail::training_from_json(j.at("training"));
  if (j.contains("decode")) p.decode = detail::decode_from_json(j.at("decode"));

  if (j.contains("corpus")) {
    const auto& c = j.at("corpus");
    // Absent pooled count: each policy samples its own "count" (balanced).
    p.corpus_count = c.value("count", 0);
    for (const auto& pj : c.at("policies"))
      p.corpus_policies.push_back(detail::policy_from_json(pj));
  }
  if (j.contains("k_train"))
    p.k_train = j.at("k_train").get<std::vector<int>>();
  if (j.contains("train_jitter"))
    p.train_jitter = detail::jitter_from_json(j.at("train_jitter"));

  if (j.contains("patterns")) {
    const auto& c = j.at("patterns");
    p.pattern_count = c.value("count", 0);
    for (const auto& pj : c.at("policies"))
      p.pattern_policies.push_back(detail::policy_from_json(pj));
  }
  if (j.contains("renditions")) {
    const auto& r = j.at("renditions");
    if (r.contains("train_floors"))
      p.train_floors = r.at("train_floors").get<std::vector<int>>();
    if (r.contains("test_floors"))
      p.test_floors = r.at("test_floors").get<std::vector<int>>();
    if (r.contains("jitter"))
      p.rendition_jitter = detail::jitter_from_json(r.at("jitter"));
  }
  p.setups = j.value("setups", std::vector<std::string>{});

  p.repeats = j.value("repeats", 5);
  p.min_sample_seconds = j.value("min_sample_seconds", 0.05);
  return p;
}

inline EvalPreset load_preset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open preset '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("preset '" + path + "': malformed JSON: " + e.what());
  }
  try {
    return parse_preset(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("preset '" + path + "': " + e.what());
  }
}

// Bar-pattern corpora for the recognition experiment. Patterns are distinct
// one-bar on/off rhythms; each rendition of a pattern applies one
// instrument's note-length floor plus small duration jitter, at fixed
// onsets. The two-bar setup chains consecutive patterns, so neighboring
// labels share a bar the way consecutive bars of one song do.
struct RecognitionData {
  Corpus train;
  Corpus test;
};

inline RecognitionData make_recognition_corpora(const EvalPreset& p,
                                                bool two_bar) {
  if (p.pattern_policies.empty())
    throw DataError("recognition preset: no pattern policies");
  Corpus patterns = generate_union(p.pattern_policies, p.pattern_count,
                                   derive_seed(p.seed, 11), "bar");

  std::vector<TrainingExample> units;
  if (!two_bar) {
    units = patterns.items;
  } else {
    for (int i = 0; i + 1 < patterns.size(); ++i) {
      const TrainingExample& a = patterns.items[i];
      const TrainingExample& b = patterns.items[i + 1];
      TrainingExample unit;
      unit.ticks.id = a.ticks.id + "+" + b.ticks.id;
      unit.ticks.label = unit.ticks.id;
      unit.ticks.ticks = a.ticks.ticks;
      unit.ticks.ticks.insert(unit.ticks.ticks.end(), b.ticks.ticks.begin(),
                              b.ticks.ticks.end());
      unit.segments = segments_from_ticks(unit.ticks, patterns.alphabet);
      units.push_back(std::move(unit));
    }
  }

  RecognitionData data;
  data.train.alphabet = patterns.alphabet;
  data.test.alphabet = patterns.alphabet;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const TrainingExample& unit = units[u];
    const int span = unit.ticks.length();
    const int n_train = static_cast<int>(p.train_floors.size());
    const int total = n_train + static_cast<int>(p.test_floors.size());
    for (int r = 0; r < total; ++r) {
      const int floor_ticks =
          r < n_train ? p.train_floors[r] : p.test_floors[r - n_train];
      Rng rng(derive_seed(p.seed, 100 + u, r));
      TrainingExample rend;
      rend.segments = apply_duration_floor(unit.segments, span, floor_ticks);
      rend.segments =
          jitter_durations(rend.segments, span, p.rendition_jitter, rng);
      rend.ticks = render_ticks(rend.segments, span, patterns.alphabet,
                                unit.ticks.id + "#r" + std::to_string(r),
                                unit.ticks.label);
      (r < n_train ? data.train : data.test).items.push_back(std::move(rend));
    }
  }
  return data;
}

inline Corpus make_preset_corpus(const EvalPreset& p) {
  if (p.corpus_policies.empty())
    throw DataError("preset: no corpus policies");
  return generate_union(p.corpus_policies, p.corpus_count,
                        derive_seed(p.seed, 7), "seq");
}

inline EvalReport run_preset(const EvalPreset& p, int threads = 1) {
  EvalReport report;
  if (p.experiment == "discrimination") {
    const Corpus corpus = make_preset_corpus(p);
    const bool fixed_span =
        !p.corpus_policies.empty() && p.corpus_policies.front().total_ticks.has_value();
    for (Variant variant : p.variants)
      report.merge(run_discrimination(corpus, p.k_train, variant, p.training,
                                      p.decode, p.train_jitter, fixed_span,
                                      derive_seed(p.seed, 23), threads));
  } else if (p.experiment == "recognition") {
    std::vector<std::string> setups = p.setups;
    if (setups.empty()) setups = {"one_bar", "two_bar"};
    for (const std::string& setup : setups) {
      if (setup != "one_bar" && setup != "two_bar")
        throw DataError("recognition preset: unknown setup '" + setup + "'");
      const RecognitionData data =
          make_recognition_corpora(p, setup == "two_bar");
      for (Variant variant : p.variants)
        report.merge(run_recognition(data.train, data.test, variant,
                                     p.training, p.decode, setup, threads));
    }
  } else {
    const Corpus corpus = make_preset_corpus(p);
    const bool fixed_span =
        !p.corpus_policies.empty() && p.corpus_policies.front().total_ticks.has_value();
    for (Variant variant : p.variants)
      report.merge(run_timing(corpus, p.k_train, variant, p.training, p.decode,
                              p.train_jitter, fixed_span,
                              derive_seed(p.seed, 23), p.repeats,
                              p.min_sample_seconds));
  }
  return report;
}

}  // namespace dihmm
