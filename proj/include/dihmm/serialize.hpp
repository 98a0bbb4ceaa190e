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

#include <json.hpp>

#include "dihmm/model.hpp"

namespace dihmm {

inline constexpr const char* kModelFormatTag = "dihmm-v1";

// Model files are JSON with a fixed key order and sparse probability
// tables: absent pi/trans entries are probability zero.
inline nlohmann::ordered_json model_to_json(const DihmmModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kModelFormatTag;
  j["variant"] = variant_name(model.variant);
  j["label"] = model.label;
  j["alphabet"] = model.alphabet.names;
  j["gap_symbol"] = model.alphabet.names[model.alphabet.gap_id];
  j["M"] = model.num_states;
  j["D_cap"] = model.d_cap;

  auto pi = nlohmann::ordered_json::array();
  for (int m = 0; m < model.num_states; ++m)
    for (int d = 1; d <= model.d_cap; ++d)
      if (model.pi_at(m, d) > 0.0)
        pi.push_back({{"state", m}, {"dur", d}, {"p", model.pi_at(m, d)}});
  j["pi"] = std::move(pi);

  auto trans = nlohmann::ordered_json::array();
  for (int pm = 0; pm < model.num_states; ++pm)
    for (int pd = 1; pd <= model.d_cap; ++pd)
      for (int m = 0; m < model.num_states; ++m)
        for (int d = 1; d <= model.d_cap; ++d) {
          const double p = model.trans.at(pm, pd, m, d);
          if (p > 0.0)
            trans.push_back({{"from_state", pm},
                             {"from_dur", pd},
                             {"to_state", m},
                             {"to_dur", d},
                             {"p", p}});
        }
  j["trans"] = std::move(trans);

  auto emit = nlohmann::ordered_json::array();
  for (int m = 0; m < model.num_states; ++m) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < model.alphabet.size(); ++k)
      row.push_back(model.emit.at(m, k));
    emit.push_back(std::move(row));
  }
  j["emit"] = std::move(emit);

  auto intervals = nlohmann::ordered_json::array();
  for (const auto& [pair, im] : model.intervals)
    intervals.push_back({{"from", pair.first},
                         {"to", pair.second},
                         {"mu", im.mu},
                         {"sigma", im.sigma},
                         {"x_lo", im.x_lo},
                         {"x_hi", im.x_hi},
                         {"n", im.sample_count}});
  j["intervals"] = std::move(intervals);

  j["theta_pt"] = model.theta_pt;
  j["c"] = model.c;
  j["sigma_floor"] = model.sigma_floor;
  return j;
}

namespace detail {

template <typename T>
T get_field(const nlohmann::json& j, const std::string& field) {
  if (!j.contains(field)) throw LoadError(field, "missing");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw LoadError(field, "wrong type");
  }
}

}  // namespace detail

inline DihmmModel model_from_json(const nlohmann::json& j) {
  const std::string format = detail::get_field<std::string>(j, "format");
  if (format != kModelFormatTag)
    throw LoadError("format", "unknown version tag '" + format + "'");

  DihmmModel model;
  try {
    model.variant = variant_from_name(detail::get_field<std::string>(j, "variant"));
  } catch (const DataError& e) {
    throw LoadError("variant", e.what());
  }
  model.label = detail::get_field<std::string>(j, "label");

  const auto names = detail::get_field<std::vector<std::string>>(j, "alphabet");
  const std::string gap = detail::get_field<std::string>(j, "gap_symbol");
  int gap_id = -1;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == gap) gap_id = static_cast<int>(i);
  if (gap_id < 0) throw LoadError("gap_symbol", "'" + gap + "' not in alphabet");
  try {
    model.alphabet = Alphabet(names, gap_id);
  } catch (const DataError& e) {
    throw LoadError("alphabet", e.what());
  }

  model.num_states = detail::get_field<int>(j, "M");
  model.d_cap = detail::get_field<int>(j, "D_cap");
  if (model.num_states < 1) throw LoadError("M", "must be >= 1");
  if (model.d_cap < 1) throw LoadError("D_cap", "must be >= 1");
  model.theta_pt = detail::get_field<double>(j, "theta_pt");
  model.c = detail::get_field<double>(j, "c");
  model.sigma_floor = detail::get_field<double>(j, "sigma_floor");

  auto check_pair = [&](int state, int dur, const std::string& field) {
    if (state < 0 || state >= model.num_states)
      throw LoadError(field, "state out of range");
    if (dur < 1 || dur > model.d_cap)
      throw LoadError(field, "duration out of range");
  };

  model.pi.assign(static_cast<std::size_t>(model.num_states) * model.d_cap, 0.0);
  for (const auto& entry : detail::get_field<nlohmann::json>(j, "pi")) {
    const int state = detail::get_field<int>(entry, "state");
    const int dur = detail::get_field<int>(entry, "dur");
    check_pair(state, dur, "pi");
    model.pi_at(state, dur) = detail::get_field<double>(entry, "p");
  }

  model.trans = TransitionTable(model.num_states, model.d_cap);
  for (const auto& entry : detail::get_field<nlohmann::json>(j, "trans")) {
    const int fs = detail::get_field<int>(entry, "from_state");
    const int fd = detail::get_field<int>(entry, "from_dur");
    const int ts = detail::get_field<int>(entry, "to_state");
    const int td = detail::get_field<int>(entry, "to_dur");
    check_pair(fs, fd, "trans");
    check_pair(ts, td, "trans");
    model.trans.at(fs, fd, ts, td) = detail::get_field<double>(entry, "p");
  }

  const auto emit = detail::get_field<std::vector<std::vector<double>>>(j, "emit");
  if (static_cast<int>(emit.size()) != model.num_states)
    throw LoadError("emit", "expected one row per state");
  model.emit = EmissionTable(model.num_states, model.alphabet.size());
  for (int m = 0; m < model.num_states; ++m) {
    if (static_cast<int>(emit[m].size()) != model.alphabet.size())
      throw LoadError("emit", "row " + std::to_string(m) + " has wrong length");
    for (int k = 0; k < model.alphabet.size(); ++k)
      model.emit.at(m, k) = emit[m][k];
  }

  for (const auto& entry : detail::get_field<nlohmann::json>(j, "intervals")) {
    IntervalModel im;
    const int from = detail::get_field<int>(entry, "from");
    const int to = detail::get_field<int>(entry, "to");
    im.mu = detail::get_field<double>(entry, "mu");
    im.sigma = detail::get_field<double>(entry, "sigma");
    im.x_lo = detail::get_field<int>(entry, "x_lo");
    im.x_hi = detail::get_field<int>(entry, "x_hi");
    im.sample_count = detail::get_field<std::int64_t>(entry, "n");
    if (from < 0 || from >= model.num_states || to < 0 || to >= model.num_states)
      throw LoadError("intervals", "state out of range");
    if (model.intervals.count({from, to}))
      throw LoadError("intervals", "duplicate pair");
    model.intervals[{from, to}] = im;
  }

  try {
    validate_model(model);
  } catch (const ModelError& e) {
    throw LoadError(e.field(), e.what());
  }
  return model;
}

inline std::string serialize_model(const DihmmModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline DihmmModel deserialize_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("document", std::string("malformed JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const DihmmModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << serialize_model(model);
}

inline DihmmModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return deserialize_model(text);
}

}  // namespace dihmm
