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
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dihmm/training.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

// A set of sequences over one shared alphabet. Items always carry both the
// tick form and the segmental reading (derived on load when absent).
struct Corpus {
  Alphabet alphabet;
  std::vector<TrainingExample> items;

  int size() const { return static_cast<int>(items.size()); }
};

inline constexpr const char* kDefaultGapName = "_";

namespace detail {

// First pass over corpus lines: fixes the alphabet (gap first, then event
// symbols in first-occurrence order) so tick ids are stable.
class AlphabetBuilder {
 public:
  explicit AlphabetBuilder(std::string gap_name)
      : gap_name_(std::move(gap_name)) {
    names_.push_back(gap_name_);
  }

  int id_of(const std::string& name) {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    names_.push_back(name);
    return static_cast<int>(names_.size()) - 1;
  }

  const std::string& gap_name() const { return gap_name_; }
  Alphabet build() const { return Alphabet(names_, 0); }

 private:
  std::string gap_name_;
  std::vector<std::string> names_;
};

}  // namespace detail

// Reads the JSON Lines corpus format. Two line forms are accepted:
//   {"id", "label", "ticks": ["A", "_", ...]}            (tick form)
//   {"id", "label", "T", "gap", "events": [{"sym","start","dur"}]}
// Both may carry "gap" to name the gap symbol (default "_"). The event form
// is rendered to ticks; segments are derived for every item.
inline Corpus parse_corpus(std::istream& in,
                           const std::string& default_gap = kDefaultGapName) {
  // The gap symbol must be consistent across lines; the first line that
  // names one wins.
  std::vector<nlohmann::json> lines;
  std::string line;
  int line_no = 0;
  std::string gap_name = default_gap;
  bool gap_fixed = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corpus line " + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
    if (j.contains("gap")) {
      const std::string g = j.at("gap").get<std::string>();
      if (gap_fixed && g != gap_name)
        throw DataError("corpus line " + std::to_string(line_no) +
                        ": gap symbol '" + g + "' conflicts with '" +
                        gap_name + "'");
      gap_name = g;
      gap_fixed = true;
    }
    lines.push_back(std::move(j));
  }

  detail::AlphabetBuilder alphabet(gap_name);
  struct Raw {
    std::string id, label;
    std::vector<int> ticks;
  };
  std::vector<Raw> raws;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const nlohmann::json& j = lines[i];
    Raw raw;
    raw.id = j.value("id", "line" + std::to_string(i + 1));
    raw.label = j.value("label", "");
    if (j.contains("ticks")) {
      for (const auto& sym : j.at("ticks"))
        raw.ticks.push_back(alphabet.id_of(sym.get<std::string>()));
    } else if (j.contains("events")) {
      const int total = j.at("T").get<int>();
      if (total < 1)
        throw DataError("corpus item '" + raw.id + "': T must be >= 1");
      raw.ticks.assign(total, 0);  // gap is always id 0 here
      for (const auto& ev : j.at("events")) {
        const int sym = alphabet.id_of(ev.at("sym").get<std::string>());
        const int start = ev.at("start").get<int>();
        const int dur = ev.at("dur").get<int>();
        if (sym == 0)
          throw DataError("corpus item '" + raw.id + "': event uses the gap symbol");
        if (start < 0 || dur < 1 || start + dur > total)
          throw DataError("corpus item '" + raw.id + "': event outside [0, T)");
        for (int t = start; t < start + dur; ++t) raw.ticks[t] = sym;
      }
    } else {
      throw DataError("corpus item '" + raw.id + "': neither ticks nor events");
    }
    if (raw.ticks.empty())
      throw DataError("corpus item '" + raw.id + "': empty tick sequence");
    raws.push_back(std::move(raw));
  }

  Corpus corpus;
  corpus.alphabet = alphabet.build();
  for (Raw& raw : raws) {
    TrainingExample ex;
    ex.ticks.id = std::move(raw.id);
    ex.ticks.label = std::move(raw.label);
    ex.ticks.ticks = std::move(raw.ticks);
    ex.segments = segments_from_ticks(ex.ticks, corpus.alphabet);
    corpus.items.push_back(std::move(ex));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path,
                          const std::string& default_gap = kDefaultGapName) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus '" + path + "'");
  return parse_corpus(in, default_gap);
}

// Writes the tick form, one JSON object per line, with an explicit gap name.
inline void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const TrainingExample& ex : corpus.items) {
    nlohmann::ordered_json j;
    j["id"] = ex.ticks.id;
    if (!ex.ticks.label.empty()) j["label"] = ex.ticks.label;
    j["gap"] = corpus.alphabet.names[corpus.alphabet.gap_id];
    auto ticks = nlohmann::ordered_json::array();
    for (int t : ex.ticks.ticks) ticks.push_back(corpus.alphabet.names[t]);
    j["ticks"] = std::move(ticks);
    out << j.dump() << "\n";
  }
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_corpus(corpus, out);
}

}  // namespace dihmm
