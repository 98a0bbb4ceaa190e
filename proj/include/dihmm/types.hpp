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
#include <string>
#include <vector>

#include "dihmm/error.hpp"

namespace dihmm {

// Ordered symbol set of a corpus or model. One symbol is designated as the
// gap symbol: the value observed on ticks where no event is active. Event
// symbols (everything except the gap) double as hidden-state identities in
// trained models: state m corresponds to the m-th event symbol in alphabet
// order.
struct Alphabet {
  std::vector<std::string> names;
  int gap_id = 0;

  Alphabet() = default;
  Alphabet(std::vector<std::string> n, int gap) : names(std::move(n)), gap_id(gap) {
    validate();
  }

  int size() const { return static_cast<int>(names.size()); }
  int num_event_symbols() const { return size() - 1; }

  bool is_gap(int sym) const { return sym == gap_id; }

  // Index of `name`, or -1 if absent.
  int id_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (names[i] == name) return i;
    return -1;
  }

  // Hidden-state index of an event symbol (rank among non-gap symbols).
  int state_of_symbol(int sym) const {
    if (sym == gap_id) throw DataError("gap symbol has no hidden state");
    return sym < gap_id ? sym : sym - 1;
  }

  int symbol_of_state(int state) const {
    return state < gap_id ? state : state + 1;
  }

  void validate() const {
    if (names.empty()) throw DataError("alphabet: empty");
    if (gap_id < 0 || gap_id >= size())
      throw DataError("alphabet: gap symbol index out of range");
    for (int i = 0; i < size(); ++i) {
      if (names[i].empty()) throw DataError("alphabet: empty symbol name");
      for (int j = i + 1; j < size(); ++j)
        if (names[i] == names[j])
          throw DataError("alphabet: duplicate symbol name '" + names[i] + "'");
    }
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) = default;
};

// Observation sequence at unit tick resolution. Tick values are symbol ids
// into an Alphabet owned by the surrounding corpus or model.
struct TickSequence {
  std::string id;
  std::string label;  // empty when unlabeled
  std::vector<int> ticks;

  int length() const { return static_cast<int>(ticks.size()); }

  void validate(const Alphabet& alphabet) const {
    if (ticks.empty()) throw DataError("sequence '" + id + "': empty");
    for (int t : ticks)
      if (t < 0 || t >= alphabet.size())
        throw DataError("sequence '" + id + "': tick symbol out of range");
  }

  friend bool operator==(const TickSequence& a, const TickSequence& b) = default;
};

// One hidden-state visit: state identity, 0-based start tick, duration in
// ticks (>= 1).
struct Segment {
  int state = 0;
  int start = 0;
  int duration = 1;

  int end() const { return start + duration; }

  friend bool operator==(const Segment& a, const Segment& b) = default;
};

// Ordered, non-overlapping segments. The gap between consecutive segments
// is the state interval; it is derived, never stored.
struct SegmentSequence {
  std::vector<Segment> segments;

  int size() const { return static_cast<int>(segments.size()); }
  bool empty() const { return segments.empty(); }

  // Interval before segment n (n >= 1): ticks between the end of segment
  // n-1 and the start of segment n.
  int interval_before(int n) const {
    return segments[n].start - segments[n - 1].end();
  }

  std::vector<int> intervals() const {
    std::vector<int> out;
    for (int n = 1; n < size(); ++n) out.push_back(interval_before(n));
    return out;
  }

  // Last covered tick index + 1 (0 when empty).
  int span_end() const { return empty() ? 0 : segments.back().end(); }

  // total_ticks < 0 skips the sequence-length bound check.
  void validate(int total_ticks = -1) const {
    for (int n = 0; n < size(); ++n) {
      const Segment& s = segments[n];
      if (s.duration < 1)
        throw DataError("segment " + std::to_string(n) + ": duration < 1");
      if (s.start < 0)
        throw DataError("segment " + std::to_string(n) + ": negative start");
      if (n > 0 && interval_before(n) < 0)
        throw DataError("segment " + std::to_string(n) + ": overlaps predecessor");
    }
    if (total_ticks >= 0 && span_end() > total_ticks)
      throw DataError("segments extend past tick " + std::to_string(total_ticks));
  }

  friend bool operator==(const SegmentSequence& a, const SegmentSequence& b) = default;
};

}  // namespace dihmm
