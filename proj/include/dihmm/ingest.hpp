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

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dihmm/error.hpp"
#include "dihmm/types.hpp"

namespace dihmm {

// Waveform-to-tick conversion parameters. One tick is one hop window; a
// tick is "on" when its RMS reaches rms_threshold times the loudest
// window's RMS.
struct AudioParams {
  int hop = 0;                 // samples per tick; 0 = derive from tempo
  double tempo_bpm = 120.0;    // used when hop == 0 (sixteenth-note ticks)
  double rms_threshold = 0.1;  // relative to the global peak RMS
  int ticks_per_bar = 16;
  int bars_per_sequence = 1;
  std::string on_name = "on";
  std::string off_name = "off";

  void validate() const {
    if (hop < 0) throw InvalidParameterError("audio: hop must be >= 1");
    if (hop == 0 && !(tempo_bpm > 0.0))
      throw InvalidParameterError("audio: tempo must be > 0");
    if (!(rms_threshold > 0.0 && rms_threshold < 1.0))
      throw InvalidParameterError("audio: rms_threshold must be in (0, 1)");
    if (ticks_per_bar < 1)
      throw InvalidParameterError("audio: ticks_per_bar must be >= 1");
    if (bars_per_sequence < 1)
      throw InvalidParameterError("audio: bars_per_sequence must be >= 1");
  }

  // Sixteenth-note hop at the configured tempo.
  int effective_hop(int sample_rate) const {
    if (hop > 0) return hop;
    const double quarter_seconds = 60.0 / tempo_bpm;
    return std::max(1, static_cast<int>(sample_rate * quarter_seconds / 4.0));
  }
};

inline Alphabet ingest_alphabet(const AudioParams& p) {
  return Alphabet({p.off_name, p.on_name}, 0);
}

struct WavData {
  int sample_rate = 0;
  std::vector<double> samples;  // mono, scaled to [-1, 1]
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

// Minimal RIFF/WAVE reader. Only 16-bit mono PCM is supported; anything
// else is converted upstream.
inline WavData parse_wav(const std::vector<unsigned char>& bytes,
                         const std::string& name = "wav") {
  if (bytes.size() < 44) throw DataError(name + ": truncated WAV header");
  if (std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE")
    throw UnsupportedFormatError(name + ": not a RIFF/WAVE file");

  WavData wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string chunk(bytes.begin() + pos, bytes.begin() + pos + 4);
    const std::uint32_t size = detail::read_u32(&bytes[pos + 4]);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size())
      throw DataError(name + ": chunk '" + chunk + "' overruns file");
    if (chunk == "fmt ") {
      if (size < 16) throw DataError(name + ": short fmt chunk");
      const int format = detail::read_u16(&bytes[body]);
      const int channels = detail::read_u16(&bytes[body + 2]);
      const int bits = detail::read_u16(&bytes[body + 14]);
      if (format != 1 || bits != 16)
        throw UnsupportedFormatError(name + ": only 16-bit PCM is supported");
      if (channels != 1)
        throw UnsupportedFormatError(name + ": only mono input is supported");
      wav.sample_rate = static_cast<int>(detail::read_u32(&bytes[body + 4]));
      have_fmt = true;
    } else if (chunk == "data") {
      if (!have_fmt) throw DataError(name + ": data chunk before fmt");
      wav.samples.reserve(size / 2);
      for (std::uint32_t i = 0; i + 1 < size; i += 2) {
        const std::int16_t s =
            static_cast<std::int16_t>(detail::read_u16(&bytes[body + i]));
        wav.samples.push_back(static_cast<double>(s) / 32768.0);
      }
    }
    pos = body + size + (size % 2);  // chunks are word aligned
  }
  if (wav.sample_rate <= 0) throw DataError(name + ": missing fmt chunk");
  if (wav.samples.empty()) throw DataError(name + ": no samples");
  return wav;
}

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes, path);
}

// One tick per hop window: "on" when the window RMS reaches the threshold
// relative to the loudest window, "off" otherwise. A trailing partial
// window is dropped, so the output length is floor(samples / hop).
inline TickSequence tokenize_wav(const WavData& wav, const AudioParams& p,
                                 std::string id = "wav") {
  p.validate();
  if (wav.samples.empty()) throw DataError("tokenize: no samples");
  const int hop = p.effective_hop(wav.sample_rate);
  const int num_ticks = static_cast<int>(wav.samples.size()) / hop;
  if (num_ticks < 1)
    throw DataError("tokenize: input shorter than one hop window");

  std::vector<double> rms(num_ticks);
  double peak = 0.0;
  for (int t = 0; t < num_ticks; ++t) {
    double energy = 0.0;
    for (int i = t * hop; i < (t + 1) * hop; ++i)
      energy += wav.samples[i] * wav.samples[i];
    rms[t] = std::sqrt(energy / hop);
    peak = std::max(peak, rms[t]);
  }

  TickSequence seq;
  seq.id = std::move(id);
  seq.ticks.resize(num_ticks);
  const double threshold = p.rms_threshold * peak;
  for (int t = 0; t < num_ticks; ++t)
    seq.ticks[t] = (peak > 0.0 && rms[t] >= threshold) ? 1 : 0;
  return seq;
}

// Consecutive chunks of ticks_per_bar * bars_per_sequence ticks; the final
// partial chunk is dropped. Ids get a "#<index>" suffix.
inline std::vector<TickSequence> split_bars(const TickSequence& seq,
                                            const AudioParams& p) {
  p.validate();
  const int chunk = p.ticks_per_bar * p.bars_per_sequence;
  if (seq.length() < chunk)
    throw DataError("split_bars: sequence shorter than one chunk");
  std::vector<TickSequence> out;
  for (int begin = 0; begin + chunk <= seq.length(); begin += chunk) {
    TickSequence bar;
    bar.id = seq.id + "#" + std::to_string(out.size());
    bar.ticks.assign(seq.ticks.begin() + begin, seq.ticks.begin() + begin + chunk);
    out.push_back(std::move(bar));
  }
  return out;
}

// Labels each bar with a rhythm id shared by identical tick patterns,
// assigned in first-occurrence order ("r0", "r1", ...).
inline std::vector<TickSequence> dedupe_rhythms(
    const std::vector<TickSequence>& bars) {
  std::map<std::vector<int>, std::string> seen;
  std::vector<TickSequence> out;
  for (const TickSequence& bar : bars) {
    auto it = seen.find(bar.ticks);
    if (it == seen.end())
      it = seen.insert({bar.ticks, "r" + std::to_string(seen.size())}).first;
    TickSequence tagged = bar;
    tagged.label = it->second;
    out.push_back(std::move(tagged));
  }
  return out;
}

}  // namespace dihmm
