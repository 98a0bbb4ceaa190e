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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dihmm/dihmm.hpp"

namespace fs = std::filesystem;
using namespace dihmm;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void info(const std::string& msg) {
  if (g_log_level >= 1) std::cerr << msg << "\n";
}

std::pair<int, int> parse_range(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected lo:hi, got '" + text + "'");
  }
}

std::string safe_filename(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' ||
            c == '-' || c == '+' || c == '_')
               ? c
               : '_';
  return out.empty() ? "_" : out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << text;
}

// Remaps a corpus sequence into a model's alphabet by symbol name.
TickSequence remap(const TickSequence& in, const Alphabet& from,
                   const Alphabet& to) {
  TickSequence seq = in;
  seq.ticks.clear();
  for (int t : in.ticks) {
    const int sym = to.id_of(from.names[t]);
    if (sym < 0)
      throw DataError("sequence '" + in.id + "': symbol '" + from.names[t] +
                      "' not in model alphabet");
    seq.ticks.push_back(sym);
  }
  return seq;
}

struct SynthArgs {
  int n = 3;
  std::string d_range, l_range;
  std::optional<int> t;
  bool pad = false;
  int count = 1;
  std::uint64_t seed = 0;
  bool shared = false;
  int jitter_max = 0;
  double jitter_prob = 0.0;
  std::string prefix = "seq";
  std::string out;
};

int cmd_synth(const SynthArgs& a) {
  GenPolicy p;
  p.num_states = a.n;
  std::tie(p.d_min, p.d_max) = parse_range(a.d_range, "--d");
  std::tie(p.l_min, p.l_max) = parse_range(a.l_range, "--l");
  p.total_ticks = a.t;
  p.pad_to_total = a.pad;
  p.count = a.count;
  p.seed = a.seed;
  p.jitter = {a.jitter_max, a.jitter_prob};
  p.shared_symbol = a.shared;
  p.id_prefix = a.prefix;
  const Corpus corpus = generate(p);
  save_corpus(corpus, a.out);
  info("wrote " + std::to_string(corpus.size()) + " sequences to " + a.out);
  return 0;
}

struct IngestArgs {
  std::string in, out;
  int hop = 0;
  double tempo = 120.0;
  double rms_threshold = 0.1;
  int ticks_per_bar = 16;
  int bars_per_seq = 1;
};

int cmd_ingest(const IngestArgs& a) {
  AudioParams p;
  p.hop = a.hop;
  p.tempo_bpm = a.tempo;
  p.rms_threshold = a.rms_threshold;
  p.ticks_per_bar = a.ticks_per_bar;
  p.bars_per_sequence = a.bars_per_seq;
  p.validate();

  const WavData wav = read_wav(a.in);
  const TickSequence ticks =
      tokenize_wav(wav, p, fs::path(a.in).stem().string());
  const auto bars = split_bars(ticks, p);
  const auto tagged = dedupe_rhythms(bars);

  Corpus corpus;
  corpus.alphabet = ingest_alphabet(p);
  for (const TickSequence& bar : tagged)
    corpus.items.push_back({bar, segments_from_ticks(bar, corpus.alphabet)});
  save_corpus(corpus, a.out);
  info("tokenized " + std::to_string(ticks.length()) + " ticks into " +
       std::to_string(corpus.size()) + " sequences (" + a.out + ")");
  return 0;
}

struct TrainArgs {
  std::string in, out_dir;
  std::string variant = "dihmm";
  TrainingConfig cfg;
  bool allow_self = false;
  int threads = 1;
};

int cmd_train(const TrainArgs& a) {
  TrainingConfig cfg = a.cfg;
  cfg.forbid_self_transition = !a.allow_self;
  Corpus corpus = load_corpus(a.in);
  // Unlabeled items train one model each, keyed by their id.
  for (TrainingExample& ex : corpus.items)
    if (ex.ticks.label.empty()) ex.ticks.label = ex.ticks.id;
  const auto models = fit_label_set(corpus.items, corpus.alphabet, cfg,
                                    variant_from_name(a.variant), a.threads);
  fs::create_directories(a.out_dir);
  for (const auto& [label, model] : models)
    save_model(model,
               (fs::path(a.out_dir) / (safe_filename(label) + ".json")).string());
  info("wrote " + std::to_string(models.size()) + " models to " + a.out_dir);
  return 0;
}

DecodeConfig decode_config(const std::string& gap_mode, bool no_trailing,
                           bool normalize, int slack) {
  DecodeConfig cfg;
  cfg.gap_mode = gap_mode_from_name(gap_mode);
  cfg.allow_trailing_gap = !no_trailing;
  cfg.normalize_scores = normalize;
  cfg.l_cap_slack = slack;
  return cfg;
}

struct ScoreArgs {
  std::string model, in, id;
  std::string gap_mode = "strict-gap";
  bool no_trailing_gap = false;
  int l_cap_slack = 0;
  bool as_json = false;
};

int cmd_score(const ScoreArgs& a) {
  const DihmmModel model = load_model(a.model);
  const Corpus corpus = load_corpus(a.in);
  const DecodeConfig cfg =
      decode_config(a.gap_mode, a.no_trailing_gap, false, a.l_cap_slack);
  bool matched = false;
  for (const TrainingExample& ex : corpus.items) {
    if (!a.id.empty() && ex.ticks.id != a.id) continue;
    matched = true;
    const TickSequence seq = remap(ex.ticks, corpus.alphabet, model.alphabet);
    const Score s = score_sequence(model, seq, cfg);
    nlohmann::ordered_json j;
    j["id"] = seq.id;
    if (s.impossible())
      j["log_likelihood"] = nullptr;
    else
      j["log_likelihood"] = s.log_likelihood;
    auto path = nlohmann::ordered_json::array();
    if (s.best_path)
      for (const Segment& seg : s.best_path->segments)
        path.push_back(
            {{"sym",
              model.alphabet.names[model.alphabet.symbol_of_state(seg.state)]},
             {"start", seg.start},
             {"dur", seg.duration}});
    j["path"] = std::move(path);
    if (a.as_json) {
      std::cout << j.dump() << "\n";
    } else {
      std::cout << seq.id << "\t"
                << (s.impossible() ? "-inf" : std::to_string(s.log_likelihood))
                << "\t" << j["path"].dump() << "\n";
    }
  }
  if (!a.id.empty() && !matched)
    throw DataError("no sequence with id '" + a.id + "' in " + a.in);
  return 0;
}

struct ClassifyArgs {
  std::string models_dir, in, out;
  bool normalize = false;
  std::string gap_mode = "strict-gap";
  bool no_trailing_gap = false;
  int l_cap_slack = 0;
};

int cmd_classify(const ClassifyArgs& a) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.models_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no model files in '" + a.models_dir + "'");
  std::map<std::string, DihmmModel> models;
  for (const fs::path& f : files) {
    DihmmModel m = load_model(f.string());
    if (models.count(m.label))
      throw DataError("duplicate model label '" + m.label + "'");
    models[m.label] = std::move(m);
  }
  const Alphabet& model_ab = models.begin()->second.alphabet;

  const Corpus corpus = load_corpus(a.in);
  const DecodeConfig cfg =
      decode_config(a.gap_mode, a.no_trailing_gap, a.normalize, a.l_cap_slack);

  std::ostringstream csv;
  csv.precision(10);
  csv << "id,label,predicted,log_likelihood";
  if (a.normalize) csv << ",normalized";
  csv << "\n";
  for (const TrainingExample& ex : corpus.items) {
    const TickSequence seq = remap(ex.ticks, corpus.alphabet, model_ab);
    const Classification c = classify(models, seq, cfg);
    csv << seq.id << "," << seq.label << "," << c.label << ",";
    if (!c.unclassifiable) {
      const Score& best = c.scores.at(c.label);
      csv << best.log_likelihood;
      if (a.normalize) csv << "," << *best.normalized;
    } else if (a.normalize) {
      csv << ",";
    }
    csv << "\n";
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
    info("wrote predictions to " + a.out);
  }
  return 0;
}

struct EvalArgs {
  std::string preset, out_dir;
  int threads = 1;
  bool timing_only = false;  // set by the bench alias
};

int cmd_eval(const EvalArgs& a) {
  const EvalPreset preset = load_preset(a.preset);
  if (a.timing_only && preset.experiment != "timing")
    throw DataError("bench expects a timing preset, got '" + preset.experiment + "'");
  info("running " + preset.experiment + " preset with " +
       std::to_string(a.threads) + " thread(s)");
  const EvalReport report = run_preset(preset, std::max(1, a.threads));
  fs::create_directories(a.out_dir);
  const fs::path csv_path = fs::path(a.out_dir) / (preset.experiment + ".csv");
  write_file(csv_path, report.csv());
  const fs::path json_path = fs::path(a.out_dir) / "report.json";
  write_file(json_path, report.to_json().dump(1) + "\n");
  info("wrote " + csv_path.string() + " and " + json_path.string());
  std::cout << report.csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "duration- and interval-aware hidden Markov models over tick sequences"};
  app.require_subcommand(1);
  std::uint64_t global_seed = 0;
  std::string log_level = "info";
  int global_threads =
      std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
  app.add_option("--seed", global_seed, "default RNG seed for subcommands");
  app.add_option("--log-level", log_level, "quiet|info|debug")
      ->check(CLI::IsMember({"quiet", "info", "debug"}));
  app.add_option("--threads", global_threads, "worker threads for eval/train");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus (JSONL)");
  synth_cmd->add_option("--n", synth.n, "number of states per sequence")->required();
  synth_cmd->add_option("--d", synth.d_range, "duration range lo:hi")->required();
  synth_cmd->add_option("--l", synth.l_range, "interval range lo:hi")->required();
  synth_cmd->add_option("--t", synth.t, "fixed total length");
  synth_cmd->add_flag("--pad", synth.pad, "accept totals <= t, pad with gaps");
  synth_cmd->add_option("--count", synth.count, "number of sequences")->required();
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_flag("--shared", synth.shared, "one shared on-symbol");
  synth_cmd->add_option("--jitter-max", synth.jitter_max, "max jitter shift");
  synth_cmd->add_option("--jitter-prob", synth.jitter_prob, "jitter probability");
  synth_cmd->add_option("--prefix", synth.prefix, "sequence id prefix");
  synth_cmd->add_option("-o,--out", synth.out, "output JSONL path")->required();

  IngestArgs ingest;
  auto* ingest_cmd =
      app.add_subcommand("ingest", "tokenize a 16-bit mono WAV into bars");
  ingest_cmd->add_option("--in", ingest.in, "input WAV")->required();
  ingest_cmd->add_option("-o,--out", ingest.out, "output JSONL path")->required();
  ingest_cmd->add_option("--hop", ingest.hop, "samples per tick (0: from tempo)");
  ingest_cmd->add_option("--tempo", ingest.tempo, "tempo in BPM for hop derivation");
  ingest_cmd->add_option("--rms-threshold", ingest.rms_threshold,
                         "on/off threshold relative to peak RMS");
  ingest_cmd->add_option("--ticks-per-bar", ingest.ticks_per_bar, "ticks per bar");
  ingest_cmd->add_option("--bars-per-seq", ingest.bars_per_seq,
                         "bars per output sequence");

  TrainArgs train;
  auto* train_cmd =
      app.add_subcommand("train", "fit one model per label from a corpus");
  train_cmd->add_option("--in", train.in, "training corpus JSONL")->required();
  train_cmd->add_option("--out-dir", train.out_dir, "model output directory")->required();
  train_cmd->add_option("--variant", train.variant, "hsmm|dihmm")
      ->check(CLI::IsMember({"hsmm", "dihmm"}));
  train_cmd->add_option("--alpha", train.cfg.smoothing_alpha, "additive smoothing");
  train_cmd->add_option("--theta-pt", train.cfg.theta_pt, "interval density floor");
  train_cmd->add_option("--c", train.cfg.c, "out-of-range attenuation");
  train_cmd->add_option("--sigma-floor", train.cfg.sigma_floor, "minimum sigma");
  train_cmd->add_option("--d-cap", train.cfg.d_cap, "maximum modeled duration");
  train_cmd->add_flag("--allow-self-transitions", train.allow_self,
                      "permit same-state transitions");

  ScoreArgs score;
  auto* score_cmd =
      app.add_subcommand("score", "log-likelihood and best path per sequence");
  score_cmd->add_option("--model", score.model, "model JSON")->required();
  score_cmd->add_option("--in", score.in, "corpus JSONL")->required();
  score_cmd->add_option("--id", score.id, "score only this sequence id");
  score_cmd->add_option("--gap-mode", score.gap_mode, "strict-gap|skip")
      ->check(CLI::IsMember({"strict-gap", "skip"}));
  score_cmd->add_flag("--no-trailing-gap", score.no_trailing_gap,
                      "forbid unexplained trailing gaps");
  score_cmd->add_option("--l-cap-slack", score.l_cap_slack,
                        "extra interval search slack (skip mode)");
  score_cmd->add_flag("--json", score.as_json, "JSONL output");

  ClassifyArgs classify_args;
  auto* classify_cmd =
      app.add_subcommand("classify", "argmax label per sequence (CSV)");
  classify_cmd->add_option("--models", classify_args.models_dir,
                           "directory of model JSON files")->required();
  classify_cmd->add_option("--in", classify_args.in, "corpus JSONL")->required();
  classify_cmd->add_option("-o,--out", classify_args.out,
                           "output CSV (default: stdout)");
  classify_cmd->add_flag("--normalize", classify_args.normalize,
                         "emit softmax-normalized scores");
  classify_cmd->add_option("--gap-mode", classify_args.gap_mode, "strict-gap|skip")
      ->check(CLI::IsMember({"strict-gap", "skip"}));
  classify_cmd->add_flag("--no-trailing-gap", classify_args.no_trailing_gap,
                         "forbid unexplained trailing gaps");
  classify_cmd->add_option("--l-cap-slack", classify_args.l_cap_slack,
                           "extra interval search slack (skip mode)");

  EvalArgs eval_args;
  auto* eval_cmd =
      app.add_subcommand("eval", "run a preset experiment (CSV + JSON report)");
  eval_cmd->add_option("--preset", eval_args.preset, "preset JSON")->required();
  eval_cmd->add_option("--out-dir", eval_args.out_dir, "report directory")->required();

  EvalArgs bench_args;
  bench_args.timing_only = true;
  auto* bench_cmd = app.add_subcommand("bench", "run a timing preset");
  bench_cmd->add_option("--preset", bench_args.preset, "timing preset JSON")->required();
  bench_cmd->add_option("--out-dir", bench_args.out_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  g_log_level = log_level == "quiet" ? 0 : log_level == "debug" ? 2 : 1;
  if (synth_cmd->parsed() && synth_cmd->count("--seed") == 0)
    synth.seed = global_seed;
  train.threads = global_threads;
  eval_args.threads = global_threads;
  bench_args.threads = global_threads;

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (ingest_cmd->parsed()) return cmd_ingest(ingest);
    if (train_cmd->parsed()) return cmd_train(train);
    if (score_cmd->parsed()) return cmd_score(score);
    if (classify_cmd->parsed()) return cmd_classify(classify_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (bench_cmd->parsed()) return cmd_eval(bench_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
