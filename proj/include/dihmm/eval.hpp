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

#include <chrono>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dihmm/corpus.hpp"
#include "dihmm/decoding.hpp"
#include "dihmm/synth.hpp"
#include "dihmm/training.hpp"

namespace dihmm {

struct DiscriminationRecord {
  Variant variant = Variant::kDihmm;
  int k_train = 1;
  double erd = 0.0;             // error rate of discrimination
  double diag_dominance = 0.0;  // rows whose diagonal is the unique maximum
  double diag_is_max = 0.0;     // rows whose diagonal ties or beats every rival
  int unclassifiable = 0;
};

struct RecognitionRecord {
  Variant variant = Variant::kDihmm;
  std::string setup;  // "one_bar" or "two_bar"
  int pp = 0, tp = 0, ap = 0;
  double precision = 0.0, recall = 0.0, f_measure = 0.0;
};

struct TimingRecord {
  Variant variant = Variant::kDihmm;
  int k_train = 1;
  double train_seconds = 0.0;
  double recognize_seconds = 0.0;
};

// Dense test x model log-likelihood matrix, plus per-row softmax scores.
struct ScoreMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_labels;
  std::vector<double> log_likelihood;  // row major
  std::vector<double> normalized;      // same shape; empty when not requested

  int rows() const { return static_cast<int>(row_ids.size()); }
  int cols() const { return static_cast<int>(col_labels.size()); }
  double ll(int r, int c) const {
    return log_likelihood[static_cast<std::size_t>(r) * cols() + c];
  }

  // Column index of the classify() decision for a row: the first strict
  // maximum in label order, or -1 when every entry is impossible.
  int argmax_row(int r) const {
    int best = -1;
    double best_ll = kLogZero;
    for (int c = 0; c < cols(); ++c)
      if (std::isfinite(ll(r, c)) && ll(r, c) > best_ll) {
        best_ll = ll(r, c);
        best = c;
      }
    return best;
  }

  // Whether the diagonal entry is the strict row maximum.
  bool diagonal_dominant(int r) const {
    const double d = ll(r, r);
    if (!std::isfinite(d)) return false;
    for (int c = 0; c < cols(); ++c)
      if (c != r && ll(r, c) >= d) return false;
    return true;
  }

  // Whether the diagonal entry attains the row maximum (ties allowed).
  bool diagonal_is_max(int r) const {
    const double d = ll(r, r);
    if (!std::isfinite(d)) return false;
    for (int c = 0; c < cols(); ++c)
      if (c != r && ll(r, c) > d) return false;
    return true;
  }

  // Unique finite maximum of a row, or -1 (ties and all-impossible rows
  // yield no prediction).
  int unique_argmax_row(int r) const {
    const int best = argmax_row(r);
    if (best < 0) return -1;
    for (int c = 0; c < cols(); ++c)
      if (c != best && ll(r, c) >= ll(r, best)) return -1;
    return best;
  }
};

struct EvalReport {
  std::vector<DiscriminationRecord> discrimination;
  std::vector<RecognitionRecord> recognition;
  std::vector<TimingRecord> timing;
  std::map<std::string, ScoreMatrix> matrices;

  void merge(EvalReport&& other) {
    for (auto& r : other.discrimination) discrimination.push_back(r);
    for (auto& r : other.recognition) recognition.push_back(r);
    for (auto& r : other.timing) timing.push_back(r);
    for (auto& [k, m] : other.matrices) matrices[k] = std::move(m);
  }

  std::string csv() const;
  nlohmann::ordered_json to_json(bool include_matrices = true) const;
};

namespace detail {

inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline void fill_normalized(ScoreMatrix& m) {
  m.normalized.assign(m.log_likelihood.size(), 0.0);
  for (int r = 0; r < m.rows(); ++r) {
    double best = kLogZero;
    for (int c = 0; c < m.cols(); ++c) best = std::max(best, m.ll(r, c));
    if (!std::isfinite(best)) continue;
    double norm = 0.0;
    for (int c = 0; c < m.cols(); ++c)
      if (std::isfinite(m.ll(r, c))) norm += std::exp(m.ll(r, c) - best);
    for (int c = 0; c < m.cols(); ++c) {
      const double v = m.ll(r, c);
      m.normalized[static_cast<std::size_t>(r) * m.cols() + c] =
          std::isfinite(v) ? std::exp(v - best) / norm : 0.0;
    }
  }
}

inline double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace detail

// Scores every sequence against every model. Rows follow `seqs`, columns
// follow `models`; computation is parallel across rows and deterministic.
inline ScoreMatrix score_matrix(const std::vector<const DihmmModel*>& models,
                                const std::vector<const TickSequence*>& seqs,
                                const DecodeConfig& cfg, int threads = 1) {
  ScoreMatrix m;
  for (const DihmmModel* model : models) m.col_labels.push_back(model->label);
  for (const TickSequence* s : seqs) m.row_ids.push_back(s->id);
  m.log_likelihood.assign(static_cast<std::size_t>(m.rows()) * m.cols(),
                          kLogZero);
  detail::parallel_for(m.rows(), threads, [&](int r) {
    for (int c = 0; c < m.cols(); ++c) {
      DecodeConfig row_cfg = cfg;
      row_cfg.normalize_scores = false;
      m.log_likelihood[static_cast<std::size_t>(r) * m.cols() + c] =
          score_sequence(*models[c], *seqs[r], row_cfg).log_likelihood;
    }
  });
  if (cfg.normalize_scores) detail::fill_normalized(m);
  return m;
}

// Discrimination experiment: one model per corpus sequence, trained on the
// sequence plus k-1 jittered renditions; every sequence is then classified
// against the whole model set. ERD is the fraction of sequences whose own
// model does not win.
inline EvalReport run_discrimination(const Corpus& corpus,
                                     const std::vector<int>& k_values,
                                     Variant variant,
                                     const TrainingConfig& train_cfg,
                                     const DecodeConfig& decode_cfg,
                                     const JitterPolicy& jitter,
                                     bool fixed_span, std::uint64_t seed,
                                     int threads = 1) {
  if (corpus.size() < 2)
    throw DataError("run_discrimination: need at least 2 sequences");
  EvalReport report;
  for (int k : k_values) {
    std::vector<DihmmModel> models(corpus.size());
    detail::parallel_for(corpus.size(), threads, [&](int i) {
      const TrainingExample& ex = corpus.items[i];
      const auto data = training_variants(
          ex, corpus.alphabet, k, jitter,
          fixed_span ? ex.ticks.length() : -1, derive_seed(seed, i));
      models[i] = fit_model(data, corpus.alphabet, train_cfg, variant,
                            ex.ticks.id);
    });

    std::vector<const DihmmModel*> model_ptrs;
    std::vector<const TickSequence*> seq_ptrs;
    for (int i = 0; i < corpus.size(); ++i) {
      model_ptrs.push_back(&models[i]);
      seq_ptrs.push_back(&corpus.items[i].ticks);
    }
    ScoreMatrix matrix = score_matrix(model_ptrs, seq_ptrs, decode_cfg, threads);

    DiscriminationRecord rec;
    rec.variant = variant;
    rec.k_train = k;
    int errors = 0, dominant = 0, at_max = 0;
    for (int r = 0; r < matrix.rows(); ++r) {
      const int pred = matrix.argmax_row(r);
      if (pred < 0) ++rec.unclassifiable;
      if (pred != r) ++errors;
      if (matrix.diagonal_dominant(r)) ++dominant;
      if (matrix.diagonal_is_max(r)) ++at_max;
    }
    rec.erd = static_cast<double>(errors) / matrix.rows();
    rec.diag_dominance = static_cast<double>(dominant) / matrix.rows();
    rec.diag_is_max = static_cast<double>(at_max) / matrix.rows();
    report.discrimination.push_back(rec);
    report.matrices[variant_name(variant) + "_k" + std::to_string(k)] =
        std::move(matrix);
  }
  return report;
}

// Recognition experiment: fit one model per label on the training corpus,
// classify every test item. A test item only counts as predicted (PP) when
// it has a unique finite maximum; TP are the correct predictions and AP the
// test items whose label exists in the model set.
inline EvalReport run_recognition(const Corpus& train, const Corpus& test,
                                  Variant variant,
                                  const TrainingConfig& train_cfg,
                                  const DecodeConfig& decode_cfg,
                                  std::string setup = "recognition",
                                  int threads = 1) {
  if (test.size() < 1) throw DataError("run_recognition: empty test set");
  if (!(train.alphabet == test.alphabet))
    throw DataError("run_recognition: train/test alphabets differ");
  const auto models =
      fit_label_set(train.items, train.alphabet, train_cfg, variant, threads);

  std::vector<const DihmmModel*> model_ptrs;
  for (const auto& [label, model] : models) model_ptrs.push_back(&model);
  std::vector<const TickSequence*> seq_ptrs;
  for (const TrainingExample& ex : test.items) seq_ptrs.push_back(&ex.ticks);
  ScoreMatrix matrix = score_matrix(model_ptrs, seq_ptrs, decode_cfg, threads);

  RecognitionRecord rec;
  rec.variant = variant;
  rec.setup = setup;
  for (int r = 0; r < matrix.rows(); ++r) {
    const std::string& truth = test.items[r].ticks.label;
    if (models.count(truth)) ++rec.ap;
    const int pred = matrix.unique_argmax_row(r);
    if (pred < 0) continue;
    ++rec.pp;
    if (matrix.col_labels[pred] == truth) ++rec.tp;
  }
  rec.precision = rec.pp > 0 ? static_cast<double>(rec.tp) / rec.pp : 0.0;
  rec.recall = rec.ap > 0 ? static_cast<double>(rec.tp) / rec.ap : 0.0;
  rec.f_measure = rec.precision + rec.recall > 0.0
                      ? 2.0 * rec.precision * rec.recall /
                            (rec.precision + rec.recall)
                      : 0.0;

  EvalReport report;
  report.recognition.push_back(rec);
  report.matrices[variant_name(variant) + "_" + setup] = std::move(matrix);
  return report;
}

// Timing experiment: wall-clock medians for fitting all models and for the
// full recognition matrix, as the number of training renditions grows. Work
// is repeated until each sample lasts at least min_sample_seconds so that
// medians are stable; the measured workload itself is deterministic.
inline EvalReport run_timing(const Corpus& corpus,
                             const std::vector<int>& k_values, Variant variant,
                             const TrainingConfig& train_cfg,
                             const DecodeConfig& decode_cfg,
                             const JitterPolicy& jitter, bool fixed_span,
                             std::uint64_t seed, int repeats = 5,
                             double min_sample_seconds = 0.05) {
  using Clock = std::chrono::steady_clock;
  EvalReport report;
  for (int k : k_values) {
    std::vector<std::vector<TrainingExample>> variant_sets(corpus.size());
    for (int i = 0; i < corpus.size(); ++i)
      variant_sets[i] = training_variants(
          corpus.items[i], corpus.alphabet, k, jitter,
          fixed_span ? corpus.items[i].ticks.length() : -1,
          derive_seed(seed, i));

    std::vector<DihmmModel> models(corpus.size());
    auto train_pass = [&]() {
      for (int i = 0; i < corpus.size(); ++i)
        models[i] = fit_model(variant_sets[i], corpus.alphabet, train_cfg,
                              variant, corpus.items[i].ticks.id);
    };
    auto recognize_pass = [&]() {
      double sink = 0.0;
      for (int i = 0; i < corpus.size(); ++i)
        for (const DihmmModel& model : models)
          sink +=
              score_sequence(model, corpus.items[i].ticks, decode_cfg)
                  .log_likelihood;
      volatile double keep = sink;
      (void)keep;
    };

    auto measure = [&](const std::function<void()>& pass) {
      pass();  // warm up and calibrate
      const auto t0 = Clock::now();
      pass();
      double once = std::chrono::duration<double>(Clock::now() - t0).count();
      const int inner = std::max(
          1, static_cast<int>(std::ceil(min_sample_seconds /
                                        std::max(once, 1e-9))));
      std::vector<double> samples;
      for (int r = 0; r < repeats; ++r) {
        const auto begin = Clock::now();
        for (int j = 0; j < inner; ++j) pass();
        samples.push_back(
            std::chrono::duration<double>(Clock::now() - begin).count() /
            inner);
      }
      return detail::median(samples);
    };

    TimingRecord rec;
    rec.variant = variant;
    rec.k_train = k;
    rec.train_seconds = measure(train_pass);
    rec.recognize_seconds = measure(recognize_pass);
    report.timing.push_back(rec);
  }
  return report;
}

inline std::string EvalReport::csv() const {
  std::ostringstream out;
  out.precision(10);
  if (!discrimination.empty()) {
    out << "variant,k_train,erd,diag_dominance,diag_is_max,unclassifiable\n";
    for (const auto& r : discrimination)
      out << variant_name(r.variant) << ',' << r.k_train << ',' << r.erd << ','
          << r.diag_dominance << ',' << r.diag_is_max << ','
          << r.unclassifiable << '\n';
  }
  if (!recognition.empty()) {
    out << "variant,setup,precision,recall,f_measure,pp,tp,ap\n";
    for (const auto& r : recognition)
      out << variant_name(r.variant) << ',' << r.setup << ',' << r.precision
          << ',' << r.recall << ',' << r.f_measure << ',' << r.pp << ','
          << r.tp << ',' << r.ap << '\n';
  }
  if (!timing.empty()) {
    out << "variant,k_train,train_seconds,recognize_seconds\n";
    for (const auto& r : timing)
      out << variant_name(r.variant) << ',' << r.k_train << ','
          << r.train_seconds << ',' << r.recognize_seconds << '\n';
  }
  return out.str();
}

inline nlohmann::ordered_json EvalReport::to_json(bool include_matrices) const {
  nlohmann::ordered_json j;
  auto disc = nlohmann::ordered_json::array();
  for (const auto& r : discrimination)
    disc.push_back({{"variant", variant_name(r.variant)},
                    {"k_train", r.k_train},
                    {"erd", r.erd},
                    {"diag_dominance", r.diag_dominance},
                    {"diag_is_max", r.diag_is_max},
                    {"unclassifiable", r.unclassifiable}});
  j["discrimination"] = std::move(disc);

  auto reco = nlohmann::ordered_json::array();
  for (const auto& r : recognition)
    reco.push_back({{"variant", variant_name(r.variant)},
                    {"setup", r.setup},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"f_measure", r.f_measure},
                    {"pp", r.pp},
                    {"tp", r.tp},
                    {"ap", r.ap}});
  j["recognition"] = std::move(reco);

  auto tim = nlohmann::ordered_json::array();
  for (const auto& r : timing)
    tim.push_back({{"variant", variant_name(r.variant)},
                   {"k_train", r.k_train},
                   {"train_seconds", r.train_seconds},
                   {"recognize_seconds", r.recognize_seconds}});
  j["timing"] = std::move(tim);

  if (include_matrices) {
    nlohmann::ordered_json mats;
    for (const auto& [key, m] : matrices) {
      nlohmann::ordered_json mj;
      mj["rows"] = m.row_ids;
      mj["cols"] = m.col_labels;
      auto ll = nlohmann::ordered_json::array();
      for (int r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < m.cols(); ++c) {
          const double v = m.ll(r, c);
          if (std::isfinite(v))
            row.push_back(v);
          else
            row.push_back(nullptr);  // JSON has no -inf
        }
        ll.push_back(std::move(row));
      }
      mj["log_likelihood"] = std::move(ll);
      if (!m.normalized.empty()) {
        auto norm = nlohmann::ordered_json::array();
        for (int r = 0; r < m.rows(); ++r) {
          auto row = nlohmann::ordered_json::array();
          for (int c = 0; c < m.cols(); ++c)
            row.push_back(m.normalized[static_cast<std::size_t>(r) * m.cols() + c]);
          norm.push_back(std::move(row));
        }
        mj["normalized"] = std::move(norm);
      }
      mats[key] = std::move(mj);
    }
    j["matrices"] = std::move(mats);
  }
  return j;
}

}  // namespace dihmm
