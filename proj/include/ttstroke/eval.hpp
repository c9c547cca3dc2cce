// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ttstroke/domain.hpp"
#include "ttstroke/tcn.hpp"

namespace ttstroke {

struct SplitSpec {
  double train_fraction = 0.95;
  bool stratified = true;
  std::uint64_t seed = 1;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const SplitSpec&) const = default;
};

struct Split {
  Dataset train;
  Dataset val;
  /// Positions in the source dataset, ascending.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
};

/// Seeded partition. Per group (each class when stratified, else the whole
/// set) the train share is floor(n * train_fraction) capped at n - 1, so
/// rounding favours validation and every non-empty group gives it at least one
/// item. Throws ClassTooSmall when a stratified class has exactly one item.
Split split(const Dataset& data, const SplitSpec& spec);

/// Rows are true classes, columns predictions.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  std::size_t trace() const;
  std::size_t row_sum(StrokeClass truth) const;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct Timing {
  double seconds = 0.0;
  double strokes_per_second = 0.0;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  /// 0 for classes absent from the evaluated set (see `support`).
  std::array<double, kNumClasses> per_class_accuracy{};
  ClassCounts support{};
  ConfusionMatrix confusion;
  std::size_t n_eval = 0;
  Timing timing;

  /// Equality of everything except wall-clock timing.
  bool same_metrics(const EvalReport& other) const;
};

using Classifier = std::function<StrokeClass(const FeatureWindow&)>;

/// One prediction per item, in dataset order. Throws InvalidConfig when
/// `data` is empty.
EvalReport evaluate(const Classifier& classifier, const Dataset& data);
EvalReport evaluate(const TcnModel& model, const Dataset& data);

/// JSON document (see schemas/eval_report.schema.json). Without timing the
/// output is a pure function of the predictions.
std::string report_to_json(const EvalReport& report, int indent = 2, bool include_timing = true);
/// Overall line followed by an aligned confusion table.
std::string report_to_text(const EvalReport& report);
/// class_id,class,support,correct,accuracy rows.
std::string report_to_csv(const EvalReport& report);

struct GeneralisationResult {
  EvalReport before;
  EvalReport after;
  TcnModel tuned;
};

/// Evaluates `model` on a new player's strokes, fine-tunes a copy on all of
/// them for `fine_tune_epochs` epochs with a fresh optimizer and the same
/// learning rate as `base`, then evaluates the copy on the same strokes.
/// `model` is never modified; zero epochs skips training.
GeneralisationResult generalisation_test(const TcnModel& model, const Dataset& new_player,
                                         int fine_tune_epochs, const TrainConfig& base);

struct AblationResult {
  double acc_raw = 0.0;
  double acc_smoothed = 0.0;
};

/// Trains the same architecture from the same init seed on unsmoothed and
/// smoothed windows of the same sequences (identical label order) under one
/// split, returning both validation accuracies.
AblationResult ablate_filter(const Dataset& raw, const Dataset& smoothed, const SplitSpec& split_spec,
                             const ArchSpec& arch, std::uint64_t init_seed,
                             const TrainConfig& config);

struct BenchResult {
  std::size_t n_strokes = 0;
  double seconds = 0.0;
  double strokes_per_second = 0.0;
  /// False for n = 0.
  bool applicable = false;
};

/// Wall-clock forward passes over `n_strokes` windows cycled from a small
/// synthetic pool. A report only; timings are hardware-bound.
BenchResult bench_inference(const TcnModel& model, std::size_t n_strokes = 20000,
                            std::uint64_t seed = 2024);

}  // namespace ttstroke
