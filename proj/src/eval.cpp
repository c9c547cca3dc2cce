// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ttstroke/error.hpp"
#include "ttstroke/preprocess.hpp"
#include "ttstroke/synth.hpp"

namespace ttstroke {

namespace {

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
  std::vector<LabeledWindow> items;
  items.reserve(indices.size());
  for (std::size_t i : indices) items.push_back(data[i]);
  return Dataset(std::move(items));
}

using Clock = std::chrono::steady_clock;

}  // namespace

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidConfig("train_fraction must lie strictly between 0 and 1");
  }
}

Split split(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    groups.resize(kNumClasses);
    for (std::size_t i = 0; i < data.size(); ++i) groups[class_id(data[i].label)].push_back(i);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (groups[c].size() == 1) throw ClassTooSmall(std::string(class_name(class_from_id(c))), 1);
    }
  } else {
    groups.emplace_back(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) groups[0][i] = i;
  }

  std::mt19937_64 rng(spec.seed);
  Split out;
  for (auto& group : groups) {
    if (group.empty()) continue;
    std::shuffle(group.begin(), group.end(), rng);
    const std::size_t n = group.size();
    auto n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * spec.train_fraction + 1e-9));
    if (n > 1) n_train = std::min(n_train, n - 1);
    out.train_indices.insert(out.train_indices.end(), group.begin(),
                             group.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.val_indices.insert(out.val_indices.end(),
                           group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.val_indices.begin(), out.val_indices.end());
  out.train = subset(data, out.train_indices);
  out.val = subset(data, out.val_indices);
  return out;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (const auto& row : counts) {
    for (std::size_t v : row) sum += v;
  }
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) sum += counts[c][c];
  return sum;
}

std::size_t ConfusionMatrix::row_sum(StrokeClass truth) const {
  std::size_t sum = 0;
  for (std::size_t v : counts[class_id(truth)]) sum += v;
  return sum;
}

bool EvalReport::same_metrics(const EvalReport& other) const {
  return overall_accuracy == other.overall_accuracy &&
         per_class_accuracy == other.per_class_accuracy && support == other.support &&
         confusion == other.confusion && n_eval == other.n_eval;
}

EvalReport evaluate(const Classifier& classifier, const Dataset& data) {
  if (data.empty()) throw InvalidConfig("cannot evaluate an empty dataset");
  EvalReport report;
  const auto start = Clock::now();
  for (const auto& item : data.items()) {
    const StrokeClass predicted = classifier(item.window);
    ++report.confusion.counts[class_id(item.label)][class_id(predicted)];
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

  report.n_eval = data.size();
  report.overall_accuracy =
      static_cast<double>(report.confusion.trace()) / static_cast<double>(report.n_eval);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const std::size_t n = report.confusion.row_sum(class_from_id(c));
    report.support[c] = n;
    report.per_class_accuracy[c] =
        n == 0 ? 0.0 : static_cast<double>(report.confusion.counts[c][c]) / static_cast<double>(n);
  }
  report.timing.seconds = seconds;
  report.timing.strokes_per_second = seconds > 0.0 ? static_cast<double>(data.size()) / seconds : 0.0;
  return report;
}

EvalReport evaluate(const TcnModel& model, const Dataset& data) {
  return evaluate([&model](const FeatureWindow& w) { return classify(model, w).label; }, data);
}

std::string report_to_json(const EvalReport& report, int indent, bool include_timing) {
  nlohmann::ordered_json j;
  j["n_eval"] = report.n_eval;
  j["correct"] = report.confusion.trace();
  j["overall_accuracy"] = report.overall_accuracy;
  auto per_class = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    per_class.push_back({{"class_id", c},
                         {"class", class_name(class_from_id(c))},
                         {"support", report.support[c]},
                         {"correct", report.confusion.counts[c][c]},
                         {"accuracy", report.per_class_accuracy[c]}});
  }
  j["per_class"] = per_class;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.confusion.counts) rows.push_back(row);
  j["confusion"] = rows;
  if (include_timing) {
    j["timing"] = {{"seconds", report.timing.seconds},
                   {"strokes_per_second", report.timing.strokes_per_second}};
  }
  return j.dump(indent);
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "overall accuracy: " << std::fixed << std::setprecision(4) << report.overall_accuracy
      << " (" << report.confusion.trace() << "/" << report.n_eval << ")\n\n";
  constexpr int name_w = 18;
  out << std::left << std::setw(name_w) << "true \\ predicted";
  for (std::size_t c = 0; c < kNumClasses; ++c) out << std::right << std::setw(5) << c;
  out << std::right << std::setw(9) << "acc" << "\n";
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    out << std::left << std::setw(name_w)
        << (std::to_string(r) + " " + std::string(class_name(class_from_id(r))));
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out << std::right << std::setw(5) << report.confusion.counts[r][c];
    }
    out << std::right << std::setw(9) << std::setprecision(4) << report.per_class_accuracy[r]
        << "\n";
  }
  return out.str();
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class_id,class,support,correct,accuracy\n";
  out << std::setprecision(17);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    out << c << "," << class_name(class_from_id(c)) << "," << report.support[c] << ","
        << report.confusion.counts[c][c] << "," << report.per_class_accuracy[c] << "\n";
  }
  return out.str();
}

GeneralisationResult generalisation_test(const TcnModel& model, const Dataset& new_player,
                                         int fine_tune_epochs, const TrainConfig& base) {
  if (fine_tune_epochs < 0) throw InvalidConfig("fine_tune_epochs must be >= 0");
  GeneralisationResult result{evaluate(model, new_player), {}, model};
  if (fine_tune_epochs > 0) {
    TrainConfig cfg = base;
    cfg.epochs = fine_tune_epochs;
    result.tuned = train(model, new_player, Dataset{}, cfg).model;
  }
  result.after = evaluate(result.tuned, new_player);
  return result;
}

AblationResult ablate_filter(const Dataset& raw, const Dataset& smoothed, const SplitSpec& split_spec,
                             const ArchSpec& arch, std::uint64_t init_seed,
                             const TrainConfig& config) {
  if (raw.size() != smoothed.size()) {
    throw InvalidConfig("raw and smoothed datasets differ in size");
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].label != smoothed[i].label) {
      throw InvalidConfig("raw and smoothed datasets disagree on the label of item " +
                          std::to_string(i));
    }
  }
  // Splits depend only on labels and seed, so both variants partition alike.
  const Split raw_split = split(raw, split_spec);
  const Split smooth_split = split(smoothed, split_spec);
  const TcnModel init = TcnModel::initialize(arch, init_seed);

  AblationResult result;
  result.acc_raw = accuracy(train(init, raw_split.train, raw_split.val, config).model, raw_split.val);
  result.acc_smoothed =
      accuracy(train(init, smooth_split.train, smooth_split.val, config).model, smooth_split.val);
  return result;
}

BenchResult bench_inference(const TcnModel& model, std::size_t n_strokes, std::uint64_t seed) {
  BenchResult result;
  result.n_strokes = n_strokes;
  if (n_strokes == 0) return result;

  SynthConfig cfg;
  cfg.per_class_count = 10;
  cfg.seed = seed;
  std::vector<FeatureWindow> pool;
  for (const auto& seq : generate(cfg)) pool.push_back(preprocess(seq));

  volatile double sink = 0.0;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < n_strokes; ++i) sink = sink + forward(model, pool[i % pool.size()])[0];
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.applicable = true;
  result.strokes_per_second =
      result.seconds > 0.0 ? static_cast<double>(n_strokes) / result.seconds : 0.0;
  return result;
}

}  // namespace ttstroke
