// SPDX-License-Identifier: Apache-2.0
// ttstroke: command-line front end for the stroke classification pipeline.
//
// Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 training failure, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ttstroke/baseline.hpp"
#include "ttstroke/error.hpp"
#include "ttstroke/eval.hpp"
#include "ttstroke/features_io.hpp"
#include "ttstroke/keypoint_io.hpp"
#include "ttstroke/model_io.hpp"
#include "ttstroke/preprocess.hpp"
#include "ttstroke/run_config.hpp"
#include "ttstroke/synth.hpp"
#include "ttstroke/tcn.hpp"

namespace fs = std::filesystem;
using namespace ttstroke;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInvalid = 2, kTraining = 3, kIo = 4 };

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

struct IngestOptions {
  double tolerance_px = 0.0;
  bool lenient = false;
};

KeypointSequence ingest(const fs::path& path, const IngestOptions& opts) {
  std::vector<std::string> warnings;
  KeypointParseOptions po;
  po.tolerance_px = opts.tolerance_px;
  po.allow_unknown_header_keys = opts.lenient;
  po.warnings = &warnings;
  try {
    KeypointSequence seq = read_keypoint_file(path, po);
    for (const auto& w : warnings) std::cerr << path.string() << ": warning: " << w << "\n";
    return seq;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), e.detail() + " in " + path.string());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> inputs_of(const fs::path& in) {
  if (fs::is_directory(in)) return list_keypoint_files(in);
  if (!fs::exists(in)) throw IoError("no such file or directory: " + in.string());
  return {in};
}

Dataset load_labeled(const fs::path& dir, const PreprocessConfig& pre, const IngestOptions& opts) {
  Dataset data;
  for (const auto& path : list_keypoint_files(dir)) {
    const KeypointSequence seq = ingest(path, opts);
    if (!seq.label) throw ValidationError(path.string() + ": header has no label");
    data.add(preprocess(seq, pre), *seq.label);
  }
  if (data.empty()) throw IoError("no .jsonl keypoint files in " + dir.string());
  return data;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

// ---- gen -------------------------------------------------------------------

int cmd_gen(const std::string& config_path, const fs::path& out_dir) {
  const RunConfig cfg = config_or_default(config_path);
  const auto seqs = generate(cfg.synth);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<ManifestRow> rows;
  rows.reserve(seqs.size());
  std::size_t index = 0;
  for (const auto& seq : seqs) {
    std::ostringstream name;
    name << std::setw(5) << std::setfill('0') << index++ << "_" << class_name(*seq.label)
         << ".jsonl";
    save_keypoint_file(out_dir / name.str(), seq);
    rows.push_back({name.str(), *seq.label, seq.handedness});
  }
  std::sort(rows.begin(), rows.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.path < b.path; });
  write_text_file(out_dir / "manifest.csv", manifest_csv(rows));
  std::cout << "wrote " << seqs.size() << " sequences to " << out_dir.string() << "\n";
  return kOk;
}

// ---- preprocess ------------------------------------------------------------

int cmd_preprocess(const fs::path& in_dir, const fs::path& out, const std::string& config_path,
                   bool raw, const IngestOptions& opts) {
  RunConfig cfg = config_or_default(config_path);
  if (raw) cfg.preprocess.smooth = false;
  const Dataset data = load_labeled(in_dir, cfg.preprocess, opts);
  save_features(out, data);
  std::cout << "wrote " << data.size() << " windows to " << out.string() << "\n";
  return kOk;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const fs::path& features, const std::string& config_path, const fs::path& model_out,
              bool quiet) {
  const RunConfig cfg = config_or_default(config_path);
  const Dataset data = load_features(features);
  const Split parts = split(data, cfg.split);
  const TcnModel init = TcnModel::initialize(cfg.arch, cfg.init_seed);
  const TrainResult result = train(init, parts.train, parts.val, cfg.train);

  if (!quiet) {
    for (const auto& e : result.history) {
      std::cout << "epoch " << e.epoch << "  loss " << fmt(e.train_loss) << "  train_acc "
                << fmt(e.train_accuracy) << "  val_acc " << fmt(e.val_accuracy) << "\n";
    }
  }
  ModelSummary summary;
  summary.init_seed = cfg.init_seed;
  summary.train = cfg.train;
  summary.best_epoch = result.best_epoch;
  summary.best_val_accuracy = result.history[static_cast<std::size_t>(result.best_epoch - 1)].val_accuracy;
  summary.final_train_loss = result.history.back().train_loss;
  summary.n_train = parts.train.size();
  summary.n_val = parts.val.size();

  save_model(model_out, result.model);
  fs::path sidecar = model_out;
  sidecar += ".json";
  write_text_file(sidecar, model_sidecar_json(result.model, summary));
  fs::path history = model_out;
  history += ".history.csv";
  write_text_file(history, history_csv(result.history));

  std::cout << "best epoch " << result.best_epoch << ", val accuracy "
            << fmt(summary.best_val_accuracy) << ", " << param_count(cfg.arch)
            << " parameters\n";
  return kOk;
}

// ---- classify --------------------------------------------------------------

int cmd_classify(const fs::path& model_path, const fs::path& in, const std::string& config_path,
                 bool json, const IngestOptions& opts) {
  const RunConfig cfg = config_or_default(config_path);
  const TcnModel model = load_model(model_path);
  auto results = nlohmann::ordered_json::array();
  for (const auto& path : inputs_of(in)) {
    const KeypointSequence seq = ingest(path, opts);
    const Prediction p = classify(model, preprocess(seq, cfg.preprocess));
    if (json) {
      results.push_back({{"input", path.string()},
                         {"class_id", class_id(p.label)},
                         {"class", class_name(p.label)},
                         {"confidence", p.confidence}});
    } else {
      std::cout << path.string() << "\t" << display_name(p.label) << "\t" << fmt(p.confidence)
                << "\n";
    }
  }
  if (json) std::cout << results.dump(2) << "\n";
  return kOk;
}

// ---- eval ------------------------------------------------------------------

int cmd_eval(const fs::path& model_path, const fs::path& features, const std::string& config_path,
             const std::string& subset, bool json, const std::string& csv_path, bool timing) {
  const TcnModel model = load_model(model_path);
  Dataset data = load_features(features);
  if (subset == "val") data = split(data, config_or_default(config_path).split).val;
  const EvalReport report = evaluate(model, data);

  if (json) {
    std::cout << report_to_json(report, 2, timing) << "\n";
  } else {
    std::cout << report_to_text(report);
    if (timing) {
      std::cout << "\n" << fmt(report.timing.strokes_per_second, 1) << " strokes/s\n";
    }
  }
  if (!csv_path.empty()) write_text_file(csv_path, report_to_csv(report));
  return kOk;
}

// ---- bench -----------------------------------------------------------------

int cmd_bench(const fs::path& model_path, std::size_t n, std::uint64_t seed, bool json) {
  const TcnModel model = load_model(model_path);
  const BenchResult r = bench_inference(model, n, seed);
  if (json) {
    nlohmann::ordered_json j{{"n_strokes", r.n_strokes},
                             {"seconds", r.seconds},
                             {"strokes_per_second", r.strokes_per_second},
                             {"applicable", r.applicable}};
    std::cout << j.dump(2) << "\n";
  } else if (!r.applicable) {
    std::cout << "n = 0: throughput not applicable\n";
  } else {
    std::cout << r.n_strokes << " strokes in " << fmt(r.seconds, 3) << " s: "
              << fmt(r.strokes_per_second, 1) << " strokes/s\n";
  }
  return kOk;
}

// ---- ablate ----------------------------------------------------------------

int cmd_ablate(const fs::path& in_dir, const std::string& config_path,
               const std::vector<std::uint64_t>& seeds, bool json, const IngestOptions& opts) {
  const RunConfig cfg = config_or_default(config_path);
  PreprocessConfig raw_cfg = cfg.preprocess;
  raw_cfg.smooth = false;
  PreprocessConfig smooth_cfg = cfg.preprocess;
  smooth_cfg.smooth = true;
  const Dataset raw = load_labeled(in_dir, raw_cfg, opts);
  const Dataset smoothed = load_labeled(in_dir, smooth_cfg, opts);

  std::vector<std::uint64_t> run_seeds = seeds;
  if (run_seeds.empty()) run_seeds.push_back(cfg.split.seed);
  auto runs = nlohmann::ordered_json::array();
  std::vector<double> raw_acc, smooth_acc;
  for (std::uint64_t seed : run_seeds) {
    SplitSpec sp = cfg.split;
    sp.seed = seed;
    TrainConfig tc = cfg.train;
    tc.seed = seed;
    const AblationResult r = ablate_filter(raw, smoothed, sp, cfg.arch, cfg.init_seed + seed, tc);
    raw_acc.push_back(r.acc_raw);
    smooth_acc.push_back(r.acc_smoothed);
    runs.push_back({{"seed", seed}, {"acc_raw", r.acc_raw}, {"acc_smoothed", r.acc_smoothed}});
    if (!json) {
      std::cout << "seed " << seed << "  raw " << fmt(r.acc_raw) << "  smoothed "
                << fmt(r.acc_smoothed) << "\n";
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  const double mr = median(raw_acc);
  const double ms = median(smooth_acc);
  if (json) {
    nlohmann::ordered_json j{{"runs", runs}, {"median_raw", mr}, {"median_smoothed", ms}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "median raw " << fmt(mr) << "  median smoothed " << fmt(ms) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table-tennis stroke classification from pose keypoints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ttstroke 1.0.0");

  std::string config, in, out, model, features, subset = "all", csv;
  bool json = false, raw = false, quiet = false, no_timing = false;
  IngestOptions ingest_opts;
  std::size_t n = 20000;
  std::uint64_t seed = 2024;
  std::vector<std::uint64_t> seeds;

  auto add_ingest = [&](CLI::App* cmd) {
    cmd->add_option("--tolerance", ingest_opts.tolerance_px,
                    "Accept coordinates up to this many pixels outside the frame")
        ->check(CLI::Range(0.0, 5.0));
    cmd->add_flag("--allow-unknown-header-keys", ingest_opts.lenient,
                  "Warn instead of failing on unknown header keys");
  };

  auto* gen = app.add_subcommand("gen", "Write synthetic keypoint files and a manifest");
  gen->add_option("--config", config, "Run config JSON");
  gen->add_option("--out", out, "Output directory")->required();

  auto* pre = app.add_subcommand("preprocess", "Pack a directory of keypoint files into features");
  pre->add_option("--in", in, "Directory of .jsonl keypoint files")->required();
  pre->add_option("--out", out, "Packed feature file")->required();
  pre->add_option("--config", config, "Run config JSON");
  pre->add_flag("--raw", raw, "Skip smoothing");
  add_ingest(pre);

  auto* trn = app.add_subcommand("train", "Train a TCN on packed features");
  trn->add_option("--features", features, "Packed feature file")->required();
  trn->add_option("--config", config, "Run config JSON");
  trn->add_option("--model", model, "Model output path")->required();
  trn->add_flag("--quiet", quiet, "Do not print per-epoch history");

  auto* cls = app.add_subcommand("classify", "Classify keypoint files");
  cls->add_option("--model", model, "Model file")->required();
  cls->add_option("--in", in, "Keypoint file or directory")->required();
  cls->add_option("--config", config, "Run config JSON (preprocess section)");
  cls->add_flag("--json", json, "Machine-readable output");
  add_ingest(cls);

  auto* evl = app.add_subcommand("eval", "Evaluate a model on packed features");
  evl->add_option("--model", model, "Model file")->required();
  evl->add_option("--features", features, "Packed feature file")->required();
  evl->add_option("--config", config, "Run config JSON (split section, for --subset val)");
  evl->add_option("--subset", subset, "Items to evaluate")
      ->check(CLI::IsMember({"all", "val"}));
  evl->add_flag("--json", json, "Print the report as JSON");
  evl->add_option("--csv", csv, "Also write per-class rows to this CSV file");
  evl->add_flag("--no-timing", no_timing, "Omit wall-clock figures");

  auto* bch = app.add_subcommand("bench", "Measure inference throughput");
  bch->add_option("--model", model, "Model file")->required();
  bch->add_option("--n", n, "Number of strokes")->check(CLI::NonNegativeNumber);
  bch->add_option("--seed", seed, "Seed of the synthetic input pool");
  bch->add_flag("--json", json, "Machine-readable output");

  auto* abl = app.add_subcommand("ablate", "Compare training with and without smoothing");
  abl->add_option("--in", in, "Directory of .jsonl keypoint files")->required();
  abl->add_option("--config", config, "Run config JSON");
  abl->add_option("--seeds", seeds, "Split/shuffle seeds, one run each")->delimiter(',');
  abl->add_flag("--json", json, "Machine-readable output");
  add_ingest(abl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen(config, out);
    if (*pre) return cmd_preprocess(in, out, config, raw, ingest_opts);
    if (*trn) return cmd_train(features, config, model, quiet);
    if (*cls) return cmd_classify(model, in, config, json, ingest_opts);
    if (*evl) return cmd_eval(model, features, config, subset, json, csv, !no_timing);
    if (*bch) return cmd_bench(model, n, seed, json);
    if (*abl) return cmd_ablate(in, config, seeds, json, ingest_opts);
  } catch (const NanDetected& e) {
    std::cerr << "error: training failed: " << e.what() << "\n";
    return kTraining;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return kUsage;
}
