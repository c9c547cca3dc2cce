// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "ttstroke/eval.hpp"
#include "ttstroke/preprocess.hpp"
#include "ttstroke/synth.hpp"
#include "ttstroke/tcn.hpp"

namespace ttstroke {

/// Every tunable of the pipeline in one document. Sections and fields are all
/// optional; omitted values keep their defaults.
struct RunConfig {
  PreprocessConfig preprocess;
  ArchSpec arch;
  TrainConfig train;
  /// Seed of the weight initialisation (the "init_seed" key of "train").
  std::uint64_t init_seed = 11;
  SynthConfig synth;
  SplitSpec split;

  /// Re-checks every cross-field invariant. Throws InvalidConfig.
  void validate() const;
};

/// Strict JSON parse: unknown keys and wrongly typed values raise
/// InvalidConfig naming the dotted key; malformed JSON raises ParseError.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Full document with every field spelled out.
std::string run_config_to_json(const RunConfig& config, int indent = 2);

}  // namespace ttstroke
