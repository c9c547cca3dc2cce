// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ttstroke/tcn.hpp"

namespace ttstroke {

/// Binary model format, all integers and floats little-endian:
///
///   magic "TTCN" | u32 version | u32 input_steps | u32 input_channels
///   | u32 entry out,kernel,stride | u32 n_body | n_body x (u32 out,kernel,stride)
///   | u32 dense_hidden | u32 num_classes | u32 flags (bit 0: norm after each
///   body conv) | u64 param_count | param_count x f32 in layout order
inline constexpr std::array<char, 4> kModelMagic = {'T', 'T', 'C', 'N'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> encode_model(const TcnModel& model);

/// Throws FormatError.
TcnModel decode_model(std::span<const std::uint8_t> bytes);

/// Throws IoError.
void save_model(const std::filesystem::path& path, const TcnModel& model);
TcnModel load_model(const std::filesystem::path& path);

/// Human-readable companion written next to a model file.
struct ModelSummary {
  std::uint64_t init_seed = 0;
  TrainConfig train;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  double final_train_loss = 0.0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
};

std::string model_sidecar_json(const TcnModel& model, const ModelSummary& summary, int indent = 2);

/// Per-epoch CSV: epoch,train_loss,train_accuracy,val_accuracy.
std::string history_csv(const std::vector<EpochStats>& history);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ttstroke
