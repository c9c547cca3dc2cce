// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

/// Packed feature file, little-endian:
///
///   magic "TTFW" | u32 version | u32 count | u32 steps (100) | u32 features (8)
///   | count x 800 f32 windows | count x u8 label ids | count x u16 mask_len
inline constexpr std::array<char, 4> kFeatureMagic = {'T', 'T', 'F', 'W'};
inline constexpr std::uint32_t kFeatureFormatVersion = 1;

std::vector<std::uint8_t> encode_features(const Dataset& data);

/// Throws FormatError.
Dataset decode_features(std::span<const std::uint8_t> bytes);

void save_features(const std::filesystem::path& path, const Dataset& data);
Dataset load_features(const std::filesystem::path& path);

struct ManifestRow {
  std::string path;
  StrokeClass label;
  Handedness handedness;
};

/// "path,label,handedness" header plus one row per file.
std::string manifest_csv(const std::vector<ManifestRow>& rows);

}  // namespace ttstroke
