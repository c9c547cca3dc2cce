// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

/// Keypoint files hold one stroke as JSON lines. Line 1 is the header
///
///   {"format_version":"1","source_id":"...","handedness":"right"|"left",
///    "width":1280,"height":720,"fps":60,"label":"ForehandPush"}
///
/// (fps and label optional), then one record per frame
///
///   {"frame":0,"kp":[[x,y,conf], ... 17 triples in COCO order]}
///
/// with frame indices 0, 1, 2, ... Blank lines are ignored.
inline constexpr std::string_view kKeypointFormatVersion = "1";

struct KeypointParseOptions {
  /// Out-of-frame slack accepted by validation (see kOutOfBoundsTolerancePx).
  double tolerance_px = 0.0;
  /// Downgrades unknown header keys from errors to warnings.
  bool allow_unknown_header_keys = false;
  /// Receives warnings when non-null.
  std::vector<std::string>* warnings = nullptr;
};

/// Streams a keypoint file. Throws ParseError (with line and column) for
/// grammar violations and ValidationError for domain violations.
KeypointSequence parse_keypoint_stream(std::istream& in, const KeypointParseOptions& options = {});
KeypointSequence parse_keypoint_file(std::string_view text, const KeypointParseOptions& options = {});
KeypointSequence read_keypoint_file(const std::filesystem::path& path,
                                    const KeypointParseOptions& options = {});

/// Serialises with shortest round-trip number formatting, so
/// write(parse(write(seq))) reproduces the same bytes.
std::string write_keypoint_file(const KeypointSequence& seq);
void save_keypoint_file(const std::filesystem::path& path, const KeypointSequence& seq);

/// Keypoint files (*.jsonl) directly under `dir`, sorted by path.
std::vector<std::filesystem::path> list_keypoint_files(const std::filesystem::path& dir);

}  // namespace ttstroke
