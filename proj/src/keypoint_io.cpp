// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/keypoint_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ttstroke/error.hpp"

namespace ttstroke {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 7> kHeaderKeys = {
    "format_version", "source_id", "handedness", "width", "height", "fps", "label"};

Json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, e.byte == 0 ? 1 : e.byte, "invalid JSON");
  }
}

void parse_header(const Json& h, std::size_t line_no, const KeypointParseOptions& options,
                  KeypointSequence& seq) {
  if (!h.is_object()) throw ParseError(line_no, 1, "header must be a JSON object");
  for (auto it = h.begin(); it != h.end(); ++it) {
    if (std::find(kHeaderKeys.begin(), kHeaderKeys.end(), it.key()) != kHeaderKeys.end()) continue;
    const std::string msg = "unknown header key '" + it.key() + "'";
    if (!options.allow_unknown_header_keys) throw ParseError(line_no, 1, msg);
    if (options.warnings) options.warnings->push_back("line " + std::to_string(line_no) + ": " + msg);
  }
  auto require = [&](const char* key) -> const Json& {
    if (!h.contains(key)) throw ParseError(line_no, 1, std::string("header is missing '") + key + "'");
    return h.at(key);
  };
  const Json& version = require("format_version");
  if (!version.is_string() || version.get<std::string>() != kKeypointFormatVersion) {
    throw ParseError(line_no, 1, "unsupported format_version (expected \"1\")");
  }
  const Json& source = require("source_id");
  if (!source.is_string()) throw ParseError(line_no, 1, "'source_id' must be a string");
  seq.source_id = source.get<std::string>();

  const Json& hand = require("handedness");
  if (hand == "right") {
    seq.handedness = Handedness::Right;
  } else if (hand == "left") {
    seq.handedness = Handedness::Left;
  } else {
    throw ParseError(line_no, 1, "'handedness' must be \"left\" or \"right\"");
  }
  for (const char* key : {"width", "height"}) {
    const Json& v = require(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0 || v.get<long long>() > 1'000'000) {
      throw ParseError(line_no, 1, std::string("'") + key + "' must be a positive integer");
    }
  }
  seq.resolution = {h.at("width").get<int>(), h.at("height").get<int>()};
  if (h.contains("fps")) {
    if (!h.at("fps").is_number() || !(h.at("fps").get<double>() > 0.0)) {
      throw ParseError(line_no, 1, "'fps' must be a positive number");
    }
    seq.fps = h.at("fps").get<double>();
  }
  if (h.contains("label")) {
    if (!h.at("label").is_string()) throw ParseError(line_no, 1, "'label' must be a string");
    try {
      seq.label = class_from_name(h.at("label").get<std::string>());
    } catch (const UnknownClass& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
}

PoseFrame parse_frame(const Json& rec, std::size_t line_no, std::size_t expected_index) {
  if (!rec.is_object()) throw ParseError(line_no, 1, "frame record must be a JSON object");
  for (auto it = rec.begin(); it != rec.end(); ++it) {
    if (it.key() != "frame" && it.key() != "kp") {
      throw ParseError(line_no, 1, "unknown key '" + it.key() + "' in frame record");
    }
  }
  if (!rec.contains("frame") || !rec.at("frame").is_number_unsigned()) {
    throw ParseError(line_no, 1, "frame record needs a non-negative integer 'frame'");
  }
  const auto index = rec.at("frame").get<std::size_t>();
  if (index != expected_index) {
    throw ParseError(line_no, 1, "frame " + std::to_string(index) + " out of sequence (expected " +
                                     std::to_string(expected_index) + ")");
  }
  const std::string where = "frame " + std::to_string(index);
  if (!rec.contains("kp") || !rec.at("kp").is_array()) {
    throw ParseError(line_no, 1, where + ": missing 'kp' array");
  }
  const Json& kp = rec.at("kp");
  if (kp.size() != kNumJoints) {
    throw ParseError(line_no, 1, where + ": expected 17 keypoint triples, got " +
                                     std::to_string(kp.size()));
  }
  PoseFrame frame;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const Json& t = kp[j];
    if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() ||
        !t[2].is_number()) {
      throw ParseError(line_no, 1, where + ", joint " + std::to_string(j) +
                                       ": expected [x, y, confidence]");
    }
    frame.joints[j] = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  }
  return frame;
}

}  // namespace

KeypointSequence parse_keypoint_stream(std::istream& in, const KeypointParseOptions& options) {
  KeypointSequence seq;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const Json rec = parse_line(line, line_no);
    if (!have_header) {
      parse_header(rec, line_no, options, seq);
      have_header = true;
    } else {
      seq.frames.push_back(parse_frame(rec, line_no, seq.frames.size()));
    }
  }
  if (!have_header) throw ParseError(line_no + 1, 1, "missing header line");
  if (seq.frames.empty()) throw ParseError(line_no + 1, 1, "file contains no frames");

  const ValidationResult v = validate_sequence(seq, options.tolerance_px);
  if (!v.ok()) throw ValidationError(v.describe());
  return seq;
}

KeypointSequence parse_keypoint_file(std::string_view text, const KeypointParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_keypoint_stream(in, options);
}

KeypointSequence read_keypoint_file(const std::filesystem::path& path,
                                    const KeypointParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_keypoint_stream(in, options);
}

std::string write_keypoint_file(const KeypointSequence& seq) {
  Json header{{"format_version", kKeypointFormatVersion},
              {"source_id", seq.source_id},
              {"handedness", handedness_name(seq.handedness)},
              {"width", seq.resolution.width},
              {"height", seq.resolution.height}};
  if (seq.fps) header["fps"] = *seq.fps;
  if (seq.label) header["label"] = class_name(*seq.label);
  std::string out = header.dump() + "\n";
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    Json kp = Json::array();
    for (const auto& p : seq.frames[f].joints) kp.push_back({p.x, p.y, p.confidence});
    out += Json{{"frame", f}, {"kp", kp}}.dump();
    out += "\n";
  }
  return out;
}

void save_keypoint_file(const std::filesystem::path& path, const KeypointSequence& seq) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << write_keypoint_file(seq);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::filesystem::path> list_keypoint_files(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(dir, ec);
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace ttstroke
