// SPDX-License-Identifier: Apache-2.0
// JSON mapping for configuration structs. Private to the library.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ttstroke/error.hpp"
#include "ttstroke/run_config.hpp"

namespace ttstroke::detail {

using Json = nlohmann::ordered_json;

/// Walks one JSON object, recording which keys were consumed so leftovers can
/// be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  template <typename T>
  void read(std::string_view key, T& out);
  bool has(std::string_view key) const;
  const Json* child(std::string_view key);
  std::string path_of(std::string_view key) const;
  /// Throws InvalidConfig for the first key not consumed.
  void finish() const;

 private:
  const Json& object_;
  std::string path_;
  std::vector<std::string> seen_;
};

Json to_json(const PreprocessConfig& c);
Json to_json(const ArchSpec& a);
Json to_json(const TrainConfig& t);
Json to_json(const SynthConfig& s);
Json to_json(const SplitSpec& s);

void from_json(const Json& j, const std::string& path, PreprocessConfig& c);
void from_json(const Json& j, const std::string& path, ArchSpec& a);
/// Reads "init_seed" into `init_seed` when present.
void from_json(const Json& j, const std::string& path, TrainConfig& t, std::uint64_t& init_seed);
void from_json(const Json& j, const std::string& path, SynthConfig& s);
void from_json(const Json& j, const std::string& path, SplitSpec& s);

/// 1-based line/column of a byte offset in `text`.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte);

}  // namespace ttstroke::detail
