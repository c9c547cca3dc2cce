// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/features_io.hpp"

#include "byte_io.hpp"
#include "ttstroke/model_io.hpp"

namespace ttstroke {

std::vector<std::uint8_t> encode_features(const Dataset& data) {
  detail::ByteWriter w;
  w.bytes(kFeatureMagic);
  w.u32(kFeatureFormatVersion);
  w.u32(static_cast<std::uint32_t>(data.size()));
  w.u32(kWindowSteps);
  w.u32(kFeatures);
  for (const auto& item : data.items()) {
    for (float v : item.window.data()) w.f32(v);
  }
  for (const auto& item : data.items()) w.u8(static_cast<std::uint8_t>(class_id(item.label)));
  for (const auto& item : data.items()) w.u16(static_cast<std::uint16_t>(item.window.mask_len()));
  return w.take();
}

Dataset decode_features(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect(kFeatureMagic, "TTFW feature");
  const std::size_t version_at = r.position();
  if (const auto version = r.u32(); version != kFeatureFormatVersion) {
    throw FormatError(version_at, "unsupported feature format version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  const std::size_t dims_at = r.position();
  const std::uint32_t steps = r.u32();
  const std::uint32_t features = r.u32();
  if (steps != kWindowSteps || features != kFeatures) {
    throw FormatError(dims_at, "window dims must be 100x8, got " + std::to_string(steps) + "x" +
                                   std::to_string(features));
  }
  constexpr std::size_t kPerItem = kWindowSize * 4 + 1 + 2;
  if (count > r.remaining() / kPerItem) throw FormatError(r.position(), "truncated feature file");

  std::vector<FeatureWindow::Storage> windows(count);
  for (auto& w : windows) {
    for (float& v : w) v = r.f32();
  }
  std::vector<StrokeClass> labels(count);
  for (auto& label : labels) {
    const std::size_t at = r.position();
    const std::uint8_t id = r.u8();
    if (id >= kNumClasses) throw FormatError(at, "label id " + std::to_string(id) + " out of range");
    label = class_from_id(id);
  }
  std::vector<LabeledWindow> items;
  items.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.position();
    const std::uint16_t mask_len = r.u16();
    try {
      items.push_back({FeatureWindow(windows[i], mask_len), labels[i]});
    } catch (const ValidationError& e) {
      throw FormatError(at, "window " + std::to_string(i) + ": " + e.what());
    }
  }
  r.finish();
  return Dataset(std::move(items));
}

void save_features(const std::filesystem::path& path, const Dataset& data) {
  write_file_bytes(path, encode_features(data));
}

Dataset load_features(const std::filesystem::path& path) {
  return decode_features(read_file_bytes(path));
}

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
  std::string out = "path,label,handedness\n";
  for (const auto& row : rows) {
    out += row.path + "," + std::string(class_name(row.label)) + "," +
           std::string(handedness_name(row.handedness)) + "\n";
  }
  return out;
}

}  // namespace ttstroke
