// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "ttstroke/error.hpp"

namespace ttstroke {

namespace {

constexpr std::array<std::string_view, kNumClasses> kNames = {
    "ForehandTopspin", "BackhandTopspin", "ForehandPush", "BackhandPush",
    "ForehandBlock",   "BackhandBlock",   "ForehandFlick", "BackhandFlick",
    "ForehandLob",     "BackhandLob",     "ForehandFlat",
};

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_' || ch == '-') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

StrokeClass class_from_id(std::size_t id) {
  if (id >= kNumClasses) throw UnknownClass("id " + std::to_string(id));
  return static_cast<StrokeClass>(id);
}

std::string_view class_name(StrokeClass c) { return kNames.at(class_id(c)); }

std::string display_name(StrokeClass c) {
  std::string_view name = class_name(c);
  // Split CamelCase: every name is <Side><Family>.
  auto split = std::find_if(name.begin() + 1, name.end(),
                            [](char ch) { return std::isupper(static_cast<unsigned char>(ch)); });
  return std::string(name.begin(), split) + " " + std::string(split, name.end());
}

StrokeClass class_from_name(std::string_view name) {
  const std::string key = fold(name);
  for (std::size_t i = 0; i < kNumClasses; ++i) {
    if (fold(kNames[i]) == key) return static_cast<StrokeClass>(i);
  }
  throw UnknownClass(std::string(name));
}

std::string_view handedness_name(Handedness h) {
  return h == Handedness::Right ? "right" : "left";
}

// MPII order: 0 r-ankle, 1 r-knee, 2 r-hip, 3 l-hip, 4 l-knee, 5 l-ankle,
// 6 pelvis, 7 thorax, 8 upper neck, 9 head top, 10 r-wrist, 11 r-elbow,
// 12 r-shoulder, 13 l-shoulder, 14 l-elbow, 15 l-wrist.
const std::array<int, kNumJoints> kCocoFromMpii = {
    9,  -1, -1, -1, -1,  // nose <- head top; eyes/ears have no counterpart
    13, 12,              // shoulders
    14, 11,              // elbows
    15, 10,              // wrists
    3,  2,               // hips
    4,  1,               // knees
    5,  0,               // ankles
};

PoseFrame frame_from_mpii(std::span<const JointPoint, kNumMpiiJoints> mpii) {
  PoseFrame frame;
  const JointPoint& head = mpii[9];
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    const int src = kCocoFromMpii[i];
    if (src >= 0) {
      frame.joints[i] = mpii[static_cast<std::size_t>(src)];
    } else {
      frame.joints[i] = JointPoint{head.x, head.y, 0.0};
    }
  }
  return frame;
}

std::string ValidationResult::describe() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const Violation& v = violations[i];
    if (i) out << "; ";
    if (v.frame) out << "frame " << *v.frame << ", ";
    if (v.joint) out << "joint " << *v.joint << ", ";
    out << v.reason;
  }
  return out.str();
}

ValidationResult validate_sequence(const KeypointSequence& seq, double tolerance_px) {
  ValidationResult result;
  auto& out = result.violations;
  if (seq.frames.empty()) out.push_back({std::nullopt, std::nullopt, "sequence has no frames"});
  const int w = seq.resolution.width;
  const int h = seq.resolution.height;
  if (w <= 0 || h <= 0) {
    out.push_back({std::nullopt, std::nullopt, "resolution must be positive"});
    return result;
  }
  const double lo = -tolerance_px;
  const double hi_x = w + tolerance_px;
  const double hi_y = h + tolerance_px;
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      const JointPoint& p = seq.frames[f].joints[j];
      const int joint = static_cast<int>(j);
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        out.push_back({f, joint, "non-finite coordinate"});
        continue;
      }
      if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
        out.push_back({f, joint, "confidence outside [0, 1]"});
      }
      if (p.x < lo || p.x > hi_x || p.y < lo || p.y > hi_y) {
        out.push_back({f, joint, "out-of-bounds"});
      }
    }
  }
  return result;
}

FeatureWindow::FeatureWindow(const Storage& data, std::size_t mask_len)
    : data_(data), mask_len_(mask_len) {
  if (mask_len < 1 || mask_len > kWindowSteps) {
    throw ValidationError("mask_len " + std::to_string(mask_len) + " outside 1..100");
  }
  for (std::size_t i = mask_len * kFeatures; i < kWindowSize; ++i) {
    if (data_[i] != 0.0f) {
      throw ValidationError("padded row " + std::to_string(i / kFeatures) + " is not zero");
    }
  }
}

Dataset::Dataset(std::vector<LabeledWindow> items) : items_(std::move(items)) {
  for (const auto& item : items_) ++counts_[class_id(item.label)];
}

void Dataset::add(FeatureWindow window, StrokeClass label) {
  items_.push_back({std::move(window), label});
  ++counts_[class_id(label)];
}

}  // namespace ttstroke
