// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ttstroke/error.hpp"

namespace ttstroke {

namespace {

// Repeated reflection so arbitrarily short signals never index out of range.
std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long period = 2 * static_cast<long>(n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<long>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

std::size_t clamp_index(long i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

}  // namespace

std::string_view edge_mode_name(EdgeMode m) {
  switch (m) {
    case EdgeMode::Reflect: return "reflect";
    case EdgeMode::Replicate: return "replicate";
    case EdgeMode::Passthrough: return "passthrough";
  }
  return "reflect";
}

EdgeMode edge_mode_from_name(std::string_view name) {
  if (name == "reflect") return EdgeMode::Reflect;
  if (name == "replicate") return EdgeMode::Replicate;
  if (name == "passthrough") return EdgeMode::Passthrough;
  throw InvalidConfig("unknown edge_mode '" + std::string(name) + "'");
}

std::string_view overlong_policy_name(OverlongPolicy p) {
  return p == OverlongPolicy::TruncateHead ? "truncate_head" : "truncate_tail";
}

OverlongPolicy overlong_policy_from_name(std::string_view name) {
  if (name == "truncate_head") return OverlongPolicy::TruncateHead;
  if (name == "truncate_tail") return OverlongPolicy::TruncateTail;
  throw InvalidConfig("unknown overlong_policy '" + std::string(name) + "'");
}

void PreprocessConfig::validate() const {
  if (target_len < SavgolKernel::kWindow || target_len > kWindowSteps) {
    throw InvalidConfig("target_len must lie in 13..100, got " + std::to_string(target_len));
  }
  auto idx = joint_map.indices();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= static_cast<int>(kNumJoints)) {
      throw InvalidConfig("joint index " + std::to_string(idx[i]) + " outside 0..16");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (idx[i] == idx[j]) throw InvalidConfig("joint_map indices must be distinct");
    }
  }
}

std::vector<double> savgol_smooth(std::span<const double> signal, const SavgolKernel& kernel,
                                  EdgeMode edge_mode) {
  const std::size_t n = signal.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(signal[i])) throw NonFinite(i);
  }
  constexpr long half = SavgolKernel::kHalf;
  const auto& num = kernel.numerators;
  const double divisor = kernel.divisor;
  std::vector<double> out(n);

  // Symmetric kernel: centre tap plus paired taps.
  auto interior = [&](std::size_t t) {
    double acc = num[half] * signal[t];
    for (long k = 1; k <= half; ++k) {
      acc += num[static_cast<std::size_t>(half + k)] * (signal[t - k] + signal[t + k]);
    }
    return acc / divisor;
  };

  auto edge = [&](std::size_t t) {
    if (edge_mode == EdgeMode::Passthrough) return signal[t];
    double acc = 0.0;
    for (long k = -half; k <= half; ++k) {
      const long i = static_cast<long>(t) + k;
      const std::size_t src =
          edge_mode == EdgeMode::Reflect ? reflect_index(i, n) : clamp_index(i, n);
      acc += num[static_cast<std::size_t>(half + k)] * signal[src];
    }
    return acc / divisor;
  };

  for (std::size_t t = 0; t < n; ++t) {
    const bool inside = t >= static_cast<std::size_t>(half) && t + half < n;
    out[t] = inside ? interior(t) : edge(t);
  }
  return out;
}

KeypointSequence mirror_x(const KeypointSequence& seq) {
  KeypointSequence out = seq;
  const double width = seq.resolution.width;
  for (auto& frame : out.frames) {
    for (auto& p : frame.joints) p.x = width - p.x;
    for (const auto& [l, r] : coco::kLeftRightPairs) {
      std::swap(frame.joints[static_cast<std::size_t>(l)], frame.joints[static_cast<std::size_t>(r)]);
    }
  }
  out.handedness = seq.handedness == Handedness::Right ? Handedness::Left : Handedness::Right;
  return out;
}

FeatureRows select_joints(const KeypointSequence& seq, const JointMap& joint_map) {
  const auto idx = joint_map.indices();
  FeatureRows rows;
  rows.reserve(seq.frames.size());
  for (const auto& frame : seq.frames) {
    FeatureRow row{};
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const JointPoint& p = frame.joints.at(static_cast<std::size_t>(idx[j]));
      row[2 * j] = p.x;
      row[2 * j + 1] = p.y;
    }
    rows.push_back(row);
  }
  return rows;
}

FeatureWindow shape_window(const FeatureRows& rows, const PreprocessConfig& config) {
  if (rows.empty()) throw ValidationError("cannot shape an empty sequence");
  const std::size_t keep = std::min(rows.size(), config.target_len);
  const std::size_t first =
      config.overlong_policy == OverlongPolicy::TruncateHead ? rows.size() - keep : 0;
  FeatureWindow::Storage data{};
  for (std::size_t t = 0; t < keep; ++t) {
    for (std::size_t f = 0; f < kFeatures; ++f) {
      data[t * kFeatures + f] = static_cast<float>(rows[first + t][f]);
    }
  }
  return FeatureWindow(data, keep);
}

FeatureWindow preprocess(const KeypointSequence& seq, const PreprocessConfig& config) {
  const KeypointSequence* source = &seq;
  KeypointSequence mirrored;
  if (seq.handedness == Handedness::Left) {
    mirrored = mirror_x(seq);
    source = &mirrored;
  }
  FeatureRows rows = select_joints(*source, config.joint_map);
  if (config.smooth) {
    std::vector<double> channel(rows.size());
    for (std::size_t f = 0; f < kFeatures; ++f) {
      for (std::size_t t = 0; t < rows.size(); ++t) channel[t] = rows[t][f];
      const auto smoothed = savgol_smooth(channel, SavgolKernel{}, config.edge_mode);
      for (std::size_t t = 0; t < rows.size(); ++t) rows[t][f] = smoothed[t];
    }
  }
  return shape_window(rows, config);
}

}  // namespace ttstroke
