// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

/// Quadratic Bezier curve, evaluated for s in [0, 1].
struct QuadBezier {
  Point2 start;
  Point2 control;
  Point2 end;

  Point2 at(double s) const;
  bool operator==(const QuadBezier&) const = default;
};

enum class StrokeSide { ForehandSide, BackhandSide };

/// Right-handed trajectory template for one stroke class. The player faces
/// the camera, so the dominant (right) side is image-left of the midline.
struct StrokeTemplate {
  StrokeClass stroke = StrokeClass::ForehandTopspin;
  QuadBezier wrist_path;
  /// Elbow position relative to the wrist, over the same parameter.
  QuadBezier elbow_offset_path;
  Point2 right_shoulder;
  Point2 left_shoulder;
  /// Peak shoulder displacement in pixels over the stroke.
  double shoulder_drift = 0.0;
  int min_frames = 30;
  int max_frames = 50;
  StrokeSide side = StrokeSide::ForehandSide;

  /// Body midline x (mean of the shoulder anchors).
  double midline() const { return 0.5 * (right_shoulder.x + left_shoulder.x); }

  /// Wrist position at curve parameter s; the noiseless generator samples
  /// exactly this.
  Point2 wrist_at(double s) const { return wrist_path.at(s); }

  /// Throws InvalidConfig.
  void validate() const;
};

/// One hand-designed template per class, in class-id order.
std::array<StrokeTemplate, kNumClasses> default_templates();

struct SynthConfig {
  std::size_t per_class_count = 200;
  /// Gaussian jitter (pixels) on every coordinate of every joint.
  double noise_std = 2.0;
  /// Per-frame probability of a left/right arm-joint label swap.
  double swap_prob = 0.01;
  double left_handed_fraction = 0.2;
  /// Scales per-sequence player variation: body offset (sigma 25 px), body
  /// scale (sigma 6%) and wrist-path shape (sigma 20 px on control and end
  /// points). 0 reproduces the templates exactly.
  double style_variation = 1.0;
  std::uint64_t seed = 42;
  Resolution resolution;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

/// Curve parameter of frame `t` in a `frames`-long stroke (eased, 0 to 1).
double stroke_phase(std::size_t t, std::size_t frames);

/// Everything drawn for one generated sequence before noise is applied.
struct SequencePlan {
  /// The class template moved, scaled and reshaped for this player, in output
  /// pixel coordinates. The noiseless wrist track is exactly
  /// instance.wrist_at(stroke_phase(t, frames)) in the right-handed frame.
  StrokeTemplate instance;
  /// Positions of the joints the templates do not animate.
  std::array<Point2, kNumJoints> rest_pose{};
  std::size_t frames = 0;
  bool left_handed = false;
  /// Per-sequence seed of the noise stream.
  std::uint64_t noise_seed = 0;
};

/// Plan of the sequence at position `index` of generate()'s output.
SequencePlan plan_sequence(const SynthConfig& config, const StrokeTemplate& tpl, std::size_t index);

/// `per_class_count` labelled sequences per class, ordered by class then
/// index. Each sequence draws from its own counter-derived seed so output is a
/// pure function of the config. Left-handed instances are generated
/// right-handed and then mirrored. Requires exactly one template per class.
std::vector<KeypointSequence> generate(const SynthConfig& config,
                                       std::span<const StrokeTemplate> templates);
std::vector<KeypointSequence> generate(const SynthConfig& config);

/// Systematic deviation of one stroke class for a simulated new player.
struct StyleWarp {
  /// Duration multiplier, in [0.6, 1.6].
  double time_scale = 1.0;
  /// Offset applied to the dominant wrist and elbow, in the right-handed
  /// frame; each component at most 120 px in magnitude.
  double dx = 0.0;
  double dy = 0.0;

  void validate() const;
};

/// Resamples every sequence labelled `stroke` to round(T * time_scale) frames
/// and shifts its dominant wrist and elbow. Other sequences pass through.
std::vector<KeypointSequence> distort_player_style(const std::vector<KeypointSequence>& seqs,
                                                   StrokeClass stroke, const StyleWarp& warp);

}  // namespace ttstroke
