// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ttstroke/error.hpp"
#include "ttstroke/preprocess.hpp"

namespace ttstroke {

namespace {

// splitmix64 finaliser: decorrelates per-sequence seeds derived by counter.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StrokeTemplate make(StrokeClass c, QuadBezier wrist, QuadBezier elbow, double drift, int lo,
                    int hi, StrokeSide side) {
  StrokeTemplate t;
  t.stroke = c;
  t.wrist_path = wrist;
  t.elbow_offset_path = elbow;
  t.right_shoulder = {560.0, 300.0};
  t.left_shoulder = {720.0, 300.0};
  t.shoulder_drift = drift;
  t.min_frames = lo;
  t.max_frames = hi;
  t.side = side;
  return t;
}

// Static anchors for joints the classifier never reads (right-handed frame).
constexpr std::array<Point2, kNumJoints> kRestPose = {{
    {640, 190},  // nose
    {655, 175},  // left eye
    {625, 175},  // right eye
    {675, 185},  // left ear
    {605, 185},  // right ear
    {720, 300},  // left shoulder
    {560, 300},  // right shoulder
    {770, 410},  // left elbow
    {520, 420},  // right elbow
    {745, 500},  // left wrist
    {500, 480},  // right wrist
    {690, 560},  // left hip
    {590, 560},  // right hip
    {700, 680},  // left knee
    {580, 680},  // right knee
    {705, 715},  // left ankle
    {575, 715},  // right ankle
}};

double clamp_to(double v, double hi) { return std::clamp(v, 0.0, hi); }

}  // namespace

Point2 QuadBezier::at(double s) const {
  const double u = 1.0 - s;
  return {u * u * start.x + 2.0 * u * s * control.x + s * s * end.x,
          u * u * start.y + 2.0 * u * s * control.y + s * s * end.y};
}

void StrokeTemplate::validate() const {
  if (min_frames < 15 || max_frames > 100 || min_frames > max_frames) {
    throw InvalidConfig("template " + std::string(class_name(stroke)) +
                        ": duration range must lie within [15, 100]");
  }
}

std::array<StrokeTemplate, kNumClasses> default_templates() {
  using C = StrokeClass;
  constexpr auto FH = StrokeSide::ForehandSide;
  constexpr auto BH = StrokeSide::BackhandSide;
  return {{
      // Topspins: low-to-high sweep with torso rotation.
      make(C::ForehandTopspin, {{440, 600}, {360, 360}, {540, 180}},
           {{50, -60}, {70, 0}, {40, 70}}, 18, 30, 50, FH),
      make(C::BackhandTopspin, {{680, 560}, {780, 400}, {820, 230}},
           {{-60, -40}, {-70, 10}, {-40, 70}}, 12, 30, 50, BH),
      // Pushes: short forward-down poke.
      make(C::ForehandPush, {{500, 420}, {470, 470}, {490, 530}},
           {{40, -70}, {45, -80}, {50, -90}}, 4, 28, 45, FH),
      make(C::BackhandPush, {{700, 420}, {740, 470}, {720, 530}},
           {{-70, -40}, {-75, -50}, {-80, -60}}, 4, 28, 45, BH),
      // Blocks: minimal motion.
      make(C::ForehandBlock, {{470, 380}, {455, 392}, {462, 405}},
           {{60, 40}, {60, 40}, {60, 38}}, 2, 15, 30, FH),
      make(C::BackhandBlock, {{690, 380}, {705, 392}, {698, 405}},
           {{-80, 50}, {-80, 50}, {-80, 48}}, 2, 15, 30, BH),
      // Flicks: short wristy arc near the net line.
      make(C::ForehandFlick, {{530, 580}, {460, 520}, {560, 480}},
           {{30, -90}, {50, -60}, {40, -60}}, 6, 20, 35, FH),
      make(C::BackhandFlick, {{690, 580}, {790, 520}, {700, 480}},
           {{-40, -90}, {-60, -60}, {-40, -60}}, 6, 20, 35, BH),
      // Lobs: large upward arc.
      make(C::ForehandLob, {{420, 640}, {250, 200}, {520, 80}},
           {{60, -80}, {80, 40}, {40, 110}}, 14, 40, 70, FH),
      make(C::BackhandLob, {{740, 640}, {900, 220}, {760, 80}},
           {{-60, -80}, {-80, 40}, {-40, 110}}, 14, 40, 70, BH),
      // Flat: fast level drive.
      make(C::ForehandFlat, {{380, 390}, {480, 360}, {600, 385}},
           {{80, 20}, {70, 30}, {60, 40}}, 10, 15, 28, FH),
  }};
}

void SynthConfig::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw InvalidConfig("noise_std must be >= 0");
  if (!(swap_prob >= 0.0 && swap_prob <= 1.0)) throw InvalidConfig("swap_prob must lie in [0, 1]");
  if (!(left_handed_fraction >= 0.0 && left_handed_fraction <= 1.0)) {
    throw InvalidConfig("left_handed_fraction must lie in [0, 1]");
  }
  if (!(style_variation >= 0.0) || !std::isfinite(style_variation)) {
    throw InvalidConfig("style_variation must be >= 0");
  }
  if (resolution.width <= 0 || resolution.height <= 0) {
    throw InvalidConfig("resolution must be positive");
  }
}

double stroke_phase(std::size_t t, std::size_t frames) {
  if (frames <= 1) return 0.0;
  const double u = static_cast<double>(t) / static_cast<double>(frames - 1);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * u);
}

SequencePlan plan_sequence(const SynthConfig& config, const StrokeTemplate& tpl, std::size_t index) {
  const std::uint64_t sub = mix(config.seed ^ mix(index));
  std::mt19937_64 rng(sub);
  SequencePlan plan;
  plan.noise_seed = mix(sub + 1);

  std::uniform_int_distribution<int> duration(tpl.min_frames, tpl.max_frames);
  plan.frames = static_cast<std::size_t>(duration(rng));
  std::bernoulli_distribution lefty(config.left_handed_fraction);
  plan.left_handed = lefty(rng);

  const double v = config.style_variation;
  std::normal_distribution<double> unit(0.0, 1.0);
  // Fixed draw order keeps plans stable when v changes.
  const double off_x = 25.0 * v * unit(rng);
  const double off_y = 25.0 * v * unit(rng);
  const double scale = 1.0 + 0.06 * v * unit(rng);
  const Point2 control_jitter{20.0 * v * unit(rng), 20.0 * v * unit(rng)};
  const Point2 end_jitter{20.0 * v * unit(rng), 20.0 * v * unit(rng)};

  // Templates are authored at 1280x720 around the shoulder centre.
  const double sx = config.resolution.width / 1280.0;
  const double sy = config.resolution.height / 720.0;
  const Point2 centre{640.0, 300.0};
  auto place = [&](Point2 p) {
    return Point2{(centre.x + scale * (p.x - centre.x) + off_x) * sx,
                  (centre.y + scale * (p.y - centre.y) + off_y) * sy};
  };
  auto stretch = [&](Point2 d) { return Point2{scale * d.x * sx, scale * d.y * sy}; };

  StrokeTemplate& inst = plan.instance;
  inst = tpl;
  inst.wrist_path = {place(tpl.wrist_path.start),
                     place({tpl.wrist_path.control.x + control_jitter.x,
                            tpl.wrist_path.control.y + control_jitter.y}),
                     place({tpl.wrist_path.end.x + end_jitter.x, tpl.wrist_path.end.y + end_jitter.y})};
  inst.elbow_offset_path = {stretch(tpl.elbow_offset_path.start),
                            stretch(tpl.elbow_offset_path.control),
                            stretch(tpl.elbow_offset_path.end)};
  inst.right_shoulder = place(tpl.right_shoulder);
  inst.left_shoulder = place(tpl.left_shoulder);
  inst.shoulder_drift = tpl.shoulder_drift * scale * sx;
  for (std::size_t j = 0; j < kNumJoints; ++j) plan.rest_pose[j] = place(kRestPose[j]);
  return plan;
}

std::vector<KeypointSequence> generate(const SynthConfig& config,
                                       std::span<const StrokeTemplate> templates) {
  config.validate();
  if (templates.size() != kNumClasses) {
    throw InvalidConfig("expected 11 templates, got " + std::to_string(templates.size()));
  }
  std::array<const StrokeTemplate*, kNumClasses> by_class{};
  for (const auto& t : templates) {
    t.validate();
    if (by_class[class_id(t.stroke)]) {
      throw InvalidConfig("duplicate template for " + std::string(class_name(t.stroke)));
    }
    by_class[class_id(t.stroke)] = &t;
  }

  const double W = config.resolution.width;
  const double H = config.resolution.height;
  static constexpr std::array<std::array<int, 2>, 3> kArmPairs = {{
      {coco::kLeftShoulder, coco::kRightShoulder},
      {coco::kLeftElbow, coco::kRightElbow},
      {coco::kLeftWrist, coco::kRightWrist},
  }};

  std::vector<KeypointSequence> out;
  out.reserve(kNumClasses * config.per_class_count);
  std::size_t index = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const StrokeTemplate& tpl = *by_class[c];
    for (std::size_t i = 0; i < config.per_class_count; ++i, ++index) {
      const SequencePlan plan = plan_sequence(config, tpl, index);
      const StrokeTemplate& inst = plan.instance;
      std::mt19937_64 noise_rng(plan.noise_seed);
      std::normal_distribution<double> jitter(0.0, config.noise_std);
      std::bernoulli_distribution swap(config.swap_prob);
      std::uniform_int_distribution<int> which_pair(0, 2);
      auto noisy = [&](double v) { return config.noise_std > 0.0 ? v + jitter(noise_rng) : v; };

      KeypointSequence seq;
      seq.resolution = config.resolution;
      seq.label = tpl.stroke;
      seq.handedness = Handedness::Right;
      seq.source_id = "synth-" + std::string(class_name(tpl.stroke)) + "-" + std::to_string(i);
      seq.frames.resize(plan.frames);
      for (std::size_t t = 0; t < plan.frames; ++t) {
        const double s = stroke_phase(t, plan.frames);
        PoseFrame& frame = seq.frames[t];
        for (std::size_t j = 0; j < kNumJoints; ++j) {
          frame.joints[j] = {plan.rest_pose[j].x, plan.rest_pose[j].y, 0.9};
        }
        const Point2 wrist = inst.wrist_at(s);
        const Point2 elbow_off = inst.elbow_offset_path.at(s);
        const double sway = inst.shoulder_drift * std::sin(std::numbers::pi * s);
        const double bob = 0.3 * inst.shoulder_drift * std::sin(2.0 * std::numbers::pi * s);
        frame.joints[coco::kRightWrist] = {wrist.x, wrist.y, 0.9};
        frame.joints[coco::kRightElbow] = {wrist.x + elbow_off.x, wrist.y + elbow_off.y, 0.9};
        frame.joints[coco::kRightShoulder] = {inst.right_shoulder.x + sway,
                                              inst.right_shoulder.y + bob, 0.95};
        frame.joints[coco::kLeftShoulder] = {inst.left_shoulder.x + sway,
                                             inst.left_shoulder.y - bob, 0.95};

        for (auto& p : frame.joints) {
          p.x = clamp_to(noisy(p.x), W);
          p.y = clamp_to(noisy(p.y), H);
        }
        if (config.swap_prob > 0.0 && swap(noise_rng)) {
          const auto& pair = kArmPairs[static_cast<std::size_t>(which_pair(noise_rng))];
          std::swap(frame.joints[static_cast<std::size_t>(pair[0])],
                    frame.joints[static_cast<std::size_t>(pair[1])]);
        }
      }
      out.push_back(plan.left_handed ? mirror_x(seq) : std::move(seq));
    }
  }
  return out;
}

std::vector<KeypointSequence> generate(const SynthConfig& config) {
  const auto templates = default_templates();
  return generate(config, templates);
}

void StyleWarp::validate() const {
  if (!(time_scale >= 0.6 && time_scale <= 1.6)) {
    throw InvalidConfig("time_scale must lie in [0.6, 1.6]");
  }
  if (!(std::abs(dx) <= 120.0 && std::abs(dy) <= 120.0)) {
    throw InvalidConfig("style offsets must be at most 120 px");
  }
}

std::vector<KeypointSequence> distort_player_style(const std::vector<KeypointSequence>& seqs,
                                                   StrokeClass stroke, const StyleWarp& warp) {
  warp.validate();
  std::vector<KeypointSequence> out;
  out.reserve(seqs.size());
  for (const auto& seq : seqs) {
    if (seq.label != stroke || seq.frames.empty()) {
      out.push_back(seq);
      continue;
    }
    const std::size_t T = seq.frames.size();
    const auto new_T = static_cast<std::size_t>(
        std::max(1.0, std::round(static_cast<double>(T) * warp.time_scale)));
    KeypointSequence d = seq;
    d.frames.assign(new_T, PoseFrame{});
    for (std::size_t j = 0; j < new_T; ++j) {
      const double src =
          new_T == 1 ? 0.0
                     : static_cast<double>(j) * static_cast<double>(T - 1) /
                           static_cast<double>(new_T - 1);
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, T - 1);
      const double w = src - static_cast<double>(i0);
      for (std::size_t k = 0; k < kNumJoints; ++k) {
        const JointPoint& a = seq.frames[i0].joints[k];
        const JointPoint& b = seq.frames[i1].joints[k];
        d.frames[j].joints[k] = {a.x + w * (b.x - a.x), a.y + w * (b.y - a.y),
                                 a.confidence + w * (b.confidence - a.confidence)};
      }
    }

    const bool left = seq.handedness == Handedness::Left;
    const double dx = left ? -warp.dx : warp.dx;
    const int wrist = left ? coco::kLeftWrist : coco::kRightWrist;
    const int elbow = left ? coco::kLeftElbow : coco::kRightElbow;
    const double W = seq.resolution.width;
    const double H = seq.resolution.height;
    for (auto& frame : d.frames) {
      for (int idx : {wrist, elbow}) {
        JointPoint& p = frame.joints[static_cast<std::size_t>(idx)];
        p.x = clamp_to(p.x + dx, W);
        p.y = clamp_to(p.y + warp.dy, H);
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace ttstroke
