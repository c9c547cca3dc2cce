// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttstroke/domain.hpp"

namespace ttstroke {

/// Dense row-major steps x channels activation.
struct Tensor2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor2D() = default;
  Tensor2D(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  static Tensor2D from_window(const FeatureWindow& window);
  bool operator==(const Tensor2D&) const = default;
};

struct ConvSpec {
  std::size_t out_channels = 64;
  std::size_t kernel = 3;
  std::size_t stride = 1;

  bool operator==(const ConvSpec&) const = default;
};

/// Entry conv -> layer norm -> [ReLU conv] x N -> layer norm -> flatten ->
/// dense + ReLU -> dense + softmax. Convolutions are unpadded.
struct ArchSpec {
  ConvSpec entry{64, 7, 2};
  std::vector<ConvSpec> body{{64, 3, 2}, {64, 3, 2}, {64, 3, 1}};
  std::size_t dense_hidden = 128;
  std::size_t num_classes = kNumClasses;
  std::size_t input_steps = kWindowSteps;
  std::size_t input_channels = kFeatures;
  /// Adds a layer norm after every body conv except the last (which is always
  /// followed by one).
  bool norm_after_each_body_conv = false;

  /// Throws InvalidConfig.
  void validate() const;
  /// Steps left after the conv stack.
  std::size_t final_steps() const;
  std::size_t flattened_size() const;

  bool operator==(const ArchSpec&) const = default;
};

/// floor((steps - kernel) / stride) + 1, or 0 when the kernel does not fit.
std::size_t conv_output_steps(std::size_t steps, std::size_t kernel, std::size_t stride);

/// Analytic trainable-parameter count.
std::size_t param_count(const ArchSpec& arch);

/// Number of trainable parameters of the reconstructed default network
/// reported next to the published figure of 206,299.
inline constexpr std::size_t kPublishedTcnParams = 206299;

/// Named slice of the flat parameter vector.
struct TensorSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Parameters in declaration order: every conv as weight[k][in][out] then
/// bias[out], every layer norm as gain then bias, then dense1 weight[in][out],
/// bias, dense2 weight, bias.
std::vector<TensorSlot> parameter_layout(const ArchSpec& arch);

/// Valid (unpadded) temporal convolution. `weights` is laid out
/// [kernel][in_channels][out_channels]. Throws ShapeMismatch.
Tensor2D conv1d_forward(const Tensor2D& input, std::span<const double> weights,
                        std::span<const double> bias, std::size_t kernel, std::size_t stride);

inline constexpr double kLayerNormEpsilon = 1e-5;

/// Normalises each row across its columns, then applies per-column gain and
/// bias. Throws ShapeMismatch when cols < 2 or the affine sizes disagree.
Tensor2D layer_norm(const Tensor2D& input, std::span<const double> gain,
                    std::span<const double> bias);

class TcnModel {
 public:
  /// Throws ShapeMismatch if `params` does not match the arch's layout.
  TcnModel(ArchSpec arch, std::vector<double> params);

  /// Zero-mean normal init with variance 2/fan_in for ReLU layers and 1/fan_in
  /// for the rest; gains 1, biases 0. Parameters are float32-representable.
  static TcnModel initialize(const ArchSpec& arch, std::uint64_t seed);

  const ArchSpec& arch() const { return arch_; }
  const std::vector<TensorSlot>& layout() const { return layout_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> mutable_parameters() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Throws std::out_of_range for an unknown slot name.
  std::span<const double> tensor(std::string_view name) const;
  std::span<double> mutable_tensor(std::string_view name);

  /// Rounds every parameter to the nearest float32 so the in-memory model
  /// equals its serialised form.
  void round_to_float32();

  bool all_finite() const;
  bool operator==(const TcnModel& other) const {
    return arch_ == other.arch_ && params_ == other.params_;
  }

 private:
  ArchSpec arch_;
  std::vector<TensorSlot> layout_;
  std::vector<double> params_;
};

using Probabilities = std::array<double, kNumClasses>;

/// Class distribution for one window. Throws ShapeMismatch.
Probabilities forward(const TcnModel& model, const FeatureWindow& window);

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(p[target], 1e-12)).
double cross_entropy(std::span<const double> probs, StrokeClass target);

/// Gradient of cross_entropy(forward(model, window), target) with respect to
/// every parameter, in layout order.
std::vector<double> backward(const TcnModel& model, const FeatureWindow& window,
                             StrokeClass target);

/// Adds this example's gradient into `grad` and returns its loss and
/// prediction. Used by training to avoid per-example allocation of results.
struct ExampleResult {
  double loss = 0.0;
  StrokeClass predicted = StrokeClass::ForehandTopspin;
};
ExampleResult accumulate_gradient(const TcnModel& model, const FeatureWindow& window,
                                  StrokeClass target, std::span<double> grad);

struct Prediction {
  StrokeClass label = StrokeClass::ForehandTopspin;
  double confidence = 0.0;
};

/// Argmax with ties resolved to the lowest class id.
Prediction argmax(const Probabilities& probs);

Prediction classify(const TcnModel& model, const FeatureWindow& window);

enum class OptimizerKind { Sgd, Adam };

std::string_view optimizer_name(OptimizerKind k);
OptimizerKind optimizer_from_name(std::string_view name);

struct TrainConfig {
  int epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 7;
  bool shuffle = true;
  /// Only the dense head is updated when set.
  bool freeze_conv = false;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  /// NaN when training ran without a validation set.
  double val_accuracy = 0.0;
};

struct TrainResult {
  TcnModel model;
  std::vector<EpochStats> history;
  /// 1-based epoch whose parameters were kept.
  int best_epoch = 0;
};

/// Mini-batch training in a fixed, seeded order. Batch gradients are summed
/// in item order and divided by the batch size. With a non-empty `val` the
/// best-validation-accuracy epoch (earliest on ties) is returned, otherwise
/// the last. Throws NanDetected.
TrainResult train(const TcnModel& initial, const Dataset& train_set, const Dataset& val,
                  const TrainConfig& config);

/// Fraction of `data` classified correctly.
double accuracy(const TcnModel& model, const Dataset& data);

}  // namespace ttstroke
