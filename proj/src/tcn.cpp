// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ttstroke/error.hpp"

namespace ttstroke {

namespace {

struct Stage {
  bool conv = true;
  bool relu = false;
  std::size_t weight_slot = 0;  // conv weight or norm gain
  std::size_t bias_slot = 0;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
};

struct Plan {
  std::vector<Stage> stages;
  std::vector<TensorSlot> layout;
  std::size_t dense1_weight = 0, dense1_bias = 0, dense2_weight = 0, dense2_bias = 0;
};

Plan make_plan(const ArchSpec& arch) {
  Plan plan;
  std::size_t offset = 0;
  auto add_slot = [&](std::string name, std::size_t size) {
    plan.layout.push_back({std::move(name), offset, size});
    offset += size;
    return plan.layout.size() - 1;
  };
  std::size_t conv_index = 0;
  std::size_t norm_index = 0;
  auto add_conv = [&](const ConvSpec& spec, std::size_t in_channels, bool relu) {
    Stage s;
    s.conv = true;
    s.relu = relu;
    s.kernel = spec.kernel;
    s.stride = spec.stride;
    s.in_channels = in_channels;
    s.out_channels = spec.out_channels;
    const std::string prefix = "conv" + std::to_string(conv_index++);
    s.weight_slot = add_slot(prefix + ".weight", spec.kernel * in_channels * spec.out_channels);
    s.bias_slot = add_slot(prefix + ".bias", spec.out_channels);
    plan.stages.push_back(s);
  };
  auto add_norm = [&](std::size_t features) {
    Stage s;
    s.conv = false;
    s.in_channels = s.out_channels = features;
    const std::string prefix = "norm" + std::to_string(norm_index++);
    s.weight_slot = add_slot(prefix + ".gain", features);
    s.bias_slot = add_slot(prefix + ".bias", features);
    plan.stages.push_back(s);
  };

  add_conv(arch.entry, arch.input_channels, false);
  add_norm(arch.entry.out_channels);
  std::size_t channels = arch.entry.out_channels;
  for (std::size_t i = 0; i < arch.body.size(); ++i) {
    add_conv(arch.body[i], channels, true);
    channels = arch.body[i].out_channels;
    if (arch.norm_after_each_body_conv && i + 1 < arch.body.size()) add_norm(channels);
  }
  add_norm(channels);

  const std::size_t flat = arch.flattened_size();
  plan.dense1_weight = add_slot("dense1.weight", flat * arch.dense_hidden);
  plan.dense1_bias = add_slot("dense1.bias", arch.dense_hidden);
  plan.dense2_weight = add_slot("dense2.weight", arch.dense_hidden * arch.num_classes);
  plan.dense2_bias = add_slot("dense2.bias", arch.num_classes);
  return plan;
}

// Layer norm that also records the normalised values and 1/sigma per row for
// the backward pass.
Tensor2D layer_norm_impl(const Tensor2D& input, std::span<const double> gain,
                         std::span<const double> bias, Tensor2D* xhat_out,
                         std::vector<double>* inv_std_out) {
  const std::size_t C = input.cols;
  if (C < 2) throw ShapeMismatch("layer norm needs at least 2 features per step");
  if (gain.size() != C || bias.size() != C) {
    throw ShapeMismatch("layer norm affine size " + std::to_string(gain.size()) + "/" +
                        std::to_string(bias.size()) + " does not match " + std::to_string(C) +
                        " features");
  }
  Tensor2D out(input.rows, C);
  if (xhat_out) *xhat_out = Tensor2D(input.rows, C);
  if (inv_std_out) inv_std_out->assign(input.rows, 0.0);
  for (std::size_t r = 0; r < input.rows; ++r) {
    const double* x = &input.values[r * C];
    double mean = 0.0;
    for (std::size_t c = 0; c < C; ++c) mean += x[c];
    mean /= static_cast<double>(C);
    double var = 0.0;
    for (std::size_t c = 0; c < C; ++c) var += (x[c] - mean) * (x[c] - mean);
    var /= static_cast<double>(C);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    for (std::size_t c = 0; c < C; ++c) {
      const double xh = (x[c] - mean) * inv_std;
      out.values[r * C + c] = gain[c] * xh + bias[c];
      if (xhat_out) xhat_out->values[r * C + c] = xh;
    }
    if (inv_std_out) (*inv_std_out)[r] = inv_std;
  }
  return out;
}

struct Trace {
  std::vector<Tensor2D> acts;  // acts[0] is the input, acts[i + 1] the output of stage i
  std::vector<Tensor2D> aux;   // conv: pre-activation; norm: normalised values
  std::vector<std::vector<double>> inv_std;
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  Probabilities probs{};
};

void dense_forward(std::span<const double> in, std::span<const double> weight,
                   std::span<const double> bias, std::span<double> out) {
  const std::size_t n_out = bias.size();
  std::copy(bias.begin(), bias.end(), out.begin());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double xi = in[i];
    if (xi == 0.0) continue;
    const double* w = &weight[i * n_out];
    for (std::size_t j = 0; j < n_out; ++j) out[j] += xi * w[j];
  }
}

void softmax(std::span<const double> logits, Probabilities& probs) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < kNumClasses; ++j) {
    probs[j] = std::exp(logits[j] - top);
    sum += probs[j];
  }
  for (auto& p : probs) p /= sum;
}

void check_input(const TcnModel& model, const Tensor2D& input) {
  const ArchSpec& arch = model.arch();
  if (input.rows != arch.input_steps || input.cols != arch.input_channels) {
    throw ShapeMismatch("input is " + std::to_string(input.rows) + "x" +
                        std::to_string(input.cols) + ", arch expects " +
                        std::to_string(arch.input_steps) + "x" +
                        std::to_string(arch.input_channels));
  }
}

Trace run_forward(const TcnModel& model, const Plan& plan, Tensor2D input) {
  check_input(model, input);
  auto params = model.parameters();
  auto slot = [&](std::size_t s) {
    const TensorSlot& t = plan.layout[s];
    return params.subspan(t.offset, t.size);
  };

  Trace trace;
  trace.acts.reserve(plan.stages.size() + 1);
  trace.aux.resize(plan.stages.size());
  trace.inv_std.resize(plan.stages.size());
  trace.acts.push_back(std::move(input));
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    const Stage& st = plan.stages[i];
    const Tensor2D& in = trace.acts.back();
    if (st.conv) {
      Tensor2D z = conv1d_forward(in, slot(st.weight_slot), slot(st.bias_slot), st.kernel,
                                  st.stride);
      Tensor2D out = z;
      if (st.relu) {
        for (auto& v : out.values) v = std::max(v, 0.0);
      }
      trace.aux[i] = std::move(z);
      trace.acts.push_back(std::move(out));
    } else {
      trace.acts.push_back(layer_norm_impl(in, slot(st.weight_slot), slot(st.bias_slot),
                                           &trace.aux[i], &trace.inv_std[i]));
    }
  }

  const ArchSpec& arch = model.arch();
  const auto& flat = trace.acts.back().values;
  trace.hidden_pre.assign(arch.dense_hidden, 0.0);
  dense_forward(flat, slot(plan.dense1_weight), slot(plan.dense1_bias), trace.hidden_pre);
  trace.hidden = trace.hidden_pre;
  for (auto& v : trace.hidden) v = std::max(v, 0.0);
  std::array<double, kNumClasses> logits{};
  dense_forward(trace.hidden, slot(plan.dense2_weight), slot(plan.dense2_bias), logits);
  softmax(logits, trace.probs);
  return trace;
}

void run_backward(const TcnModel& model, const Plan& plan, const Trace& trace,
                  StrokeClass target, std::span<double> grad) {
  auto params = model.parameters();
  auto slot = [&](std::size_t s) {
    const TensorSlot& t = plan.layout[s];
    return params.subspan(t.offset, t.size);
  };
  auto gslot = [&](std::size_t s) {
    const TensorSlot& t = plan.layout[s];
    return grad.subspan(t.offset, t.size);
  };
  const ArchSpec& arch = model.arch();
  const std::size_t H = arch.dense_hidden;
  const std::size_t K = arch.num_classes;

  // Softmax + cross-entropy.
  std::array<double, kNumClasses> dlogits{};
  for (std::size_t j = 0; j < K; ++j) dlogits[j] = trace.probs[j];
  dlogits[class_id(target)] -= 1.0;

  // Dense 2.
  {
    auto w = slot(plan.dense2_weight);
    auto gw = gslot(plan.dense2_weight);
    auto gb = gslot(plan.dense2_bias);
    for (std::size_t j = 0; j < K; ++j) gb[j] += dlogits[j];
    std::vector<double> dhidden(H, 0.0);
    for (std::size_t i = 0; i < H; ++i) {
      const double hi = trace.hidden[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j) {
        gw[i * K + j] += hi * dlogits[j];
        acc += w[i * K + j] * dlogits[j];
      }
      dhidden[i] = trace.hidden_pre[i] > 0.0 ? acc : 0.0;
    }

    // Dense 1.
    const auto& flat = trace.acts.back().values;
    auto w1 = slot(plan.dense1_weight);
    auto gw1 = gslot(plan.dense1_weight);
    auto gb1 = gslot(plan.dense1_bias);
    for (std::size_t j = 0; j < H; ++j) gb1[j] += dhidden[j];
    Tensor2D d(trace.acts.back().rows, trace.acts.back().cols);
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double xi = flat[i];
      const double* wrow = &w1[i * H];
      double* grow = &gw1[i * H];
      double acc = 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        grow[j] += xi * dhidden[j];
        acc += wrow[j] * dhidden[j];
      }
      d.values[i] = acc;
    }

    // Conv / norm stack in reverse.
    for (std::size_t s = plan.stages.size(); s-- > 0;) {
      const Stage& st = plan.stages[s];
      const Tensor2D& in = trace.acts[s];
      const bool need_input_grad = s > 0;
      if (!st.conv) {
        const Tensor2D& xhat = trace.aux[s];
        const auto& inv_std = trace.inv_std[s];
        auto g = slot(st.weight_slot);
        auto gg = gslot(st.weight_slot);
        auto gbeta = gslot(st.bias_slot);
        const std::size_t C = st.out_channels;
        Tensor2D din(in.rows, C);
        std::vector<double> dxhat(C);
        for (std::size_t r = 0; r < in.rows; ++r) {
          double m1 = 0.0, m2 = 0.0;
          for (std::size_t c = 0; c < C; ++c) {
            const double dy = d.values[r * C + c];
            const double xh = xhat.values[r * C + c];
            gg[c] += dy * xh;
            gbeta[c] += dy;
            dxhat[c] = dy * g[c];
            m1 += dxhat[c];
            m2 += dxhat[c] * xh;
          }
          m1 /= static_cast<double>(C);
          m2 /= static_cast<double>(C);
          for (std::size_t c = 0; c < C; ++c) {
            din.values[r * C + c] =
                inv_std[r] * (dxhat[c] - m1 - xhat.values[r * C + c] * m2);
          }
        }
        d = std::move(din);
        continue;
      }

      if (st.relu) {
        const Tensor2D& pre = trace.aux[s];
        for (std::size_t i = 0; i < d.values.size(); ++i) {
          if (pre.values[i] <= 0.0) d.values[i] = 0.0;
        }
      }
      auto w = slot(st.weight_slot);
      auto gw = gslot(st.weight_slot);
      auto gb = gslot(st.bias_slot);
      const std::size_t Cin = st.in_channels;
      const std::size_t Cout = st.out_channels;
      Tensor2D din;
      if (need_input_grad) din = Tensor2D(in.rows, Cin);
      for (std::size_t t = 0; t < d.rows; ++t) {
        const double* dout = &d.values[t * Cout];
        for (std::size_t o = 0; o < Cout; ++o) gb[o] += dout[o];
        for (std::size_t k = 0; k < st.kernel; ++k) {
          const std::size_t src = t * st.stride + k;
          const double* x = &in.values[src * Cin];
          for (std::size_t c = 0; c < Cin; ++c) {
            const std::size_t base = (k * Cin + c) * Cout;
            const double xc = x[c];
            double* grow = &gw[base];
            const double* wrow = &w[base];
            double acc = 0.0;
            for (std::size_t o = 0; o < Cout; ++o) {
              grow[o] += xc * dout[o];
              acc += wrow[o] * dout[o];
            }
            if (need_input_grad) din.values[src * Cin + c] += acc;
          }
        }
      }
      d = std::move(din);
    }
  }
}

std::size_t norm_param_count(std::size_t features) { return 2 * features; }

}  // namespace

Tensor2D Tensor2D::from_window(const FeatureWindow& window) {
  Tensor2D t(kWindowSteps, kFeatures);
  const auto& data = window.data();
  for (std::size_t i = 0; i < kWindowSize; ++i) t.values[i] = data[i];
  return t;
}

std::size_t conv_output_steps(std::size_t steps, std::size_t kernel, std::size_t stride) {
  if (kernel == 0 || stride == 0 || steps < kernel) return 0;
  return (steps - kernel) / stride + 1;
}

void ArchSpec::validate() const {
  auto check_conv = [](const ConvSpec& c, const std::string& where) {
    if (c.kernel < 1 || c.stride < 1 || c.out_channels < 1) {
      throw InvalidConfig(where + ": kernel, stride and out_channels must be >= 1");
    }
  };
  check_conv(entry, "entry conv");
  for (std::size_t i = 0; i < body.size(); ++i) check_conv(body[i], "body conv " + std::to_string(i));
  if (num_classes != kNumClasses) throw InvalidConfig("num_classes must be 11");
  if (dense_hidden < 1) throw InvalidConfig("dense_hidden must be >= 1");
  if (input_steps < 1 || input_channels < 1) throw InvalidConfig("input shape must be non-empty");
  if (entry.out_channels < 2) throw InvalidConfig("layer norm needs at least 2 channels");
  if (!body.empty() && body.back().out_channels < 2) {
    throw InvalidConfig("layer norm needs at least 2 channels");
  }
  if (norm_after_each_body_conv) {
    for (const auto& c : body) {
      if (c.out_channels < 2) throw InvalidConfig("layer norm needs at least 2 channels");
    }
  }
  if (flattened_size() < 1) throw InvalidConfig("conv stack leaves no time steps to flatten");
}

std::size_t ArchSpec::final_steps() const {
  std::size_t steps = conv_output_steps(input_steps, entry.kernel, entry.stride);
  for (const auto& c : body) steps = conv_output_steps(steps, c.kernel, c.stride);
  return steps;
}

std::size_t ArchSpec::flattened_size() const {
  const std::size_t channels = body.empty() ? entry.out_channels : body.back().out_channels;
  return final_steps() * channels;
}

std::size_t param_count(const ArchSpec& arch) {
  std::size_t total = 0;
  std::size_t in = arch.input_channels;
  total += arch.entry.kernel * in * arch.entry.out_channels + arch.entry.out_channels;
  total += norm_param_count(arch.entry.out_channels);
  in = arch.entry.out_channels;
  for (std::size_t i = 0; i < arch.body.size(); ++i) {
    const ConvSpec& c = arch.body[i];
    total += c.kernel * in * c.out_channels + c.out_channels;
    if (arch.norm_after_each_body_conv && i + 1 < arch.body.size()) {
      total += norm_param_count(c.out_channels);
    }
    in = c.out_channels;
  }
  total += norm_param_count(in);
  total += arch.flattened_size() * arch.dense_hidden + arch.dense_hidden;
  total += arch.dense_hidden * arch.num_classes + arch.num_classes;
  return total;
}

std::vector<TensorSlot> parameter_layout(const ArchSpec& arch) { return make_plan(arch).layout; }

Tensor2D conv1d_forward(const Tensor2D& input, std::span<const double> weights,
                        std::span<const double> bias, std::size_t kernel, std::size_t stride) {
  const std::size_t Cin = input.cols;
  const std::size_t Cout = bias.size();
  if (kernel < 1 || stride < 1) throw ShapeMismatch("kernel and stride must be >= 1");
  if (weights.size() != kernel * Cin * Cout) {
    throw ShapeMismatch("conv weights hold " + std::to_string(weights.size()) +
                        " values, expected " + std::to_string(kernel) + "x" +
                        std::to_string(Cin) + "x" + std::to_string(Cout));
  }
  if (input.rows < kernel) {
    throw ShapeMismatch("input has " + std::to_string(input.rows) +
                        " steps, fewer than kernel " + std::to_string(kernel));
  }
  const std::size_t T_out = conv_output_steps(input.rows, kernel, stride);
  Tensor2D out(T_out, Cout);
  for (std::size_t t = 0; t < T_out; ++t) {
    double* y = &out.values[t * Cout];
    std::copy(bias.begin(), bias.end(), y);
    for (std::size_t k = 0; k < kernel; ++k) {
      const double* x = &input.values[(t * stride + k) * Cin];
      for (std::size_t c = 0; c < Cin; ++c) {
        const double xc = x[c];
        if (xc == 0.0) continue;
        const double* w = &weights[(k * Cin + c) * Cout];
        for (std::size_t o = 0; o < Cout; ++o) y[o] += xc * w[o];
      }
    }
  }
  return out;
}

Tensor2D layer_norm(const Tensor2D& input, std::span<const double> gain,
                    std::span<const double> bias) {
  return layer_norm_impl(input, gain, bias, nullptr, nullptr);
}

TcnModel::TcnModel(ArchSpec arch, std::vector<double> params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  arch_.validate();
  layout_ = parameter_layout(arch_);
  const std::size_t expected = layout_.empty() ? 0 : layout_.back().offset + layout_.back().size;
  if (params_.size() != expected) {
    throw ShapeMismatch("model holds " + std::to_string(params_.size()) +
                        " parameters, arch needs " + std::to_string(expected));
  }
}

TcnModel TcnModel::initialize(const ArchSpec& arch, std::uint64_t seed) {
  arch.validate();
  const Plan plan = make_plan(arch);
  const auto& layout = plan.layout;
  std::vector<double> params(layout.back().offset + layout.back().size, 0.0);
  std::mt19937_64 rng(seed);

  auto fill_normal = [&](std::size_t slot, std::size_t fan_in, double gain) {
    std::normal_distribution<double> dist(0.0, std::sqrt(gain / static_cast<double>(fan_in)));
    const TensorSlot& t = layout[slot];
    for (std::size_t i = 0; i < t.size; ++i) params[t.offset + i] = dist(rng);
  };
  for (const Stage& st : plan.stages) {
    if (st.conv) {
      fill_normal(st.weight_slot, st.kernel * st.in_channels, st.relu ? 2.0 : 1.0);
    } else {
      const TensorSlot& g = layout[st.weight_slot];
      std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(g.offset), g.size, 1.0);
    }
  }
  fill_normal(plan.dense1_weight, arch.flattened_size(), 2.0);
  fill_normal(plan.dense2_weight, arch.dense_hidden, 1.0);

  TcnModel model(arch, std::move(params));
  model.round_to_float32();
  return model;
}

std::span<const double> TcnModel::tensor(std::string_view name) const {
  for (const auto& t : layout_) {
    if (t.name == name) return std::span<const double>(params_).subspan(t.offset, t.size);
  }
  throw std::out_of_range("no parameter tensor named '" + std::string(name) + "'");
}

std::span<double> TcnModel::mutable_tensor(std::string_view name) {
  for (const auto& t : layout_) {
    if (t.name == name) return std::span<double>(params_).subspan(t.offset, t.size);
  }
  throw std::out_of_range("no parameter tensor named '" + std::string(name) + "'");
}

void TcnModel::round_to_float32() {
  for (auto& p : params_) p = static_cast<double>(static_cast<float>(p));
}

bool TcnModel::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

Probabilities forward(const TcnModel& model, const FeatureWindow& window) {
  const Plan plan = make_plan(model.arch());
  return run_forward(model, plan, Tensor2D::from_window(window)).probs;
}

double cross_entropy(std::span<const double> probs, StrokeClass target) {
  return -std::log(std::max(probs[class_id(target)], kProbabilityFloor));
}

ExampleResult accumulate_gradient(const TcnModel& model, const FeatureWindow& window,
                                  StrokeClass target, std::span<double> grad) {
  if (grad.size() != model.param_count()) throw ShapeMismatch("gradient buffer size mismatch");
  const Plan plan = make_plan(model.arch());
  const Trace trace = run_forward(model, plan, Tensor2D::from_window(window));
  run_backward(model, plan, trace, target, grad);
  return {cross_entropy(trace.probs, target), argmax(trace.probs).label};
}

std::vector<double> backward(const TcnModel& model, const FeatureWindow& window,
                             StrokeClass target) {
  std::vector<double> grad(model.param_count(), 0.0);
  accumulate_gradient(model, window, target, grad);
  return grad;
}

Prediction argmax(const Probabilities& probs) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < kNumClasses; ++j) {
    if (probs[j] > probs[best]) best = j;
  }
  return {class_from_id(best), probs[best]};
}

Prediction classify(const TcnModel& model, const FeatureWindow& window) {
  return argmax(forward(model, window));
}

std::string_view optimizer_name(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_name(std::string_view name) {
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "adam") return OptimizerKind::Adam;
  throw InvalidConfig("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidConfig("learning_rate must be > 0");
  }
  if (optimizer == OptimizerKind::Adam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
      throw InvalidConfig("adam requires 0 <= beta < 1 and epsilon > 0");
    }
  }
}

double accuracy(const TcnModel& model, const Dataset& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (const auto& item : data.items()) {
    if (classify(model, item.window).label == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train(const TcnModel& initial, const Dataset& train_set, const Dataset& val,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.empty()) throw InvalidConfig("training set is empty");

  TcnModel model = initial;
  const std::size_t n_params = model.param_count();
  // Everything before the dense head is the conv/norm stack.
  const std::size_t first_trainable =
      config.freeze_conv ? model.layout()[model.layout().size() - 4].offset : 0;

  std::vector<double> grad(n_params), m(n_params, 0.0), v(n_params, 0.0);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);

  TrainResult result{model, {}, 0};
  double best_val = -1.0;
  std::vector<double> best_params(model.parameters().begin(), model.parameters().end());
  std::uint64_t step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const LabeledWindow& item = train_set[order[i]];
        const ExampleResult r = accumulate_gradient(model, item.window, item.label, grad);
        batch_loss += r.loss;
        if (r.predicted == item.label) ++correct;
      }
      if (!std::isfinite(batch_loss)) throw NanDetected(epoch, batch_index);
      loss_sum += batch_loss;

      const double scale = 1.0 / static_cast<double>(end - start);
      auto params = model.mutable_parameters();
      ++step;
      if (config.optimizer == OptimizerKind::Sgd) {
        for (std::size_t i = first_trainable; i < n_params; ++i) {
          params[i] -= config.learning_rate * grad[i] * scale;
        }
      } else {
        const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
        for (std::size_t i = first_trainable; i < n_params; ++i) {
          const double g = grad[i] * scale;
          m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
          v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
          const double mhat = m[i] / c1;
          const double vhat = v[i] / c2;
          params[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
        }
      }
      if (!model.all_finite()) throw NanDetected(epoch, batch_index);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(train_set.size());
    stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
    stats.val_accuracy = accuracy(model, val);
    result.history.push_back(stats);

    if (!val.empty() && stats.val_accuracy > best_val) {
      best_val = stats.val_accuracy;
      result.best_epoch = epoch;
      best_params.assign(model.parameters().begin(), model.parameters().end());
    }
  }

  if (val.empty()) {
    result.best_epoch = config.epochs;
    best_params.assign(model.parameters().begin(), model.parameters().end());
  }
  result.model = TcnModel(model.arch(), std::move(best_params));
  result.model.round_to_float32();
  return result;
}

}  // namespace ttstroke
