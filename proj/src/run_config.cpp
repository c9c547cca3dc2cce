// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "json_convert.hpp"

namespace ttstroke {
namespace detail {

ObjectReader::ObjectReader(const Json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) {
    throw InvalidConfig("'" + (path_.empty() ? std::string("<root>") : path_) +
                        "' must be a JSON object");
  }
}

std::string ObjectReader::path_of(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

bool ObjectReader::has(std::string_view key) const { return object_.contains(std::string(key)); }

template <typename T>
void ObjectReader::read(std::string_view key, T& out) {
  const std::string k(key);
  seen_.push_back(k);
  auto it = object_.find(k);
  if (it == object_.end()) return;
  const Json& v = *it;
  const std::string where = path_of(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw InvalidConfig("'" + where + "' must be a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw InvalidConfig("'" + where + "' must be a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw InvalidConfig("'" + where + "' must be a number");
    out = v.get<T>();
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) {
      throw InvalidConfig("'" + where + "' must be a non-negative integer");
    }
    out = v.get<T>();
  } else {
    static_assert(std::is_integral_v<T>);
    if (!v.is_number_integer()) throw InvalidConfig("'" + where + "' must be an integer");
    out = v.get<T>();
  }
}

const Json* ObjectReader::child(std::string_view key) {
  seen_.emplace_back(key);
  auto it = object_.find(std::string(key));
  return it == object_.end() ? nullptr : &*it;
}

void ObjectReader::finish() const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
      throw InvalidConfig("unknown key '" + path_of(it.key()) + "'");
    }
  }
}

Json to_json(const PreprocessConfig& c) {
  return Json{{"target_len", c.target_len},
              {"edge_mode", edge_mode_name(c.edge_mode)},
              {"overlong_policy", overlong_policy_name(c.overlong_policy)},
              {"joint_map",
               {{"wrist", c.joint_map.wrist},
                {"elbow", c.joint_map.elbow},
                {"right_shoulder", c.joint_map.right_shoulder},
                {"left_shoulder", c.joint_map.left_shoulder}}},
              {"smooth", c.smooth}};
}

namespace {

Json conv_json(const ConvSpec& c) {
  return Json{{"out_channels", c.out_channels}, {"kernel", c.kernel}, {"stride", c.stride}};
}

ConvSpec conv_from_json(const Json& j, const std::string& path, ConvSpec c) {
  ObjectReader r(j, path);
  r.read("out_channels", c.out_channels);
  r.read("kernel", c.kernel);
  r.read("stride", c.stride);
  r.finish();
  return c;
}

}  // namespace

Json to_json(const ArchSpec& a) {
  Json body = Json::array();
  for (const auto& c : a.body) body.push_back(conv_json(c));
  return Json{{"entry", conv_json(a.entry)},
              {"body", body},
              {"dense_hidden", a.dense_hidden},
              {"num_classes", a.num_classes},
              {"input_steps", a.input_steps},
              {"input_channels", a.input_channels},
              {"norm_after_each_body_conv", a.norm_after_each_body_conv}};
}

Json to_json(const TrainConfig& t) {
  return Json{{"epochs", t.epochs},
              {"batch_size", t.batch_size},
              {"learning_rate", t.learning_rate},
              {"optimizer", optimizer_name(t.optimizer)},
              {"beta1", t.beta1},
              {"beta2", t.beta2},
              {"epsilon", t.epsilon},
              {"seed", t.seed},
              {"shuffle", t.shuffle},
              {"freeze_conv", t.freeze_conv}};
}

Json to_json(const SynthConfig& s) {
  return Json{{"per_class_count", s.per_class_count},
              {"noise_std", s.noise_std},
              {"swap_prob", s.swap_prob},
              {"left_handed_fraction", s.left_handed_fraction},
              {"style_variation", s.style_variation},
              {"seed", s.seed},
              {"width", s.resolution.width},
              {"height", s.resolution.height}};
}

Json to_json(const SplitSpec& s) {
  return Json{{"train_fraction", s.train_fraction}, {"stratified", s.stratified}, {"seed", s.seed}};
}

void from_json(const Json& j, const std::string& path, PreprocessConfig& c) {
  ObjectReader r(j, path);
  r.read("target_len", c.target_len);
  std::string edge(edge_mode_name(c.edge_mode));
  r.read("edge_mode", edge);
  c.edge_mode = edge_mode_from_name(edge);
  std::string overlong(overlong_policy_name(c.overlong_policy));
  r.read("overlong_policy", overlong);
  c.overlong_policy = overlong_policy_from_name(overlong);
  if (const Json* jm = r.child("joint_map")) {
    ObjectReader m(*jm, r.path_of("joint_map"));
    m.read("wrist", c.joint_map.wrist);
    m.read("elbow", c.joint_map.elbow);
    m.read("right_shoulder", c.joint_map.right_shoulder);
    m.read("left_shoulder", c.joint_map.left_shoulder);
    m.finish();
  }
  r.read("smooth", c.smooth);
  r.finish();
}

void from_json(const Json& j, const std::string& path, ArchSpec& a) {
  ObjectReader r(j, path);
  if (const Json* e = r.child("entry")) a.entry = conv_from_json(*e, r.path_of("entry"), a.entry);
  if (const Json* b = r.child("body")) {
    if (!b->is_array()) throw InvalidConfig("'" + r.path_of("body") + "' must be an array");
    a.body.clear();
    for (std::size_t i = 0; i < b->size(); ++i) {
      a.body.push_back(
          conv_from_json((*b)[i], r.path_of("body") + "[" + std::to_string(i) + "]", ConvSpec{}));
    }
  }
  r.read("dense_hidden", a.dense_hidden);
  r.read("num_classes", a.num_classes);
  r.read("input_steps", a.input_steps);
  r.read("input_channels", a.input_channels);
  r.read("norm_after_each_body_conv", a.norm_after_each_body_conv);
  r.finish();
}

void from_json(const Json& j, const std::string& path, TrainConfig& t, std::uint64_t& init_seed) {
  ObjectReader r(j, path);
  r.read("epochs", t.epochs);
  r.read("batch_size", t.batch_size);
  r.read("learning_rate", t.learning_rate);
  std::string opt(optimizer_name(t.optimizer));
  r.read("optimizer", opt);
  t.optimizer = optimizer_from_name(opt);
  r.read("beta1", t.beta1);
  r.read("beta2", t.beta2);
  r.read("epsilon", t.epsilon);
  r.read("seed", t.seed);
  r.read("shuffle", t.shuffle);
  r.read("freeze_conv", t.freeze_conv);
  r.read("init_seed", init_seed);
  r.finish();
}

void from_json(const Json& j, const std::string& path, SynthConfig& s) {
  ObjectReader r(j, path);
  r.read("per_class_count", s.per_class_count);
  r.read("noise_std", s.noise_std);
  r.read("swap_prob", s.swap_prob);
  r.read("left_handed_fraction", s.left_handed_fraction);
  r.read("style_variation", s.style_variation);
  r.read("seed", s.seed);
  r.read("width", s.resolution.width);
  r.read("height", s.resolution.height);
  r.finish();
}

void from_json(const Json& j, const std::string& path, SplitSpec& s) {
  ObjectReader r(j, path);
  r.read("train_fraction", s.train_fraction);
  r.read("stratified", s.stratified);
  r.read("seed", s.seed);
  r.finish();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

void RunConfig::validate() const {
  preprocess.validate();
  arch.validate();
  train.validate();
  synth.validate();
  split.validate();
  if (arch.input_steps != kWindowSteps || arch.input_channels != kFeatures) {
    throw InvalidConfig("arch input shape must be 100x8 to consume feature windows");
  }
}

RunConfig parse_run_config(std::string_view text) {
  using detail::Json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // nlohmann reports the 1-based position of the offending byte.
    const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(line, col, "invalid JSON in run config");
  }
  RunConfig cfg;
  detail::ObjectReader r(doc, "");
  if (const Json* j = r.child("preprocess")) detail::from_json(*j, "preprocess", cfg.preprocess);
  if (const Json* j = r.child("arch")) detail::from_json(*j, "arch", cfg.arch);
  if (const Json* j = r.child("train")) detail::from_json(*j, "train", cfg.train, cfg.init_seed);
  if (const Json* j = r.child("synth")) detail::from_json(*j, "synth", cfg.synth);
  if (const Json* j = r.child("split")) detail::from_json(*j, "split", cfg.split);
  r.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_json(const RunConfig& config, int indent) {
  detail::Json train = detail::to_json(config.train);
  train["init_seed"] = config.init_seed;
  detail::Json doc{{"preprocess", detail::to_json(config.preprocess)},
                   {"arch", detail::to_json(config.arch)},
                   {"train", train},
                   {"synth", detail::to_json(config.synth)},
                   {"split", detail::to_json(config.split)}};
  return doc.dump(indent);
}

}  // namespace ttstroke
