// SPDX-License-Identifier: Apache-2.0
#include "ttstroke/model_io.hpp"

#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "byte_io.hpp"
#include "json_convert.hpp"

namespace ttstroke {

namespace {

std::uint32_t narrow(std::size_t v) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeMismatch("architecture value does not fit the model format");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_model(const TcnModel& model) {
  const ArchSpec& a = model.arch();
  detail::ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelFormatVersion);
  w.u32(narrow(a.input_steps));
  w.u32(narrow(a.input_channels));
  auto conv = [&](const ConvSpec& c) {
    w.u32(narrow(c.out_channels));
    w.u32(narrow(c.kernel));
    w.u32(narrow(c.stride));
  };
  conv(a.entry);
  w.u32(narrow(a.body.size()));
  for (const auto& c : a.body) conv(c);
  w.u32(narrow(a.dense_hidden));
  w.u32(narrow(a.num_classes));
  w.u32(a.norm_after_each_body_conv ? 1u : 0u);
  w.u64(model.param_count());
  for (double p : model.parameters()) w.f32(static_cast<float>(p));
  return w.take();
}

TcnModel decode_model(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  r.expect(kModelMagic, "TTCN model");
  const std::size_t version_at = r.position();
  if (const auto version = r.u32(); version != kModelFormatVersion) {
    throw FormatError(version_at, "unsupported model format version " + std::to_string(version));
  }
  ArchSpec a;
  a.input_steps = r.u32();
  a.input_channels = r.u32();
  auto conv = [&] {
    ConvSpec c;
    c.out_channels = r.u32();
    c.kernel = r.u32();
    c.stride = r.u32();
    return c;
  };
  a.entry = conv();
  const std::size_t body_at = r.position();
  const std::uint32_t n_body = r.u32();
  if (n_body > r.remaining() / 12) throw FormatError(body_at, "body layer count exceeds file size");
  a.body.clear();
  for (std::uint32_t i = 0; i < n_body; ++i) a.body.push_back(conv());
  a.dense_hidden = r.u32();
  a.num_classes = r.u32();
  const std::size_t flags_at = r.position();
  const std::uint32_t flags = r.u32();
  if (flags > 1) throw FormatError(flags_at, "unknown flag bits");
  a.norm_after_each_body_conv = flags & 1u;
  const std::size_t count_at = r.position();
  const std::uint64_t count = r.u64();
  try {
    a.validate();
  } catch (const InvalidConfig& e) {
    throw FormatError(count_at, std::string("invalid architecture: ") + e.what());
  }
  if (count != param_count(a)) {
    throw FormatError(count_at, "parameter count " + std::to_string(count) +
                                    " does not match architecture (" +
                                    std::to_string(param_count(a)) + ")");
  }
  if (count > r.remaining() / 4) throw FormatError(r.position(), "truncated parameter block");
  std::vector<double> params(count);
  for (auto& p : params) p = static_cast<double>(r.f32());
  r.finish();
  return TcnModel(a, std::move(params));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void save_model(const std::filesystem::path& path, const TcnModel& model) {
  write_file_bytes(path, encode_model(model));
}

TcnModel load_model(const std::filesystem::path& path) { return decode_model(read_file_bytes(path)); }

std::string model_sidecar_json(const TcnModel& model, const ModelSummary& summary, int indent) {
  detail::Json train = detail::to_json(summary.train);
  train["init_seed"] = summary.init_seed;
  detail::Json doc{
      {"format", "TTCN"},
      {"format_version", kModelFormatVersion},
      {"arch", detail::to_json(model.arch())},
      {"param_count", model.param_count()},
      {"published_tcn_param_count", kPublishedTcnParams},
      {"train", train},
      {"metrics",
       {{"best_epoch", summary.best_epoch},
        {"best_val_accuracy", summary.best_val_accuracy},
        {"final_train_loss", summary.final_train_loss},
        {"n_train", summary.n_train},
        {"n_val", summary.n_val}}},
  };
  return doc.dump(indent) + "\n";
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch,train_loss,train_accuracy,val_accuracy\n";
  for (const auto& e : history) {
    out << e.epoch << "," << e.train_loss << "," << e.train_accuracy << "," << e.val_accuracy
        << "\n";
  }
  return out.str();
}

}  // namespace ttstroke
