// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pcn/errors.hpp"

namespace pcn {

using nlohmann::json;

namespace {

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }

  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated checkpoint reading ") + what + " at byte offset " +
                        std::to_string(pos_));
    }
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

json prednet_to_json(const PredNetConfig& c) {
  return {{"num_layers", c.num_layers},     {"repr_channels", c.repr_channels},
          {"input_channels", c.input_channels}, {"height", c.height},
          {"width", c.width},               {"time_steps", c.time_steps},
          {"kernel_size", c.kernel_size},   {"error_mode", to_string(c.error_mode)}};
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const ParameterList sorted = sorted_by_name(ckpt.tensors);
  std::vector<std::uint8_t> out{'P', 'C', 'C', 'K'};
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(sorted.size()));
  for (const auto& [name, tensor] : sorted) {
    if (name.size() > 0xFFFF) throw InputError("tensor name too long: " + name.substr(0, 64));
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    const Shape& shape = tensor.shape();
    if (shape.size() > 0xFF) throw InputError("tensor " + name + " has too many dimensions");
    out.push_back(static_cast<std::uint8_t>(shape.size()));
    for (std::size_t d : shape) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : tensor.values()) {
      put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  const std::string trailer = ckpt.trailer.dump();
  put<std::uint64_t>(out, trailer.size());
  out.insert(out.end(), trailer.begin(), trailer.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.string(4, "magic") != "PCCK") throw FormatError("bad checkpoint magic at byte offset 0");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " at byte offset 4");
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  Checkpoint ckpt;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint16_t>("name length");
    std::string name = r.string(name_len, "tensor name");
    const std::size_t ndim_pos = r.pos();
    const auto ndim = r.get<std::uint8_t>("rank");
    if (ndim == 0) throw FormatError("tensor " + name + " has rank 0 at byte offset " + std::to_string(ndim_pos));
    Shape shape(ndim);
    for (auto& d : shape) {
      const std::size_t dim_pos = r.pos();
      d = r.get<std::uint32_t>("dimension");
      if (d == 0) throw FormatError("zero dimension at byte offset " + std::to_string(dim_pos));
    }
    std::vector<double> values(shape_numel(shape));
    for (double& v : values) v = std::bit_cast<float>(r.get<std::uint32_t>("tensor payload"));
    ckpt.tensors.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  const auto trailer_len = r.get<std::uint64_t>("trailer length");
  const std::size_t trailer_pos = r.pos();
  if (r.remaining() != trailer_len) {
    throw FormatError("checkpoint trailer declares " + std::to_string(trailer_len) + " bytes, " +
                      std::to_string(r.remaining()) + " remain at byte offset " +
                      std::to_string(trailer_pos));
  }
  try {
    ckpt.trailer = json::parse(r.string(trailer_len, "trailer"));
  } catch (const json::exception& e) {
    throw FormatError("malformed checkpoint trailer at byte offset " + std::to_string(trailer_pos) +
                      ": " + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

json to_json(const ModelConfig& c) {
  return {{"prednet", prednet_to_json(c.prednet)},
          {"num_classes", c.num_classes},
          {"use_prednet", c.use_prednet},
          {"prednet_trainable", c.prednet_trainable},
          {"use_encoder", c.use_encoder},
          {"encoder",
           {{"in_channels", c.encoder.in_channels},
            {"hidden_channels", c.encoder.hidden_channels},
            {"out_channels", c.encoder.out_channels},
            {"out_height", c.encoder.out_height},
            {"out_width", c.encoder.out_width},
            {"kernel_size", c.encoder.kernel_size},
            {"trainable", c.encoder.trainable}}},
          {"preprocess",
           {{"crop", c.preprocess.crop}, {"mean", c.preprocess.mean}, {"std", c.preprocess.std}}}};
}

ModelConfig model_config_from_json(const json& j) {
  try {
    ModelConfig c;
    const json& p = j.at("prednet");
    c.prednet.num_layers = p.at("num_layers").get<std::size_t>();
    c.prednet.repr_channels = p.at("repr_channels").get<std::vector<std::size_t>>();
    c.prednet.input_channels = p.at("input_channels").get<std::size_t>();
    c.prednet.height = p.at("height").get<std::size_t>();
    c.prednet.width = p.at("width").get<std::size_t>();
    c.prednet.time_steps = p.at("time_steps").get<std::size_t>();
    c.prednet.kernel_size = p.at("kernel_size").get<std::size_t>();
    c.prednet.error_mode = error_mode_from_string(p.at("error_mode").get<std::string>());
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.use_prednet = j.at("use_prednet").get<bool>();
    c.prednet_trainable = j.at("prednet_trainable").get<bool>();
    c.use_encoder = j.at("use_encoder").get<bool>();
    const json& e = j.at("encoder");
    c.encoder.in_channels = e.at("in_channels").get<std::size_t>();
    c.encoder.hidden_channels = e.at("hidden_channels").get<std::size_t>();
    c.encoder.out_channels = e.at("out_channels").get<std::size_t>();
    c.encoder.out_height = e.at("out_height").get<std::size_t>();
    c.encoder.out_width = e.at("out_width").get<std::size_t>();
    c.encoder.kernel_size = e.at("kernel_size").get<std::size_t>();
    c.encoder.trainable = e.at("trainable").get<bool>();
    const json& pp = j.at("preprocess");
    c.preprocess.crop = pp.at("crop").get<std::size_t>();
    c.preprocess.mean = pp.at("mean").get<std::vector<double>>();
    c.preprocess.std = pp.at("std").get<std::vector<double>>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model config: ") + e.what());
  }
}

Checkpoint make_checkpoint(const ActionModel& model, const OptimizerState& optimizer,
                           std::size_t epoch, const Rng& rng, const json& config_echo) {
  Checkpoint ckpt;
  for (const auto& p : model.parameters()) ckpt.tensors.push_back({p.name, p.tensor.clone()});
  for (const auto& [name, v] : optimizer.velocity) {
    ckpt.tensors.push_back({kVelocityPrefix + name, v.clone()});
  }
  ckpt.tensors = sorted_by_name(std::move(ckpt.tensors));
  std::ostringstream rng_state;
  rng_state << rng;
  ckpt.trailer["epoch"] = epoch;
  ckpt.trailer["rng"] = rng_state.str();
  ckpt.trailer["optimizer"] = {
      {"initial_lr", optimizer.initial_lr},
      {"lr", optimizer.lr()},
      {"lr_drops", optimizer.lr_drops},
      {"epochs_since_best", optimizer.epochs_since_best},
      // JSON has no infinity; null means "no validation loss seen yet".
      {"best_val_loss", std::isfinite(optimizer.best_val_loss) ? json(optimizer.best_val_loss) : json(nullptr)}};
  ckpt.trailer["config"] = config_echo;
  return ckpt;
}

void restore_parameters(const Checkpoint& ckpt, ActionModel& model) {
  for (auto& p : model.parameters()) {
    const Tensor* src = ckpt.find(p.name);
    if (!src) throw InputError("checkpoint is missing parameter " + p.name);
    if (src->shape() != p.tensor.shape()) {
      throw ConfigError("checkpoint parameter " + p.name + " has shape " +
                        shape_to_string(src->shape()) + ", model expects " +
                        shape_to_string(p.tensor.shape()));
    }
    const auto sv = src->values();
    std::copy(sv.begin(), sv.end(), p.tensor.values().begin());
  }
}

OptimizerState restore_optimizer(const Checkpoint& ckpt) {
  OptimizerState s;
  try {
    const json& o = ckpt.trailer.at("optimizer");
    s.initial_lr = o.at("initial_lr").get<double>();
    s.lr_drops = o.at("lr_drops").get<std::size_t>();
    s.epochs_since_best = o.at("epochs_since_best").get<std::size_t>();
    const json& best = o.at("best_val_loss");
    s.best_val_loss = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed optimizer state in checkpoint: ") + e.what());
  }
  const std::string prefix = kVelocityPrefix;
  for (const auto& t : ckpt.tensors) {
    if (t.name.rfind(prefix, 0) == 0) s.velocity.emplace(t.name.substr(prefix.size()), t.tensor.clone());
  }
  return s;
}

Rng restore_rng(const Checkpoint& ckpt) {
  Rng rng;
  std::istringstream is(ckpt.trailer.value("rng", std::string{}));
  is >> rng;
  if (!is) throw FormatError("checkpoint has no valid RNG state");
  return rng;
}

std::size_t checkpoint_epoch(const Checkpoint& ckpt) {
  return ckpt.trailer.value("epoch", std::size_t{0});
}

ActionModel model_from_checkpoint(const Checkpoint& ckpt) {
  if (!ckpt.trailer.contains("config") || !ckpt.trailer["config"].contains("model")) {
    throw FormatError("checkpoint carries no model configuration");
  }
  ActionModel model(model_config_from_json(ckpt.trailer["config"]["model"]));
  restore_parameters(ckpt, model);
  return model;
}

void round_to_float32(std::span<double> values) {
  for (double& v : values) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace pcn
