// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "pcn/errors.hpp"

namespace pcn {

namespace {

using Values = std::vector<std::string>;

bool parse_uint(const std::string& s, std::uint64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && !s.empty();
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(out);
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0") {
    out = false;
    return true;
  }
  return false;
}

bool is_list(ValueKind kind) { return kind == ValueKind::kUIntList || kind == ValueKind::kDoubleList; }

bool valid_scalar(ValueKind kind, const std::string& s) {
  std::uint64_t u = 0;
  double d = 0.0;
  bool b = false;
  switch (kind) {
    case ValueKind::kUInt:
    case ValueKind::kUIntList: return parse_uint(s, u);
    case ValueKind::kDouble:
    case ValueKind::kDoubleList: return parse_double(s, d);
    case ValueKind::kBool: return parse_bool(s, b);
    case ValueKind::kString: return true;
  }
  return false;
}

/// Splits "[a, b]" or "a,b" flag text into items; TOML arrays arrive split.
Values split_list(const Values& values) {
  Values out;
  for (std::string v : values) {
    std::replace(v.begin(), v.end(), '[', ' ');
    std::replace(v.begin(), v.end(), ']', ' ');
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      const auto e = item.find_last_not_of(" \t");
      out.push_back(item.substr(b, e - b + 1));
    }
  }
  return out;
}

std::string toml_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void put(std::map<std::string, Values>& m, const std::string& key, Values v) {
  m[key] = std::move(v);
}

}  // namespace

std::string to_string(Profile profile) { return profile == Profile::kPaper ? "paper" : "desk"; }

Profile profile_from_string(const std::string& name) {
  if (name == "desk") return Profile::kDesk;
  if (name == "paper") return Profile::kPaper;
  throw UsageError("unknown profile '" + name + "' (expected desk or paper)");
}

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k{
        {"profile", ValueKind::kString, "desk or paper"},
        {"seed", ValueKind::kUInt, "seed for data, init and sampling"},
        {"deterministic", ValueKind::kBool, "force sequential execution"},
        {"paths.data", ValueKind::kString, "dataset directory with <split>.json manifests"},
        {"paths.out", ValueKind::kString, "output directory"},
        {"paths.checkpoint", ValueKind::kString, "checkpoint to evaluate"},
        {"paths.resume", ValueKind::kString, "checkpoint to resume training from"},
        {"eval.split", ValueKind::kString, "manifest evaluated by eval"},
        {"prednet.layers", ValueKind::kUInt, "number of layers"},
        {"prednet.repr_channels", ValueKind::kUIntList, "R channels per layer"},
        {"prednet.input_channels", ValueKind::kUInt, "C0 of the frame features"},
        {"prednet.height", ValueKind::kUInt, "feature map height"},
        {"prednet.width", ValueKind::kUInt, "feature map width"},
        {"prednet.time_steps", ValueKind::kUInt, "frames per clip fed to the model"},
        {"prednet.kernel_size", ValueKind::kUInt, "odd convolution size"},
        {"prednet.error_mode", ValueKind::kString, "rectified_split or absolute"},
        {"model.use_prednet", ValueKind::kBool, "false trains the frame-only baseline"},
        {"model.prednet_trainable", ValueKind::kBool, "update PredNet weights"},
        {"model.use_encoder", ValueKind::kBool, "run raw frames through the built-in encoder"},
        {"model.encoder_trainable", ValueKind::kBool, "update encoder weights"},
        {"model.encoder_in_channels", ValueKind::kUInt, "image channels"},
        {"model.encoder_hidden", ValueKind::kUInt, "encoder hidden channels"},
        {"preprocess.crop", ValueKind::kUInt, "center crop size"},
        {"preprocess.mean", ValueKind::kDoubleList, "per-channel mean"},
        {"preprocess.std", ValueKind::kDoubleList, "per-channel std"},
        {"train.lr", ValueKind::kDouble, "initial learning rate"},
        {"train.momentum", ValueKind::kDouble, "SGD momentum"},
        {"train.weight_decay", ValueKind::kDouble, "coupled weight decay"},
        {"train.batch_size", ValueKind::kUInt, "clips per SGD step"},
        {"train.epochs", ValueKind::kUInt, "epochs to run"},
        {"train.patience", ValueKind::kUInt, "plateau patience"},
        {"train.threshold", ValueKind::kDouble, "relative improvement threshold"},
        {"train.loss", ValueKind::kString, "classification, prediction_error or combined"},
        {"train.alpha", ValueKind::kDouble, "prediction-error weight in combined mode"},
        {"train.per_step_loss", ValueKind::kBool, "average per-step cross-entropies"},
        {"train.window", ValueKind::kUInt, "consecutive frames drawn per clip"},
        {"data.classes", ValueKind::kUInt, "MovingShapes class count"},
        {"data.clips", ValueKind::kUInt, "train clips per class"},
        {"data.val_clips", ValueKind::kUInt, "validation clips per class"},
        {"data.test_clips", ValueKind::kUInt, "test clips per class"},
        {"data.canvas", ValueKind::kUInt, "square canvas side"},
        {"data.raw_length", ValueKind::kUInt, "frames per generated clip"},
        {"data.speed_variants", ValueKind::kBool, "add slow/fast class variants"},
        {"data.min_size", ValueKind::kUInt, "smallest shape extent"},
        {"data.max_size", ValueKind::kUInt, "largest shape extent"},
        {"data.min_speed", ValueKind::kUInt, "slowest pixels per frame"},
        {"data.max_speed", ValueKind::kUInt, "fastest pixels per frame"},
        {"data.noise", ValueKind::kDouble, "pixel noise sigma"},
        {"gradcheck.step", ValueKind::kDouble, "central-difference step"},
        {"gradcheck.floor", ValueKind::kDouble, "relative-error denominator floor"},
        {"gradcheck.tolerance", ValueKind::kDouble, "max relative error accepted"},
    };
    std::sort(k.begin(), k.end(), [](const KeySpec& a, const KeySpec& b) { return a.name < b.name; });
    return k;
  }();
  return keys;
}

const KeySpec* find_key(const std::string& name) {
  const auto& keys = config_keys();
  auto it = std::lower_bound(keys.begin(), keys.end(), name,
                             [](const KeySpec& k, const std::string& n) { return k.name < n; });
  return it != keys.end() && it->name == name ? &*it : nullptr;
}

RunConfig RunConfig::preset(Profile profile) {
  const bool paper = profile == Profile::kPaper;
  std::map<std::string, Values> m;
  put(m, "profile", {to_string(profile)});
  put(m, "seed", {"7"});
  put(m, "deterministic", {"false"});
  put(m, "paths.data", {""});
  put(m, "paths.out", {""});
  put(m, "paths.checkpoint", {""});
  put(m, "paths.resume", {""});
  put(m, "eval.split", {"test"});

  put(m, "prednet.layers", {"2"});
  put(m, "prednet.repr_channels", paper ? Values{"64", "64"} : Values{"4", "4"});
  put(m, "prednet.input_channels", {paper ? "2048" : "8"});
  put(m, "prednet.height", {paper ? "7" : "8"});
  put(m, "prednet.width", {paper ? "7" : "8"});
  put(m, "prednet.time_steps", {paper ? "30" : "10"});
  put(m, "prednet.kernel_size", {"3"});
  put(m, "prednet.error_mode", {"rectified_split"});

  put(m, "model.use_prednet", {"true"});
  put(m, "model.prednet_trainable", {"true"});
  put(m, "model.use_encoder", {paper ? "false" : "true"});
  put(m, "model.encoder_trainable", {"false"});
  put(m, "model.encoder_in_channels", {"1"});
  put(m, "model.encoder_hidden", {"8"});

  put(m, "preprocess.crop", {paper ? "224" : "32"});
  put(m, "preprocess.mean", paper ? Values{"0.485", "0.456", "0.406"} : Values{"0.5"});
  put(m, "preprocess.std", paper ? Values{"0.229", "0.224", "0.225"} : Values{"0.5"});

  put(m, "train.lr", {paper ? "0.0064" : "0.05"});
  put(m, "train.momentum", {"0.9"});
  put(m, "train.weight_decay", {"0.001"});
  put(m, "train.batch_size", {paper ? "256" : "16"});
  put(m, "train.epochs", {paper ? "40" : "30"});
  put(m, "train.patience", {"3"});
  put(m, "train.threshold", {"0.001"});
  put(m, "train.loss", {paper ? "classification" : "combined"});
  put(m, "train.alpha", {paper ? "0.1" : "1.0"});
  put(m, "train.per_step_loss", {"false"});
  put(m, "train.window", {paper ? "90" : "30"});

  put(m, "data.classes", {"4"});
  put(m, "data.clips", {"200"});
  put(m, "data.val_clips", {"25"});
  put(m, "data.test_clips", {"50"});
  put(m, "data.canvas", {"32"});
  put(m, "data.raw_length", {"90"});
  put(m, "data.speed_variants", {"false"});
  put(m, "data.min_size", {"4"});
  put(m, "data.max_size", {"7"});
  put(m, "data.min_speed", {"1"});
  put(m, "data.max_speed", {"1"});
  put(m, "data.noise", {"8.0"});

  put(m, "gradcheck.step", {"1e-05"});
  put(m, "gradcheck.floor", {"1e-06"});
  put(m, "gradcheck.tolerance", {"0.0001"});

  RunConfig run;
  for (auto& [key, values] : m) run.set(key, std::move(values));
  return run;
}

std::map<std::string, Values> RunConfig::read_toml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw UsageError("malformed config file " + path.string() + ": " + e.what());
  }
  std::map<std::string, Values> out;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // table open/close markers
    const std::string key = item.fullname();
    if (!find_key(key)) throw UsageError("unknown config key '" + key + "' in " + path.string());
    out[key] = item.inputs;
  }
  return out;
}

void RunConfig::set(const std::string& key, Values values) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw UsageError("unknown config key '" + key + "'");
  if (is_list(spec->kind)) {
    values = split_list(values);
    if (values.empty()) throw UsageError("key '" + key + "' needs at least one value");
  } else if (values.size() != 1) {
    throw UsageError("key '" + key + "' takes a single value");
  }
  for (const auto& v : values) {
    if (!valid_scalar(spec->kind, v)) {
      throw UsageError("invalid value '" + v + "' for key '" + key + "'");
    }
  }
  if (key == "profile") profile_from_string(values.front());
  values_[key] = std::move(values);
}

const Values& RunConfig::raw(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("config key '" + key + "' is not set");
  return it->second;
}

Profile RunConfig::profile() const { return profile_from_string(get_string("profile")); }

std::uint64_t RunConfig::get_uint(const std::string& key) const {
  std::uint64_t v = 0;
  parse_uint(raw(key).front(), v);
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  double v = 0.0;
  parse_double(raw(key).front(), v);
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  bool v = false;
  parse_bool(raw(key).front(), v);
  return v;
}

std::string RunConfig::get_string(const std::string& key) const { return raw(key).front(); }

std::vector<std::size_t> RunConfig::get_uint_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : raw(key)) {
    std::uint64_t v = 0;
    parse_uint(s, v);
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : raw(key)) {
    double v = 0.0;
    parse_double(s, v);
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::to_toml() const {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> tables;
  for (const auto& [key, values] : values_) {
    const KeySpec* spec = find_key(key);
    std::string text;
    if (is_list(spec->kind)) {
      text = "[";
      for (std::size_t i = 0; i < values.size(); ++i) text += (i ? ", " : "") + values[i];
      text += "]";
    } else if (spec->kind == ValueKind::kString) {
      text = toml_quote(values.front());
    } else {
      text = values.front();
    }
    const auto dot = key.find('.');
    const std::string table = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    tables[table].emplace_back(name, text);
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& [table, entries] : tables) {
    if (!table.empty()) out << (first ? "" : "\n") << "[" << table << "]\n";
    for (const auto& [name, text] : entries) out << name << " = " << text << "\n";
    first = false;
  }
  return out.str();
}

RunConfig resolve_config(const ConfigSources& sources) {
  std::map<std::string, Values> file;
  if (sources.file) file = RunConfig::read_toml(*sources.file);

  std::string profile = "desk";
  if (auto it = file.find("profile"); it != file.end() && !it->second.empty()) {
    profile = it->second.front();
  }
  for (const auto& [key, value] : sources.overrides) {
    if (key == "profile") profile = value;
  }
  if (sources.profile) profile = *sources.profile;

  RunConfig run = RunConfig::preset(profile_from_string(profile));
  bool seed_given = false;
  for (auto& [key, values] : file) {
    run.set(key, values);
    seed_given |= key == "seed";
  }
  for (const auto& [key, value] : sources.overrides) {
    run.set(key, value);
    seed_given |= key == "seed";
  }
  if (!seed_given && sources.env_seed && !sources.env_seed->empty()) {
    try {
      run.set("seed", *sources.env_seed);
    } catch (const UsageError&) {
      throw UsageError("PREDNET_SEED must be a non-negative integer, got '" + *sources.env_seed +
                       "'");
    }
  }
  run.set("profile", profile);
  return run;
}

ModelConfig model_config(const RunConfig& run, std::size_t num_classes) {
  ModelConfig c;
  c.prednet.num_layers = run.get_uint("prednet.layers");
  c.prednet.repr_channels = run.get_uint_list("prednet.repr_channels");
  c.prednet.input_channels = run.get_uint("prednet.input_channels");
  c.prednet.height = run.get_uint("prednet.height");
  c.prednet.width = run.get_uint("prednet.width");
  c.prednet.time_steps = run.get_uint("prednet.time_steps");
  c.prednet.kernel_size = run.get_uint("prednet.kernel_size");
  c.prednet.error_mode = error_mode_from_string(run.get_string("prednet.error_mode"));
  c.num_classes = num_classes;
  c.use_prednet = run.get_bool("model.use_prednet");
  c.prednet_trainable = run.get_bool("model.prednet_trainable");
  c.use_encoder = run.get_bool("model.use_encoder");
  c.encoder.in_channels = run.get_uint("model.encoder_in_channels");
  c.encoder.hidden_channels = run.get_uint("model.encoder_hidden");
  c.encoder.out_channels = c.prednet.input_channels;
  c.encoder.out_height = c.prednet.height;
  c.encoder.out_width = c.prednet.width;
  c.encoder.kernel_size = c.prednet.kernel_size;
  c.encoder.trainable = run.get_bool("model.encoder_trainable");
  c.preprocess.crop = run.get_uint("preprocess.crop");
  c.preprocess.mean = run.get_double_list("preprocess.mean");
  c.preprocess.std = run.get_double_list("preprocess.std");
  c.validate();
  return c;
}

TrainConfig train_config(const RunConfig& run) {
  TrainConfig c;
  c.learning_rate = run.get_double("train.lr");
  c.momentum = run.get_double("train.momentum");
  c.weight_decay = run.get_double("train.weight_decay");
  c.batch_size = run.get_uint("train.batch_size");
  c.epochs = run.get_uint("train.epochs");
  c.patience = run.get_uint("train.patience");
  c.threshold = run.get_double("train.threshold");
  c.loss_mode = loss_mode_from_string(run.get_string("train.loss"));
  c.alpha = run.get_double("train.alpha");
  c.per_step_loss = run.get_bool("train.per_step_loss");
  c.window = run.get_uint("train.window");
  c.seed = run.get_uint("seed");
  c.validate();
  return c;
}

MovingShapesConfig moving_shapes_config(const RunConfig& run) {
  MovingShapesConfig c;
  c.height = c.width = run.get_uint("data.canvas");
  c.raw_length = run.get_uint("data.raw_length");
  c.num_classes = run.get_uint("data.classes");
  c.speed_variants = run.get_bool("data.speed_variants");
  c.min_size = run.get_uint("data.min_size");
  c.max_size = run.get_uint("data.max_size");
  c.min_speed = run.get_uint("data.min_speed");
  c.max_speed = run.get_uint("data.max_speed");
  c.noise_sigma = run.get_double("data.noise");
  c.clips_per_class = run.get_uint("data.clips");
  c.seed = run.get_uint("seed");
  c.validate();
  return c;
}

GradcheckConfig gradcheck_config(const RunConfig& run) {
  GradcheckConfig c = desk_gradcheck_config();
  c.step = run.get_double("gradcheck.step");
  c.floor = run.get_double("gradcheck.floor");
  c.seed = run.get_uint("seed");
  return c;
}

}  // namespace pcn
