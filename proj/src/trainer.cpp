// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"
#include "pcn/preprocess.hpp"
#include "pcn/sampling.hpp"

namespace pcn {

using nlohmann::json;

std::string to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kClassification: return "classification";
    case LossMode::kPredictionError: return "prediction_error";
    case LossMode::kCombined: return "combined";
  }
  return "classification";
}

LossMode loss_mode_from_string(const std::string& name) {
  if (name == "classification") return LossMode::kClassification;
  if (name == "prediction_error") return LossMode::kPredictionError;
  if (name == "combined") return LossMode::kCombined;
  throw ConfigError("unknown loss mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"momentum", c.momentum},
          {"weight_decay", c.weight_decay},   {"batch_size", c.batch_size},
          {"epochs", c.epochs},               {"patience", c.patience},
          {"threshold", c.threshold},         {"loss", to_string(c.loss_mode)},
          {"alpha", c.alpha},                 {"per_step_loss", c.per_step_loss},
          {"window", c.window},               {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  try {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.threshold = j.at("threshold").get<double>();
    c.loss_mode = loss_mode_from_string(j.at("loss").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.per_step_loss = j.at("per_step_loss").get<bool>();
    c.window = j.at("window").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed train config: ") + e.what());
  }
}

std::vector<Tensor> gather_inputs(const FeatureClip& clip, std::span<const std::size_t> frames,
                                  const ModelConfig& model) {
  if (clip.pixels != model.use_encoder) {
    throw ConfigError(clip.pixels ? "clip holds raw pixels but the model has no encoder"
                                  : "clip holds features but the model expects raw pixels");
  }
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (std::size_t f : frames) {
    Tensor x = clip.frame(f);
    out.push_back(model.use_encoder ? preprocess_frame(x, model.preprocess) : std::move(x));
  }
  return out;
}

std::vector<Tensor> train_inputs(const FeatureClip& clip, const ModelConfig& model,
                                 std::size_t window, Rng& rng) {
  const auto win = sample_window(clip.num_frames, window, rng);
  const auto pick = subsample_train(window, model.prednet.time_steps, rng);
  std::vector<std::size_t> frames(pick.size());
  for (std::size_t i = 0; i < pick.size(); ++i) frames[i] = win[pick[i]];
  return gather_inputs(clip, frames, model);
}

std::vector<Tensor> eval_inputs(const FeatureClip& clip, const ModelConfig& model,
                                std::size_t window) {
  const auto win = eval_window(clip.num_frames, window);
  const auto pick = subsample_eval(window, model.prednet.time_steps);
  std::vector<std::size_t> frames(pick.size());
  for (std::size_t i = 0; i < pick.size(); ++i) frames[i] = win[pick[i]];
  return gather_inputs(clip, frames, model);
}

Tensor compute_loss(GradientTape& tape, const ClipForward& forward, std::size_t label,
                    const TrainConfig& config) {
  auto classification = [&]() {
    if (!config.per_step_loss) return ops::softmax_cross_entropy(tape, forward.scores, label);
    std::vector<Tensor> terms;
    for (const Tensor& s : forward.step_scores) terms.push_back(ops::softmax_cross_entropy(tape, s, label));
    return ops::mean_of(tape, terms);
  };
  auto prediction_error = [&]() {
    if (forward.steps.empty() || forward.steps.front().errors.empty()) {
      throw ConfigError("prediction-error loss needs the PredNet enabled");
    }
    const auto lw = default_layer_weights(forward.steps.front().errors.size());
    const auto tw = default_time_weights(forward.steps.size());
    return prediction_error_loss(tape, forward.steps, lw, tw);
  };
  switch (config.loss_mode) {
    case LossMode::kClassification:
      return classification();
    case LossMode::kPredictionError:
      return prediction_error();
    case LossMode::kCombined:
      return ops::add(tape, classification(), ops::scale(tape, prediction_error(), config.alpha));
  }
  throw ConfigError("unknown loss mode");
}

EpochStats train_epoch(ActionModel& model, const Dataset& data, const TrainConfig& config,
                       OptimizerState& optimizer, Rng& rng) {
  if (data.clips.empty()) throw UsageError("cannot train on an empty dataset");
  config.validate();
  std::vector<std::size_t> order(data.clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  ParameterList params = model.trainable_parameters();
  double loss_sum = 0.0;
  std::size_t correct = 0;
  const std::size_t batches = (order.size() + config.batch_size - 1) / config.batch_size;
  for (std::size_t b = 0; b < batches; ++b) {
    zero_grads(params);
    const std::size_t begin = b * config.batch_size;
    const std::size_t end = std::min(order.size(), begin + config.batch_size);
    for (std::size_t i = begin; i < end; ++i) {
      const FeatureClip& clip = data.clips[order[i]];
      const auto inputs = train_inputs(clip, model.config(), config.window, rng);
      GradientTape tape;
      const ClipForward fwd = model.forward(tape, inputs);
      const Tensor loss = compute_loss(tape, fwd, clip.label, config);
      if (!std::isfinite(loss.item())) {
        throw NumericError("non-finite loss in batch " + std::to_string(b) + " (clip " +
                           clip.source_id + ")");
      }
      if (loss.requires_grad()) tape.backward(loss);
      loss_sum += loss.item();
      if (argmax(fwd.scores.values()) == clip.label) ++correct;
    }
    const double inv = 1.0 / static_cast<double>(end - begin);
    for (auto& p : params) {
      for (double& g : p.tensor.grad()) g *= inv;
    }
    apply_sgd(params, optimizer, config.momentum, config.weight_decay);
  }
  zero_grads(params);
  const double n = static_cast<double>(data.clips.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

EpochStats evaluate_loss(const ActionModel& model, const Dataset& data, const TrainConfig& config) {
  if (data.clips.empty()) throw UsageError("cannot evaluate an empty dataset");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (const auto& clip : data.clips) {
    GradientTape tape(GradientTape::Mode::kInference);
    const ClipForward fwd = model.forward(tape, eval_inputs(clip, model.config(), config.window));
    loss_sum += compute_loss(tape, fwd, clip.label, config).item();
    if (argmax(fwd.scores.values()) == clip.label) ++correct;
  }
  const double n = static_cast<double>(data.clips.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

std::string format_log_csv(std::span<const LogRow> rows) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,lr,train_loss,val_loss,val_acc\n";
  for (const auto& r : rows) {
    os << r.epoch << ',' << r.lr << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_acc << '\n';
  }
  return os.str();
}

namespace {

void round_state(ActionModel& model, OptimizerState& optimizer) {
  for (auto& p : model.parameters()) round_to_float32(p.tensor.values());
  for (auto& [name, v] : optimizer.velocity) round_to_float32(v.values());
}

// Earlier rows ride along in the checkpoint so a resumed run keeps the
// full log.
json log_to_json(const std::vector<LogRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({r.epoch, r.lr, r.train_loss, r.val_loss, r.val_acc});
  }
  return out;
}

std::vector<LogRow> log_from_trailer(const json& trailer) {
  std::vector<LogRow> rows;
  if (!trailer.contains("log")) return rows;
  try {
    for (const auto& r : trailer.at("log")) {
      rows.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), r.at(2).get<double>(),
                      r.at(3).get<double>(), r.at(4).get<double>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint log: ") + e.what());
  }
  return rows;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw Error("failed writing " + path.string());
}

}  // namespace

FitResult fit(ActionModel& model, const Dataset& train, const Dataset& val,
              const TrainConfig& config, const FitOptions& options) {
  config.validate();
  if (train.num_classes() != model.config().num_classes) {
    throw ConfigError("training set has " + std::to_string(train.num_classes()) +
                      " classes, model has " + std::to_string(model.config().num_classes));
  }
  const json echo = {{"model", to_json(model.config())}, {"train", to_json(config)}};

  OptimizerState optimizer;
  optimizer.initial_lr = config.learning_rate;
  Rng rng(config.seed);
  std::size_t epoch = 0;
  FitResult result;
  if (options.resume) {
    restore_parameters(*options.resume, model);
    optimizer = restore_optimizer(*options.resume);
    rng = restore_rng(*options.resume);
    epoch = checkpoint_epoch(*options.resume);
    result.best = *options.resume;
    result.log = log_from_trailer(options.resume->trailer);
  }
  round_state(model, optimizer);
  result.last = make_checkpoint(model, optimizer, epoch, rng, echo);
  result.last.trailer["log"] = log_to_json(result.log);
  if (!options.resume) result.best = result.last;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    save_checkpoint(result.last, *options.out_dir / "last.ckpt");
    if (!options.resume) save_checkpoint(result.best, *options.out_dir / "best.ckpt");
    write_text(*options.out_dir / "train_log.csv", format_log_csv(result.log));
  }

  for (; epoch < config.epochs; ++epoch) {
    const double lr = optimizer.lr();
    const EpochStats tr = train_epoch(model, train, config, optimizer, rng);
    const EpochStats va = evaluate_loss(model, val.clips.empty() ? train : val, config);
    const bool improved = plateau_schedule(optimizer, va.mean_loss, config.patience, config.threshold);
    round_state(model, optimizer);

    const LogRow row{epoch + 1, lr, tr.mean_loss, va.mean_loss, va.accuracy};
    result.log.push_back(row);
    result.last = make_checkpoint(model, optimizer, epoch + 1, rng, echo);
    result.last.trailer["log"] = log_to_json(result.log);
    if (improved) result.best = result.last;
    if (options.out_dir) {
      save_checkpoint(result.last, *options.out_dir / "last.ckpt");
      if (improved) save_checkpoint(result.best, *options.out_dir / "best.ckpt");
      write_text(*options.out_dir / "train_log.csv", format_log_csv(result.log));
    }
    if (options.on_epoch) options.on_epoch(row);
  }
  return result;
}

}  // namespace pcn
