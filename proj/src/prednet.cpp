// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#include "pcn/prednet.hpp"

#include "pcn/errors.hpp"
#include "pcn/ops.hpp"

namespace pcn {

std::string to_string(ErrorMode mode) {
  return mode == ErrorMode::kAbsolute ? "absolute" : "rectified_split";
}

ErrorMode error_mode_from_string(const std::string& name) {
  if (name == "rectified_split") return ErrorMode::kRectifiedSplit;
  if (name == "absolute") return ErrorMode::kAbsolute;
  throw ConfigError("unknown error mode '" + name + "'");
}

void PredNetConfig::validate() const {
  if (num_layers < 1) throw ConfigError("PredNet needs at least one layer");
  if (repr_channels.size() != num_layers) {
    throw ConfigError("repr_channels has " + std::to_string(repr_channels.size()) +
                      " entries for " + std::to_string(num_layers) + " layers");
  }
  for (std::size_t c : repr_channels) {
    if (c < 1) throw ConfigError("repr_channels must be >= 1");
  }
  if (input_channels < 1 || height < 1 || width < 1 || time_steps < 1) {
    throw ConfigError("input channels, spatial size and time steps must be >= 1");
  }
  if (kernel_size % 2 == 0) throw ConfigError("kernel size must be odd");
}

std::size_t PredNetConfig::prediction_channels(std::size_t layer) const {
  return layer == 0 ? input_channels : repr_channels.at(layer);
}

std::size_t PredNetConfig::lstm_input_channels(std::size_t layer) const {
  std::size_t c = error_channels(layer);
  if (layer + 1 < num_layers) c += repr_channels.at(layer + 1);
  return c;
}

std::size_t PredNetConfig::fused_length() const {
  std::size_t n = input_channels;
  for (std::size_t c : repr_channels) n += c;
  return n;
}

ConvLstmParams ConvLstmParams::zeros(std::size_t input_channels, std::size_t hidden_channels,
                                     std::size_t k) {
  const std::size_t in = input_channels + hidden_channels;
  return {ConvParams::zeros(in, hidden_channels, k), ConvParams::zeros(in, hidden_channels, k),
          ConvParams::zeros(in, hidden_channels, k), ConvParams::zeros(in, hidden_channels, k)};
}

void ConvLstmParams::append_to(ParameterList& out, const std::string& prefix) const {
  input_gate.append_to(out, prefix + ".input_gate");
  forget_gate.append_to(out, prefix + ".forget_gate");
  output_gate.append_to(out, prefix + ".output_gate");
  cell_gate.append_to(out, prefix + ".cell_gate");
}

std::pair<Tensor, Tensor> conv_lstm_step(GradientTape& tape, const Tensor& x, const Tensor& h,
                                         const Tensor& cell, const ConvLstmParams& params) {
  const std::size_t expected = params.input_gate.kernel.dim(1);
  if (x.dim(0) + h.dim(0) != expected) {
    throw ConfigError("convLSTM expects " + std::to_string(expected) +
                      " channels over concat(x, h), got x " + shape_to_string(x.shape()) +
                      " and h " + shape_to_string(h.shape()));
  }
  const Tensor parts[] = {x, h};
  const Tensor xh = ops::channel_concat(tape, parts);
  using ops::conv2d;
  const Tensor i = ops::sigmoid(tape, conv2d(tape, xh, params.input_gate.kernel, params.input_gate.bias));
  const Tensor f = ops::sigmoid(tape, conv2d(tape, xh, params.forget_gate.kernel, params.forget_gate.bias));
  const Tensor o = ops::sigmoid(tape, conv2d(tape, xh, params.output_gate.kernel, params.output_gate.bias));
  const Tensor g = ops::tanh(tape, conv2d(tape, xh, params.cell_gate.kernel, params.cell_gate.bias));
  const Tensor next_cell =
      ops::add(tape, ops::hadamard(tape, f, cell), ops::hadamard(tape, i, g));
  const Tensor next_h = ops::hadamard(tape, o, ops::tanh(tape, next_cell));
  return {next_h, next_cell};
}

PredNet::PredNet(PredNetConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t k = config_.kernel_size;
  layers_.resize(config_.num_layers);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::size_t rc = config_.repr_channels[l];
    layers_[l].lstm = ConvLstmParams::zeros(config_.lstm_input_channels(l), rc, k);
    layers_[l].predict = ConvParams::zeros(rc, config_.prediction_channels(l), k);
    if (l + 1 < config_.num_layers) {
      layers_[l].lift = ConvParams::zeros(config_.error_channels(l), config_.repr_channels[l + 1], k);
    }
  }
}

void PredNet::init(Rng& rng) {
  for (auto& layer : layers_) {
    layer.lstm.input_gate.init_uniform(rng);
    layer.lstm.forget_gate.init_uniform(rng, 1.0);
    layer.lstm.output_gate.init_uniform(rng);
    layer.lstm.cell_gate.init_uniform(rng);
    layer.predict.init_uniform(rng);
    if (layer.lift.kernel.defined()) layer.lift.init_uniform(rng);
  }
}

ParameterList PredNet::parameters(const std::string& prefix) const {
  ParameterList out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = prefix + ".layer" + std::to_string(l);
    layers_[l].lstm.append_to(out, p + ".lstm");
    layers_[l].predict.append_to(out, p + ".predict");
    if (layers_[l].lift.kernel.defined()) layers_[l].lift.append_to(out, p + ".lift");
  }
  return out;
}

PredNetState PredNet::initial_state() const {
  PredNetState state(config_.num_layers);
  const std::size_t h = config_.height, w = config_.width;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    state[l].repr = Tensor({config_.repr_channels[l], h, w});
    state[l].cell = Tensor({config_.repr_channels[l], h, w});
    state[l].error = Tensor({config_.error_channels(l), h, w});
  }
  return state;
}

std::vector<std::pair<Tensor, Tensor>> PredNet::update_representations(
    GradientTape& tape, const PredNetState& prev) const {
  if (prev.size() != config_.num_layers) {
    throw UsageError("update_representations needs an initialized state with " +
                     std::to_string(config_.num_layers) + " layers");
  }
  std::vector<std::pair<Tensor, Tensor>> next(config_.num_layers);
  for (std::size_t l = config_.num_layers; l-- > 0;) {
    const LayerState& s = prev[l];
    if (!s.repr.defined() || !s.cell.defined() || !s.error.defined()) {
      throw UsageError("update_representations called before state initialization");
    }
    Tensor x = s.error;
    if (l + 1 < config_.num_layers) {
      const Tensor parts[] = {s.error, next[l + 1].first};
      x = ops::channel_concat(tape, parts);
    }
    next[l] = conv_lstm_step(tape, x, s.repr, s.cell, layers_[l].lstm);
  }
  return next;
}

BottomUp PredNet::propagate_predictions(GradientTape& tape, std::span<const Tensor> reprs,
                                        const Tensor& a0) const {
  const Shape expected{config_.input_channels, config_.height, config_.width};
  if (a0.shape() != expected) {
    throw InputError("frame feature " + shape_to_string(a0.shape()) + " does not match " +
                     shape_to_string(expected));
  }
  if (reprs.size() != config_.num_layers) {
    throw UsageError("propagate_predictions needs one representation per layer");
  }
  BottomUp out;
  Tensor target = a0;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const Layer& layer = layers_[l];
    const Tensor prediction =
        ops::relu(tape, ops::conv2d(tape, reprs[l], layer.predict.kernel, layer.predict.bias));
    Tensor error;
    if (config_.error_mode == ErrorMode::kRectifiedSplit) {
      const Tensor halves[] = {ops::relu(tape, ops::sub(tape, target, prediction)),
                               ops::relu(tape, ops::sub(tape, prediction, target))};
      error = ops::channel_concat(tape, halves);
    } else {
      const Tensor halves[] = {ops::abs(tape, ops::sub(tape, prediction, target)),
                               ops::abs(tape, ops::sub(tape, target, prediction))};
      error = ops::channel_concat(tape, halves);
    }
    out.targets.push_back(target);
    out.predictions.push_back(prediction);
    out.errors.push_back(error);
    if (l + 1 < config_.num_layers) {
      target = ops::relu(tape, ops::conv2d(tape, error, layer.lift.kernel, layer.lift.bias));
    }
  }
  return out;
}

std::pair<PredNetState, StepOutput> PredNet::step(GradientTape& tape, const PredNetState& state,
                                                  const Tensor& a0, std::size_t t) const {
  if (state.size() != config_.num_layers) {
    throw UsageError("PredNet step needs an initialized state");
  }
  PredNetState next(config_.num_layers);
  if (t == 0) {
    for (std::size_t l = 0; l < config_.num_layers; ++l) {
      next[l].repr = state[l].repr;
      next[l].cell = state[l].cell;
    }
  } else {
    auto updated = update_representations(tape, state);
    for (std::size_t l = 0; l < config_.num_layers; ++l) {
      next[l].repr = updated[l].first;
      next[l].cell = updated[l].second;
    }
  }
  std::vector<Tensor> reprs;
  reprs.reserve(next.size());
  for (const auto& s : next) reprs.push_back(s.repr);
  BottomUp bu = propagate_predictions(tape, reprs, a0);
  for (std::size_t l = 0; l < config_.num_layers; ++l) next[l].error = bu.errors[l];

  StepOutput out;
  out.t = t;
  out.input = a0;
  out.targets = std::move(bu.targets);
  out.predictions = std::move(bu.predictions);
  out.errors = std::move(bu.errors);
  out.reprs = std::move(reprs);
  return {std::move(next), std::move(out)};
}

std::vector<StepOutput> PredNet::unroll(GradientTape& tape, std::span<const Tensor> frames) const {
  if (frames.size() != config_.time_steps) {
    throw InputError("clip has " + std::to_string(frames.size()) + " frames, model expects " +
                     std::to_string(config_.time_steps));
  }
  std::vector<StepOutput> outputs;
  outputs.reserve(frames.size());
  PredNetState state = initial_state();
  for (std::size_t t = 0; t < frames.size(); ++t) {
    auto [next, out] = step(tape, state, frames[t], t);
    state = std::move(next);
    outputs.push_back(std::move(out));
  }
  return outputs;
}

std::vector<double> default_layer_weights(std::size_t num_layers) {
  std::vector<double> w(num_layers, 0.1);
  if (!w.empty()) w[0] = 1.0;
  return w;
}

std::vector<double> default_time_weights(std::size_t time_steps) {
  std::vector<double> w(time_steps, 0.0);
  if (time_steps > 1) {
    for (std::size_t t = 1; t < time_steps; ++t) w[t] = 1.0 / static_cast<double>(time_steps - 1);
  }
  return w;
}

Tensor prediction_error_loss(GradientTape& tape, std::span<const StepOutput> outputs,
                             std::span<const double> layer_weights,
                             std::span<const double> time_weights) {
  if (time_weights.size() != outputs.size()) {
    throw ConfigError("time weights length does not match the number of steps");
  }
  Tensor total = Tensor::scalar(0.0);
  for (std::size_t t = 0; t < outputs.size(); ++t) {
    if (time_weights[t] < 0.0) throw ConfigError("time weights must be nonnegative");
    if (time_weights[t] == 0.0) continue;
    const auto& errors = outputs[t].errors;
    if (layer_weights.size() < errors.size()) {
      throw ConfigError("fewer layer weights than layers");
    }
    for (std::size_t l = 0; l < errors.size(); ++l) {
      if (layer_weights[l] < 0.0) throw ConfigError("layer weights must be nonnegative");
      if (layer_weights[l] == 0.0) continue;
      const Tensor term = ops::scale(tape, ops::mean(tape, errors[l]), time_weights[t] * layer_weights[l]);
      total = ops::add(tape, total, term);
    }
  }
  return total;
}

}  // namespace pcn
