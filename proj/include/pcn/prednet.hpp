// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcn/parameters.hpp"
#include "pcn/tape.hpp"
#include "pcn/tensor.hpp"

namespace pcn {

/// How a layer's error unit compares its input A with its prediction Â.
enum class ErrorMode {
  /// concat(relu(A - Â), relu(Â - A))
  kRectifiedSplit,
  /// concat(|Â - A|, |A - Â|); both halves are equal.
  kAbsolute,
};

std::string to_string(ErrorMode mode);
ErrorMode error_mode_from_string(const std::string& name);

struct PredNetConfig {
  std::size_t num_layers = 2;
  std::vector<std::size_t> repr_channels{64, 64};
  std::size_t input_channels = 2048;
  std::size_t height = 7;
  std::size_t width = 7;
  std::size_t time_steps = 30;
  std::size_t kernel_size = 3;
  ErrorMode error_mode = ErrorMode::kRectifiedSplit;

  /// Throws ConfigError on L < 1, zero channels, even kernel or a
  /// repr_channels list whose length differs from num_layers.
  void validate() const;

  /// Channels of A_l (and Â_l): C0 at layer 0, repr_channels[l] above.
  std::size_t prediction_channels(std::size_t layer) const;
  std::size_t error_channels(std::size_t layer) const { return 2 * prediction_channels(layer); }
  /// Channels of the convLSTM's non-recurrent input: E_l plus R_{l+1}.
  std::size_t lstm_input_channels(std::size_t layer) const;
  /// C0 + sum of repr_channels.
  std::size_t fused_length() const;
};

struct ConvLstmParams {
  ConvParams input_gate;
  ConvParams forget_gate;
  ConvParams output_gate;
  ConvParams cell_gate;

  static ConvLstmParams zeros(std::size_t input_channels, std::size_t hidden_channels,
                              std::size_t k);
  void append_to(ParameterList& out, const std::string& prefix) const;
};

/// One convLSTM update over concat(x, h); no peepholes.
std::pair<Tensor, Tensor> conv_lstm_step(GradientTape& tape, const Tensor& x, const Tensor& h,
                                         const Tensor& cell, const ConvLstmParams& params);

/// Recurrent units carried between time steps for one layer.
struct LayerState {
  Tensor repr;   // R_l
  Tensor cell;   // convLSTM memory
  Tensor error;  // E_l from the previous step
};

using PredNetState = std::vector<LayerState>;

/// Units exposed by one time step.
struct StepOutput {
  std::size_t t = 0;
  Tensor input;                     // A_0, the frame feature
  std::vector<Tensor> targets;      // A_l
  std::vector<Tensor> predictions;  // Â_l
  std::vector<Tensor> errors;       // E_l
  std::vector<Tensor> reprs;        // R_l
};

struct BottomUp {
  std::vector<Tensor> targets;
  std::vector<Tensor> predictions;
  std::vector<Tensor> errors;
};

class PredNet {
 public:
  struct Layer {
    ConvLstmParams lstm;
    ConvParams predict;  // R_l -> Â_l
    ConvParams lift;     // E_l -> A_{l+1}; undefined on the top layer
  };

  /// All weights zero; call init() for a trainable start.
  explicit PredNet(PredNetConfig config);

  /// Kernels uniform +-1/sqrt(fan_in), biases 0, forget-gate bias +1.
  void init(Rng& rng);

  const PredNetConfig& config() const { return config_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }
  ParameterList parameters(const std::string& prefix = "prednet") const;

  /// All-zero R, cell and E for every layer.
  PredNetState initial_state() const;

  /// Top-down convLSTM pass. Returns the new (R, cell) per layer, computed
  /// from the top layer downward so layer l sees the fresh R_{l+1}.
  std::vector<std::pair<Tensor, Tensor>> update_representations(GradientTape& tape,
                                                                const PredNetState& prev) const;

  /// Bottom-up pass against fixed representations.
  BottomUp propagate_predictions(GradientTape& tape, std::span<const Tensor> reprs,
                                 const Tensor& a0) const;

  /// One step; t is zero-based. At t == 0 the top-down pass is skipped and
  /// R stays at its zero initial value.
  std::pair<PredNetState, StepOutput> step(GradientTape& tape, const PredNetState& state,
                                           const Tensor& a0, std::size_t t) const;

  /// Threads state through frames.size() steps. frames must have exactly
  /// time_steps entries, each [C0,H,W].
  std::vector<StepOutput> unroll(GradientTape& tape, std::span<const Tensor> frames) const;

 private:
  PredNetConfig config_;
  std::vector<Layer> layers_;
};

/// Default loss weights: λ = (1, 0.1, 0.1, ...), μ_0 = 0, μ_t = 1/(T-1).
std::vector<double> default_layer_weights(std::size_t num_layers);
std::vector<double> default_time_weights(std::size_t time_steps);

/// Σ_t μ_t Σ_l λ_l mean(E_l at t).
Tensor prediction_error_loss(GradientTape& tape, std::span<const StepOutput> outputs,
                             std::span<const double> layer_weights,
                             std::span<const double> time_weights);

}  // namespace pcn
