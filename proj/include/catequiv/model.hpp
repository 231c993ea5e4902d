// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// CatEquiv and the two CNN baselines on top of the tape.
//
// CatEquiv forward pass on the 8 x T gain-processed input:
//
//   axes (rows 0-5) -> depthwise circular conv with one bank tied over all
//   six axes -> per-sensor l2 over {x,y,z} -> ReLU -> GroupNorm(2) ->
//   three sensor-tied circular conv branches (dilations 1,2,3) + ReLU ->
//   mean over sensors -> circular box filter -> GAP over time
//   -> concat with GAP of the log-RMS rows -> dropout -> linear head.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "catequiv/autodiff.hpp"
#include "catequiv/ops.hpp"
#include "catequiv/rng.hpp"
#include "catequiv/signal.hpp"

namespace catequiv::model {

using core::Rng;
using core::Shape;
using core::Tape;
using core::Tensor;
using core::Var;

enum class ModelKind { kCatEquiv, kCircCnn, kPlainCnn };

std::string_view name(ModelKind kind);
/// Accepts "catequiv", "circcnn", "plaincnn" (case-insensitive).
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::kCatEquiv;
  std::size_t num_classes = signal::kNumClasses;
  std::size_t length = signal::kWindowLength;
  double dropout = 0.15;
  double rms_epsilon = signal::kDefaultEpsilon;

  // CatEquiv
  std::size_t stage1_channels = 32;
  std::size_t stage1_kernel = 9;
  std::vector<std::size_t> stage2_channels{64, 32, 32};
  std::vector<std::size_t> stage2_kernels{9, 11, 15};
  std::vector<std::size_t> stage2_dilations{1, 2, 3};
  std::size_t box_kernel = 5;
  double group_norm_eps = 1e-5;

  // Structural switches; the defaults are the full model. Each one is the
  // knob behind an ablation variant.
  core::ops::Padding padding = core::ops::Padding::kCircular;
  bool gain_processing = true;
  bool tie_axes = true;
  bool l2_over_axes = true;
  bool group_norm = true;
  bool smoothing = true;

  // Baselines: conv(in -> C) -> ReLU -> conv(C -> C) -> ReLU -> dropout
  // -> GAP -> linear.
  std::size_t baseline_channels = 64;
  std::size_t baseline_kernel1 = 9;
  std::size_t baseline_kernel2 = 9;
  /// Feed baselines the 6 raw channels instead of the 8 processed ones.
  bool baseline_raw_input = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  std::size_t input_channels() const;
  /// Length of the head descriptor z.
  std::size_t descriptor_size() const;
  /// Stage-2 input channels per sensor (C1, or 3*C1 without the l2 step).
  std::size_t sensor_features() const;
};

ModelSpec catequiv_spec();
ModelSpec circcnn_spec();
ModelSpec plaincnn_spec();
ModelSpec default_spec(ModelKind kind);

/// Named parameter tensors in a fixed order.
class ParameterSet {
 public:
  void add(std::string name, Tensor value);
  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].first; }
  const Tensor& operator[](std::size_t i) const { return entries_[i].second; }
  Tensor& operator[](std::size_t i) { return entries_[i].second; }
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);
  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  /// Sum of element counts.
  std::size_t element_count() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
};

/// Closed-form count of trainable scalars; tied banks are counted once.
std::size_t param_count(const ModelSpec& spec);

/// Parameters placed on one tape, index-aligned with the ParameterSet.
struct Bindings {
  const ParameterSet* params = nullptr;
  std::vector<Var> vars;

  Var operator[](std::string_view name) const;
};

class Model {
 public:
  Model(ModelSpec spec, ParameterSet params);

  /// PyTorch-style uniform init: weights and biases ~ U(+-1/sqrt(fan_in)),
  /// GroupNorm affine (1, 0).
  static Model initialize(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const ParameterSet& params() const { return params_; }
  ParameterSet& params() { return params_; }

  /// Window -> model input [C_in x T] (gain processing, log-RMS rows).
  Tensor prepare(const signal::Window& window) const;

  /// Places parameters on the tape; `track` makes them gradient leaves.
  Bindings bind(Tape& tape, bool track) const;

  /// Head descriptor z (before dropout).
  Var descriptor(Tape& tape, const Bindings& b, const Tensor& input) const;
  Var logits(Tape& tape, const Bindings& b, const Tensor& input, bool train,
             Rng* rng) const;

  // Eval-mode conveniences on a private non-recording tape.
  Tensor descriptor_value(const Tensor& input) const;
  Tensor logits_value(const Tensor& input) const;
  std::size_t predict(const Tensor& input) const;

  // CatEquiv building blocks, shared by the forward pass and the
  // linearized core used for verification.

  /// Stage-1 filter bank for the given axis rows (0..5), laid out as a
  /// depthwise weight [n*C1 x 1 x K1]. Tied: one bank tiled n times.
  Var stage1_bank(const Bindings& b, std::span<const std::size_t> axes) const;
  /// Depthwise Stage-1 convolution of `x` [n x T] whose rows are `axes`.
  Var stage1(const Bindings& b, Var x, std::span<const std::size_t> axes) const;
  /// Branch `branch` of Stage-2 as a grouped convolution over `groups`
  /// blocks of sensor_features() rows, with the bank tied across groups.
  /// With `linear` set the bias and ReLU are dropped.
  Var stage2(const Bindings& b, std::size_t branch, Var features,
             std::size_t groups, bool linear) const;
  /// Depthwise circular box filter of length box_kernel on every row.
  Var smooth(Var x) const;

  /// Linear core on a carrier tensor [n x T] whose rows are the axis rows
  /// `axes`: Stage-1, Stage-2 branches with identity activation and no
  /// bias, and box smoothing; no l2, GroupNorm, sensor mean, GAP or
  /// log-RMS. Output rows are channel-major: for each carrier row, the
  /// concatenated features of all branches (sum of C2 rows).
  Tensor linear_core(const Tensor& x, std::span<const std::size_t> axes) const;

 private:
  Var catequiv_descriptor(Tape& tape, const Bindings& b, const Tensor& input) const;
  Var baseline_features(Tape& tape, const Bindings& b, const Tensor& input) const;

  ModelSpec spec_;
  ParameterSet params_;
};

/// Expected parameter names and shapes for a spec, in storage order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelSpec& spec);

}  // namespace catequiv::model
