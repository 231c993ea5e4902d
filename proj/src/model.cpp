// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace catequiv::model {
namespace {

using core::ops::Conv1dOptions;
using core::ops::Padding;
namespace ops = core::ops;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string branch_name(std::size_t i, const char* leaf) {
  return "stage2." + std::to_string(i) + "." + leaf;
}

double fan_in_bound(const std::string& name, const Shape& shape,
                    const std::vector<std::pair<std::string, Shape>>& layout) {
  // Biases share the bound of the weight they belong to.
  if (name.size() > 5 && name.compare(name.size() - 5, 5, ".bias") == 0) {
    const std::string weight = name.substr(0, name.size() - 5) + ".weight";
    for (const auto& [n, s] : layout) {
      if (n == weight) return fan_in_bound(n, s, layout);
    }
  }
  std::size_t fan_in = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
  return 1.0 / std::sqrt(static_cast<double>(fan_in));
}

}  // namespace

std::string_view name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCatEquiv: return "catequiv";
    case ModelKind::kCircCnn: return "circcnn";
    case ModelKind::kPlainCnn: return "plaincnn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string s = lower(text);
  if (s == "catequiv") return ModelKind::kCatEquiv;
  if (s == "circcnn") return ModelKind::kCircCnn;
  if (s == "plaincnn") return ModelKind::kPlainCnn;
  throw std::invalid_argument("unknown model kind '" + std::string(text) +
                              "' (expected catequiv, circcnn or plaincnn)");
}

void ModelSpec::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("ModelSpec: " + msg); };
  if (num_classes < 2) fail("need at least two classes");
  if (length < 2) fail("window length too short");
  if (dropout < 0.0 || dropout >= 1.0) fail("dropout must lie in [0, 1)");
  if (!(rms_epsilon > 0.0)) fail("rms_epsilon must be positive");
  auto check_kernel = [&](std::size_t k, std::size_t d, const std::string& what) {
    if (k % 2 == 0) fail(what + " kernel length must be odd");
    if (d == 0 || d * (k - 1) >= length) fail(what + " dilated extent must be below T");
  };
  if (kind == ModelKind::kCatEquiv) {
    if (stage1_channels == 0) fail("stage1_channels must be positive");
    check_kernel(stage1_kernel, 1, "stage-1");
    if (stage2_channels.empty() || stage2_channels.size() != stage2_kernels.size() ||
        stage2_channels.size() != stage2_dilations.size()) {
      fail("stage-2 channels, kernels and dilations must be non-empty and equally long");
    }
    for (std::size_t i = 0; i < stage2_channels.size(); ++i) {
      if (stage2_channels[i] == 0) fail("stage-2 widths must be positive");
      check_kernel(stage2_kernels[i], stage2_dilations[i], "stage-2 branch " + std::to_string(i));
    }
    if (smoothing) check_kernel(box_kernel, 1, "box");
    if (!(group_norm_eps > 0.0)) fail("group_norm_eps must be positive");
  } else {
    if (baseline_channels == 0) fail("baseline_channels must be positive");
    check_kernel(baseline_kernel1, 1, "baseline conv1");
    check_kernel(baseline_kernel2, 1, "baseline conv2");
    const Padding want = kind == ModelKind::kCircCnn ? Padding::kCircular : Padding::kZero;
    if (padding != want) fail("CircCNN uses circular padding and PlainCNN zero padding");
  }
}

std::size_t ModelSpec::input_channels() const {
  if (kind == ModelKind::kCatEquiv) {
    return gain_processing ? signal::kInputChannels : signal::kRawChannels;
  }
  return baseline_raw_input ? signal::kRawChannels : signal::kInputChannels;
}

std::size_t ModelSpec::sensor_features() const {
  return l2_over_axes ? stage1_channels : 3 * stage1_channels;
}

std::size_t ModelSpec::descriptor_size() const {
  if (kind != ModelKind::kCatEquiv) return baseline_channels;
  return std::accumulate(stage2_channels.begin(), stage2_channels.end(), std::size_t{0}) +
         (gain_processing ? 2 : 0);
}

ModelSpec catequiv_spec() { return ModelSpec{}; }

ModelSpec circcnn_spec() {
  ModelSpec s;
  s.kind = ModelKind::kCircCnn;
  s.padding = Padding::kCircular;
  return s;
}

ModelSpec plaincnn_spec() {
  ModelSpec s;
  s.kind = ModelKind::kPlainCnn;
  s.padding = Padding::kZero;
  return s;
}

ModelSpec default_spec(ModelKind kind) {
  switch (kind) {
    case ModelKind::kCatEquiv: return catequiv_spec();
    case ModelKind::kCircCnn: return circcnn_spec();
    case ModelKind::kPlainCnn: return plaincnn_spec();
  }
  throw std::invalid_argument("default_spec: unknown kind");
}

void ParameterSet::add(std::string name, Tensor value) {
  if (contains(name)) throw std::invalid_argument("ParameterSet: duplicate '" + name + "'");
  entries_.emplace_back(std::move(name), std::move(value));
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].first == name) return i;
  }
  throw std::out_of_range("ParameterSet: no parameter '" + std::string(name) + "'");
}

bool ParameterSet::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const auto& e) { return e.first == name; });
}

const Tensor& ParameterSet::at(std::string_view name) const {
  return entries_[index_of(name)].second;
}

Tensor& ParameterSet::at(std::string_view name) { return entries_[index_of(name)].second; }

std::size_t ParameterSet::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.second.size();
  return n;
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelSpec& spec) {
  spec.validate();
  std::vector<std::pair<std::string, Shape>> layout;
  const std::size_t k = spec.num_classes;
  if (spec.kind == ModelKind::kCatEquiv) {
    const std::size_t c1 = spec.stage1_channels;
    const std::size_t f = spec.sensor_features();
    layout.emplace_back("stage1.weight",
                        Shape{spec.tie_axes ? c1 : 6 * c1, 1, spec.stage1_kernel});
    if (spec.group_norm) {
      layout.emplace_back("gn.weight", Shape{2 * f});
      layout.emplace_back("gn.bias", Shape{2 * f});
    }
    for (std::size_t i = 0; i < spec.stage2_channels.size(); ++i) {
      layout.emplace_back(branch_name(i, "weight"),
                          Shape{spec.stage2_channels[i], f, spec.stage2_kernels[i]});
      layout.emplace_back(branch_name(i, "bias"), Shape{spec.stage2_channels[i]});
    }
  } else {
    const std::size_t c = spec.baseline_channels;
    layout.emplace_back("conv1.weight", Shape{c, spec.input_channels(), spec.baseline_kernel1});
    layout.emplace_back("conv1.bias", Shape{c});
    layout.emplace_back("conv2.weight", Shape{c, c, spec.baseline_kernel2});
    layout.emplace_back("conv2.bias", Shape{c});
  }
  layout.emplace_back("head.weight", Shape{k, spec.descriptor_size()});
  layout.emplace_back("head.bias", Shape{k});
  return layout;
}

std::size_t param_count(const ModelSpec& spec) {
  spec.validate();
  const std::size_t k = spec.num_classes;
  const std::size_t head = k * spec.descriptor_size() + k;
  if (spec.kind == ModelKind::kCatEquiv) {
    const std::size_t c1 = spec.stage1_channels;
    const std::size_t f = spec.sensor_features();
    std::size_t n = (spec.tie_axes ? 1 : 6) * c1 * spec.stage1_kernel;
    if (spec.group_norm) n += 2 * (2 * f);
    for (std::size_t i = 0; i < spec.stage2_channels.size(); ++i) {
      n += spec.stage2_channels[i] * f * spec.stage2_kernels[i] + spec.stage2_channels[i];
    }
    return n + head;
  }
  const std::size_t c = spec.baseline_channels;
  return c * spec.input_channels() * spec.baseline_kernel1 + c +
         c * c * spec.baseline_kernel2 + c + head;
}

Var Bindings::operator[](std::string_view name) const {
  return vars.at(params->index_of(name));
}

Model::Model(ModelSpec spec, ParameterSet params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  const auto layout = parameter_layout(spec_);
  if (layout.size() != params_.size()) {
    throw std::invalid_argument("Model: expected " + std::to_string(layout.size()) +
                                " parameter tensors, got " + std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (params_.name(i) != layout[i].first || params_[i].shape() != layout[i].second) {
      throw std::invalid_argument("Model: parameter " + std::to_string(i) + " is '" +
                                  params_.name(i) + "' " + core::to_string(params_[i].shape()) +
                                  ", expected '" + layout[i].first + "' " +
                                  core::to_string(layout[i].second));
    }
  }
}

Model Model::initialize(const ModelSpec& spec, std::uint64_t seed) {
  const auto layout = parameter_layout(spec);
  Rng rng(seed);
  ParameterSet params;
  for (const auto& [pname, shape] : layout) {
    Tensor t(shape, 0.0);
    if (pname == "gn.weight") {
      for (double& v : t.data()) v = 1.0;
    } else if (pname != "gn.bias") {
      const double bound = fan_in_bound(pname, shape, layout);
      for (double& v : t.data()) v = rng.uniform(-bound, bound);
    }
    params.add(pname, std::move(t));
  }
  return Model(spec, std::move(params));
}

Tensor Model::prepare(const signal::Window& window) const {
  const bool processed = spec_.kind == ModelKind::kCatEquiv ? spec_.gain_processing
                                                            : !spec_.baseline_raw_input;
  if (window.values.rank() != 2 || window.values.dim(1) != spec_.length) {
    throw core::ShapeError("prepare: window " + core::to_string(window.values.shape()) +
                           " does not match model length " + std::to_string(spec_.length));
  }
  return processed ? signal::gain_process(window, spec_.rms_epsilon).assembled
                   : window.values;
}

Bindings Model::bind(Tape& tape, bool track) const {
  Bindings b;
  b.params = &params_;
  b.vars.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    b.vars.push_back(track ? tape.variable(params_[i]) : tape.constant(params_[i]));
  }
  return b;
}

Var Model::stage1_bank(const Bindings& b, std::span<const std::size_t> axes) const {
  const std::size_t c1 = spec_.stage1_channels;
  const std::size_t k1 = spec_.stage1_kernel;
  const std::size_t n = axes.size();
  Var w = b["stage1.weight"];
  if (spec_.tie_axes) return ops::tile(w, n);
  bool all = n == 6;
  for (std::size_t i = 0; all && i < n; ++i) all = axes[i] == i;
  if (all) return w;
  Var flat = ops::reshape(w, {6 * c1, k1});
  std::vector<Var> parts;
  for (std::size_t a : axes) {
    if (a >= 6) throw std::out_of_range("stage1_bank: axis index");
    parts.push_back(ops::slice_rows(flat, a * c1, (a + 1) * c1));
  }
  return ops::reshape(ops::concat(parts), {n * c1, 1, k1});
}

Var Model::stage1(const Bindings& b, Var x, std::span<const std::size_t> axes) const {
  if (x.shape().size() != 2 || x.shape()[0] != axes.size()) {
    throw core::ShapeError("stage-1: input " + core::to_string(x.shape()) + " for " +
                           std::to_string(axes.size()) + " axis rows");
  }
  return ops::conv1d(x, stage1_bank(b, axes),
                     Conv1dOptions{axes.size(), 1, spec_.padding});
}

Var Model::stage2(const Bindings& b, std::size_t branch, Var features,
                  std::size_t groups, bool linear) const {
  if (branch >= spec_.stage2_channels.size()) throw std::out_of_range("stage-2: branch index");
  const std::size_t f = spec_.sensor_features();
  if (features.shape().size() != 2 || features.shape()[0] != groups * f) {
    throw core::ShapeError("stage-2: input " + core::to_string(features.shape()) +
                           " is not " + std::to_string(groups) + " blocks of " +
                           std::to_string(f) + " rows");
  }
  Var w = ops::tile(b[branch_name(branch, "weight")], groups);
  Var h = ops::conv1d(features, w,
                      Conv1dOptions{groups, spec_.stage2_dilations[branch], spec_.padding});
  if (linear) return h;
  h = ops::add_channel_bias(h, ops::tile(b[branch_name(branch, "bias")], groups));
  return ops::relu(h);
}

Var Model::smooth(Var x) const {
  const std::size_t rows = x.shape().at(0);
  const std::size_t k = spec_.box_kernel;
  Var kernel = x.tape()->constant(Tensor({rows, 1, k}, 1.0 / static_cast<double>(k)));
  return ops::conv1d(x, kernel, Conv1dOptions{rows, 1, spec_.padding});
}

Var Model::catequiv_descriptor(Tape& tape, const Bindings& b, const Tensor& input) const {
  const std::size_t length = spec_.length;
  const std::size_t c1 = spec_.stage1_channels;
  Var in = tape.constant(input);
  Var axes = spec_.gain_processing ? ops::slice_rows(in, 0, 6) : in;
  static constexpr std::size_t kAllAxes[] = {0, 1, 2, 3, 4, 5};
  Var h1 = stage1(b, axes, kAllAxes);

  Var s = spec_.l2_over_axes
              ? ops::reshape(ops::l2_norm(ops::reshape(h1, {2, 3, c1, length}), 1),
                             {2 * c1, length})
              : h1;
  s = ops::relu(s);
  if (spec_.group_norm) {
    s = ops::group_norm(s, 2, b["gn.weight"], b["gn.bias"], spec_.group_norm_eps);
  }

  std::vector<Var> parts;
  for (std::size_t i = 0; i < spec_.stage2_channels.size(); ++i) {
    const std::size_t c2 = spec_.stage2_channels[i];
    Var h2 = stage2(b, i, s, 2, false);
    Var fused = ops::mean(ops::reshape(h2, {2, c2, length}), 0);
    if (spec_.smoothing) fused = smooth(fused);
    parts.push_back(ops::gap_time(fused));
  }
  if (spec_.gain_processing) parts.push_back(ops::gap_time(ops::slice_rows(in, 6, 8)));
  return ops::concat(parts);
}

Var Model::baseline_features(Tape& tape, const Bindings& b, const Tensor& input) const {
  Var in = tape.constant(input);
  const Conv1dOptions opt{1, 1, spec_.padding};
  Var h = ops::relu(ops::add_channel_bias(ops::conv1d(in, b["conv1.weight"], opt),
                                          b["conv1.bias"]));
  return ops::relu(ops::add_channel_bias(ops::conv1d(h, b["conv2.weight"], opt),
                                         b["conv2.bias"]));
}

Var Model::descriptor(Tape& tape, const Bindings& b, const Tensor& input) const {
  if (input.rank() != 2 || input.dim(0) != spec_.input_channels() ||
      input.dim(1) != spec_.length) {
    throw core::ShapeError("forward: input " + core::to_string(input.shape()) +
                           ", model expects [" + std::to_string(spec_.input_channels()) +
                           "x" + std::to_string(spec_.length) + "]");
  }
  if (spec_.kind == ModelKind::kCatEquiv) return catequiv_descriptor(tape, b, input);
  return ops::gap_time(baseline_features(tape, b, input));
}

Var Model::logits(Tape& tape, const Bindings& b, const Tensor& input, bool train,
                  Rng* rng) const {
  Var z;
  if (spec_.kind == ModelKind::kCatEquiv) {
    z = ops::dropout(descriptor(tape, b, input), spec_.dropout, train, rng);
  } else {
    if (input.rank() != 2 || input.dim(0) != spec_.input_channels() ||
        input.dim(1) != spec_.length) {
      throw core::ShapeError("forward: input " + core::to_string(input.shape()) +
                             ", model expects [" + std::to_string(spec_.input_channels()) +
                             "x" + std::to_string(spec_.length) + "]");
    }
    Var h = ops::dropout(baseline_features(tape, b, input), spec_.dropout, train, rng);
    z = ops::gap_time(h);
  }
  return ops::affine(b["head.weight"], z, b["head.bias"]);
}

Tensor Model::descriptor_value(const Tensor& input) const {
  Tape tape(false);
  return descriptor(tape, bind(tape, false), input).value();
}

Tensor Model::logits_value(const Tensor& input) const {
  Tape tape(false);
  return logits(tape, bind(tape, false), input, false, nullptr).value();
}

std::size_t Model::predict(const Tensor& input) const {
  const Tensor z = logits_value(input);
  return static_cast<std::size_t>(
      std::distance(z.data().begin(), std::max_element(z.data().begin(), z.data().end())));
}

Tensor Model::linear_core(const Tensor& x, std::span<const std::size_t> axes) const {
  if (spec_.kind != ModelKind::kCatEquiv || !spec_.l2_over_axes) {
    throw std::logic_error("linear_core: needs a CatEquiv model with per-axis Stage-2 input");
  }
  Tape tape(false);
  const Bindings b = bind(tape, false);
  const std::size_t n = axes.size();
  const std::size_t length = spec_.length;
  Var h1 = stage1(b, tape.constant(x), axes);

  // With the l2 reduction removed, every axis row carries its own C1
  // Stage-1 features, and the sensor-tied Stage-2 bank acts on each of
  // them separately (groups = n). Box smoothing stays per stream; the
  // sensor mean is not applied.
  std::vector<Tensor> branches;
  std::size_t width = 0;
  for (std::size_t i = 0; i < spec_.stage2_channels.size(); ++i) {
    Var h2 = stage2(b, i, h1, n, true);
    if (spec_.smoothing) h2 = smooth(h2);
    branches.push_back(h2.value());
    width += spec_.stage2_channels[i];
  }
  Tensor out({n * width, length}, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t row = c * width;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const std::size_t c2 = spec_.stage2_channels[i];
      const double* src = branches[i].data().data() + c * c2 * length;
      std::copy(src, src + c2 * length, out.data().data() + row * length);
      row += c2;
    }
  }
  return out;
}

}  // namespace catequiv::model
