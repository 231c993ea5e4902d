// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "catequiv/ops.hpp"

namespace catequiv::train {
namespace {

using core::Rng;

// Stream ids for Rng::derive(cfg.seed, ...). Disjoint ranges per purpose.
constexpr std::uint64_t kShuffleStream = 1ULL << 40;
constexpr std::uint64_t kAugmentStream = 2ULL << 40;
constexpr std::uint64_t kDropoutStream = 3ULL << 40;

std::size_t argmax(const Tensor& z) {
  return static_cast<std::size_t>(
      std::distance(z.data().begin(), std::max_element(z.data().begin(), z.data().end())));
}

bool all_finite(std::span<const Tensor> ts) {
  return std::all_of(ts.begin(), ts.end(), [](const Tensor& t) { return t.all_finite(); });
}

}  // namespace

void TrainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("TrainConfig: ") + what + " must be positive");
    }
  };
  positive(lr, "lr");
  positive(adam_eps, "adam_eps");
  positive(clip_norm, "clip_norm");
  if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("TrainConfig: betas must lie in (0, 1)");
  }
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
    throw std::invalid_argument("TrainConfig: plateau_factor must lie in (0, 1)");
  }
  if (batch_size == 0 || max_epochs == 0 || plateau_patience == 0 || early_stop_patience == 0) {
    throw std::invalid_argument(
        "TrainConfig: batch_size, max_epochs and patience values must be >= 1");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("TrainConfig: dropout must lie in [0, 1)");
  }
  if (min_delta < 0.0) throw std::invalid_argument("TrainConfig: min_delta must be >= 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("TrainConfig: val_fraction must lie in (0, 1)");
  }
  augmentation.validate();
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"adam_eps", c.adam_eps},
          {"batch_size", c.batch_size},
          {"clip_norm", c.clip_norm},
          {"plateau_factor", c.plateau_factor},
          {"plateau_patience", c.plateau_patience},
          {"early_stop_patience", c.early_stop_patience},
          {"min_delta", c.min_delta},
          {"dropout", c.dropout},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed},
          {"augment", c.augment},
          {"augment_per_epoch", c.augment_per_epoch},
          {"decoupled_weight_decay", c.decoupled_weight_decay},
          {"val_fraction", c.val_fraction},
          {"augmentation", ood::to_json(c.augmentation)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
  c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
  c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
  c.min_delta = j.value("min_delta", c.min_delta);
  c.dropout = j.value("dropout", c.dropout);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.seed = j.value("seed", c.seed);
  c.augment = j.value("augment", c.augment);
  c.augment_per_epoch = j.value("augment_per_epoch", c.augment_per_epoch);
  c.decoupled_weight_decay = j.value("decoupled_weight_decay", c.decoupled_weight_decay);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  if (j.contains("augmentation")) c.augmentation = ood::ood_config_from_json(j.at("augmentation"));
  return c;
}

std::vector<double> class_weights(std::span<const std::size_t> counts, std::size_t num_classes) {
  if (counts.size() != num_classes || num_classes == 0) {
    throw std::invalid_argument("class_weights: expected " + std::to_string(num_classes) +
                                " counts, got " + std::to_string(counts.size()));
  }
  double inv_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw std::invalid_argument("class_weights: class " + std::to_string(c) +
                                  " has no samples");
    }
    inv_sum += 1.0 / static_cast<double>(counts[c]);
  }
  const double mean_inv = inv_sum / static_cast<double>(num_classes);
  std::vector<double> w(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    w[c] = (1.0 / static_cast<double>(counts[c])) / mean_inv;
  }
  return w;
}

double global_norm(std::span<const Tensor> grads) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) sq += v * v;
  return std::sqrt(sq);
}

double clip_global_norm(std::vector<Tensor>& grads, double clip) {
  const double norm = global_norm(grads);
  if (norm > clip) {
    const double factor = clip / norm;
    for (auto& g : grads)
      for (double& v : g.data()) v *= factor;
  }
  return norm;
}

AdamState AdamState::zeros_like(const model::ParameterSet& params) {
  AdamState s;
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m.emplace_back(params[i].shape(), 0.0);
    s.v.emplace_back(params[i].shape(), 0.0);
  }
  return s;
}

void adam_step(AdamState& state, model::ParameterSet& params, std::vector<Tensor> grads,
               const TrainConfig& cfg, double lr) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].shape() != params[i].shape() || state.m[i].shape() != params[i].shape()) {
      throw core::ShapeError("adam_step: shape mismatch for '" + params.name(i) + "'");
    }
  }
  if (!all_finite(grads)) {
    throw TrainingError("adam_step: non-finite gradient, step aborted");
  }
  clip_global_norm(grads, cfg.clip_norm);
  if (!cfg.decoupled_weight_decay && cfg.weight_decay > 0.0) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto g = grads[i].data();
      auto p = params[i].data();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += cfg.weight_decay * p[k];
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto g = grads[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    auto p = params[i].data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      if (cfg.decoupled_weight_decay) p[k] -= lr * cfg.weight_decay * p[k];
      p[k] -= lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
    }
  }
}

PlateauScheduler::PlateauScheduler(double lr, double factor, std::size_t patience,
                                   double min_delta)
    : lr_(lr), factor_(factor), patience_(patience), min_delta_(min_delta), best_(0.0) {}

double PlateauScheduler::step(double metric) {
  if (!has_best_ || metric > best_ + min_delta_) {
    best_ = metric;
    has_best_ = true;
    bad_epochs_ = 0;
  } else if (++bad_epochs_ >= patience_) {
    lr_ *= factor_;
    ++reductions_;
    bad_epochs_ = 0;
  }
  return lr_;
}

EarlyStopping::EarlyStopping(std::size_t patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {}

bool EarlyStopping::update(double metric) {
  if (!has_best_ || metric > best_ + min_delta_) {
    best_ = metric;
    has_best_ = true;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

nlohmann::json to_json(const EpochLog& e) {
  return {{"epoch", e.epoch},
          {"lr", e.lr},
          {"train_loss", e.train_loss},
          {"train_accuracy", e.train_accuracy},
          {"val_accuracy", e.val_accuracy},
          {"val_macro_f1", e.val_macro_f1}};
}

BatchGradient batch_gradient(const Model& model, std::span<const Tensor> inputs,
                             std::span<const std::size_t> labels,
                             std::span<const double> class_weight, bool train_mode,
                             std::uint64_t dropout_seed) {
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw std::invalid_argument("batch_gradient: need matching, non-empty inputs and labels");
  }
  double weight_sum = 0.0;
  for (std::size_t label : labels) weight_sum += class_weight[label];

  BatchGradient out;
  const auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) out.grads.emplace_back(params[i].shape(), 0.0);

  for (std::size_t n = 0; n < inputs.size(); ++n) {
    core::Tape tape(true);
    const model::Bindings b = model.bind(tape, true);
    Rng rng = Rng::derive(dropout_seed, n);
    core::Var logits = model.logits(tape, b, inputs[n], train_mode, &rng);
    if (argmax(logits.value()) == labels[n]) ++out.correct;
    core::Var loss = core::ops::weighted_cross_entropy(
        logits, labels[n], class_weight[labels[n]] / weight_sum);
    out.loss += loss.value()[0];
    tape.backward(loss);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Tensor g = b.vars[i].grad();
      auto dst = out.grads[i].data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g[k];
    }
  }
  return out;
}

metrics::MetricsReport evaluate_clean(const Model& model, const DatasetSplit& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty split");
  std::vector<std::size_t> labels;
  std::vector<std::size_t> preds;
  labels.reserve(data.size());
  preds.reserve(data.size());
  for (const auto& w : data.windows) {
    labels.push_back(w.class_index());
    preds.push_back(model.predict(model.prepare(w)));
  }
  return metrics::compute_metrics(labels, preds, model.spec().num_classes);
}

TrainResult train(const ModelSpec& spec, const DatasetSplit& train_data,
                  const DatasetSplit& val_data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_data.empty() || val_data.empty()) {
    throw TrainingError("train: training and validation splits must be non-empty");
  }
  ModelSpec run_spec = spec;
  run_spec.dropout = cfg.dropout;
  Model model = Model::initialize(run_spec, cfg.seed);

  const std::size_t k = run_spec.num_classes;
  std::vector<std::size_t> counts(k, 0);
  for (const auto& w : train_data.windows) {
    if (w.class_index() >= k) throw TrainingError("train: label outside the model's classes");
    ++counts[w.class_index()];
  }
  std::vector<double> weights;
  try {
    weights = class_weights(counts, k);
  } catch (const std::invalid_argument& e) {
    throw TrainingError(std::string("train: degenerate class balance: ") + e.what());
  }

  const std::size_t n = train_data.size();
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = train_data.windows[i].class_index();

  // Inputs that do not change between epochs are prepared once.
  auto prepare_all = [&](std::uint64_t aug_seed) {
    std::vector<Tensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = train_data.windows[i];
      if (cfg.augment) {
        Rng rng = Rng::derive(aug_seed, i);
        out.push_back(model.prepare(ood::perturb(w, cfg.augmentation, rng)));
      } else {
        out.push_back(model.prepare(w));
      }
    }
    return out;
  };
  std::vector<Tensor> inputs;
  if (!cfg.augment || !cfg.augment_per_epoch) {
    inputs = prepare_all(Rng::derive(cfg.seed, kAugmentStream).next_u64());
  }

  AdamState state = AdamState::zeros_like(model.params());
  PlateauScheduler scheduler(cfg.lr, cfg.plateau_factor, cfg.plateau_patience, cfg.min_delta);
  EarlyStopping stopper(cfg.early_stop_patience, cfg.min_delta);

  TrainResult result{model, {}, 0, 0.0, false};
  std::vector<std::size_t> order(n);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    if (cfg.augment && cfg.augment_per_epoch) {
      inputs = prepare_all(Rng::derive(cfg.seed, kAugmentStream + epoch).next_u64());
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle = Rng::derive(cfg.seed, kShuffleStream + epoch);
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    EpochLog log;
    log.epoch = epoch;
    log.lr = scheduler.lr();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      std::vector<Tensor> batch_inputs;
      std::vector<std::size_t> batch_labels;
      for (std::size_t i = start; i < end; ++i) {
        batch_inputs.push_back(inputs[order[i]]);
        batch_labels.push_back(labels[order[i]]);
      }
      const std::uint64_t dropout_seed =
          Rng::derive(cfg.seed, kDropoutStream + (epoch << 24) + batch_index).next_u64();
      BatchGradient bg = batch_gradient(model, batch_inputs, batch_labels, weights, true,
                                        dropout_seed);
      if (!std::isfinite(bg.loss)) {
        throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index) +
                            " (lr " + std::to_string(log.lr) + "); try a lower learning rate");
      }
      adam_step(state, model.params(), std::move(bg.grads), cfg, log.lr);
      loss_sum += bg.loss * static_cast<double>(end - start);
      correct += bg.correct;
    }
    log.train_loss = loss_sum / static_cast<double>(n);
    log.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);

    const metrics::MetricsReport val = evaluate_clean(model, val_data);
    log.val_accuracy = val.accuracy;
    log.val_macro_f1 = val.macro_f1;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);

    if (stopper.update(val.macro_f1)) {
      result.best = model;
      result.best_epoch = epoch;
      result.best_val_macro_f1 = val.macro_f1;
    }
    scheduler.step(val.macro_f1);
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

}  // namespace catequiv::train
