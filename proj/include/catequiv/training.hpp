// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Adam with global-norm clipping, a plateau LR schedule and early stopping,
// both driven by validation macro-F1.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "catequiv/metrics.hpp"
#include "catequiv/model.hpp"
#include "catequiv/perturbation.hpp"
#include "catequiv/signal.hpp"

namespace catequiv::train {

using core::Tensor;
using model::Model;
using model::ModelSpec;
using signal::DatasetSplit;

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  double lr = 1e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 128;
  double clip_norm = 5.0;
  double plateau_factor = 0.5;
  std::size_t plateau_patience = 3;
  std::size_t early_stop_patience = 10;
  double min_delta = 1e-4;
  double dropout = 0.15;  // overrides ModelSpec::dropout
  std::size_t max_epochs = 100;
  std::uint64_t seed = 1;
  bool augment = true;
  /// Fresh perturbation per window and epoch; otherwise one fixed draw per
  /// window for the whole run.
  bool augment_per_epoch = true;
  /// AdamW-style decay instead of adding weight_decay * theta to the gradient.
  bool decoupled_weight_decay = false;
  double val_fraction = 0.1;
  ood::OodConfig augmentation;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

/// w_c = (1/n_c) / ((1/K) sum_k 1/n_k). Rejects zero counts.
std::vector<double> class_weights(std::span<const std::size_t> counts, std::size_t num_classes);

double global_norm(std::span<const Tensor> grads);
/// Rescales by clip/norm when norm > clip; returns the norm before clipping.
double clip_global_norm(std::vector<Tensor>& grads, double clip);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;

  static AdamState zeros_like(const model::ParameterSet& params);
};

/// One optimizer step at learning rate `lr`: clip, add weight decay, then the
/// bias-corrected Adam update. Non-finite gradients throw TrainingError and
/// leave params and state untouched.
void adam_step(AdamState& state, model::ParameterSet& params, std::vector<Tensor> grads,
               const TrainConfig& cfg, double lr);

/// Halves (factor) the LR once the monitored value has failed to improve by
/// min_delta for `patience` consecutive epochs, then restarts the count.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr, double factor, std::size_t patience, double min_delta);
  /// Feeds one epoch's metric; returns the LR for the next epoch.
  double step(double metric);
  double lr() const { return lr_; }
  std::size_t reductions() const { return reductions_; }

 private:
  double lr_;
  double factor_;
  std::size_t patience_;
  double min_delta_;
  double best_;
  bool has_best_ = false;
  std::size_t bad_epochs_ = 0;
  std::size_t reductions_ = 0;
};

class EarlyStopping {
 public:
  EarlyStopping(std::size_t patience, double min_delta);
  /// Returns true when `metric` is a new best.
  bool update(double metric);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  double best() const { return best_; }
  std::size_t bad_epochs() const { return bad_epochs_; }

 private:
  std::size_t patience_;
  double min_delta_;
  double best_ = 0.0;
  bool has_best_ = false;
  std::size_t bad_epochs_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;        // LR used during this epoch
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_macro_f1 = 0.0;
};

nlohmann::json to_json(const EpochLog& e);

struct TrainResult {
  Model best;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  bool early_stopped = false;
};

/// Weighted loss sum_i w_i CE_i / sum_i w_i and parameter gradients for a
/// batch, evaluated per sample on separate tapes and summed in batch order.
struct BatchGradient {
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<Tensor> grads;
};

BatchGradient batch_gradient(const Model& model, std::span<const Tensor> inputs,
                             std::span<const std::size_t> labels,
                             std::span<const double> class_weight, bool train_mode,
                             std::uint64_t dropout_seed);

using EpochCallback = std::function<void(const EpochLog&)>;

/// Trains from Model::initialize(spec, cfg.seed) and returns the best
/// validation checkpoint. Throws TrainingError on empty splits or a
/// non-finite loss.
TrainResult train(const ModelSpec& spec, const DatasetSplit& train_data,
                  const DatasetSplit& val_data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Convenience: eval-mode predictions and metrics on clean windows.
metrics::MetricsReport evaluate_clean(const Model& model, const DatasetSplit& data);

}  // namespace catequiv::train
