// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "catequiv/checkpoint.hpp"
#include "catequiv/harness.hpp"
#include "catequiv/verify.hpp"

namespace catequiv::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raw flag values; only options that were actually given override the config.
struct Flags {
  std::string config;
  std::string data_root;
  std::string out;
  std::uint64_t seed = 1;
  std::string acc_source;

  std::string model;
  bool baseline_raw_input = false;

  std::size_t epochs = 0;
  double lr = 0.0;
  std::size_t batch_size = 0;
  double weight_decay = 0.0;
  bool decoupled_wd = false;
  bool no_augment = false;
  bool fixed_augmentation = false;
  double val_fraction = 0.0;

  long shift_range = 0;
  double gain_lo = 0.0;
  double gain_hi = 0.0;
  bool no_rotate = false;
  std::uint64_t ood_seed = 0;

  std::string checkpoint;
  bool clean_only = false;
  std::string axis;
  std::string grid;
  std::string variant;
  std::string reference;
  std::vector<std::uint64_t> verify_seeds;
  std::size_t trials = 6;
  bool no_controls = false;
};

struct Options {
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  CLI::Option* seed = nullptr;
  CLI::Option* ood_seed = nullptr;
};

void add_common(CLI::App* cmd, Flags& f, Options& o) {
  cmd->add_option("--config", f.config, "JSON config file; flags override its values")
      ->check(CLI::ExistingFile);
  o.overrides.emplace_back(
      cmd->add_option("--data-root", f.data_root,
                      std::string("UCI HAR root (falls back to $") + kDataRootEnv + ")"),
      [&f](RunConfig& c) { c.data_root = f.data_root; });
  o.overrides.emplace_back(cmd->add_option("--out", f.out, "Output directory"),
                           [&f](RunConfig& c) { c.out = f.out; });
  o.seed = cmd->add_option("--seed", f.seed, "Master seed");
  o.overrides.emplace_back(o.seed, [&f](RunConfig& c) { c.seed = f.seed; });
  o.overrides.emplace_back(
      cmd->add_option("--acc-source", f.acc_source, "Accelerometer files: total or body")
          ->check(CLI::IsMember({"total", "body"})),
      [&f](RunConfig& c) {
        c.acc_source = f.acc_source == "body" ? signal::AccSource::kBody : signal::AccSource::kTotal;
      });
}

void add_model(CLI::App* cmd, Flags& f, Options& o) {
  o.overrides.emplace_back(
      cmd->add_option("--model", f.model, "catequiv, circcnn or plaincnn")
          ->check(CLI::IsMember({"catequiv", "circcnn", "plaincnn"})),
      [&f](RunConfig& c) { c.model = model::default_spec(model::parse_model_kind(f.model)); });
  o.overrides.emplace_back(
      cmd->add_flag("--baseline-raw-input", f.baseline_raw_input,
                    "Feed baselines the 6 raw channels"),
      [&f](RunConfig& c) { c.model.baseline_raw_input = f.baseline_raw_input; });
}

void add_train(CLI::App* cmd, Flags& f, Options& o) {
  o.overrides.emplace_back(cmd->add_option("--epochs", f.epochs, "Maximum epochs"),
                           [&f](RunConfig& c) { c.train.max_epochs = f.epochs; });
  o.overrides.emplace_back(cmd->add_option("--lr", f.lr, "Initial learning rate"),
                           [&f](RunConfig& c) { c.train.lr = f.lr; });
  o.overrides.emplace_back(cmd->add_option("--batch-size", f.batch_size, "Batch size"),
                           [&f](RunConfig& c) { c.train.batch_size = f.batch_size; });
  o.overrides.emplace_back(cmd->add_option("--weight-decay", f.weight_decay, "Weight decay"),
                           [&f](RunConfig& c) { c.train.weight_decay = f.weight_decay; });
  o.overrides.emplace_back(
      cmd->add_flag("--decoupled-weight-decay", f.decoupled_wd, "AdamW-style weight decay"),
      [&f](RunConfig& c) { c.train.decoupled_weight_decay = f.decoupled_wd; });
  o.overrides.emplace_back(cmd->add_flag("--no-augment", f.no_augment, "Train on clean windows"),
                           [&f](RunConfig& c) { c.train.augment = !f.no_augment; });
  o.overrides.emplace_back(
      cmd->add_flag("--fixed-augmentation", f.fixed_augmentation,
                    "One perturbation per window for the whole run"),
      [&f](RunConfig& c) { c.train.augment_per_epoch = !f.fixed_augmentation; });
  o.overrides.emplace_back(
      cmd->add_option("--val-fraction", f.val_fraction, "Stratified validation fraction"),
      [&f](RunConfig& c) { c.train.val_fraction = f.val_fraction; });
}

void add_ood(CLI::App* cmd, Flags& f, Options& o) {
  o.overrides.emplace_back(cmd->add_option("--shift-range", f.shift_range, "Max |shift|"),
                           [&f](RunConfig& c) { c.ood.shift_range = f.shift_range; });
  o.overrides.emplace_back(cmd->add_option("--gain-lo", f.gain_lo, "Lower gain bound"),
                           [&f](RunConfig& c) { c.ood.gain_lo = f.gain_lo; });
  o.overrides.emplace_back(cmd->add_option("--gain-hi", f.gain_hi, "Upper gain bound"),
                           [&f](RunConfig& c) { c.ood.gain_hi = f.gain_hi; });
  o.overrides.emplace_back(cmd->add_flag("--no-rotate", f.no_rotate, "Disable rotations"),
                           [&f](RunConfig& c) { c.ood.rotate = !f.no_rotate; });
  o.ood_seed = cmd->add_option("--ood-seed", f.ood_seed, "Seed of the OOD test draws");
  o.overrides.emplace_back(o.ood_seed, [&f](RunConfig& c) { c.ood.seed = f.ood_seed; });
}

RunConfig resolve(const Flags& f, const Options& o) {
  RunConfig cfg;
  json file;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    try {
      in >> file;
    } catch (const json::exception& e) {
      throw std::invalid_argument("config " + f.config + ": " + e.what());
    }
    cfg = RunConfig::from_json(file);
  }
  for (const auto& [opt, apply] : o.overrides) {
    if (opt->count() > 0) apply(cfg);
  }
  // One master seed drives training; the OOD draws follow it unless set.
  cfg.train.seed = cfg.seed;
  const bool ood_seed_given = (o.ood_seed && o.ood_seed->count() > 0) ||
                              (file.contains("ood") && file["ood"].contains("seed"));
  if (!ood_seed_given) cfg.ood.seed = cfg.seed;
  if (cfg.data_root.empty()) {
    if (const char* env = std::getenv(kDataRootEnv)) cfg.data_root = env;
  }
  cfg.model.validate();
  cfg.train.validate();
  cfg.ood.validate(cfg.model.length);
  return cfg;
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void persist_config(const RunConfig& cfg, const std::string& command) {
  json j = cfg.to_json();
  j["command"] = command;
  write_json(j, fs::path(cfg.out) / "config.json");
}

fs::path dataset_root(const RunConfig& cfg) {
  if (cfg.data_root.empty()) {
    throw signal::DataError(signal::DataError::Kind::kMissingFile,
                            "no data root given");
  }
  fs::path root(cfg.data_root);
  if (!fs::exists(root / "train") && fs::exists(root / "UCI HAR Dataset" / "train")) {
    root /= "UCI HAR Dataset";
  }
  return root;
}

signal::DatasetSplit load(const RunConfig& cfg, signal::SplitKind kind) {
  signal::LoadOptions opts;
  opts.acc_source = cfg.acc_source;
  opts.window_length = cfg.model.length;
  return signal::load_ucihar(dataset_root(cfg), kind, opts);
}

void write_report(const metrics::MetricsReport& r, const fs::path& stem) {
  ood::write_report_json(r, stem.string() + ".json");
  ood::write_report_csv(r, stem.string() + ".csv");
}

int cmd_train(const RunConfig& cfg) {
  persist_config(cfg, "train");
  const auto full = load(cfg, signal::SplitKind::kTrain);
  const auto test = load(cfg, signal::SplitKind::kTest);
  const auto [train_split, val_split] =
      signal::stratified_split(full, cfg.train.val_fraction, cfg.seed);
  const fs::path out(cfg.out);
  std::ofstream log(out / "train_log.jsonl");
  auto result = train::train(cfg.model, train_split, val_split, cfg.train,
                             [&](const train::EpochLog& e) {
                               log << train::to_json(e).dump() << '\n' << std::flush;
                               std::cerr << "epoch " << e.epoch << " loss " << e.train_loss
                                         << " val_f1 " << e.val_macro_f1 << '\n';
                             });
  model::save_checkpoint(result.best, out / "checkpoint.json");
  const auto clean = ood::evaluate(result.best, test);
  const auto shifted = ood::evaluate(result.best, test, cfg.ood);
  write_report(clean, out / "test_clean");
  write_report(shifted, out / "test_ood");
  std::cout << "best epoch " << result.best_epoch << ", clean macro-F1 " << clean.macro_f1
            << ", OOD macro-F1 " << shifted.macro_f1 << '\n';
  return kOk;
}

model::Model load_model(const Flags& f) {
  if (f.checkpoint.empty()) throw std::invalid_argument("--checkpoint is required");
  model::Model m = model::load_checkpoint(f.checkpoint);
  if (!f.model.empty() && model::parse_model_kind(f.model) != m.spec().kind) {
    throw model::CheckpointError("checkpoint holds a " + std::string(model::name(m.spec().kind)) +
                                 " model but --model " + f.model + " was requested");
  }
  return m;
}

int cmd_eval(const RunConfig& cfg, const Flags& f) {
  persist_config(cfg, "eval");
  const model::Model m = load_model(f);
  const auto test = load(cfg, signal::SplitKind::kTest);
  const fs::path out(cfg.out);
  const auto clean = ood::evaluate(m, test);
  write_report(clean, out / "eval_clean");
  std::cout << "clean: accuracy " << clean.accuracy << ", macro-F1 " << clean.macro_f1 << '\n';
  if (!f.clean_only) {
    const auto shifted = ood::evaluate(m, test, cfg.ood);
    write_report(shifted, out / "eval_ood");
    std::cout << "ood:   accuracy " << shifted.accuracy << ", macro-F1 " << shifted.macro_f1
              << '\n';
  }
  return kOk;
}

int cmd_sweep(const RunConfig& cfg, const Flags& f) {
  persist_config(cfg, "sweep");
  const auto axis = ood::parse_sweep_axis(f.axis);
  const auto grid = ood::parse_grid(axis, f.grid, cfg.ood.seed);
  const model::Model m = load_model(f);
  const auto test = load(cfg, signal::SplitKind::kTest);
  const auto rows = ood::sweep(m, test, grid);
  const fs::path path = fs::path(cfg.out) / ("sweep_" + std::string(ood::name(axis)) + ".csv");
  ood::write_sweep_csv(rows, path);
  std::cout << rows.size() << " grid points written to " << path.string() << '\n';
  return kOk;
}

int cmd_ablate(const RunConfig& cfg, const Flags& f) {
  persist_config(cfg, "ablate");
  const auto variant = ood::parse_ablation_variant(f.variant);
  const auto full = load(cfg, signal::SplitKind::kTrain);
  const auto test = load(cfg, signal::SplitKind::kTest);
  const auto [train_split, val_split] =
      signal::stratified_split(full, cfg.train.val_fraction, cfg.seed);
  const auto r = ood::run_ablation(variant, train_split, val_split, test, cfg.train, cfg.ood,
                                   cfg.model);
  json j = {{"variant", std::string(ood::name(variant))},
            {"clean", metrics::to_json(r.clean)},
            {"ood", metrics::to_json(r.ood)},
            {"best_epoch", r.training.best_epoch}};
  if (!f.reference.empty()) {
    std::ifstream in(f.reference);
    if (!in) throw std::invalid_argument("cannot read reference report " + f.reference);
    json ref;
    in >> ref;
    const double ref_f1 = ref.contains("ood") ? ref["ood"].at("macro_f1").get<double>()
                                              : ref.at("macro_f1").get<double>();
    j["reference_macro_f1"] = ref_f1;
    j["delta_macro_f1"] = r.ood.macro_f1 - ref_f1;
    std::cout << "delta OOD macro-F1 vs reference: " << r.ood.macro_f1 - ref_f1 << '\n';
  }
  model::save_checkpoint(r.training.best, fs::path(cfg.out) / "checkpoint.json");
  write_json(j, fs::path(cfg.out) / ("ablation_" + std::string(ood::name(variant)) + ".json"));
  std::cout << ood::name(variant) << ": OOD macro-F1 " << r.ood.macro_f1 << '\n';
  return kOk;
}

int cmd_verify(const RunConfig& cfg, const Flags& f) {
  persist_config(cfg, "verify");
  const model::Model m = f.checkpoint.empty() ? model::Model::initialize(cfg.model, cfg.seed)
                                              : model::load_checkpoint(f.checkpoint);
  verify::VerifyConfig vc;
  if (!f.verify_seeds.empty()) vc.seeds = f.verify_seeds;
  vc.trials = f.trials;
  vc.include_controls = !f.no_controls;
  const auto summary = verify::run_all(m, vc);
  verify::print_table(summary, std::cout);
  json j = summary.to_json();
  j["model_seed"] = cfg.seed;
  write_json(j, fs::path(cfg.out) / "verify.json");
  return summary.ok() ? kOk : kVerificationFailed;
}

}  // namespace

json RunConfig::to_json() const {
  return {{"data_root", data_root},
          {"out", out},
          {"seed", seed},
          {"acc_source", acc_source == signal::AccSource::kBody ? "body" : "total"},
          {"model", model::to_json(model)},
          {"train", train::to_json(train)},
          {"ood", ood::to_json(ood)}};
}

RunConfig RunConfig::from_json(const json& j, RunConfig base) {
  base.data_root = j.value("data_root", base.data_root);
  base.out = j.value("out", base.out);
  base.seed = j.value("seed", base.seed);
  if (j.contains("acc_source")) {
    const auto s = j.at("acc_source").get<std::string>();
    if (s != "total" && s != "body") {
      throw std::invalid_argument("config: acc_source must be 'total' or 'body'");
    }
    base.acc_source = s == "body" ? signal::AccSource::kBody : signal::AccSource::kTotal;
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    base.model = m.is_string() ? model::default_spec(model::parse_model_kind(m.get<std::string>()))
                               : model::spec_from_json(m);
  }
  if (j.contains("train")) base.train = train::train_config_from_json(j.at("train"));
  if (j.contains("ood")) base.ood = ood::ood_config_from_json(j.at("ood"));
  return base;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"CatEquiv: category-equivariant HAR models, OOD evaluation and checks"};
  app.require_subcommand(1);
  Flags f;

  Options train_o, eval_o, sweep_o, ablate_o, verify_o;
  auto* train_cmd = app.add_subcommand("train", "Train a model and save the best checkpoint");
  add_common(train_cmd, f, train_o);
  add_model(train_cmd, f, train_o);
  add_train(train_cmd, f, train_o);
  add_ood(train_cmd, f, train_o);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint clean and under OOD");
  add_common(eval_cmd, f, eval_o);
  add_ood(eval_cmd, f, eval_o);
  eval_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--model", f.model, "Expected model kind (checked)");
  eval_cmd->add_flag("--clean-only", f.clean_only, "Skip the OOD evaluation");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one OOD axis");
  add_common(sweep_cmd, f, sweep_o);
  add_ood(sweep_cmd, f, sweep_o);
  sweep_cmd->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required();
  sweep_cmd->add_option("--axis", f.axis, "shift, gain or rotation")
      ->required()
      ->check(CLI::IsMember({"shift", "gain", "rotation"}));
  sweep_cmd->add_option("--grid", f.grid, "a:b:step, a comma list, or lo-hi gain pairs")
      ->required();

  auto* ablate_cmd = app.add_subcommand("ablate", "Train and evaluate one ablation variant");
  add_common(ablate_cmd, f, ablate_o);
  add_train(ablate_cmd, f, ablate_o);
  add_ood(ablate_cmd, f, ablate_o);
  ablate_cmd->add_option("--variant", f.variant,
                         "full, zero-padding, no-rms, untie, no-l2, single-scale, "
                         "no-groupnorm, no-smoothing")
      ->required();
  ablate_cmd->add_option("--reference", f.reference,
                         "Full-model report JSON; adds the OOD macro-F1 difference");

  auto* verify_cmd = app.add_subcommand("verify", "Run the equivariance checks (no data needed)");
  add_common(verify_cmd, f, verify_o);
  verify_cmd->add_option("--checkpoint", f.checkpoint, "Check a trained CatEquiv instead");
  verify_cmd->add_option("--check-seeds", f.verify_seeds, "Seeds of the checks (default 1 2 3)");
  verify_cmd->add_option("--trials", f.trials, "Random trials per check");
  verify_cmd->add_flag("--no-controls", f.no_controls, "Skip the negative controls");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(resolve(f, train_o));
    if (*eval_cmd) return cmd_eval(resolve(f, eval_o), f);
    if (*sweep_cmd) return cmd_sweep(resolve(f, sweep_o), f);
    if (*ablate_cmd) return cmd_ablate(resolve(f, ablate_o), f);
    return cmd_verify(resolve(f, verify_o), f);
  } catch (const signal::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n"
              << "hint: download the UCI HAR Dataset and pass --data-root <dir> (the folder "
                 "holding train/ and test/) or set "
              << kDataRootEnv << ".\n";
    return kDataError;
  } catch (const model::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kDataError;
  } catch (const train::TrainingError& e) {
    std::cerr << "training error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("catequiv");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace catequiv::cli
