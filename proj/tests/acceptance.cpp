// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Acceptance run: one PASS / FAIL / SKIP line per criterion.
// Exit 0 when everything selected passed, 1 on any failure, 77 when
// nothing failed but something could not run (no dataset).

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catequiv/harness.hpp"
#include "catequiv/metrics.hpp"
#include "catequiv/perturbation.hpp"
#include "catequiv/training.hpp"
#include "catequiv/verify.hpp"
#include "support/metric_oracle.hpp"
#include "support/model_gradcheck.hpp"
#include "support/primitive_cases.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace catequiv;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

enum class Outcome { kPass, kFail, kSkip };

struct Line {
  int id;
  Outcome outcome;
  std::string text;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Line criterion_verifier() {
  const auto t0 = Clock::now();
  const model::Model m = model::Model::initialize(model::catequiv_spec(), 1);
  const verify::VerifySummary s = verify::run_all(m);
  const double secs = seconds_since(t0);
  double worst_ratio = 0.0;
  std::size_t controls = 0, controls_failed = 0;
  for (const auto& r : s.results) {
    if (r.expect_pass) {
      worst_ratio = std::max(worst_ratio, r.max_abs_deviation / r.tolerance);
    } else {
      ++controls;
      controls_failed += r.pass ? 0 : 1;
    }
  }
  const bool ok = s.ok() && controls > 0 && secs < 60.0;
  return {1, ok ? Outcome::kPass : Outcome::kFail,
          "verifier, seeds 1 2 3: " + std::to_string(s.results.size()) +
              " checks, worst deviation/tolerance " + fmt(worst_ratio) + ", controls failing " +
              std::to_string(controls_failed) + "/" + std::to_string(controls) + ", " +
              fmt(secs) + " s (< 60 s)"};
}

Line criterion_gradients() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name = "-";
  bool ok = true;
  auto record = [&](const core::GradCheckResult& r, const std::string& what) {
    ok = ok && r.passed(1e-4);
    if (!r.finite || r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      worst_name = what;
    }
  };
  for (int i = 0; i < testing::kPrimitiveCaseCount; ++i) {
    const auto c = testing::primitive_case(i);
    record(core::grad_check(c.f, c.theta), c.name);
  }
  core::Rng rng(5);
  for (auto kind : {model::ModelKind::kCatEquiv, model::ModelKind::kCircCnn,
                    model::ModelKind::kPlainCnn}) {
    const auto spec = testing::tiny_spec(kind);
    const model::Model m = model::Model::initialize(spec, 6);
    const auto x = m.prepare(testing::synthetic_window(1, spec.length, rng));
    for (bool train : {false, true}) {
      record(testing::model_grad_check(m, x, 1, train),
             std::string(model::name(kind)) + (train ? " train" : " eval"));
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 60.0;
  return {2, ok ? Outcome::kPass : Outcome::kFail,
          "gradient checks, " + std::to_string(testing::kPrimitiveCaseCount) +
              " primitives + 3 tiny models: worst relative error " + fmt(worst) + " (" +
              worst_name + ", tol 1e-4), " + fmt(secs) + " s"};
}

signal::DatasetSplit shifted(const signal::DatasetSplit& d, long tau) {
  signal::DatasetSplit out = d;
  for (auto& w : out.windows) w = ood::apply_shift(w, tau);
  return out;
}

Line criterion_exact_invariance(const std::optional<signal::DatasetSplit>& real_test) {
  // A few epochs on synthetic windows so that predictions spread over
  // several classes; a constant predictor would pass trivially.
  train::TrainConfig cfg;
  cfg.max_epochs = 8;
  cfg.batch_size = 8;
  cfg.lr = 1e-2;
  cfg.dropout = 0.0;
  cfg.augment = false;
  const auto fit = testing::synthetic_split(8, signal::kWindowLength, 3);
  const model::Model m = train::train(model::catequiv_spec(), fit, fit, cfg).best;
  const auto synthetic = testing::synthetic_split(5, signal::kWindowLength, 4,
                                                  signal::SplitKind::kTest);
  const auto clean = ood::evaluate(m, synthetic);
  std::size_t predicted_classes = 0;
  for (std::size_t c = 0; c < clean.num_classes; ++c) {
    std::size_t col = 0;
    for (const auto& row : clean.confusion) col += row[c];
    predicted_classes += col > 0 ? 1 : 0;
  }
  double worst_shift = 0.0;
  for (long tau = -18; tau <= 18; ++tau) {
    worst_shift = std::max(
        worst_shift, std::abs(ood::evaluate(m, shifted(synthetic, tau)).macro_f1 - clean.macro_f1));
  }
  const signal::DatasetSplit& test = real_test ? *real_test : synthetic;
  const auto base = real_test ? ood::evaluate(m, test) : clean;
  worst_shift = std::max(
      worst_shift, std::abs(ood::evaluate(m, test, ood::shift_only(18, 9)).macro_f1 - base.macro_f1));
  const double rot = std::abs(ood::evaluate(m, test, ood::rotation_only(10)).macro_f1 - base.macro_f1);
  const bool ok = worst_shift <= 1e-12 && rot < 0.005 && predicted_classes > 1;
  return {3, ok ? Outcome::kPass : Outcome::kFail,
          std::string("exact invariance (") + (real_test ? "real" : "synthetic") +
              " test set, CatEquiv predicting " + std::to_string(predicted_classes) +
              " classes, clean F1 " + fmt(base.macro_f1) +
              "): max |dF1| over shifts -18..18 and random shift " +
              fmt(worst_shift) + " (<= 1e-12), rotation |dF1| " + fmt(rot) + " (< 0.005)"};
}

Line criterion_haar() {
  core::Rng rng(7);
  const int n = 20000;
  ood::Matrix3 mean{};
  double worst_orth = 0.0, worst_det = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto r = ood::sample_rotation(rng);
    worst_orth = std::max(worst_orth, ood::orthogonality_error(r));
    worst_det = std::max(worst_det, std::abs(ood::determinant(r) - 1.0));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) mean[a][b] += r[a][b] / n;
  }
  double worst_mean = 0.0;
  for (const auto& row : mean)
    for (double v : row) worst_mean = std::max(worst_mean, std::abs(v));
  const bool ok = worst_mean < 0.02 && worst_orth < 1e-12 && worst_det < 1e-12;
  return {7, ok ? Outcome::kPass : Outcome::kFail,
          "Haar sampler, 20000 draws: max |mean entry| " + fmt(worst_mean) +
              " (< 0.02), orthogonality " + fmt(worst_orth) + ", |det - 1| " + fmt(worst_det) +
              " (< 1e-12)"};
}

Line criterion_metric_oracle() {
  core::Rng rng(8);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 400));
    std::vector<std::size_t> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<std::size_t>(rng.uniform_int(0, 5));
      p[i] = rng.bernoulli(0.6) ? y[i] : static_cast<std::size_t>(rng.uniform_int(0, 5));
    }
    const auto report = metrics::compute_metrics(y, p, 6);
    if (!testing::matches_exactly(report, testing::oracle_metrics(y, p, 6))) ++mismatches;
  }
  return {8, mismatches == 0 ? Outcome::kPass : Outcome::kFail,
          "metrics vs brute-force oracle, 1000 random sets: " + std::to_string(mismatches) +
              " mismatches (exact)"};
}

struct DatasetRuns {
  // [seed][model] OOD reports for CatEquiv, CircCNN, PlainCNN
  std::vector<std::array<metrics::MetricsReport, 3>> main;
  // [seed] OOD macro-F1 deltas of no-l2 and zero-padding vs full CatEquiv
  std::vector<std::array<double, 2>> ablation_delta;
};

DatasetRuns run_dataset(const fs::path& root, const std::vector<std::uint64_t>& seeds,
                        std::size_t max_epochs, bool want_ablations) {
  const auto full_train = signal::load_ucihar(root, signal::SplitKind::kTrain);
  const auto test = signal::load_ucihar(root, signal::SplitKind::kTest);
  DatasetRuns out;
  for (std::uint64_t seed : seeds) {
    train::TrainConfig cfg;
    cfg.seed = seed;
    cfg.max_epochs = max_epochs;
    cfg.augmentation.seed = seed;
    auto [tr, val] = signal::stratified_split(full_train, cfg.val_fraction, seed);
    ood::OodConfig ood_cfg;
    ood_cfg.seed = seed;
    std::array<metrics::MetricsReport, 3> reports;
    const model::ModelKind kinds[] = {model::ModelKind::kCatEquiv, model::ModelKind::kCircCnn,
                                      model::ModelKind::kPlainCnn};
    for (int k = 0; k < 3; ++k) {
      std::cerr << "training " << model::name(kinds[k]) << " seed " << seed << '\n';
      const auto r = train::train(model::default_spec(kinds[k]), tr, val, cfg);
      reports[k] = ood::evaluate(r.best, test, ood_cfg);
    }
    out.main.push_back(reports);
    if (want_ablations) {
      std::array<double, 2> d{};
      const ood::AblationVariant vs[] = {ood::AblationVariant::kNoL2,
                                         ood::AblationVariant::kZeroPadding};
      for (int v = 0; v < 2; ++v) {
        std::cerr << "ablation " << ood::name(vs[v]) << " seed " << seed << '\n';
        const auto a = ood::run_ablation(vs[v], tr, val, test, cfg, ood_cfg);
        d[v] = a.ood.macro_f1 - reports[0].macro_f1;
      }
      out.ablation_delta.push_back(d);
    }
  }
  return out;
}

std::vector<Line> criteria_dataset(const DatasetRuns& runs, const std::vector<int>& wanted) {
  std::vector<Line> lines;
  const double n = static_cast<double>(runs.main.size());
  auto has = [&](int id) { return std::find(wanted.begin(), wanted.end(), id) != wanted.end(); };
  if (has(4)) {
    std::array<double, 3> mean{};
    bool ordered = true;
    for (const auto& r : runs.main) {
      for (int k = 0; k < 3; ++k) mean[k] += r[k].macro_f1 / n;
      ordered = ordered && r[0].macro_f1 > r[1].macro_f1 && r[1].macro_f1 > r[2].macro_f1;
    }
    const bool ok = mean[0] >= 0.60 && mean[1] >= 0.25 && mean[1] <= 0.60 && mean[2] <= 0.30 &&
                    ordered;
    lines.push_back({4, ok ? Outcome::kPass : Outcome::kFail,
                     "OOD macro-F1 means: CatEquiv " + fmt(mean[0]) + " (>= 0.60), CircCNN " +
                         fmt(mean[1]) + " (in [0.25, 0.60]), PlainCNN " + fmt(mean[2]) +
                         " (<= 0.30), strict per-seed ordering " + (ordered ? "yes" : "no")});
  }
  if (has(5)) {
    double gap = 0.0;
    for (const auto& r : runs.main) {
      const auto& c = r[0].per_class;
      gap += ((c[0].f1 + c[1].f1 + c[2].f1) - (c[3].f1 + c[4].f1 + c[5].f1)) / 3.0 / n;
    }
    lines.push_back({5, gap >= 0.15 ? Outcome::kPass : Outcome::kFail,
                     "CatEquiv OOD F1 gap, locomotion minus posture: " + fmt(gap) + " (>= 0.15)"});
  }
  if (has(6)) {
    int neg_l2 = 0, neg_pad = 0;
    std::string deltas;
    for (const auto& d : runs.ablation_delta) {
      neg_l2 += d[0] < 0.0 ? 1 : 0;
      neg_pad += d[1] < 0.0 ? 1 : 0;
      deltas += " (" + fmt(d[0]) + ", " + fmt(d[1]) + ")";
    }
    const bool ok = neg_l2 >= 2 && neg_pad >= 2;
    lines.push_back({6, ok ? Outcome::kPass : Outcome::kFail,
                     "ablation deltas (no-l2, zero-padding) per seed:" + deltas +
                         "; negative in " + std::to_string(neg_l2) + " and " +
                         std::to_string(neg_pad) + " seeds (need >= 2 of 3)"});
  }
  return lines;
}

std::optional<fs::path> resolve_root(std::string root) {
  if (root.empty()) {
    if (const char* env = std::getenv("CATEQUIV_DATA_ROOT")) root = env;
  }
  if (root.empty()) return std::nullopt;
  fs::path p(root);
  if (fs::exists(p / "UCI HAR Dataset")) p /= "UCI HAR Dataset";
  if (!fs::exists(p / "train") || !fs::exists(p / "test")) return std::nullopt;
  return p;
}

const char* label(Outcome o) {
  switch (o) {
    case Outcome::kPass: return "PASS";
    case Outcome::kFail: return "FAIL";
    case Outcome::kSkip: return "SKIP";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catequiv acceptance run"};
  std::vector<int> only = {1, 2, 3, 4, 5, 6, 7, 8};
  std::string data_root;
  std::size_t max_epochs = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  app.add_option("--data-root", data_root, "UCI HAR root (else CATEQUIV_DATA_ROOT)");
  app.add_option("--max-epochs", max_epochs, "Epoch cap for the dataset criteria");
  app.add_option("--seeds", seeds, "Training seeds for the dataset criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  std::sort(only.begin(), only.end());

  const auto root = resolve_root(data_root);
  std::optional<signal::DatasetSplit> real_test;
  std::vector<Line> lines;
  auto want = [&](int id) { return std::binary_search(only.begin(), only.end(), id); };
  try {
    if (root && want(3)) real_test = signal::load_ucihar(*root, signal::SplitKind::kTest);
    if (want(1)) lines.push_back(criterion_verifier());
    if (want(2)) lines.push_back(criterion_gradients());
    if (want(3)) lines.push_back(criterion_exact_invariance(real_test));
    if (want(4) || want(5) || want(6)) {
      if (root) {
        const auto runs = run_dataset(*root, seeds, max_epochs, want(6));
        for (auto& l : criteria_dataset(runs, only)) lines.push_back(std::move(l));
      } else {
        for (int id : {4, 5, 6}) {
          if (want(id)) {
            lines.push_back({id, Outcome::kSkip,
                             "needs the UCI HAR dataset (--data-root or CATEQUIV_DATA_ROOT); "
                             "not run"});
          }
        }
      }
    }
    if (want(7)) lines.push_back(criterion_haar());
    if (want(8)) lines.push_back(criterion_metric_oracle());
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << '\n';
    return 1;
  }

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  bool failed = false, skipped = false;
  for (const auto& l : lines) {
    std::cout << "criterion " << l.id << ' ' << label(l.outcome) << "  " << l.text << '\n';
    failed = failed || l.outcome == Outcome::kFail;
    skipped = skipped || l.outcome == Outcome::kSkip;
  }
  std::cout.flush();
  if (failed) return 1;
  return skipped ? 77 : 0;
}
