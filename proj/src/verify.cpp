// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/verify.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "catequiv/ops.hpp"
#include "catequiv/perturbation.hpp"
#include "catequiv/symmetry.hpp"

namespace catequiv::verify {
namespace {

using core::Rng;
using core::Tensor;
using signal::Window;
using symmetry::PosetObject;

struct Deviation {
  double abs = 0.0;
  double rel = 0.0;

  void add(const Tensor& got, const Tensor& want) {
    if (got.shape() != want.shape()) {
      throw core::ShapeError("verify: comparing " + core::to_string(got.shape()) + " with " +
                             core::to_string(want.shape()));
    }
    double scale = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      scale = std::max(scale, std::abs(want[i]));
      worst = std::max(worst, std::abs(got[i] - want[i]));
    }
    add(worst, scale);
  }

  void add(double diff, double scale) {
    abs = std::max(abs, diff);
    rel = std::max(rel, diff / std::max(scale, DBL_MIN));
  }
};

CheckResult finish(std::string name, std::size_t trials, const Deviation& d, double tol,
                   std::uint64_t seed, bool expect_pass = true, std::string detail = {}) {
  CheckResult r;
  r.name = std::move(name);
  r.trials = trials;
  r.max_abs_deviation = d.abs;
  r.max_rel_deviation = d.rel;
  r.tolerance = tol;
  r.pass = d.abs <= tol;
  r.expect_pass = expect_pass;
  r.seed = seed;
  r.detail = std::move(detail);
  return r;
}

Tensor random_tensor(core::Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = scale * rng.normal();
  return t;
}

// Raw window with per-sensor scales well above the RMS floor.
Window random_window(std::size_t length, Rng& rng) {
  Window w;
  w.label = 1;
  w.values = Tensor({signal::kRawChannels, length});
  const double acc_scale = rng.uniform(0.5, 2.0);
  const double gyr_scale = rng.uniform(0.5, 2.0);
  for (std::size_t c = 0; c < signal::kRawChannels; ++c) {
    const double s = c < 3 ? acc_scale : gyr_scale;
    for (std::size_t t = 0; t < length; ++t) w.values[c * length + t] = s * rng.normal();
  }
  return w;
}

std::vector<std::size_t> axes_of(PosetObject s) {
  switch (s) {
    case PosetObject::kAcc: return {0, 1, 2};
    case PosetObject::kGyr: return {3, 4, 5};
    case PosetObject::kTotal: return {0, 1, 2, 3, 4, 5};
    default: return {static_cast<std::size_t>(s)};
  }
}

void require_catequiv(const Model& model, const char* check) {
  if (model.spec().kind != model::ModelKind::kCatEquiv) {
    throw std::invalid_argument(std::string(check) + ": needs a CatEquiv model");
  }
}

Tensor descriptor(const Model& model, const Window& w) {
  return model.descriptor_value(model.prepare(w));
}

// Dense per-time channel map: out[:, t] = M x[:, t].
Tensor channel_map(const std::vector<std::vector<double>>& m, const Tensor& x) {
  const std::size_t rows = m.size();
  const std::size_t cols = x.dim(0);
  const std::size_t length = x.dim(1);
  Tensor out({rows, length}, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t t = 0; t < length; ++t) out[i * length + t] += m[i][j] * x[j * length + t];
  return out;
}

std::vector<std::vector<double>> block_diag(const std::vector<std::vector<double>>& a,
                                            const std::vector<std::vector<double>>& b) {
  std::vector<std::vector<double>> m(6, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      m[i][j] = a[i][j];
      m[3 + i][3 + j] = b[i][j];
    }
  return m;
}

std::vector<std::vector<double>> random_square(std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (auto& row : m)
    for (double& v : row) v = rng.normal();
  return m;
}

// Places `x` as block `block` of `blocks` equal row blocks.
Tensor embed(const Tensor& x, std::size_t block, std::size_t blocks) {
  Tensor out({blocks * x.dim(0), x.dim(1)}, 0.0);
  std::copy(x.data().begin(), x.data().end(),
            out.data().begin() + static_cast<std::ptrdiff_t>(block * x.size()));
  return out;
}

}  // namespace

nlohmann::json to_json(const CheckResult& r) {
  return {{"name", r.name},
          {"trials", r.trials},
          {"max_abs_deviation", r.max_abs_deviation},
          {"max_rel_deviation", r.max_rel_deviation},
          {"tolerance", r.tolerance},
          {"pass", r.pass},
          {"expect_pass", r.expect_pass},
          {"ok", r.ok()},
          {"seed", r.seed},
          {"detail", r.detail}};
}

CheckResult check_core_naturality(const Model& model, std::size_t trials, std::uint64_t seed) {
  require_catequiv(model, "check_core_naturality");
  Rng rng(seed);
  const std::size_t length = model.spec().length;
  const std::size_t features = std::accumulate(model.spec().stage2_channels.begin(),
                                               model.spec().stage2_channels.end(),
                                               std::size_t{0});
  const auto arrows = symmetry::all_arrows();
  const std::size_t n = std::max(trials, arrows.size());
  Deviation dev;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [s, t] = i < arrows.size()
                            ? arrows[i]
                            : arrows[static_cast<std::size_t>(
                                  rng.uniform_int(0, static_cast<std::int64_t>(arrows.size()) - 1))];
    symmetry::Morphism g;
    g.source = s;
    g.target = t;
    g.tau = rng.uniform_int(0, static_cast<std::int64_t>(length) - 1);
    g.gain = {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
    const auto src_axes = axes_of(s);
    const auto dst_axes = axes_of(t);
    const Tensor x = random_tensor({src_axes.size(), length}, rng);

    const Tensor lhs = model.linear_core(symmetry::apply_morphism(x, g, 1), dst_axes);
    const Tensor rhs = symmetry::apply_morphism(model.linear_core(x, src_axes), g, features);
    dev.add(lhs, rhs);
  }
  return finish("core_naturality", n, dev, kNaturalityTol, seed, true,
                "all " + std::to_string(arrows.size()) + " arrows covered");
}

CheckResult check_poset_naturality_equivalence(const Model& model, std::uint64_t seed) {
  require_catequiv(model, "check_poset_naturality_equivalence");
  Rng rng(seed);
  const std::size_t length = model.spec().length;
  Deviation dev;
  std::size_t trials = 0;

  // Random dense per-sensor maps, TOTAL = diag(ACC, GYR).
  for (int rep = 0; rep < 4; ++rep) {
    const auto m_acc = random_square(3, rng);
    const auto m_gyr = random_square(3, rng);
    const auto m_total = block_diag(m_acc, m_gyr);
    for (PosetObject s : {PosetObject::kAcc, PosetObject::kGyr}) {
      const Tensor x = random_tensor({3, length}, rng);
      const auto& m_s = s == PosetObject::kAcc ? m_acc : m_gyr;
      const Tensor lhs = channel_map(m_total, symmetry::inject(x, s, PosetObject::kTotal));
      const Tensor rhs = symmetry::inject(channel_map(m_s, x), s, PosetObject::kTotal);
      dev.add(lhs, rhs);
      ++trials;
    }
  }

  // The shipped Stage-2 branches: the TOTAL-level grouped conv restricted
  // to one injected sensor block equals the per-sensor conv.
  const std::size_t f = model.spec().sensor_features();
  core::Tape tape(false);
  const model::Bindings b = model.bind(tape, false);
  for (std::size_t branch = 0; branch < model.spec().stage2_channels.size(); ++branch) {
    for (std::size_t block = 0; block < 2; ++block) {
      const Tensor h = random_tensor({f, length}, rng);
      const Tensor lhs =
          model.stage2(b, branch, tape.constant(embed(h, block, 2)), 2, true).value();
      const Tensor rhs =
          embed(model.stage2(b, branch, tape.constant(h), 1, true).value(), block, 2);
      dev.add(lhs, rhs);
      ++trials;
    }
  }
  return finish("poset_naturality_equivalence", trials, dev, kPosetTol, seed);
}

CheckResult check_offdiagonal_control(std::uint64_t seed, double scale) {
  Rng rng(seed);
  const std::size_t length = 8;
  auto m_total = block_diag(random_square(3, rng), random_square(3, rng));
  for (std::size_t i = 0; i < 3; ++i) m_total[3 + i][i] += scale;  // GYR <- ACC leakage
  std::vector<std::vector<double>> m_acc(3, std::vector<double>(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m_acc[i][j] = m_total[i][j];
  Deviation dev;
  for (std::size_t axis = 0; axis < 3; ++axis) {
    Tensor e({3, length}, 0.0);
    e[axis * length] = 1.0;
    const Tensor lhs = channel_map(m_total, symmetry::inject(e, PosetObject::kAcc, PosetObject::kTotal));
    const Tensor rhs = symmetry::inject(channel_map(m_acc, e), PosetObject::kAcc, PosetObject::kTotal);
    dev.add(lhs, rhs);
  }
  std::ostringstream detail;
  detail << "off-diagonal block " << scale << " * I on unit inputs";
  return finish("offdiagonal_control", 3, dev, kOffDiagonalControlTol, seed, false, detail.str());
}

CheckResult check_readout_invariance(const Model& model, std::size_t trials, std::uint64_t seed) {
  require_catequiv(model, "check_readout_invariance");
  Rng rng(seed);
  const ModelSpec& spec = model.spec();
  const std::size_t length = spec.length;
  Deviation dev;
  std::size_t count = 0;
  const std::size_t n = std::max<std::size_t>(trials, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const Window w = random_window(length, rng);
    const Tensor z = descriptor(model, w);

    // SO(3) and a reflection built from the same draw.
    const ood::Matrix3 r = ood::sample_rotation(rng);
    ood::Matrix3 reflect = r;
    for (auto& row : reflect) row[2] = -row[2];
    for (const auto& m : {r, reflect}) {
      dev.add(descriptor(model, ood::apply_rotation(w, m)), z);
      ++count;
    }

    // Every shift on the first input, one random shift on the others.
    if (i == 0) {
      for (std::size_t tau = 0; tau < length; ++tau) {
        dev.add(descriptor(model, ood::apply_shift(w, static_cast<long>(tau))), z);
        ++count;
      }
    } else {
      const long tau = rng.uniform_int(0, static_cast<std::int64_t>(length) - 1);
      dev.add(descriptor(model, ood::apply_shift(w, tau)), z);
      ++count;
    }

    if (spec.gain_processing) {
      const symmetry::Gain g{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)};
      Tensor want = z;
      want[z.size() - 2] += std::log(g.acc);
      want[z.size() - 1] += std::log(g.gyr);
      dev.add(descriptor(model, ood::apply_gain(w, g)), want);
      ++count;
    }
  }
  return finish("readout_invariance", count, dev, kReadoutTol, seed, true,
                "rotations, reflections, all shifts, per-sensor gains");
}

CheckResult check_gn_shift_commutation(std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t channels = 64;
  const std::size_t length = signal::kWindowLength;
  const Tensor x = random_tensor({channels, length}, rng, 3.0);
  const Tensor gamma = random_tensor({channels}, rng);
  const Tensor beta = random_tensor({channels}, rng);

  auto gn = [&](const Tensor& in) {
    core::Tape tape(false);
    return core::ops::group_norm(tape.constant(in), 2, tape.constant(gamma),
                                 tape.constant(beta), 1e-5)
        .value();
  };
  std::vector<long> taus = {0, 1, static_cast<long>(length) - 1};
  for (std::size_t i = 0; i < trials; ++i) {
    taus.push_back(rng.uniform_int(0, static_cast<std::int64_t>(length) - 1));
  }
  const Tensor base = gn(x);
  Deviation dev;
  for (long tau : taus) {
    dev.add(gn(core::ops::shift_time(x, tau)), core::ops::shift_time(base, tau));
  }
  return finish("gn_shift_commutation", taus.size(), dev, kGroupNormTol, seed);
}

CheckResult check_norm_floor_equality(std::size_t trials, std::uint64_t seed, double epsilon) {
  Rng rng(seed);
  const std::size_t length = signal::kWindowLength;
  // (sqrt(R) / eps, lambda) pairs: floor inactive, active on one side, on both.
  std::vector<std::pair<double, double>> cases = {
      {10.0, 2.0}, {10.0, 1.0}, {0.5, 4.0}, {0.5, 1.0}, {0.25, 2.0},
      {4.0, 0.1},  {0.3, 0.5},  {1.0, 1.0}, {2.0, 0.5}};
  for (std::size_t i = 0; i < trials; ++i) {
    cases.emplace_back(std::exp(rng.uniform(-3.0, 3.0)), std::exp(rng.uniform(-3.0, 3.0)));
  }
  Deviation dev;
  for (const auto& [ratio, lambda] : cases) {
    Tensor x = random_tensor({3, length}, rng);
    const double rms = std::sqrt(signal::compute_rms(x, epsilon).energy);
    for (double& v : x.data()) v *= ratio * epsilon / rms;
    Tensor lx = x;
    for (double& v : lx.data()) v *= lambda;

    const Tensor a = signal::normalize_sensor(lx, epsilon);
    const Tensor b = signal::normalize_sensor(x, epsilon);
    double lhs_sq = 0.0;
    double x_sq = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      lhs_sq += (a[k] - b[k]) * (a[k] - b[k]);
      x_sq += x[k] * x[k];
    }
    const double root_r = std::sqrt(signal::compute_rms(x, epsilon).energy);
    const double rhs = std::abs(lambda / std::max(epsilon, lambda * root_r) -
                                1.0 / std::max(epsilon, root_r)) *
                       std::sqrt(x_sq);
    dev.add(std::abs(std::sqrt(lhs_sq) - rhs), std::abs(rhs));
  }
  return finish("norm_floor_equality", cases.size(), dev, kNormFloorTol, seed);
}

CheckResult check_untied_control(const ModelSpec& spec, std::uint64_t seed) {
  ModelSpec untied = spec;
  untied.kind = model::ModelKind::kCatEquiv;
  untied.tie_axes = false;
  const Model model = Model::initialize(untied, Rng::derive(seed, 77).next_u64());
  Rng rng(seed);
  Deviation dev;
  const std::size_t n = 3;
  for (std::size_t i = 0; i < n; ++i) {
    const Window w = random_window(untied.length, rng);
    dev.add(descriptor(model, ood::apply_rotation(w, ood::sample_rotation(rng))),
            descriptor(model, w));
  }
  return finish("untied_stage1_control", n, dev, kUntiedControlTol, seed, false,
                "rotations on a model with one Stage-1 bank per axis");
}

bool VerifySummary::ok() const {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.ok(); });
}

nlohmann::json VerifySummary::to_json() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) checks.push_back(verify::to_json(r));
  return {{"ok", ok()}, {"checks", checks}};
}

VerifySummary run_all(const Model& model, const VerifyConfig& cfg) {
  require_catequiv(model, "run_all");
  VerifySummary s;
  for (std::uint64_t seed : cfg.seeds) {
    s.results.push_back(check_core_naturality(model, cfg.trials, seed));
    s.results.push_back(check_poset_naturality_equivalence(model, seed));
    s.results.push_back(check_readout_invariance(model, cfg.trials, seed));
    s.results.push_back(check_gn_shift_commutation(cfg.trials, seed));
    s.results.push_back(check_norm_floor_equality(cfg.trials, seed, model.spec().rms_epsilon));
    if (cfg.include_controls) {
      s.results.push_back(check_offdiagonal_control(seed));
      s.results.push_back(check_untied_control(model.spec(), seed));
    }
  }
  return s;
}

void print_table(const VerifySummary& summary, std::ostream& os) {
  const auto flags = os.flags();
  os << std::left << std::setw(30) << "check" << std::setw(6) << "seed" << std::setw(8)
     << "trials" << std::setw(13) << "max_abs" << std::setw(13) << "tolerance" << std::setw(10)
     << "expected" << "result\n";
  for (const auto& r : summary.results) {
    os << std::left << std::setw(30) << r.name << std::setw(6) << r.seed << std::setw(8)
       << r.trials << std::setw(13) << std::setprecision(3) << std::scientific
       << r.max_abs_deviation << std::setw(13) << r.tolerance << std::setw(10)
       << (r.expect_pass ? "pass" : "fail") << (r.ok() ? "OK" : "UNEXPECTED") << '\n';
    os.flags(flags);
  }
  os << (summary.ok() ? "all checks behaved as expected\n" : "verification FAILED\n");
}

}  // namespace catequiv::verify
