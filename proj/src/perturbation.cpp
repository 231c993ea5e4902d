// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/perturbation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "catequiv/ops.hpp"

namespace catequiv::ood {

Matrix3 identity3() {
  Matrix3 m{};
  for (int i = 0; i < 3; ++i) m[i][i] = 1.0;
  return m;
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Matrix3 transpose(const Matrix3& a) {
  Matrix3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

double determinant(const Matrix3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

double orthogonality_error(const Matrix3& r) {
  const Matrix3 g = multiply(transpose(r), r);
  double worst = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(g[i][j] - (i == j ? 1.0 : 0.0)));
  return worst;
}

Matrix3 sample_rotation(Rng& rng) {
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(a);
  Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < 3; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = q(i, j);
  return out;
}

Matrix3 axis_angle(const std::array<double, 3>& axis, double radians) {
  const Eigen::Vector3d v(axis[0], axis[1], axis[2]);
  if (!(v.norm() > 0.0)) throw std::invalid_argument("axis_angle: zero axis");
  const Eigen::Matrix3d m = Eigen::AngleAxisd(radians, v.normalized()).toRotationMatrix();
  Matrix3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m(i, j);
  return out;
}

void OodConfig::validate(std::size_t length) const {
  if (shift_range < 0 || static_cast<std::size_t>(shift_range) >= length) {
    throw std::invalid_argument("OodConfig: shift_range must lie in [0, " +
                                std::to_string(length) + ")");
  }
  if (!(gain_lo > 0.0) || !(gain_lo <= gain_hi) || !std::isfinite(gain_hi)) {
    throw std::invalid_argument("OodConfig: need 0 < gain_lo <= gain_hi");
  }
  if (rotation_angle_deg && !std::isfinite(*rotation_angle_deg)) {
    throw std::invalid_argument("OodConfig: rotation angle must be finite");
  }
}

OodConfig shift_only(long range, std::uint64_t seed) {
  OodConfig c;
  c.shift_range = range;
  c.gain_lo = c.gain_hi = 1.0;
  c.rotate = false;
  c.seed = seed;
  return c;
}

OodConfig gain_only(double lo, double hi, std::uint64_t seed) {
  OodConfig c;
  c.shift_range = 0;
  c.gain_lo = lo;
  c.gain_hi = hi;
  c.rotate = false;
  c.seed = seed;
  return c;
}

OodConfig rotation_only(std::uint64_t seed) {
  OodConfig c;
  c.shift_range = 0;
  c.gain_lo = c.gain_hi = 1.0;
  c.seed = seed;
  return c;
}

Perturbation sample_perturbation(const OodConfig& cfg, Rng& rng) {
  const std::uint64_t base = rng.next_u64();
  Rng shift_rng(Rng::derive(base, 0));
  Rng gain_rng(Rng::derive(base, 1));
  Rng rot_rng(Rng::derive(base, 2));

  Perturbation p;
  p.shift = shift_rng.uniform_int(-cfg.shift_range, cfg.shift_range);
  const double g_acc = gain_rng.uniform(cfg.gain_lo, cfg.gain_hi);
  const double g_gyr = gain_rng.uniform(cfg.gain_lo, cfg.gain_hi);
  // A degenerate interval yields its end point exactly.
  p.gain = cfg.gain_lo == cfg.gain_hi ? Gain{cfg.gain_lo, cfg.gain_lo} : Gain{g_acc, g_gyr};
  if (cfg.rotate) {
    if (cfg.rotation_angle_deg) {
      const std::array<double, 3> axis{rot_rng.normal(), rot_rng.normal(), rot_rng.normal()};
      p.rotation = axis_angle(axis, *cfg.rotation_angle_deg * std::numbers::pi / 180.0);
    } else {
      p.rotation = sample_rotation(rot_rng);
    }
  }
  return p;
}

Window apply_shift(const Window& w, long shift) {
  Window out = w;
  out.values = core::ops::shift_time(w.values, shift);
  return out;
}

Window apply_gain(const Window& w, Gain gain) {
  if (!(gain.acc > 0.0) || !(gain.gyr > 0.0)) {
    throw std::invalid_argument("apply_gain: gains must be positive");
  }
  Window out = w;
  const std::size_t length = w.length();
  for (std::size_t c = 0; c < signal::kRawChannels; ++c) {
    const double g = c < 3 ? gain.acc : gain.gyr;
    for (std::size_t t = 0; t < length; ++t) out.values[c * length + t] *= g;
  }
  return out;
}

Window apply_rotation(const Window& w, const Matrix3& r) {
  Window out = w;
  const std::size_t length = w.length();
  for (std::size_t block = 0; block < 2; ++block) {
    const std::size_t row0 = 3 * block;
    for (std::size_t t = 0; t < length; ++t) {
      for (std::size_t i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < 3; ++j) acc += r[i][j] * w.values[(row0 + j) * length + t];
        out.values[(row0 + i) * length + t] = acc;
      }
    }
  }
  return out;
}

Window apply_perturbation(const Window& w, const Perturbation& p) {
  return apply_rotation(apply_gain(apply_shift(w, p.shift), p.gain), p.rotation);
}

Window perturb(const Window& w, const OodConfig& cfg, Rng& rng) {
  return apply_perturbation(w, sample_perturbation(cfg, rng));
}

DatasetSplit make_ood_split(const DatasetSplit& data, const OodConfig& cfg) {
  if (!data.empty()) cfg.validate(data.windows.front().length());
  DatasetSplit out;
  out.split = data.split;
  out.windows.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    Rng rng(Rng::derive(cfg.seed, i));
    out.windows.push_back(perturb(data.windows[i], cfg, rng));
  }
  return out;
}

nlohmann::json to_json(const OodConfig& cfg) {
  nlohmann::json j = {{"shift_range", cfg.shift_range},
                      {"gain_lo", cfg.gain_lo},
                      {"gain_hi", cfg.gain_hi},
                      {"rotate", cfg.rotate},
                      {"seed", cfg.seed}};
  j["rotation_angle_deg"] = cfg.rotation_angle_deg ? nlohmann::json(*cfg.rotation_angle_deg)
                                                   : nlohmann::json(nullptr);
  return j;
}

OodConfig ood_config_from_json(const nlohmann::json& j) {
  OodConfig c;
  c.shift_range = j.value("shift_range", c.shift_range);
  c.gain_lo = j.value("gain_lo", c.gain_lo);
  c.gain_hi = j.value("gain_hi", c.gain_hi);
  c.rotate = j.value("rotate", c.rotate);
  c.seed = j.value("seed", c.seed);
  if (j.contains("rotation_angle_deg") && !j.at("rotation_angle_deg").is_null()) {
    c.rotation_angle_deg = j.at("rotation_angle_deg").get<double>();
  }
  return c;
}

}  // namespace catequiv::ood
