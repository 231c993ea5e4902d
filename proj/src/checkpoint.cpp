// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#include "catequiv/checkpoint.hpp"

#include <fstream>

namespace catequiv::model {
namespace {

using nlohmann::json;
using core::ops::Padding;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json to_json(const ModelSpec& s) {
  return {{"kind", std::string(name(s.kind))},
          {"num_classes", s.num_classes},
          {"length", s.length},
          {"dropout", s.dropout},
          {"rms_epsilon", s.rms_epsilon},
          {"stage1_channels", s.stage1_channels},
          {"stage1_kernel", s.stage1_kernel},
          {"stage2_channels", s.stage2_channels},
          {"stage2_kernels", s.stage2_kernels},
          {"stage2_dilations", s.stage2_dilations},
          {"box_kernel", s.box_kernel},
          {"group_norm_eps", s.group_norm_eps},
          {"padding", s.padding == Padding::kCircular ? "circular" : "zero"},
          {"gain_processing", s.gain_processing},
          {"tie_axes", s.tie_axes},
          {"l2_over_axes", s.l2_over_axes},
          {"group_norm", s.group_norm},
          {"smoothing", s.smoothing},
          {"baseline_channels", s.baseline_channels},
          {"baseline_kernel1", s.baseline_kernel1},
          {"baseline_kernel2", s.baseline_kernel2},
          {"baseline_raw_input", s.baseline_raw_input}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s = default_spec(parse_model_kind(j.value("kind", std::string("catequiv"))));
  read_opt(j, "num_classes", s.num_classes);
  read_opt(j, "length", s.length);
  read_opt(j, "dropout", s.dropout);
  read_opt(j, "rms_epsilon", s.rms_epsilon);
  read_opt(j, "stage1_channels", s.stage1_channels);
  read_opt(j, "stage1_kernel", s.stage1_kernel);
  read_opt(j, "stage2_channels", s.stage2_channels);
  read_opt(j, "stage2_kernels", s.stage2_kernels);
  read_opt(j, "stage2_dilations", s.stage2_dilations);
  read_opt(j, "box_kernel", s.box_kernel);
  read_opt(j, "group_norm_eps", s.group_norm_eps);
  if (j.contains("padding")) {
    const auto p = j.at("padding").get<std::string>();
    if (p == "circular") {
      s.padding = Padding::kCircular;
    } else if (p == "zero") {
      s.padding = Padding::kZero;
    } else {
      throw std::invalid_argument("spec: padding must be 'circular' or 'zero', got '" + p + "'");
    }
  }
  read_opt(j, "gain_processing", s.gain_processing);
  read_opt(j, "tie_axes", s.tie_axes);
  read_opt(j, "l2_over_axes", s.l2_over_axes);
  read_opt(j, "group_norm", s.group_norm);
  read_opt(j, "smoothing", s.smoothing);
  read_opt(j, "baseline_channels", s.baseline_channels);
  read_opt(j, "baseline_kernel1", s.baseline_kernel1);
  read_opt(j, "baseline_kernel2", s.baseline_kernel2);
  read_opt(j, "baseline_raw_input", s.baseline_raw_input);
  s.validate();
  return s;
}

json checkpoint_json(const Model& model) {
  json params = json::array();
  const ParameterSet& p = model.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    params.push_back({{"name", p.name(i)}, {"shape", p[i].shape()}, {"data", p[i].values()}});
  }
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"spec", to_json(model.spec())},
          {"parameters", params}};
}

Model model_from_checkpoint(const json& j) {
  try {
    if (j.value("format", std::string()) != kCheckpointFormat) {
      throw CheckpointError("not a catequiv checkpoint (format field missing or wrong)");
    }
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    ModelSpec spec = spec_from_json(j.at("spec"));
    ParameterSet params;
    for (const auto& entry : j.at("parameters")) {
      params.add(entry.at("name").get<std::string>(),
                 Tensor(entry.at("shape").get<Shape>(), entry.at("data").get<std::vector<double>>()));
    }
    return Model(std::move(spec), std::move(params));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << checkpoint_json(model).dump() << '\n';
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
  return model_from_checkpoint(j);
}

}  // namespace catequiv::model
