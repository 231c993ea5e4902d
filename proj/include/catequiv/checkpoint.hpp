// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.
//
// Checkpoint container: one JSON document
//
//   {"format": "catequiv.checkpoint", "version": 1,
//    "spec": {...ModelSpec...},
//    "parameters": [{"name": ..., "shape": [...], "data": [...]}, ...]}
//
// Doubles are written with round-trip precision, so save/load is exact.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "catequiv/model.hpp"

namespace catequiv::model {

inline constexpr const char* kCheckpointFormat = "catequiv.checkpoint";
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ModelSpec& spec);
/// Missing keys keep the defaults of the kind named in "kind".
ModelSpec spec_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_json(const Model& model);
Model model_from_checkpoint(const nlohmann::json& j);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace catequiv::model
