// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The CatEquiv Authors.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "catequiv/model.hpp"
#include "catequiv/perturbation.hpp"
#include "catequiv/signal.hpp"
#include "catequiv/training.hpp"

namespace catequiv::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kVerificationFailed = 3,
};

inline constexpr const char* kDataRootEnv = "CATEQUIV_DATA_ROOT";

/// Everything a command needs; written to <out>/config.json.
struct RunConfig {
  std::string data_root;
  std::string out = "runs/default";
  std::uint64_t seed = 1;
  signal::AccSource acc_source = signal::AccSource::kTotal;
  model::ModelSpec model = model::catequiv_spec();
  train::TrainConfig train;
  ood::OodConfig ood;

  nlohmann::json to_json() const;
  /// Keys absent from `j` keep the values already in `base`.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j) { return from_json(j, RunConfig{}); }
};

/// Entry point; returns the process exit code.
int run(int argc, const char* const* argv);
/// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args);

}  // namespace catequiv::cli
