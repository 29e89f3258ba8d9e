/* Copyright 2026 The ptperf Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PTPERF_CONFIG_H_
#define PTPERF_CONFIG_H_

#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ptperf/cost_model.h"
#include "ptperf/fault.h"
#include "ptperf/optim.h"
#include "ptperf/parallel_plan.h"
#include "ptperf/tuner.h"

namespace ptperf {

inline constexpr int kSchemaVersion = 1;

enum class OutputFormat { kJson, kCsv, kMarkdown };
std::string_view OutputFormatName(OutputFormat f);
absl::StatusOr<OutputFormat> ParseOutputFormat(std::string_view name);

struct FaultConfig {
  FaultModel model;
  CheckpointPolicy policy;
  // Which optional inputs the file supplied. Missing ones are derived from
  // the plan or the tuner.
  bool has_nodes = false;
  bool has_interval = false;
  bool has_t_step = false;
  std::optional<double> tokens;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  ModelContext context;
  std::optional<ParallelPlan> plan;
  std::optional<SearchSpace> space;
  OptimizationSet optimization;
  std::optional<FaultConfig> fault;
  OutputFormat format = OutputFormat::kJson;
};

// Reads a run config. `model`, `hardware` and `profile` may be inline objects
// or paths relative to the config file. Hardware and profile values use the
// conventional units (GB/s, GB, GHz, TFLOPS, Gparams/s) and are
// converted to SI. Errors name the offending field.
absl::StatusOr<RunConfig> LoadConfig(const std::string& path);
absl::StatusOr<RunConfig> ParseConfig(const nlohmann::json& doc,
                                      const std::string& base_dir);

absl::StatusOr<ModelArchitecture> ParseModel(const nlohmann::json& j);
absl::StatusOr<HardwareSpec> ParseHardware(const nlohmann::json& j);
absl::StatusOr<ProfileDb> ParseProfile(const nlohmann::json& j);
absl::StatusOr<ParallelPlan> ParsePlan(const nlohmann::json& j);
absl::StatusOr<OptimizationSet> ParseOptimization(const nlohmann::json& j);
absl::StatusOr<FaultConfig> ParseFault(const nlohmann::json& j);

// The resolved config in SI units with every default filled in.
nlohmann::json RunConfigToJson(const RunConfig& config);

}  // namespace ptperf

#endif  // PTPERF_CONFIG_H_
