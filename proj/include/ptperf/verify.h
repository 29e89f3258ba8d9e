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

#ifndef PTPERF_VERIFY_H_
#define PTPERF_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "ptperf/cost_model.h"

namespace ptperf {

// A small dense model with flat profiles, used for self-checks and examples.
ModelContext SyntheticContext();

struct CheckResult {
  std::string suite;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  uint64_t seed = 1;
  int workers = 1;
  int64_t mc_trials = 10000;
};

// Runs every oracle-vs-closed-form suite: pipeline DES, activation ledger,
// checkpoint interval grid, Monte Carlo ETTR, overlap bounds and tuner
// pruning soundness.
std::vector<CheckResult> RunVerification(const VerifyOptions& options);

nlohmann::json VerificationToJson(const std::vector<CheckResult>& checks);

}  // namespace ptperf

#endif  // PTPERF_VERIFY_H_
