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

#ifndef PTPERF_COST_MODEL_H_
#define PTPERF_COST_MODEL_H_

#include "absl/status/statusor.h"
#include "ptperf/arch.h"
#include "ptperf/basecost.h"
#include "ptperf/optim.h"
#include "ptperf/parallel_plan.h"
#include "ptperf/profile.h"

namespace ptperf {

// Everything about the job except the strategy being evaluated.
struct ModelContext {
  ModelArchitecture arch;
  HardwareSpec hw;
  ProfileDb profile;
  DtypeWidths dtypes;
  TflopsConvention convention = TflopsConvention::kForwardBackward;
};

struct Evaluation {
  ParallelPlan plan;
  CostReport cost;
  MemoryReport memory;
  FeatureLabels features;
};

// Step latency and stage-0 memory of `plan` with `opts` applied. An empty
// OptimizationSet gives the base cost model.
//
// Order of application inside a layer: λ scaling (capped by the roofline),
// then TP overlap on the qkv/o-projection/linear-1/linear-2 pairs, CP overlap
// on the attention core, EP overlap on the whole layer, then the activation
// strategy. PP overlap only touches the steady-phase hop; DP overlap replaces
// T_DP.
absl::StatusOr<Evaluation> EvaluatePlan(const ModelContext& ctx,
                                        const ParallelPlan& plan,
                                        const OptimizationSet& opts);

}  // namespace ptperf

#endif  // PTPERF_COST_MODEL_H_
