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

#ifndef PTPERF_PARALLEL_PLAN_H_
#define PTPERF_PARALLEL_PLAN_H_

#include <cstdint>
#include <string>

#include "absl/status/status.h"

namespace ptperf {

// One point of the parallel-strategy space. Sizes follow Megatron naming:
// tensor (t), context (c), pipeline (p), expert (e) and data (d) parallel
// degrees, micro/global batch sizes and v model chunks per pipeline device.
struct ParallelPlan {
  int t = 1;
  int c = 1;
  int p = 1;
  int e = 1;
  int d = 1;
  int64_t micro_batch_size = 1;
  int64_t global_batch_size = 1;
  int v = 1;

  int64_t WorldSize() const {
    return int64_t{t} * c * p * e * d;
  }
  // m_b: micro-batches each pipeline processes per optimizer step.
  int64_t NumMicroBatches() const {
    return global_batch_size / (micro_batch_size * d);
  }
  // l: transformer layers held by one model chunk.
  int64_t LayersPerChunk(int64_t num_layers) const {
    return num_layers / (int64_t{p} * v);
  }
  // N_nodes for a node of `gpus_per_node` devices, rounded up.
  int64_t NumNodes(int gpus_per_node) const {
    return (WorldSize() + gpus_per_node - 1) / gpus_per_node;
  }

  std::string ToString() const;

  friend bool operator==(const ParallelPlan&, const ParallelPlan&) = default;
};

// Checks positivity, L mod (p*v) == 0, v == 1 when p == 1 and
// g_bs mod (m_bs*d) == 0.
absl::Status ValidatePlan(const ParallelPlan& plan, int64_t num_layers);

// Lexicographic (t, c, p, e, d, m_bs, v) order used for deterministic
// tie-breaking.
bool PlanLess(const ParallelPlan& a, const ParallelPlan& b);

}  // namespace ptperf

#endif  // PTPERF_PARALLEL_PLAN_H_
