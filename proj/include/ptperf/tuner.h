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

#ifndef PTPERF_TUNER_H_
#define PTPERF_TUNER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ptperf/cost_model.h"
#include "ptperf/fault.h"
#include "ptperf/optim.h"
#include "ptperf/parallel_plan.h"

namespace ptperf {

struct SearchSpace {
  std::vector<int> t, c, p, e, d;
  std::vector<int64_t> micro_batch_size;
  // Empty means every divisor of L / p.
  std::vector<int> v;
  // Feature allowlist. Empty means the base model only.
  std::vector<OptimizationSet> optimizations;
  int64_t num_gpus = 1;  // g_n
  int64_t global_batch_size = 1;
};

absl::Status ValidateSearchSpace(const SearchSpace& space);

// Powers of two: t up to the node size, c and d up to g_n, p up to L, e up to
// the expert count, m_bs up to g_bs. v is left to the divisor rule.
SearchSpace DefaultSearchSpace(const ModelArchitecture& arch,
                               const HardwareSpec& hw, int64_t num_gpus,
                               int64_t global_batch_size);

// {none, distributed, cpu} optimizers x {none, selective, full, offload}
// activation strategies, each with every overlap on at default coefficients.
std::vector<OptimizationSet> DefaultAllowlist();

enum class Rejection {
  kNone,
  kResource,           // t c p e d > g_n
  kBatchDivisibility,  // g_bs mod (m_bs d) != 0, or m_bs > g_bs
  kTooFewMicroBatches, // g_bs / m_bs < p
  kTensorExceedsNode,  // t > N
  kLayerDivisibility,  // L mod (p v) != 0
  kInterleaving,       // v > 1 without pipeline stages to interleave
  kShape,              // a module dimension does not shard evenly
  kMemory,             // M_peak > M_GPU
  kEvaluation,         // missing profile data and similar
};
std::string_view RejectionName(Rejection r);

// A plan with only the leading dimensions assigned, in DFS order.
struct PartialPlan {
  std::optional<int> t, c, p, e, d;
  std::optional<int64_t> micro_batch_size;
  std::optional<int> v;
};

struct PruneLimits {
  int64_t num_gpus = 1;
  int64_t global_batch_size = 1;
  int gpus_per_node = 0;  // 0 disables the t <= N rule
  int64_t num_layers = 1;
};

struct PruneVerdict {
  Rejection reason = Rejection::kNone;
  bool accepted() const { return reason == Rejection::kNone; }
};

// Applies each rule as soon as the dimensions it needs are assigned.
PruneVerdict Prune(const PartialPlan& partial, const PruneLimits& limits);

struct Candidate {
  ParallelPlan plan;
  OptimizationSet opts;
  int opts_index = 0;  // position in the allowlist, the last tie-breaker
  CostReport cost;
  MemoryReport memory;
  FeatureLabels features;
  bool feasible = false;
  Rejection rejection = Rejection::kNone;
  std::string detail;
};

// Ascending T_step, then lexicographic (t, c, p, e, d, m_bs, v), then
// allowlist position.
bool CandidateLess(const Candidate& a, const Candidate& b);

struct TuneResult {
  std::vector<Candidate> ranked;  // top-k feasible
  int64_t raw_candidates = 0;     // size of the unpruned product
  int64_t evaluated = 0;
  int64_t feasible = 0;
  std::map<Rejection, int64_t> rejections;  // counted in raw candidates
};

struct TuneOptions {
  int top_k = 4;   // <= 0 keeps every feasible candidate
  int workers = 1;
};

// Pruned depth-first search over t -> c -> p -> e -> d -> m_bs -> v -> opts.
absl::StatusOr<TuneResult> TuneStep(const ModelContext& ctx,
                                    const SearchSpace& space,
                                    const TuneOptions& options);

// Reference search: evaluates the full product with no pruning and applies
// the same rules afterwards.
absl::StatusOr<TuneResult> TuneStepExhaustive(const ModelContext& ctx,
                                              const SearchSpace& space,
                                              const TuneOptions& options);

struct E2eCandidate {
  Candidate candidate;
  IntervalChoice interval;
  double ettr = 0;   // closed form at the chosen interval
  double e2e = 0;    // G at the chosen interval
  bool fault_feasible = true;
  std::string note;
};

struct E2eResult {
  std::vector<E2eCandidate> ranked;
  TuneResult step;
};

// Two-phase search: tune the step, then pick I* per feasible plan and rank by
// G. `policy.t_step` and `policy.interval` are filled per candidate. Plans in
// an infeasible fault regime are kept, annotated, and ranked last.
absl::StatusOr<E2eResult> TuneE2e(const ModelContext& ctx,
                                  const SearchSpace& space,
                                  const FaultModel& fault,
                                  const CheckpointPolicy& policy,
                                  const TuneOptions& options);

struct SweepRow {
  std::string value;
  std::optional<Candidate> best;
  std::optional<double> linearity;
  std::optional<double> ettr;
  std::optional<double> e2e;
  std::optional<int64_t> interval;
  std::string note;
};

// Strategy sweeps re-tune with one knob pinned: v, t, c, p, e, d, m_bs, g_bs,
// g_n, gpus_per_node, optimizer, activation, dp_overlap. The g_n sweep also
// reports linearity against the first row.
absl::StatusOr<std::vector<SweepRow>> SweepStrategy(
    const ModelContext& ctx, const SearchSpace& space,
    std::string_view parameter, const std::vector<std::string>& values,
    const TuneOptions& options);

// Fault sweeps at a fixed T_step: r_f, nodes, u_b, t_save, interval.
absl::StatusOr<std::vector<SweepRow>> SweepFault(
    const FaultModel& fault, const CheckpointPolicy& policy,
    std::string_view parameter, const std::vector<std::string>& values);

// T_small / T_large.
absl::StatusOr<double> Linearity(double t_step_small, double t_step_large);

}  // namespace ptperf

#endif  // PTPERF_TUNER_H_
