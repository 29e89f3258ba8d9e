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

#ifndef PTPERF_BASECOST_H_
#define PTPERF_BASECOST_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ptperf/parallel_plan.h"

namespace ptperf {

// Element widths in bytes (D_t^para, D_t^grad, D_t^opt and activations).
struct DtypeWidths {
  double param = 2;
  double grad = 2;
  double optimizer = 4;
  double activation = 2;
};

// Per-step latency breakdown. Times are seconds; T_FWD/T_BWD are per layer.
// T_cal and the exposed-communication fields attribute device time per step
// and do not partition T_step.
struct CostReport {
  double t_fwd = 0;
  double t_bwd = 0;
  double t_warmup = 0;
  double t_steady = 0;
  double t_cooldown = 0;
  double t_pipeline = 0;
  double t_dp = 0;
  double t_update = 0;
  double t_opt = 0;
  double t_step = 0;
  double tflops = 0;
  double t_cal = 0;
  double t_tp = 0;
  double t_pp = 0;
  double t_ep = 0;
  double t_cp = 0;
  std::vector<std::string> warnings;
};

struct MemoryReport {
  double params = 0;
  double grads = 0;
  double optimizer = 0;
  double m_sta = 0;
  double m_act = 0;
  double m_peak = 0;
  DtypeWidths dtypes;
};

// T^FWD / T^BWD: every compute time plus every communication time.
double LayerTime(std::span<const double> compute_times,
                 std::span<const double> comm_times);

// Inputs to the interleaved 1F1B phase formulas. `pp_steady` is the per-hop
// PP time used in the steady phase (differs from `pp` only under PP overlap).
struct StageTimes {
  double fwd = 0;
  double bwd = 0;
  double embed_fwd = 0;
  double embed_bwd = 0;
  double head_fwd = 0;
  double head_bwd = 0;
  double pp = 0;
  double pp_steady = 0;
};

struct PipelineSchedule {
  int p = 1;
  int v = 1;
  int64_t layers_per_chunk = 1;  // l
  int64_t micro_batches = 1;     // m_b
};

struct PipelinePhases {
  double warmup = 0;
  double steady = 0;
  double cooldown = 0;
  double total = 0;
  // Number of PP hops charged in each phase.
  double warmup_pp_terms = 0;
  double steady_pp_terms = 0;
  double cooldown_pp_terms = 0;
  bool degenerate = false;  // m_b < p
};

PipelinePhases PipelineTime(const StageTimes& times,
                            const PipelineSchedule& schedule);

struct OptimizerTimes {
  double t_dp = 0;
  double t_update = 0;
  double t_opt = 0;
};

// T_DP = D_grad * vlΣS / B_DP and T_update = vlΣS / P_opt. With d == 1 no
// gradients move and T_DP is 0. `dp_bandwidth` is already decayed (β·B).
absl::StatusOr<OptimizerTimes> OptimizerTime(double stage_params,
                                             double grad_bytes, int d,
                                             double dp_bandwidth,
                                             double optimizer_throughput);

// (D_para + D_grad + 4 D_opt) * vlΣS.
MemoryReport StaticMemory(const DtypeWidths& dtypes, int v,
                          int64_t layers_per_chunk, double layer_params);

struct ActivationMemory {
  double bytes = 0;
  double factor = 0;
  bool clamped = false;
};

// (vp + p - 2 r_pp - 1) * ΣM_i^act, clamped at zero.
ActivationMemory ActivationMemoryAt(int v, int p, int stage,
                                    double layer_act_bytes);

double PeakMemory(double m_sta, double m_act);

double StepTime(double t_pipeline, double t_opt);

enum class TflopsConvention {
  kForwardBackward,  // 3x forward FLOPs over the whole world
  kRaw,              // forward FLOPs only, no world-size division
};

// Per-device TFLOPS.
absl::StatusOr<double> Tflops(double model_fwd_flops, int64_t world_size,
                              double t_step,
                              TflopsConvention convention =
                                  TflopsConvention::kForwardBackward);

}  // namespace ptperf

#endif  // PTPERF_BASECOST_H_
