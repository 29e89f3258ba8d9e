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

#include "ptperf/basecost.h"

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace ptperf {

double LayerTime(std::span<const double> compute_times,
                 std::span<const double> comm_times) {
  double total = 0;
  for (double t : compute_times) total += t;
  for (double t : comm_times) total += t;
  return total;
}

PipelinePhases PipelineTime(const StageTimes& x,
                            const PipelineSchedule& schedule) {
  const double p = schedule.p;
  const double v = schedule.v;
  const double l = static_cast<double>(schedule.layers_per_chunk);
  const double mb = static_cast<double>(schedule.micro_batches);
  // (vp - p - 1) is negative for v == 1; kept as is, it cancels one of the
  // p leading terms and reproduces classic 1F1B.
  const double tail = v * p - p - 1;

  PipelinePhases out;
  out.warmup = p * (x.embed_fwd + l * x.fwd + x.pp) + tail * (l * x.fwd + x.pp);
  out.warmup_pp_terms = p + tail;

  out.steady_pp_terms = 4 * mb * v - 2 * mb + 2 * p - 2;
  out.steady = p * (l * x.fwd + x.head_fwd + x.head_bwd + l * x.bwd) +
               (mb - p) * (v * l * x.fwd + x.head_fwd + x.head_bwd + l * x.bwd) +
               out.steady_pp_terms * x.pp_steady;

  out.cooldown =
      p * (x.embed_bwd + l * x.bwd + x.pp) + tail * (l * x.bwd + x.pp);
  out.cooldown_pp_terms = p + tail;

  out.total = out.warmup + out.steady + out.cooldown;
  out.degenerate = schedule.micro_batches < schedule.p;
  return out;
}

absl::StatusOr<OptimizerTimes> OptimizerTime(double stage_params,
                                             double grad_bytes, int d,
                                             double dp_bandwidth,
                                             double optimizer_throughput) {
  OptimizerTimes out;
  if (d > 1 && stage_params > 0) {
    if (!(dp_bandwidth > 0)) {
      return absl::InvalidArgumentError("DP bandwidth must be > 0");
    }
    out.t_dp = grad_bytes * stage_params / dp_bandwidth;
  }
  if (stage_params > 0) {
    if (!(optimizer_throughput > 0)) {
      return absl::InvalidArgumentError("optimizer throughput must be > 0");
    }
    out.t_update = stage_params / optimizer_throughput;
  }
  out.t_opt = out.t_dp + out.t_update;
  return out;
}

MemoryReport StaticMemory(const DtypeWidths& dtypes, int v,
                          int64_t layers_per_chunk, double layer_params) {
  const double stage_params =
      v * static_cast<double>(layers_per_chunk) * layer_params;
  MemoryReport out;
  out.dtypes = dtypes;
  out.params = dtypes.param * stage_params;
  out.grads = dtypes.grad * stage_params;
  out.optimizer = 4 * dtypes.optimizer * stage_params;
  out.m_sta = out.params + out.grads + out.optimizer;
  out.m_peak = out.m_sta;
  return out;
}

ActivationMemory ActivationMemoryAt(int v, int p, int stage,
                                    double layer_act_bytes) {
  ActivationMemory out;
  out.factor = static_cast<double>(v) * p + p - 2.0 * stage - 1;
  if (out.factor < 0) {
    out.factor = 0;
    out.clamped = true;
  }
  out.bytes = out.factor * layer_act_bytes;
  return out;
}

double PeakMemory(double m_sta, double m_act) { return m_sta + m_act; }

double StepTime(double t_pipeline, double t_opt) { return t_pipeline + t_opt; }

absl::StatusOr<double> Tflops(double model_fwd_flops, int64_t world_size,
                              double t_step, TflopsConvention convention) {
  if (!(t_step > 0)) {
    return absl::FailedPreconditionError(
        absl::StrCat("step time must be > 0, got ", t_step));
  }
  if (convention == TflopsConvention::kRaw) {
    return model_fwd_flops / 1e12 / t_step;
  }
  if (world_size < 1) {
    return absl::InvalidArgumentError("world size must be >= 1");
  }
  return 3 * model_fwd_flops / 1e12 /
         (static_cast<double>(world_size) * t_step);
}

}  // namespace ptperf
