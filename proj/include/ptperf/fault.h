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

#ifndef PTPERF_FAULT_H_
#define PTPERF_FAULT_H_

#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace ptperf {

inline constexpr double kSecondsPerDay = 86400.0;

// Probabilities of a failure being fixed by a process restart, a pod restart
// or a full job restart.
struct RepairMix {
  double process = 0.3;
  double pod = 0.6;
  double job = 0.1;
};

struct FaultModel {
  double failures_per_node_day = 0;  // r_f
  double u_process = 141;            // u_bc, seconds
  double u_pod = 262;                // u_bp
  double u_job = 307;                // u_bj
  RepairMix mix;
  double u0 = 0;                     // first initialization, seconds
  int64_t num_nodes = 1;
  // Measured mean repair time. Overrides the mixture when set.
  std::optional<double> mean_repair;
};

struct CheckpointPolicy {
  int64_t interval = 1;  // I_ckpt, steps between saves
  double t_save = 0;     // seconds per save
  int64_t steps = 1;     // S
  double t_step = 0;     // seconds
};

struct EttrReport {
  double ettr = 1;
  double t_tr = 0;
  double t_in = 0;
  double t_e2e = 0;
  double failures = 0;  // F_f
};

absl::Status ValidateFaultModel(const FaultModel& fault);
absl::Status ValidateCheckpointPolicy(const CheckpointPolicy& policy);

// N * r_f in failures per second.
double ClusterFailureRate(const FaultModel& fault);

// u_b = α u_bc + β u_bp + γ u_bj.
absl::StatusOr<double> MeanRepairTime(const FaultModel& fault);

// Expected number of failures over T_tr + T_in, solved in closed form.
// FailedPrecondition when N r_f (u_b + I T_step / 2) >= 1.
absl::StatusOr<double> FailureFixedPoint(const FaultModel& fault,
                                         const CheckpointPolicy& policy);

// T_in = u_0 + F_f u_b + F_f I T_step / 2 + ceil(S / I) T_save.
absl::StatusOr<EttrReport> EttrExact(const FaultModel& fault,
                                     const CheckpointPolicy& policy);

// (1 - N r_f (u_b + I T_step / 2)) / (1 + T_save / (I T_step)).
// Ignores u_0 and the ceiling.
absl::StatusOr<double> EttrClosedForm(const FaultModel& fault,
                                      const CheckpointPolicy& policy);

// G = S T_step (1 + T_save / (I T_step)) / (1 - N r_f (u_b + I T_step / 2)).
absl::StatusOr<double> E2eObjective(const FaultModel& fault,
                                    const CheckpointPolicy& policy);

struct IntervalChoice {
  int64_t interval = 0;
  double continuous = 0;  // unrounded minimizer
  double ettr = 0;
  double e2e = 0;
  // The discriminant is negative: every interval loses more to rollbacks
  // than it saves. `interval` is 0 and the caller picks a policy.
  bool no_optimum = false;
  std::string note;
};

// Minimizes G over I. The continuous optimum is rounded both ways (clamped to
// [1, S]) and the better integer kept; ties go to the smaller interval.
// `policy.interval` is ignored. With r_f = 0 the answer is I = S.
absl::StatusOr<IntervalChoice> OptimalCheckpointInterval(
    const FaultModel& fault, const CheckpointPolicy& policy);

// S = ceil(tokens / (g_bs * s)).
absl::StatusOr<int64_t> StepsFromTokens(double tokens, int64_t global_batch,
                                        int64_t seq_len);

}  // namespace ptperf

#endif  // PTPERF_FAULT_H_
