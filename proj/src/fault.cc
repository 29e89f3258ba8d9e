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

#include "ptperf/fault.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

constexpr char kInfeasible[] =
    "failure rate too high for checkpointing to converge";

// 1 - N r_f (u_b + I T_step / 2), shared by every formula below.
absl::StatusOr<double> Headroom(const FaultModel& fault,
                                const CheckpointPolicy& policy) {
  ASSIGN_OR_RETURN(double u_b, MeanRepairTime(fault));
  const double h =
      1.0 - ClusterFailureRate(fault) *
                (u_b + static_cast<double>(policy.interval) * policy.t_step / 2);
  if (h <= 0) {
    return absl::FailedPreconditionError(
        absl::StrCat(kInfeasible, " (1 - N r_f (u_b + I T_step/2) = ", h, ")"));
  }
  return h;
}

}  // namespace

absl::Status ValidateFaultModel(const FaultModel& fault) {
  if (!(fault.failures_per_node_day >= 0)) {
    return absl::InvalidArgumentError("fault: r_f must be >= 0");
  }
  if (fault.num_nodes < 1) {
    return absl::InvalidArgumentError("fault: node count must be >= 1");
  }
  if (fault.u_process < 0 || fault.u_pod < 0 || fault.u_job < 0 ||
      fault.u0 < 0 || (fault.mean_repair && *fault.mean_repair < 0)) {
    return absl::InvalidArgumentError("fault: recovery times must be >= 0");
  }
  const RepairMix& m = fault.mix;
  if (m.process < 0 || m.pod < 0 || m.job < 0) {
    return absl::InvalidArgumentError("fault mix entries must be >= 0");
  }
  if (std::abs(m.process + m.pod + m.job - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("fault mix must sum to 1");
  }
  return absl::OkStatus();
}

absl::Status ValidateCheckpointPolicy(const CheckpointPolicy& policy) {
  if (policy.interval < 1) {
    return absl::InvalidArgumentError("checkpoint interval must be >= 1");
  }
  if (policy.steps < 1) {
    return absl::InvalidArgumentError("training steps must be >= 1");
  }
  if (!(policy.t_step > 0)) {
    return absl::InvalidArgumentError("T_step must be > 0");
  }
  if (!(policy.t_save >= 0)) {
    return absl::InvalidArgumentError("T_save must be >= 0");
  }
  return absl::OkStatus();
}

double ClusterFailureRate(const FaultModel& fault) {
  return static_cast<double>(fault.num_nodes) * fault.failures_per_node_day /
         kSecondsPerDay;
}

absl::StatusOr<double> MeanRepairTime(const FaultModel& fault) {
  RETURN_IF_ERROR(ValidateFaultModel(fault));
  if (fault.mean_repair) return *fault.mean_repair;
  return fault.mix.process * fault.u_process + fault.mix.pod * fault.u_pod +
         fault.mix.job * fault.u_job;
}

absl::StatusOr<double> FailureFixedPoint(const FaultModel& fault,
                                         const CheckpointPolicy& policy) {
  RETURN_IF_ERROR(ValidateCheckpointPolicy(policy));
  ASSIGN_OR_RETURN(double headroom, Headroom(fault, policy));
  const double saves = std::ceil(static_cast<double>(policy.steps) /
                                 static_cast<double>(policy.interval));
  const double t_tr = static_cast<double>(policy.steps) * policy.t_step;
  return ClusterFailureRate(fault) * (t_tr + fault.u0 + saves * policy.t_save) /
         headroom;
}

absl::StatusOr<EttrReport> EttrExact(const FaultModel& fault,
                                     const CheckpointPolicy& policy) {
  ASSIGN_OR_RETURN(double f, FailureFixedPoint(fault, policy));
  ASSIGN_OR_RETURN(double u_b, MeanRepairTime(fault));
  const double saves = std::ceil(static_cast<double>(policy.steps) /
                                 static_cast<double>(policy.interval));
  EttrReport r;
  r.failures = f;
  r.t_tr = static_cast<double>(policy.steps) * policy.t_step;
  r.t_in = fault.u0 + f * u_b +
           f * static_cast<double>(policy.interval) * policy.t_step / 2 +
           saves * policy.t_save;
  r.t_e2e = r.t_tr + r.t_in;
  r.ettr = r.t_tr / r.t_e2e;
  return r;
}

absl::StatusOr<double> EttrClosedForm(const FaultModel& fault,
                                      const CheckpointPolicy& policy) {
  RETURN_IF_ERROR(ValidateCheckpointPolicy(policy));
  ASSIGN_OR_RETURN(double headroom, Headroom(fault, policy));
  return headroom /
         (1.0 + policy.t_save /
                    (static_cast<double>(policy.interval) * policy.t_step));
}

absl::StatusOr<double> E2eObjective(const FaultModel& fault,
                                    const CheckpointPolicy& policy) {
  RETURN_IF_ERROR(ValidateCheckpointPolicy(policy));
  ASSIGN_OR_RETURN(double headroom, Headroom(fault, policy));
  return static_cast<double>(policy.steps) * policy.t_step *
         (1.0 + policy.t_save /
                    (static_cast<double>(policy.interval) * policy.t_step)) /
         headroom;
}

absl::StatusOr<IntervalChoice> OptimalCheckpointInterval(
    const FaultModel& fault, const CheckpointPolicy& policy) {
  CheckpointPolicy probe = policy;
  probe.interval = 1;
  RETURN_IF_ERROR(ValidateCheckpointPolicy(probe));
  ASSIGN_OR_RETURN(double u_b, MeanRepairTime(fault));
  const double rate = ClusterFailureRate(fault);

  IntervalChoice out;
  if (rate == 0) {
    probe.interval = policy.steps;
    out.interval = policy.steps;
    out.continuous = static_cast<double>(policy.steps);
    out.note = "no failures: single final checkpoint";
    ASSIGN_OR_RETURN(out.ettr, EttrClosedForm(fault, probe));
    ASSIGN_OR_RETURN(out.e2e, E2eObjective(fault, probe));
    return out;
  }

  const double ts = policy.t_save;
  const double disc = ts * ts - 2 * ts * u_b + 2 * ts / rate;
  if (disc < 0) {
    out.no_optimum = true;
    out.note = "negative discriminant: checkpointing is counterproductive";
    return out;
  }
  out.continuous = (-ts + std::sqrt(disc)) / policy.t_step;

  const double hi = static_cast<double>(policy.steps);
  const int64_t down =
      static_cast<int64_t>(std::clamp(std::floor(out.continuous), 1.0, hi));
  const int64_t up =
      static_cast<int64_t>(std::clamp(std::ceil(out.continuous), 1.0, hi));
  absl::Status last = absl::OkStatus();
  bool found = false;
  for (int64_t candidate : {down, up}) {
    probe.interval = candidate;
    absl::StatusOr<double> g = E2eObjective(fault, probe);
    if (!g.ok()) {
      last = g.status();
      continue;
    }
    if (!found || *g < out.e2e) {
      found = true;
      out.interval = candidate;
      out.e2e = *g;
    }
  }
  if (!found) return last;
  probe.interval = out.interval;
  ASSIGN_OR_RETURN(out.ettr, EttrClosedForm(fault, probe));
  return out;
}

absl::StatusOr<int64_t> StepsFromTokens(double tokens, int64_t global_batch,
                                        int64_t seq_len) {
  if (!(tokens > 0) || global_batch < 1 || seq_len < 1) {
    return absl::InvalidArgumentError(
        "tokens, global batch and sequence length must be positive");
  }
  return static_cast<int64_t>(
      std::ceil(tokens / (static_cast<double>(global_batch) *
                          static_cast<double>(seq_len))));
}

}  // namespace ptperf
