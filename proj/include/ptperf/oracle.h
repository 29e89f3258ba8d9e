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

#ifndef PTPERF_ORACLE_H_
#define PTPERF_ORACLE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ptperf/basecost.h"
#include "ptperf/fault.h"

namespace ptperf {

// Brute-force counterparts of the closed forms, used by tests and `verify`.

enum class PipelineEventKind { kForward, kBackward, kP2p, kIdle };
std::string_view PipelineEventKindName(PipelineEventKind kind);

struct PipelineEvent {
  PipelineEventKind kind;
  int device = 0;
  int64_t micro_batch = -1;
  int chunk = -1;
  double start = 0;
  double end = 0;
};

// Compute and idle events per device in time order. P2P transfers live in
// `transfers`, attributed to the receiving device; they run concurrently with
// that device's compute.
struct PipelineTrace {
  std::vector<std::vector<PipelineEvent>> devices;
  std::vector<PipelineEvent> transfers;
};

struct PipelineSimulation {
  double makespan = 0;
  PipelineTrace trace;
};

// Order in which stage `stage` runs its chunk passes under interleaved 1F1B.
// Each entry is (is_forward, micro_batch, chunk). Stage r warms up with
// 2(p - r - 1) + (v - 1)p forwards, alternates one forward and one backward,
// then drains the remaining backwards.
struct ScheduledPass {
  bool forward;
  int64_t micro_batch;
  int chunk;
};
absl::StatusOr<std::vector<ScheduledPass>> InterleavedOrder(
    const PipelineSchedule& schedule, int stage);

// Discrete-event replay of interleaved 1F1B. A chunk pass on one device takes
// l * T_FWD (or l * T_BWD); the embedding is charged to chunk 0 on stage 0 and
// the head to chunk v-1 on stage p-1. Every cross-device dependency pays
// `times.pp`. Requires m_b >= p, and m_b divisible by p when v > 1.
absl::StatusOr<PipelineSimulation> SimulatePipeline(
    const StageTimes& times, const PipelineSchedule& schedule);

// Chrome trace-event JSON ("traceEvents" list, microseconds).
std::string PipelineTraceToChromeJson(const PipelineTrace& trace);

struct ActivationLedger {
  std::vector<int64_t> peak_live;   // per stage, in chunk activations
  std::vector<double> peak_bytes;   // peak_live * layer_act_bytes
};

// Replays the interleaved order counting live forward activations (allocated
// at a chunk forward, freed at its backward).
absl::StatusOr<ActivationLedger> SimulateActivationLedger(
    const PipelineSchedule& schedule, double layer_act_bytes);

// What a failure that lands inside a checkpoint save does to that save.
enum class SaveFailureMode {
  kCommitAtSaveEnd,    // the save is lost and the segment is redone
  kCommitAtSaveStart,  // the snapshot was taken when the save began
};

struct FaultSimulationOptions {
  int64_t trials = 1000;
  uint64_t seed = 1;
  int workers = 1;
  bool rollback = true;  // false: a failure costs only the repair time
  SaveFailureMode save_failure = SaveFailureMode::kCommitAtSaveEnd;
};

struct FaultSimulation {
  double mean_ettr = 0;
  double standard_error = 0;
  double mean_failures = 0;
  int64_t trials = 0;
};

// Monte Carlo ETTR. Failures arrive as a Poisson process at N r_f per second
// that keeps running through recovery and saves. A failure rolls training
// back to the last committed checkpoint and pays a repair time drawn from the
// mixture (or the fixed u_b when one is given); a failure during repair
// restarts the repair. Trial i is seeded from (seed, i), so results do not
// depend on `workers`.
absl::StatusOr<FaultSimulation> SimulateFaults(
    const FaultModel& fault, const CheckpointPolicy& policy,
    const FaultSimulationOptions& options);

struct GridSearchResult {
  int64_t interval = 0;
  double e2e = 0;
};

// argmin of E2eObjective over I in [lo, hi]; infeasible intervals are
// skipped and ties go to the smaller interval.
absl::StatusOr<GridSearchResult> GridSearchInterval(
    const FaultModel& fault, const CheckpointPolicy& policy, int64_t lo,
    int64_t hi);

}  // namespace ptperf

#endif  // PTPERF_ORACLE_H_
