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

#ifndef PTPERF_PROFILE_H_
#define PTPERF_PROFILE_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ptperf/arch.h"
#include "ptperf/parallel_plan.h"

namespace ptperf {

// Cluster hardware in SI units (bytes, bytes/s, FLOP/s, Hz).
struct HardwareSpec {
  double h2d_bandwidth = 0;      // B_H2D
  double d2h_bandwidth = 0;      // B_D2H
  double disk_load_bandwidth = 0;   // B_DL
  double disk_write_bandwidth = 0;  // B_DW
  double cpu_memory = 0;         // M_CPU
  double cpu_ops_per_second = 0; // F_CPU
  double gpu_peak_flops = 0;     // P_GPU
  double gpu_memory = 0;         // M_GPU
  int gpus_per_node = 1;         // N
  double hbm_bandwidth = 0;      // B_HBM
  double optimizer_throughput = 0;  // P_opt, parameters/s
};

// Every field must be strictly positive. Fields that only some features use
// may be zero (meaning "not provided") and are checked where consumed.
absl::Status ValidateHardware(const HardwareSpec& hw);

struct Throughput {
  double forward = 0;   // FLOP/s
  double backward = 0;  // FLOP/s
  // Backward FLOPs as a multiple of forward FLOPs.
  double backward_flops_ratio = 2.0;
};

// Measured per-module throughputs keyed by (module name, shape signature).
// Signature "*" is the fallback for any shape.
class ComputeProfile {
 public:
  absl::Status Add(std::string module, std::string signature,
                   double forward, std::optional<double> backward = {},
                   double backward_flops_ratio = 2.0);
  absl::StatusOr<Throughput> Lookup(std::string_view module,
                                    std::string_view signature) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::pair<std::string, std::string>, Throughput, std::less<>>
      entries_;
};

enum class CollectiveKind {
  kAllGather,
  kReduceScatter,
  kAllReduce,
  kAllToAll,
  kP2p,
};

std::string_view CollectiveKindName(CollectiveKind kind);
absl::StatusOr<CollectiveKind> ParseCollectiveKind(std::string_view name);

struct BandwidthPoint {
  double bandwidth = 0;  // B_j, bytes/s
  double beta = 1.0;     // decay factor in (0, 1]
};

// Measured algorithm bandwidth curves keyed by (collective, group size).
// Group size 0 is a wildcard that matches any group. Lookups interpolate
// linearly over log(message size) and clamp outside the profiled range.
class CommProfile {
 public:
  absl::Status Add(CollectiveKind kind, int group_size, double message_bytes,
                   double bandwidth, double beta = 1.0);
  absl::StatusOr<BandwidthPoint> Lookup(CollectiveKind kind, int group_size,
                                        double message_bytes) const;

 private:
  struct Sample {
    double message_bytes;
    BandwidthPoint point;
  };
  std::map<std::pair<CollectiveKind, int>, std::vector<Sample>> curves_;
};

struct ProfileDb {
  ComputeProfile compute;
  CommProfile comm;
};

// T = S / P.
absl::StatusOr<double> OpTime(double flops, double throughput);
// T = S / (beta * B).
absl::StatusOr<double> CommTime(double bytes, double bandwidth, double beta);

// min(S_c / S_m * B_HBM, P_GPU). A zero memory footprint is compute bound.
double RooflineBound(double flops, double bytes, const HardwareSpec& hw);

// Memory-bound arm fitted to measured kernels, in FLOP/s:
// min(slope * intensity + intercept, cap).
struct LinearRoofline {
  double slope = 0;      // FLOP/s per (FLOP/byte)
  double intercept = 0;  // FLOP/s
  std::optional<double> cap;  // defaults to P_GPU
};

struct RooflinePoint {
  std::string name;
  double intensity = 0;  // FLOP/byte
  double achieved = 0;   // FLOP/s
};

struct RooflineVerdict {
  RooflinePoint point;
  double theoretical = 0;
  double modified = 0;
  double efficiency = 0;  // achieved / modified
  bool outlier = false;
};

// Flags points whose throughput falls below `outlier_fraction` of the fitted
// roofline at their intensity.
std::vector<RooflineVerdict> CompareToRoofline(
    const std::vector<RooflinePoint>& points, const HardwareSpec& hw,
    const LinearRoofline& fit, double outlier_fraction = 0.8);

// What a collective is used for; each purpose has its own volume rule.
enum class CommPurpose {
  kTensorParallel,
  kContextRing,
  kExpertAllToAll,
  kPipelineP2p,
  kDataParallel,
};

std::string_view CommPurposeName(CommPurpose purpose);
absl::StatusOr<CommPurpose> ParseCommPurpose(std::string_view name);

struct CommVolumeInputs {
  double act_dtype_bytes = 2;
  double grad_dtype_bytes = 2;
  // v * l * sum(S_i^para) on one device, used only for data parallelism.
  double stage_params = 0;
};

// Bytes moved by one invocation of the collective serving `purpose`.
double CommVolume(CommPurpose purpose, const ParallelPlan& plan,
                  const ModelArchitecture& arch,
                  const CommVolumeInputs& inputs);

// Invocations per layer forward pass (backward mirrors it). Zero when the
// corresponding parallel dimension is 1.
int CollectivesPerLayer(CommPurpose purpose, const ParallelPlan& plan,
                        const ModelArchitecture& arch);

}  // namespace ptperf

#endif  // PTPERF_PROFILE_H_
