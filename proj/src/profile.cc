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

#include "ptperf/profile.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace ptperf {

absl::Status ValidateHardware(const HardwareSpec& hw) {
  if (hw.gpus_per_node < 1) {
    return absl::InvalidArgumentError("hardware: N must be >= 1");
  }
  const std::pair<double, std::string_view> fields[] = {
      {hw.h2d_bandwidth, "B_H2D"},  {hw.d2h_bandwidth, "B_D2H"},
      {hw.disk_load_bandwidth, "B_DL"}, {hw.disk_write_bandwidth, "B_DW"},
      {hw.cpu_memory, "M_CPU"},     {hw.cpu_ops_per_second, "F_CPU"},
      {hw.gpu_peak_flops, "P_GPU"}, {hw.gpu_memory, "M_GPU"},
      {hw.hbm_bandwidth, "B_HBM"},  {hw.optimizer_throughput, "P_opt"},
  };
  for (const auto& [value, name] : fields) {
    if (value < 0 || !std::isfinite(value)) {
      return absl::InvalidArgumentError(
          absl::StrCat("hardware: ", std::string(name), " must be positive"));
    }
  }
  return absl::OkStatus();
}

absl::Status ComputeProfile::Add(std::string module, std::string signature,
                                 double forward, std::optional<double> backward,
                                 double backward_flops_ratio) {
  if (!(forward > 0) || (backward && !(*backward > 0))) {
    return absl::InvalidArgumentError(absl::StrCat(
        "compute profile: throughput for '", module, "' must be > 0"));
  }
  if (backward_flops_ratio < 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "compute profile: backward FLOPs ratio for '", module,
        "' must be >= 0"));
  }
  entries_[{std::move(module), std::move(signature)}] =
      Throughput{forward, backward.value_or(forward), backward_flops_ratio};
  return absl::OkStatus();
}

absl::StatusOr<Throughput> ComputeProfile::Lookup(
    std::string_view module, std::string_view signature) const {
  auto it = entries_.find(std::pair<std::string, std::string>(module, signature));
  if (it != entries_.end()) return it->second;
  it = entries_.find(std::pair<std::string, std::string>(module, "*"));
  if (it != entries_.end()) return it->second;
  return absl::NotFoundError(absl::StrCat("no compute profile for module '",
                                          std::string(module), "' shape '",
                                          std::string(signature),
                                          "'"));
}

std::string_view CollectiveKindName(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::kAllGather:
      return "all-gather";
    case CollectiveKind::kReduceScatter:
      return "reduce-scatter";
    case CollectiveKind::kAllReduce:
      return "all-reduce";
    case CollectiveKind::kAllToAll:
      return "all-to-all";
    case CollectiveKind::kP2p:
      return "p2p";
  }
  return "p2p";
}

absl::StatusOr<CollectiveKind> ParseCollectiveKind(std::string_view name) {
  for (CollectiveKind k :
       {CollectiveKind::kAllGather, CollectiveKind::kReduceScatter,
        CollectiveKind::kAllReduce, CollectiveKind::kAllToAll,
        CollectiveKind::kP2p}) {
    if (CollectiveKindName(k) == name) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown collective kind '", std::string(name), "'"));
}

absl::Status CommProfile::Add(CollectiveKind kind, int group_size,
                              double message_bytes, double bandwidth,
                              double beta) {
  if (!(bandwidth > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("comm profile: bandwidth for ",
                     std::string(CollectiveKindName(kind)),
                     " must be > 0"));
  }
  if (!(beta > 0) || beta > 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("comm profile: beta for ",
                     std::string(CollectiveKindName(kind)),
                     " must be in (0, 1], got ", beta));
  }
  if (!(message_bytes > 0) || group_size < 0) {
    return absl::InvalidArgumentError(
        "comm profile: message size must be > 0 and group size >= 0");
  }
  std::vector<Sample>& curve = curves_[{kind, group_size}];
  auto it = std::lower_bound(
      curve.begin(), curve.end(), message_bytes,
      [](const Sample& s, double m) { return s.message_bytes < m; });
  if (it != curve.end() && it->message_bytes == message_bytes) {
    it->point = {bandwidth, beta};
  } else {
    curve.insert(it, Sample{message_bytes, {bandwidth, beta}});
  }
  return absl::OkStatus();
}

absl::StatusOr<BandwidthPoint> CommProfile::Lookup(CollectiveKind kind,
                                                   int group_size,
                                                   double message_bytes) const {
  auto it = curves_.find({kind, group_size});
  if (it == curves_.end()) it = curves_.find({kind, 0});
  if (it == curves_.end()) {
    return absl::NotFoundError(absl::StrCat("no bandwidth profile for ",
                                            std::string(CollectiveKindName(kind)),
                                            " group=", group_size));
  }
  const std::vector<Sample>& curve = it->second;
  if (message_bytes <= curve.front().message_bytes) return curve.front().point;
  if (message_bytes >= curve.back().message_bytes) return curve.back().point;
  auto hi = std::upper_bound(
      curve.begin(), curve.end(), message_bytes,
      [](double m, const Sample& s) { return m < s.message_bytes; });
  auto lo = std::prev(hi);
  const double x = (std::log(message_bytes) - std::log(lo->message_bytes)) /
                   (std::log(hi->message_bytes) - std::log(lo->message_bytes));
  return BandwidthPoint{
      lo->point.bandwidth + x * (hi->point.bandwidth - lo->point.bandwidth),
      lo->point.beta + x * (hi->point.beta - lo->point.beta)};
}

absl::StatusOr<double> OpTime(double flops, double throughput) {
  if (!(throughput > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("throughput must be > 0, got ", throughput));
  }
  return flops / throughput;
}

absl::StatusOr<double> CommTime(double bytes, double bandwidth, double beta) {
  if (!(bandwidth > 0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("bandwidth must be > 0, got ", bandwidth));
  }
  if (!(beta > 0) || beta > 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("decay factor must be in (0, 1], got ", beta));
  }
  return bytes / (beta * bandwidth);
}

double RooflineBound(double flops, double bytes, const HardwareSpec& hw) {
  if (bytes <= 0) return hw.gpu_peak_flops;
  return std::min(flops / bytes * hw.hbm_bandwidth, hw.gpu_peak_flops);
}

std::vector<RooflineVerdict> CompareToRoofline(
    const std::vector<RooflinePoint>& points, const HardwareSpec& hw,
    const LinearRoofline& fit, double outlier_fraction) {
  std::vector<RooflineVerdict> out;
  out.reserve(points.size());
  const double cap = fit.cap.value_or(hw.gpu_peak_flops);
  for (const RooflinePoint& pt : points) {
    RooflineVerdict v;
    v.point = pt;
    v.theoretical =
        std::min(pt.intensity * hw.hbm_bandwidth, hw.gpu_peak_flops);
    v.modified = std::min(fit.slope * pt.intensity + fit.intercept, cap);
    v.efficiency = v.modified > 0 ? pt.achieved / v.modified : 0;
    v.outlier = pt.achieved < outlier_fraction * v.modified;
    out.push_back(std::move(v));
  }
  return out;
}

std::string_view CommPurposeName(CommPurpose purpose) {
  switch (purpose) {
    case CommPurpose::kTensorParallel:
      return "tp";
    case CommPurpose::kContextRing:
      return "cp";
    case CommPurpose::kExpertAllToAll:
      return "ep";
    case CommPurpose::kPipelineP2p:
      return "pp";
    case CommPurpose::kDataParallel:
      return "dp";
  }
  return "tp";
}

absl::StatusOr<CommPurpose> ParseCommPurpose(std::string_view name) {
  for (CommPurpose p :
       {CommPurpose::kTensorParallel, CommPurpose::kContextRing,
        CommPurpose::kExpertAllToAll, CommPurpose::kPipelineP2p,
        CommPurpose::kDataParallel}) {
    if (CommPurposeName(p) == name) return p;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown communication kind '", std::string(name), "'"));
}

double CommVolume(CommPurpose purpose, const ParallelPlan& plan,
                  const ModelArchitecture& arch,
                  const CommVolumeInputs& inputs) {
  const double activation = static_cast<double>(plan.micro_batch_size) *
                            static_cast<double>(arch.seq_len / plan.c) *
                            static_cast<double>(arch.hidden) *
                            inputs.act_dtype_bytes;
  switch (purpose) {
    case CommPurpose::kTensorParallel:
    case CommPurpose::kContextRing:
    case CommPurpose::kPipelineP2p:
      return activation;
    case CommPurpose::kExpertAllToAll:
      return activation * static_cast<double>(arch.top_k.value_or(1));
    case CommPurpose::kDataParallel:
      return inputs.grad_dtype_bytes * inputs.stage_params;
  }
  return 0;
}

int CollectivesPerLayer(CommPurpose purpose, const ParallelPlan& plan,
                        const ModelArchitecture& arch) {
  switch (purpose) {
    case CommPurpose::kTensorParallel:
      // Sequence-parallel layout: all-gather before qkv and linear-1,
      // reduce-scatter after o-projection and linear-2.
      return plan.t > 1 ? 4 : 0;
    case CommPurpose::kContextRing:
      return plan.c - 1;
    case CommPurpose::kExpertAllToAll:
      return arch.structure == StructureKind::kMoe && plan.e > 1 ? 2 : 0;
    case CommPurpose::kPipelineP2p:
    case CommPurpose::kDataParallel:
      return 0;
  }
  return 0;
}

}  // namespace ptperf
