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

#ifndef PTPERF_OPTIM_H_
#define PTPERF_OPTIM_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ptperf/basecost.h"
#include "ptperf/parallel_plan.h"
#include "ptperf/profile.h"

namespace ptperf {

// Time-increase coefficients for a computation/communication pair that runs
// concurrently. Both are >= 1.
struct OverlapCoefficients {
  double alpha = 1.0;  // computation side
  double beta = 1.0;   // communication side
};

struct TpOverlapConfig {
  OverlapCoefficients coefficients;
  int split_count = 4;  // s_n
};

enum class DpOverlapMode {
  // Only the communication that the pipeline does not already hide.
  kExposedOnly,
  // Pipeline compute counted inside the max terms.
  kVerbatim,
};

struct DpOverlapConfig {
  double alpha_rs = 1.0;
  double beta_bwd = 1.0;
  double alpha_ag = 1.0;
  double beta_fwd = 1.0;
  DpOverlapMode mode = DpOverlapMode::kExposedOnly;
};

enum class OptimizerStrategy { kNone, kDistributed, kCpu };
enum class ActivationStrategy {
  kNone,
  kSelectiveRecompute,
  kFullRecompute,
  kOffload,
};

struct OffloadCoefficients {
  double alpha_offload = 1.0;
  double beta_offload = 1.0;
  double alpha_fetch = 1.0;
  double beta_fetch = 1.0;
};

// Layer-, pipeline-, optimizer- and memory-level features applied on top of
// the base cost model. A disengaged optional means the feature is off.
struct OptimizationSet {
  std::string name;
  // λ^comp per module name ("optimizer" scales P_opt), λ^commu per
  // communication kind (tp, cp, ep, pp, dp).
  std::map<std::string, double, std::less<>> compute_scaling;
  std::map<std::string, double, std::less<>> comm_scaling;
  std::optional<TpOverlapConfig> tp_overlap;
  std::optional<OverlapCoefficients> cp_overlap;
  std::optional<OverlapCoefficients> ep_overlap;
  std::optional<OverlapCoefficients> pp_overlap;
  std::optional<DpOverlapConfig> dp_overlap;
  OptimizerStrategy optimizer = OptimizerStrategy::kNone;
  ActivationStrategy activation = ActivationStrategy::kNone;
  OffloadCoefficients offload;
};

absl::Status ValidateOptimizationSet(const OptimizationSet& opts);

std::string_view OptimizerStrategyName(OptimizerStrategy s);
absl::StatusOr<OptimizerStrategy> ParseOptimizerStrategy(std::string_view s);
std::string_view ActivationStrategyName(ActivationStrategy s);
absl::StatusOr<ActivationStrategy> ParseActivationStrategy(std::string_view s);

// Which features are switched on, grouped as layer (LO),
// pipeline (PO), optimizer (OO) and memory (MO) level. "-" when empty.
struct FeatureLabels {
  std::string lo;
  std::string po;
  std::string oo;
  std::string mo;
};
FeatureLabels DescribeFeatures(const OptimizationSet& opts);

// P <- λP (or B <- λB).
double ApplyScaling(double value, double lambda);
// λP capped by the roofline bound of the module.
double ApplyScaling(double value, double lambda, double roofline_bound);

// (1/s_n) min(T_comp, T_TP) + max(α T_comp, β T_TP).
double TpOverlap(double t_comp, double t_tp, int split_count,
                 const OverlapCoefficients& k);
// (1/c) min(T_att, T_CP) + max(α T_att, β T_CP).
double CpOverlap(double t_attention, double t_cp, int c,
                 const OverlapCoefficients& k);
// max(α ΣT_comp, β ΣT_EP).
double EpOverlap(double sum_comp, double sum_ep, const OverlapCoefficients& k);
// max(0, β T_PP - α Σ_k T_onelayer).
double PpOverlap(double t_pp, double sum_layers, const OverlapCoefficients& k);

struct DpOverlapInputs {
  std::span<const double> rs_chunks;  // one entry per chunk, v total
  std::span<const double> ag_chunks;
  double t_fwd = 0;
  double t_bwd = 0;
  int p = 1;
  int64_t layers_per_chunk = 1;
};
absl::StatusOr<double> DpOverlap(const DpOverlapInputs& in,
                                 const DpOverlapConfig& config);

struct OptimizerStrategyInputs {
  int d = 1;
  double stage_params = 0;  // v l ΣS
  double layer_params = 0;  // ΣS
  double optimizer_bytes = 0;  // 4 D_opt v l ΣS
  double t_update = 0;
  DtypeWidths dtypes;
};

struct OptimizerStrategyResult {
  double optimizer_bytes = 0;
  double t_update = 0;
};

absl::StatusOr<OptimizerStrategyResult> ApplyOptimizerStrategy(
    OptimizerStrategy strategy, const OptimizerStrategyInputs& in,
    const HardwareSpec& hw);

struct ActivationStrategyInputs {
  double factor = 1;            // (vp + p - 2 r_pp - 1)
  double layer_act_bytes = 0;   // ΣM_i^act
  double attention_act_bytes = 0;  // M^Attention
  double input_act_bytes = 0;      // M^input
  double t_fwd = 0;
  double t_bwd = 0;
  double t_qkv = 0;
  double t_attention = 0;
};

struct ActivationStrategyResult {
  double act_bytes = 0;
  double t_fwd = 0;
  double t_bwd = 0;
};

absl::StatusOr<ActivationStrategyResult> ApplyActivationStrategy(
    ActivationStrategy strategy, const ActivationStrategyInputs& in,
    const OffloadCoefficients& k, const HardwareSpec& hw);

}  // namespace ptperf

#endif  // PTPERF_OPTIM_H_
