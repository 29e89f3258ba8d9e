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

#include "ptperf/optim.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace ptperf {
namespace {

absl::Status CheckCoefficients(const OverlapCoefficients& k,
                               std::string_view what) {
  if (k.alpha < 1 || k.beta < 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(what), " overlap coefficients must be >= 1, got alpha=", k.alpha,
        " beta=", k.beta));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateOptimizationSet(const OptimizationSet& opts) {
  for (const auto& [name, lambda] : opts.compute_scaling) {
    if (!(lambda > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("scaling factor for '", name, "' must be > 0"));
    }
  }
  for (const auto& [name, lambda] : opts.comm_scaling) {
    if (!(lambda > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("scaling factor for '", name, "' must be > 0"));
    }
    if (absl::StatusOr<CommPurpose> p = ParseCommPurpose(name); !p.ok()) {
      return p.status();
    }
  }
  if (opts.tp_overlap) {
    if (absl::Status s = CheckCoefficients(opts.tp_overlap->coefficients, "tp");
        !s.ok()) {
      return s;
    }
    if (opts.tp_overlap->split_count < 1) {
      return absl::InvalidArgumentError("tp overlap split count must be >= 1");
    }
  }
  if (opts.cp_overlap) {
    if (absl::Status s = CheckCoefficients(*opts.cp_overlap, "cp"); !s.ok()) {
      return s;
    }
  }
  if (opts.ep_overlap) {
    if (absl::Status s = CheckCoefficients(*opts.ep_overlap, "ep"); !s.ok()) {
      return s;
    }
  }
  if (opts.pp_overlap) {
    if (absl::Status s = CheckCoefficients(*opts.pp_overlap, "pp"); !s.ok()) {
      return s;
    }
  }
  if (opts.dp_overlap) {
    const DpOverlapConfig& k = *opts.dp_overlap;
    if (k.alpha_rs < 1 || k.beta_bwd < 1 || k.alpha_ag < 1 || k.beta_fwd < 1) {
      return absl::InvalidArgumentError(
          "dp overlap coefficients must be >= 1");
    }
  }
  const OffloadCoefficients& o = opts.offload;
  if (o.alpha_offload < 1 || o.beta_offload < 1 || o.alpha_fetch < 1 ||
      o.beta_fetch < 1) {
    return absl::InvalidArgumentError("offload coefficients must be >= 1");
  }
  return absl::OkStatus();
}

std::string_view OptimizerStrategyName(OptimizerStrategy s) {
  switch (s) {
    case OptimizerStrategy::kNone:
      return "none";
    case OptimizerStrategy::kDistributed:
      return "distributed";
    case OptimizerStrategy::kCpu:
      return "cpu";
  }
  return "none";
}

absl::StatusOr<OptimizerStrategy> ParseOptimizerStrategy(std::string_view s) {
  for (OptimizerStrategy k :
       {OptimizerStrategy::kNone, OptimizerStrategy::kDistributed,
        OptimizerStrategy::kCpu}) {
    if (OptimizerStrategyName(k) == s) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown optimizer strategy '", std::string(s), "'"));
}

std::string_view ActivationStrategyName(ActivationStrategy s) {
  switch (s) {
    case ActivationStrategy::kNone:
      return "none";
    case ActivationStrategy::kSelectiveRecompute:
      return "selective-recompute";
    case ActivationStrategy::kFullRecompute:
      return "full-recompute";
    case ActivationStrategy::kOffload:
      return "offload";
  }
  return "none";
}

absl::StatusOr<ActivationStrategy> ParseActivationStrategy(std::string_view s) {
  for (ActivationStrategy k :
       {ActivationStrategy::kNone, ActivationStrategy::kSelectiveRecompute,
        ActivationStrategy::kFullRecompute, ActivationStrategy::kOffload}) {
    if (ActivationStrategyName(k) == s) return k;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown activation strategy '", std::string(s), "'"));
}

FeatureLabels DescribeFeatures(const OptimizationSet& opts) {
  std::vector<std::string> lo, po, oo, mo;
  if (!opts.compute_scaling.empty()) lo.push_back("comp-scaling");
  for (const auto& [name, lambda] : opts.comm_scaling) {
    if (name == "pp") {
      po.push_back("pp-bandwidth");
    } else if (name == "dp") {
      oo.push_back("dp-bandwidth");
    } else if (std::find(lo.begin(), lo.end(), "comm-scaling") == lo.end()) {
      lo.push_back("comm-scaling");
    }
  }
  if (opts.tp_overlap) lo.push_back("tp-overlap");
  if (opts.cp_overlap) lo.push_back("cp-overlap");
  if (opts.ep_overlap) lo.push_back("ep-overlap");
  if (opts.pp_overlap) po.push_back("pp-overlap");
  if (opts.dp_overlap) oo.push_back("dp-overlap");
  if (opts.optimizer != OptimizerStrategy::kNone) {
    mo.push_back(absl::StrCat(std::string(OptimizerStrategyName(opts.optimizer)),
                              "-optimizer"));
  }
  if (opts.activation != ActivationStrategy::kNone) {
    mo.push_back(std::string(ActivationStrategyName(opts.activation)));
  }
  auto join = [](const std::vector<std::string>& v) {
    return v.empty() ? std::string("-") : absl::StrJoin(v, "+");
  };
  return FeatureLabels{join(lo), join(po), join(oo), join(mo)};
}

double ApplyScaling(double value, double lambda) { return lambda * value; }

double ApplyScaling(double value, double lambda, double roofline_bound) {
  return std::min(lambda * value, roofline_bound);
}

double TpOverlap(double t_comp, double t_tp, int split_count,
                 const OverlapCoefficients& k) {
  return std::min(t_comp, t_tp) / split_count +
         std::max(k.alpha * t_comp, k.beta * t_tp);
}

double CpOverlap(double t_attention, double t_cp, int c,
                 const OverlapCoefficients& k) {
  return std::min(t_attention, t_cp) / c +
         std::max(k.alpha * t_attention, k.beta * t_cp);
}

double EpOverlap(double sum_comp, double sum_ep, const OverlapCoefficients& k) {
  return std::max(k.alpha * sum_comp, k.beta * sum_ep);
}

double PpOverlap(double t_pp, double sum_layers, const OverlapCoefficients& k) {
  return std::max(0.0, k.beta * t_pp - k.alpha * sum_layers);
}

absl::StatusOr<double> DpOverlap(const DpOverlapInputs& in,
                                 const DpOverlapConfig& config) {
  if (in.rs_chunks.empty() || in.rs_chunks.size() != in.ag_chunks.size()) {
    return absl::InvalidArgumentError(
        "dp overlap needs one reduce-scatter and one all-gather time per "
        "chunk");
  }
  const double v = static_cast<double>(in.rs_chunks.size());
  const double rs_rest =
      std::accumulate(in.rs_chunks.begin() + 1, in.rs_chunks.end(), 0.0);
  const double ag_rest =
      std::accumulate(in.ag_chunks.begin() + 1, in.ag_chunks.end(), 0.0);
  const double hidden_bwd = config.beta_bwd * in.p *
                            static_cast<double>(in.layers_per_chunk) *
                            (v - 1) * in.t_bwd;
  const double hidden_fwd = config.beta_fwd * in.p *
                            static_cast<double>(in.layers_per_chunk) *
                            (v - 1) * in.t_fwd;
  const double first = in.rs_chunks.front() + in.ag_chunks.front();
  if (config.mode == DpOverlapMode::kVerbatim) {
    return first + std::max(config.alpha_rs * rs_rest, hidden_bwd) +
           std::max(config.alpha_ag * ag_rest, hidden_fwd);
  }
  return first + std::max(0.0, config.alpha_rs * rs_rest - hidden_bwd) +
         std::max(0.0, config.alpha_ag * ag_rest - hidden_fwd);
}

absl::StatusOr<OptimizerStrategyResult> ApplyOptimizerStrategy(
    OptimizerStrategy strategy, const OptimizerStrategyInputs& in,
    const HardwareSpec& hw) {
  switch (strategy) {
    case OptimizerStrategy::kNone:
      return OptimizerStrategyResult{in.optimizer_bytes, in.t_update};
    case OptimizerStrategy::kDistributed:
      if (in.d < 1) {
        return absl::InvalidArgumentError("distributed optimizer needs d >= 1");
      }
      return OptimizerStrategyResult{in.optimizer_bytes / in.d,
                                     in.t_update / in.d};
    case OptimizerStrategy::kCpu: {
      if (!(hw.cpu_ops_per_second > 0) || !(hw.h2d_bandwidth > 0) ||
          !(hw.d2h_bandwidth > 0)) {
        return absl::InvalidArgumentError(
            "cpu optimizer requires F_CPU, B_H2D and B_D2H");
      }
      OptimizerStrategyResult out;
      out.optimizer_bytes = std::max(0.0, in.optimizer_bytes - hw.cpu_memory);
      out.t_update = in.layer_params / hw.cpu_ops_per_second +
                     in.dtypes.grad * in.stage_params / hw.h2d_bandwidth +
                     in.dtypes.param * in.stage_params / hw.d2h_bandwidth;
      return out;
    }
  }
  return absl::InvalidArgumentError("unknown optimizer strategy");
}

absl::StatusOr<ActivationStrategyResult> ApplyActivationStrategy(
    ActivationStrategy strategy, const ActivationStrategyInputs& in,
    const OffloadCoefficients& k, const HardwareSpec& hw) {
  ActivationStrategyResult out{in.factor * in.layer_act_bytes, in.t_fwd,
                               in.t_bwd};
  switch (strategy) {
    case ActivationStrategy::kNone:
      return out;
    case ActivationStrategy::kSelectiveRecompute:
      out.act_bytes =
          in.factor * (in.layer_act_bytes - in.attention_act_bytes);
      out.t_bwd = in.t_bwd + in.t_qkv + in.t_attention;
      return out;
    case ActivationStrategy::kFullRecompute:
      out.act_bytes = in.factor * in.input_act_bytes;
      out.t_bwd = in.t_bwd + in.t_fwd;
      return out;
    case ActivationStrategy::kOffload:
      if (!(hw.d2h_bandwidth > 0) || !(hw.h2d_bandwidth > 0)) {
        return absl::InvalidArgumentError(
            "activation offload requires B_H2D and B_D2H");
      }
      out.act_bytes = in.layer_act_bytes;
      out.t_fwd = std::max(k.alpha_offload * in.layer_act_bytes /
                               hw.d2h_bandwidth,
                           k.beta_offload * in.t_fwd);
      out.t_bwd = std::max(k.alpha_fetch * in.layer_act_bytes /
                               hw.h2d_bandwidth,
                           k.beta_fetch * in.t_bwd);
      return out;
  }
  return absl::InvalidArgumentError("unknown activation strategy");
}

}  // namespace ptperf
