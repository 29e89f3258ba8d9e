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

#include "ptperf/cost_model.h"

#include <array>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

double Lambda(const std::map<std::string, double, std::less<>>& scaling,
              std::string_view key) {
  auto it = scaling.find(key);
  return it == scaling.end() ? 1.0 : it->second;
}

struct ModuleTimes {
  double fwd = 0;
  double bwd = 0;
};

absl::StatusOr<ModuleTimes> TimeModule(const ModelContext& ctx,
                                       const OptimizationSet& opts,
                                       const ModuleShape& m,
                                       std::string_view signature) {
  if (m.flops_fwd == 0) return ModuleTimes{};
  ASSIGN_OR_RETURN(Throughput tp, ctx.profile.compute.Lookup(m.name, signature));
  const double lambda = Lambda(opts.compute_scaling, m.name);
  if (lambda != 1.0) {
    if (ctx.hw.hbm_bandwidth > 0 && ctx.hw.gpu_peak_flops > 0) {
      const double bytes = m.act_bytes + m.param_count * ctx.dtypes.param;
      const double bound = RooflineBound(m.flops_fwd, bytes, ctx.hw);
      tp.forward = ApplyScaling(tp.forward, lambda, bound);
      tp.backward = ApplyScaling(tp.backward, lambda, bound);
    } else {
      tp.forward = ApplyScaling(tp.forward, lambda);
      tp.backward = ApplyScaling(tp.backward, lambda);
    }
  }
  ModuleTimes out;
  ASSIGN_OR_RETURN(out.fwd, OpTime(m.flops_fwd, tp.forward));
  ASSIGN_OR_RETURN(out.bwd,
                   OpTime(tp.backward_flops_ratio * m.flops_fwd, tp.backward));
  return out;
}

absl::StatusOr<double> TimeCollective(const ModelContext& ctx,
                                      const OptimizationSet& opts,
                                      CommPurpose purpose, CollectiveKind kind,
                                      int group, double bytes) {
  if (bytes == 0) return 0.0;
  ASSIGN_OR_RETURN(BandwidthPoint bw,
                   ctx.profile.comm.Lookup(kind, group, bytes));
  const double lambda = Lambda(opts.comm_scaling, CommPurposeName(purpose));
  return CommTime(bytes, ApplyScaling(bw.bandwidth, lambda), bw.beta);
}

// Layer time for one direction with the layer-level overlaps applied.
struct LayerPass {
  double total = 0;
  double compute = 0;
  double exposed_tp = 0;
  double exposed_cp = 0;
  double exposed_ep = 0;
};

LayerPass ComposeLayer(const std::vector<ModuleShape>& modules,
                       const std::vector<double>& compute,
                       const std::vector<double>& tp_times,
                       double t_cp, double t_ep, const ParallelPlan& plan,
                       const OptimizationSet& opts) {
  constexpr std::array<ModuleRole, 4> kTpPartners = {
      ModuleRole::kQkv, ModuleRole::kOProjection, ModuleRole::kMlpLinear1,
      ModuleRole::kMlpLinear2};
  LayerPass out;
  for (double c : compute) out.compute += c;

  std::vector<bool> used(modules.size(), false);
  for (size_t j = 0; j < tp_times.size(); ++j) {
    const ModuleRole partner = kTpPartners[j % kTpPartners.size()];
    double c = -1;
    for (size_t i = 0; i < modules.size(); ++i) {
      if (!used[i] && modules[i].role == partner) {
        used[i] = true;
        c = compute[i];
        break;
      }
    }
    if (c < 0) {
      out.exposed_tp += tp_times[j];
    } else if (opts.tp_overlap) {
      out.exposed_tp += TpOverlap(c, tp_times[j], opts.tp_overlap->split_count,
                                  opts.tp_overlap->coefficients) -
                        c;
    } else {
      out.exposed_tp += tp_times[j];
    }
  }

  if (opts.cp_overlap) {
    double t_att = 0;
    for (size_t i = 0; i < modules.size(); ++i) {
      if (IsAttentionCore(modules[i].role)) t_att += compute[i];
    }
    out.exposed_cp = CpOverlap(t_att, t_cp, plan.c, *opts.cp_overlap) - t_att;
  } else {
    out.exposed_cp = t_cp;
  }

  const double non_ep = out.compute + out.exposed_tp + out.exposed_cp;
  if (opts.ep_overlap) {
    out.total = EpOverlap(non_ep, t_ep, *opts.ep_overlap);
    out.exposed_ep = out.total - non_ep;
  } else {
    out.exposed_ep = t_ep;
    out.total = non_ep + t_ep;
  }
  return out;
}

}  // namespace

absl::StatusOr<Evaluation> EvaluatePlan(const ModelContext& ctx,
                                        const ParallelPlan& plan,
                                        const OptimizationSet& opts) {
  const ModelArchitecture& arch = ctx.arch;
  const HardwareSpec& hw = ctx.hw;
  RETURN_IF_ERROR(ValidatePlan(plan, arch.num_layers));
  RETURN_IF_ERROR(ValidateOptimizationSet(opts));
  ASSIGN_OR_RETURN(ModelDecomposition dec,
                   Decompose(arch, plan, ctx.dtypes.activation));
  const std::string signature = ShapeSignature(arch, plan);
  const int64_t l = plan.LayersPerChunk(arch.num_layers);
  const int64_t mb = plan.NumMicroBatches();

  Evaluation out;
  out.plan = plan;
  out.features = DescribeFeatures(opts);
  CostReport& cost = out.cost;

  // Per-module compute.
  std::vector<double> comp_fwd, comp_bwd;
  double t_qkv = 0, t_attention = 0, attention_act = 0;
  for (const ModuleShape& m : dec.layer) {
    ASSIGN_OR_RETURN(ModuleTimes mt, TimeModule(ctx, opts, m, signature));
    comp_fwd.push_back(mt.fwd);
    comp_bwd.push_back(mt.bwd);
    if (m.role == ModuleRole::kQkv) t_qkv += mt.fwd;
    if (IsAttentionCore(m.role)) {
      t_attention += mt.fwd;
      attention_act += m.act_bytes;
    }
  }
  ASSIGN_OR_RETURN(ModuleTimes embed,
                   TimeModule(ctx, opts, dec.embedding, signature));
  ASSIGN_OR_RETURN(ModuleTimes head, TimeModule(ctx, opts, dec.head, signature));

  // Per-layer collectives.
  const CommVolumeInputs vol_in{ctx.dtypes.activation, ctx.dtypes.grad, 0};
  std::vector<double> tp_times;
  const int n_tp = CollectivesPerLayer(CommPurpose::kTensorParallel, plan, arch);
  const double tp_bytes =
      CommVolume(CommPurpose::kTensorParallel, plan, arch, vol_in);
  for (int j = 0; j < n_tp; ++j) {
    const CollectiveKind kind = j % 2 == 0 ? CollectiveKind::kAllGather
                                           : CollectiveKind::kReduceScatter;
    ASSIGN_OR_RETURN(double tj,
                     TimeCollective(ctx, opts, CommPurpose::kTensorParallel,
                                    kind, plan.t, tp_bytes));
    tp_times.push_back(tj);
  }
  double t_cp = 0;
  if (int n = CollectivesPerLayer(CommPurpose::kContextRing, plan, arch); n > 0) {
    ASSIGN_OR_RETURN(
        double step,
        TimeCollective(ctx, opts, CommPurpose::kContextRing,
                       CollectiveKind::kP2p, plan.c,
                       CommVolume(CommPurpose::kContextRing, plan, arch, vol_in)));
    t_cp = n * step;
  }
  double t_ep = 0;
  if (int n = CollectivesPerLayer(CommPurpose::kExpertAllToAll, plan, arch);
      n > 0) {
    ASSIGN_OR_RETURN(
        double step,
        TimeCollective(
            ctx, opts, CommPurpose::kExpertAllToAll, CollectiveKind::kAllToAll,
            plan.e,
            CommVolume(CommPurpose::kExpertAllToAll, plan, arch, vol_in)));
    t_ep = n * step;
  }

  const LayerPass fwd =
      ComposeLayer(dec.layer, comp_fwd, tp_times, t_cp, t_ep, plan, opts);
  const LayerPass bwd =
      ComposeLayer(dec.layer, comp_bwd, tp_times, t_cp, t_ep, plan, opts);

  // Memory-level activation strategy, evaluated at the peak stage r_pp = 0.
  const double layer_act = SumActivationBytes(dec.layer);
  const ActivationMemory depth =
      ActivationMemoryAt(plan.v, plan.p, /*stage=*/0, layer_act);
  ActivationStrategyInputs act_in;
  act_in.factor = depth.factor;
  act_in.layer_act_bytes = layer_act;
  act_in.attention_act_bytes = attention_act;
  act_in.input_act_bytes = static_cast<double>(plan.micro_batch_size) *
                           static_cast<double>(arch.seq_len / plan.c) *
                           static_cast<double>(arch.hidden) *
                           ctx.dtypes.activation / plan.t;
  act_in.t_fwd = fwd.total;
  act_in.t_bwd = bwd.total;
  act_in.t_qkv = t_qkv;
  act_in.t_attention = t_attention;
  ASSIGN_OR_RETURN(ActivationStrategyResult act,
                   ApplyActivationStrategy(opts.activation, act_in,
                                           opts.offload, hw));
  cost.t_fwd = act.t_fwd;
  cost.t_bwd = act.t_bwd;

  // Pipeline.
  StageTimes stage;
  stage.fwd = cost.t_fwd;
  stage.bwd = cost.t_bwd;
  stage.embed_fwd = embed.fwd;
  stage.embed_bwd = embed.bwd;
  stage.head_fwd = head.fwd;
  stage.head_bwd = head.bwd;
  if (plan.p > 1) {
    ASSIGN_OR_RETURN(
        stage.pp,
        TimeCollective(ctx, opts, CommPurpose::kPipelineP2p,
                       CollectiveKind::kP2p, 2,
                       CommVolume(CommPurpose::kPipelineP2p, plan, arch, vol_in)));
  }
  stage.pp_steady =
      opts.pp_overlap
          ? PpOverlap(stage.pp, static_cast<double>(l) * cost.t_fwd,
                      *opts.pp_overlap)
          : stage.pp;
  const PipelinePhases phases =
      PipelineTime(stage, PipelineSchedule{plan.p, plan.v, l, mb});
  cost.t_warmup = phases.warmup;
  cost.t_steady = phases.steady;
  cost.t_cooldown = phases.cooldown;
  cost.t_pipeline = phases.total;
  if (phases.degenerate) {
    cost.warnings.push_back(absl::StrCat("degenerate pipeline: m_b=", mb,
                                         " < p=", plan.p));
  }
  // The phase formulas charge l*T_BWD (not v*l*T_BWD) per steady micro-batch,
  // so for v > 1 they can fall below the work a device must do.
  const double work = static_cast<double>(mb) * plan.v * l *
                      (cost.t_fwd + cost.t_bwd);
  if (phases.total < work) {
    cost.warnings.push_back(absl::StrCat(
        "T_Pipeline=", phases.total, " is below the per-device work ", work,
        " (interleaved steady phase undercounts backward passes)"));
  }

  // Optimizer.
  const double layer_params = SumParams(dec.layer);
  const double stage_params =
      static_cast<double>(plan.v) * static_cast<double>(l) * layer_params;
  if (plan.d > 1 && stage_params > 0) {
    if (opts.dp_overlap) {
      const double chunk_params = static_cast<double>(l) * layer_params;
      ASSIGN_OR_RETURN(
          double rs,
          TimeCollective(ctx, opts, CommPurpose::kDataParallel,
                         CollectiveKind::kReduceScatter, plan.d,
                         ctx.dtypes.grad * chunk_params));
      ASSIGN_OR_RETURN(
          double ag,
          TimeCollective(ctx, opts, CommPurpose::kDataParallel,
                         CollectiveKind::kAllGather, plan.d,
                         ctx.dtypes.param * chunk_params));
      const std::vector<double> rs_chunks(plan.v, rs), ag_chunks(plan.v, ag);
      ASSIGN_OR_RETURN(cost.t_dp,
                       DpOverlap(DpOverlapInputs{rs_chunks, ag_chunks,
                                                 cost.t_fwd, cost.t_bwd,
                                                 plan.p, l},
                                 *opts.dp_overlap));
    } else {
      ASSIGN_OR_RETURN(
          cost.t_dp,
          TimeCollective(ctx, opts, CommPurpose::kDataParallel,
                         CollectiveKind::kAllReduce, plan.d,
                         CommVolume(CommPurpose::kDataParallel, plan, arch,
                                    CommVolumeInputs{ctx.dtypes.activation,
                                                     ctx.dtypes.grad,
                                                     stage_params})));
    }
  }
  double base_update = 0;
  if (stage_params > 0) {
    const double p_opt = ApplyScaling(hw.optimizer_throughput,
                                      Lambda(opts.compute_scaling, "optimizer"));
    ASSIGN_OR_RETURN(base_update, OpTime(stage_params, p_opt));
  }
  MemoryReport memory =
      StaticMemory(ctx.dtypes, plan.v, l, layer_params);
  OptimizerStrategyInputs opt_in;
  opt_in.d = plan.d;
  opt_in.stage_params = stage_params;
  opt_in.layer_params = layer_params;
  opt_in.optimizer_bytes = memory.optimizer;
  opt_in.t_update = base_update;
  opt_in.dtypes = ctx.dtypes;
  ASSIGN_OR_RETURN(OptimizerStrategyResult opt_res,
                   ApplyOptimizerStrategy(opts.optimizer, opt_in, hw));
  cost.t_update = opt_res.t_update;
  cost.t_opt = cost.t_dp + cost.t_update;

  memory.optimizer = opt_res.optimizer_bytes;
  memory.m_sta = memory.params + memory.grads + memory.optimizer;
  memory.m_act = act.act_bytes;
  memory.m_peak = PeakMemory(memory.m_sta, memory.m_act);
  out.memory = memory;

  cost.t_step = StepTime(cost.t_pipeline, cost.t_opt);
  ASSIGN_OR_RETURN(double model_flops, ModelFlopsTotal(arch, plan));
  ASSIGN_OR_RETURN(cost.tflops, Tflops(model_flops, plan.WorldSize(),
                                       cost.t_step, ctx.convention));

  // Per-device attribution over one step: every micro-batch crosses v chunks
  // of l layers on each device.
  const double passes = static_cast<double>(mb) * plan.v * static_cast<double>(l);
  const double recompute =
      opts.activation == ActivationStrategy::kSelectiveRecompute ||
              opts.activation == ActivationStrategy::kFullRecompute
          ? cost.t_bwd - bwd.total
          : 0.0;
  cost.t_cal = passes * (fwd.compute + bwd.compute + recompute) +
               static_cast<double>(mb) *
                   (embed.fwd + embed.bwd + head.fwd + head.bwd);
  cost.t_tp = passes * (fwd.exposed_tp + bwd.exposed_tp);
  cost.t_cp = passes * (fwd.exposed_cp + bwd.exposed_cp);
  cost.t_ep = passes * (fwd.exposed_ep + bwd.exposed_ep);
  cost.t_pp = (phases.warmup_pp_terms + phases.cooldown_pp_terms) * stage.pp +
              phases.steady_pp_terms * stage.pp_steady;
  return out;
}

}  // namespace ptperf
