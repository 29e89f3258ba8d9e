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

#include "ptperf/arch.h"

#include <array>
#include <utility>

#include "absl/strings/str_cat.h"

namespace ptperf {
namespace {

constexpr std::array<std::pair<ModuleRole, std::string_view>, 12> kRoleNames{{
    {ModuleRole::kNorm, "norm"},
    {ModuleRole::kQkv, "qkv"},
    {ModuleRole::kAttentionMap, "attention-map"},
    {ModuleRole::kSoftmax, "softmax"},
    {ModuleRole::kAttentionOnValue, "attention-on-value"},
    {ModuleRole::kOProjection, "o-projection"},
    {ModuleRole::kRouter, "router"},
    {ModuleRole::kMlpLinear1, "mlp-linear-1"},
    {ModuleRole::kSwiglu, "swiglu"},
    {ModuleRole::kMlpLinear2, "mlp-linear-2"},
    {ModuleRole::kEmbedding, "embedding"},
    {ModuleRole::kHead, "head"},
}};

absl::Status ShapeError(std::string_view dim, int64_t value,
                        std::string_view by, int64_t divisor) {
  return absl::InvalidArgumentError(absl::StrCat("shape error: ", std::string(dim), "=",
                                                 value, " is not divisible by ",
                                                 std::string(by), "=", divisor));
}

ModuleShape Make(ModuleRole role, double flops, double act_bytes,
                 double params, bool expert = false) {
  return ModuleShape{std::string(ModuleRoleName(role)), role, flops, act_bytes,
                     params, expert};
}

}  // namespace

bool IsAttentionCore(ModuleRole role) {
  return role == ModuleRole::kAttentionMap || role == ModuleRole::kSoftmax ||
         role == ModuleRole::kAttentionOnValue;
}

std::string_view ModuleRoleName(ModuleRole role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "unknown";
}

absl::StatusOr<ModuleRole> ParseModuleRole(std::string_view name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown module role '", std::string(name),
                                                 "'"));
}

std::string_view AttentionKindName(AttentionKind kind) {
  switch (kind) {
    case AttentionKind::kMha:
      return "MHA";
    case AttentionKind::kGqa:
      return "GQA";
    case AttentionKind::kMlaPlugin:
      return "MLA-plugin";
  }
  return "MHA";
}

absl::StatusOr<AttentionKind> ParseAttentionKind(std::string_view name) {
  if (name == "MHA") return AttentionKind::kMha;
  if (name == "GQA") return AttentionKind::kGqa;
  if (name == "MLA" || name == "MLA-plugin") return AttentionKind::kMlaPlugin;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown attention type '", std::string(name), "'"));
}

absl::Status ValidateArchitecture(const ModelArchitecture& arch) {
  if (arch.num_layers < 0 || arch.hidden <= 0 || arch.seq_len < 0 ||
      arch.heads <= 0 || arch.vocab <= 0 || arch.dense_ffn < 0) {
    return absl::InvalidArgumentError(
        "model: h, a, V must be > 0 and L, s, g_d must be >= 0");
  }
  if (arch.attention == AttentionKind::kGqa) {
    if (!arch.query_groups || *arch.query_groups <= 0) {
      return absl::InvalidArgumentError("model: GQA requires q > 0");
    }
    if (arch.heads % *arch.query_groups != 0) {
      return ShapeError("a", arch.heads, "q", *arch.query_groups);
    }
  }
  if (arch.attention == AttentionKind::kMlaPlugin &&
      arch.attention_override.empty()) {
    return absl::InvalidArgumentError(
        "model: MLA-plugin attention requires an attention_override table");
  }
  if (arch.structure == StructureKind::kMoe) {
    if (!arch.expert_ffn || !arch.top_k || !arch.num_experts) {
      return absl::InvalidArgumentError(
          "model: MoE requires g_e, t_k and n_experts");
    }
    if (*arch.top_k < 1 || *arch.top_k > *arch.num_experts) {
      return absl::InvalidArgumentError(absl::StrCat(
          "model: t_k=", *arch.top_k, " must be in [1, n_experts=",
          *arch.num_experts, "]"));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ModelDecomposition> Decompose(const ModelArchitecture& arch,
                                             const ParallelPlan& plan,
                                             double act_dtype_bytes) {
  if (absl::Status s = ValidateArchitecture(arch); !s.ok()) return s;
  if (plan.t < 1 || plan.c < 1 || plan.e < 1 || plan.micro_batch_size < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid plan for decomposition: ", plan.ToString()));
  }
  if (arch.seq_len % plan.c != 0) return ShapeError("s", arch.seq_len, "c", plan.c);
  if (arch.hidden % plan.t != 0) return ShapeError("h", arch.hidden, "t", plan.t);
  if (arch.heads % plan.t != 0) return ShapeError("a", arch.heads, "t", plan.t);
  if (arch.vocab % plan.t != 0) return ShapeError("V", arch.vocab, "t", plan.t);
  if (arch.dense_ffn % plan.t != 0) {
    return ShapeError("g_d", arch.dense_ffn, "t", plan.t);
  }
  if (arch.attention == AttentionKind::kGqa &&
      *arch.query_groups % plan.t != 0) {
    return ShapeError("q", *arch.query_groups, "t", plan.t);
  }
  const bool moe = arch.structure == StructureKind::kMoe;
  if (moe) {
    if (*arch.expert_ffn % plan.t != 0) {
      return ShapeError("g_e", *arch.expert_ffn, "t", plan.t);
    }
    if (*arch.num_experts % plan.e != 0) {
      return ShapeError("n_experts", *arch.num_experts, "e", plan.e);
    }
  }

  const double b = static_cast<double>(plan.micro_batch_size);
  const double s = static_cast<double>(arch.seq_len / plan.c);
  const double h = static_cast<double>(arch.hidden);
  const double a = static_cast<double>(arch.heads);
  const double vocab = static_cast<double>(arch.vocab);
  const double t = plan.t;
  const double w = act_dtype_bytes;
  const double bsh = b * s * h;

  ModelDecomposition out;
  std::vector<ModuleShape>& layer = out.layer;

  // Attention block.
  layer.push_back(Make(ModuleRole::kNorm, bsh / t, 2 * bsh * w / t, h / t));
  if (arch.attention == AttentionKind::kMlaPlugin) {
    for (const ModuleOverride& o : arch.attention_override) {
      layer.push_back(ModuleShape{o.name, o.role, o.flops_per_token * b * s / t,
                                  o.act_elements_per_token * b * s * w / t,
                                  o.params / t, false});
    }
  } else {
    // K and V projections shrink by q/a under GQA; q == a recovers MHA.
    const double kv_ratio = arch.attention == AttentionKind::kGqa
                                ? static_cast<double>(*arch.query_groups) / a
                                : 1.0;
    layer.push_back(Make(ModuleRole::kQkv, (2 + 4 * kv_ratio) * bsh * h / t,
                         2 * bsh * w / t, (1 + 2 * kv_ratio) * h * h / t));
    layer.push_back(Make(ModuleRole::kAttentionMap, 2 * b * s * s * h / t,
                         6 * bsh * w / t, 0));
    layer.push_back(
        Make(ModuleRole::kSoftmax, 0, 2 * b * s * s * w / t, 0));
    layer.push_back(Make(ModuleRole::kAttentionOnValue, 2 * b * s * s * h / t,
                         2 * b * s * s * w / t, 0));
    layer.push_back(
        Make(ModuleRole::kOProjection, 2 * bsh * h / t, 2 * bsh * w / t,
             h * h / t));
  }
  layer.push_back(Make(ModuleRole::kNorm, bsh / t, 2 * bsh * w / t, h / t));

  // MLP block.
  if (moe) {
    const double ge = static_cast<double>(*arch.expert_ffn);
    const double gd = static_cast<double>(arch.dense_ffn);
    const double topk = static_cast<double>(*arch.top_k);
    const double experts = static_cast<double>(*arch.num_experts);
    const double shard = t * plan.e;
    const double g_linear1 = arch.moe_linear1_uses_expert_ffn ? ge : gd;
    layer.push_back(
        Make(ModuleRole::kRouter, 0, 0, h * experts / shard, /*expert=*/true));
    layer.push_back(Make(ModuleRole::kMlpLinear1,
                         4 * bsh * g_linear1 * topk / t, 2 * bsh * w / t,
                         experts * 2 * h * ge / shard, /*expert=*/true));
    layer.push_back(Make(ModuleRole::kSwiglu, b * s * ge * topk / t,
                         b * s * ge * w / t, 0, /*expert=*/true));
    layer.push_back(Make(ModuleRole::kMlpLinear2, 2 * bsh * ge * topk / t,
                         b * s * ge * w / t, experts * ge * h / shard,
                         /*expert=*/true));
  } else {
    const double gd = static_cast<double>(arch.dense_ffn);
    layer.push_back(Make(ModuleRole::kMlpLinear1, 4 * bsh * gd / t,
                         2 * bsh * w / t, 2 * h * gd / t));
    layer.push_back(
        Make(ModuleRole::kSwiglu, b * s * gd / t, b * s * gd * w / t, 0));
    layer.push_back(Make(ModuleRole::kMlpLinear2, 2 * bsh * gd / t,
                         b * s * gd * w / t, gd * h / t));
  }

  out.embedding =
      Make(ModuleRole::kEmbedding, bsh / t, 2 * bsh * w / t, vocab * h / t);
  out.head =
      Make(ModuleRole::kHead, 2 * bsh * vocab / t, bsh * w / t, vocab * h / t);
  return out;
}

double SumFlops(std::span<const ModuleShape> modules) {
  double total = 0;
  for (const ModuleShape& m : modules) total += m.flops_fwd;
  return total;
}

double SumActivationBytes(std::span<const ModuleShape> modules) {
  double total = 0;
  for (const ModuleShape& m : modules) total += m.act_bytes;
  return total;
}

double SumParams(std::span<const ModuleShape> modules) {
  double total = 0;
  for (const ModuleShape& m : modules) total += m.param_count;
  return total;
}

absl::StatusOr<double> LayerFlopsTotal(const ModelArchitecture& arch,
                                       const ParallelPlan& plan) {
  absl::StatusOr<ModelDecomposition> dec = Decompose(arch, plan);
  if (!dec.ok()) return dec.status();
  return SumFlops(dec->layer);
}

double ModelFlopsTotal(double embed_flops, double head_flops,
                       double layer_flops, int64_t num_layers,
                       int64_t micro_batches, int d) {
  return (embed_flops + head_flops +
          static_cast<double>(num_layers) * layer_flops) *
         static_cast<double>(micro_batches) * d;
}

absl::StatusOr<double> ModelFlopsTotal(const ModelArchitecture& arch,
                                       const ParallelPlan& plan) {
  // Whole-model work: no sharding, full sequence.
  ParallelPlan unsharded = plan;
  unsharded.t = unsharded.c = unsharded.e = 1;
  absl::StatusOr<ModelDecomposition> dec = Decompose(arch, unsharded);
  if (!dec.ok()) return dec.status();
  return ModelFlopsTotal(dec->embedding.flops_fwd, dec->head.flops_fwd,
                         SumFlops(dec->layer), arch.num_layers,
                         plan.NumMicroBatches(), plan.d);
}

absl::StatusOr<double> ActivationBytesPerLayer(const ModelArchitecture& arch,
                                               const ParallelPlan& plan,
                                               double dtype_bytes) {
  absl::StatusOr<ModelDecomposition> dec = Decompose(arch, plan, dtype_bytes);
  if (!dec.ok()) return dec.status();
  return SumActivationBytes(dec->layer);
}

std::string ShapeSignature(const ModelArchitecture& arch,
                           const ParallelPlan& plan) {
  return absl::StrCat("b", plan.micro_batch_size, "_s",
                      arch.seq_len / plan.c, "_h", arch.hidden, "_t", plan.t);
}

}  // namespace ptperf
