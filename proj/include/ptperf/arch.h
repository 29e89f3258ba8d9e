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

#ifndef PTPERF_ARCH_H_
#define PTPERF_ARCH_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "ptperf/parallel_plan.h"

namespace ptperf {

enum class AttentionKind { kMha, kGqa, kMlaPlugin };
enum class StructureKind { kDense, kMoe };

// Role of a module inside a transformer layer. Overlap and recompute rules
// select modules by role rather than by name.
enum class ModuleRole {
  kNorm,
  kQkv,
  kAttentionMap,
  kSoftmax,
  kAttentionOnValue,
  kOProjection,
  kRouter,
  kMlpLinear1,
  kSwiglu,
  kMlpLinear2,
  kEmbedding,
  kHead,
};

// Attention-core modules are the ones ring attention overlaps and selective
// recompute replays.
bool IsAttentionCore(ModuleRole role);

// Per-token coefficients for one module of a user-described attention block
// (used for MLA, whose FLOPs the built-in table does not cover).
struct ModuleOverride {
  std::string name;
  ModuleRole role = ModuleRole::kAttentionMap;
  double flops_per_token = 0;
  double act_elements_per_token = 0;
  double params = 0;
};

struct ModelArchitecture {
  std::string name;
  int64_t num_layers = 0;      // L
  int64_t hidden = 0;          // h
  int64_t seq_len = 0;         // s
  int64_t heads = 0;           // a
  std::optional<int64_t> query_groups;  // q (GQA)
  int64_t dense_ffn = 0;       // g_d
  std::optional<int64_t> expert_ffn;   // g_e
  std::optional<int64_t> top_k;        // t_k
  std::optional<int64_t> num_experts;
  std::optional<int64_t> mla_rank;     // r
  int64_t vocab = 0;           // V
  AttentionKind attention = AttentionKind::kMha;
  StructureKind structure = StructureKind::kDense;

  // Replaces the qkv..o-projection rows when attention == kMlaPlugin.
  std::vector<ModuleOverride> attention_override;
  // MoE linear-1 is sized with g_d by default. Set to size it with g_e.
  bool moe_linear1_uses_expert_ffn = false;
};

absl::Status ValidateArchitecture(const ModelArchitecture& arch);

// Costs of one module for one micro-batch on one device.
struct ModuleShape {
  std::string name;
  ModuleRole role = ModuleRole::kNorm;
  double flops_fwd = 0;
  double act_bytes = 0;
  double param_count = 0;
  // Expert weights are sharded across the EP group as well as the TP group.
  bool expert = false;
};

struct ModelDecomposition {
  std::vector<ModuleShape> layer;  // m_n entries
  ModuleShape embedding;
  ModuleShape head;
};

// Evaluates the per-module breakdown at b = m_bs and local sequence s/c with
// TP-sharded FLOPs, activations and weights (experts additionally by e).
absl::StatusOr<ModelDecomposition> Decompose(const ModelArchitecture& arch,
                                             const ParallelPlan& plan,
                                             double act_dtype_bytes = 2.0);

double SumFlops(std::span<const ModuleShape> modules);
double SumActivationBytes(std::span<const ModuleShape> modules);
double SumParams(std::span<const ModuleShape> modules);

absl::StatusOr<double> LayerFlopsTotal(const ModelArchitecture& arch,
                                       const ParallelPlan& plan);

// Forward FLOPs of the whole (unsharded) model for one global batch:
// (embed + head + L * layer) * m_b * d.
double ModelFlopsTotal(double embed_flops, double head_flops,
                       double layer_flops, int64_t num_layers,
                       int64_t micro_batches, int d);
absl::StatusOr<double> ModelFlopsTotal(const ModelArchitecture& arch,
                                       const ParallelPlan& plan);

absl::StatusOr<double> ActivationBytesPerLayer(const ModelArchitecture& arch,
                                               const ParallelPlan& plan,
                                               double dtype_bytes);

// Shape key used to look up measured throughputs, e.g. "b1_s4096_h8192_t8".
std::string ShapeSignature(const ModelArchitecture& arch,
                           const ParallelPlan& plan);

std::string_view AttentionKindName(AttentionKind kind);
absl::StatusOr<AttentionKind> ParseAttentionKind(std::string_view name);
std::string_view ModuleRoleName(ModuleRole role);
absl::StatusOr<ModuleRole> ParseModuleRole(std::string_view name);

}  // namespace ptperf

#endif  // PTPERF_ARCH_H_
