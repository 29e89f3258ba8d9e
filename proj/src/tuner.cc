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

#include "ptperf/tuner.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <typename T>
std::vector<T> PowersOfTwo(T limit) {
  std::vector<T> out;
  for (T x = 1; x <= limit; x *= 2) out.push_back(x);
  return out;
}

std::vector<int> Divisors(int64_t n) {
  std::vector<int> out;
  for (int64_t k = 1; k <= n; ++k) {
    if (n % k == 0) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<int> VCandidates(const SearchSpace& space, int64_t num_layers,
                             int p) {
  if (!space.v.empty()) return space.v;
  if (num_layers % p != 0) return {1};
  return Divisors(num_layers / p);
}

std::vector<OptimizationSet> Allowlist(const SearchSpace& space) {
  if (space.optimizations.empty()) return {OptimizationSet{}};
  return space.optimizations;
}

PruneLimits LimitsFor(const ModelContext& ctx, const SearchSpace& space) {
  return PruneLimits{space.num_gpus, space.global_batch_size,
                     ctx.hw.gpus_per_node, ctx.arch.num_layers};
}

// Evaluates one surviving tuple and applies the memory constraint.
void Evaluate(const ModelContext& ctx, Candidate& cand) {
  absl::StatusOr<Evaluation> ev = EvaluatePlan(ctx, cand.plan, cand.opts);
  if (!ev.ok()) {
    const std::string msg(ev.status().message());
    cand.rejection = msg.rfind("shape error", 0) == 0 ? Rejection::kShape
                                                      : Rejection::kEvaluation;
    cand.detail = msg;
    return;
  }
  cand.cost = ev->cost;
  cand.memory = ev->memory;
  cand.features = ev->features;
  if (!(cand.memory.m_peak <= ctx.hw.gpu_memory)) {
    cand.rejection = Rejection::kMemory;
    cand.detail = absl::StrCat("peak memory ", cand.memory.m_peak,
                               " B exceeds ", ctx.hw.gpu_memory, " B");
    return;
  }
  cand.feasible = true;
}

void EvaluateAll(const ModelContext& ctx, std::vector<Candidate>& cands,
                 int workers) {
  workers = std::clamp<int>(workers, 1,
                            std::max<int>(1, static_cast<int>(cands.size())));
  if (workers == 1) {
    for (Candidate& c : cands) Evaluate(ctx, c);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < cands.size(); i = next++) {
        Evaluate(ctx, cands[i]);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// Folds evaluated candidates into `result` and keeps the top-k.
void Rank(std::vector<Candidate>& cands, int top_k, TuneResult& result) {
  result.evaluated += static_cast<int64_t>(cands.size());
  std::vector<Candidate> feasible;
  for (Candidate& c : cands) {
    if (c.feasible) {
      feasible.push_back(std::move(c));
    } else {
      ++result.rejections[c.rejection];
    }
  }
  result.feasible = static_cast<int64_t>(feasible.size());
  std::sort(feasible.begin(), feasible.end(), CandidateLess);
  if (top_k > 0 && static_cast<int64_t>(feasible.size()) > top_k) {
    feasible.resize(top_k);
  }
  result.ranked = std::move(feasible);
}

// Raw tuples below a DFS node whose first `depth` dimensions are fixed.
int64_t SubtreeSize(const SearchSpace& space, int64_t num_layers, int depth,
                    std::optional<int> p) {
  const int64_t opts = static_cast<int64_t>(Allowlist(space).size());
  int64_t fixed = opts;
  const std::vector<size_t> sizes = {space.t.size(), space.c.size(),
                                     space.p.size(), space.e.size(),
                                     space.d.size(),
                                     space.micro_batch_size.size()};
  for (int k = depth; k < 6; ++k) {
    if (k != 2) fixed *= static_cast<int64_t>(sizes[k]);
  }
  if (depth >= 7) return opts;
  if (depth > 2) {
    return fixed * static_cast<int64_t>(VCandidates(space, num_layers, *p).size());
  }
  int64_t total = 0;
  for (int pv : space.p) {
    total += static_cast<int64_t>(VCandidates(space, num_layers, pv).size());
  }
  return fixed * total;
}

}  // namespace

std::string_view RejectionName(Rejection r) {
  switch (r) {
    case Rejection::kNone:
      return "none";
    case Rejection::kResource:
      return "resource";
    case Rejection::kBatchDivisibility:
      return "batch-divisibility";
    case Rejection::kTooFewMicroBatches:
      return "too-few-micro-batches";
    case Rejection::kTensorExceedsNode:
      return "tensor-exceeds-node";
    case Rejection::kLayerDivisibility:
      return "layer-divisibility";
    case Rejection::kInterleaving:
      return "interleaving";
    case Rejection::kShape:
      return "shape";
    case Rejection::kMemory:
      return "memory";
    case Rejection::kEvaluation:
      return "evaluation";
  }
  return "?";
}

absl::Status ValidateSearchSpace(const SearchSpace& space) {
  if (space.num_gpus < 1) {
    return absl::InvalidArgumentError("search space: g_n must be >= 1");
  }
  if (space.global_batch_size < 1) {
    return absl::InvalidArgumentError("search space: g_bs must be >= 1");
  }
  auto check = [](const auto& values, std::string_view name) -> absl::Status {
    if (values.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("search space: no candidates for ", std::string(name)));
    }
    for (auto x : values) {
      if (x < 1) {
        return absl::InvalidArgumentError(absl::StrCat(
            "search space: ", std::string(name), " candidates must be >= 1"));
      }
    }
    return absl::OkStatus();
  };
  RETURN_IF_ERROR(check(space.t, "t"));
  RETURN_IF_ERROR(check(space.c, "c"));
  RETURN_IF_ERROR(check(space.p, "p"));
  RETURN_IF_ERROR(check(space.e, "e"));
  RETURN_IF_ERROR(check(space.d, "d"));
  RETURN_IF_ERROR(check(space.micro_batch_size, "m_bs"));
  if (!space.v.empty()) RETURN_IF_ERROR(check(space.v, "v"));
  for (const OptimizationSet& o : space.optimizations) {
    RETURN_IF_ERROR(ValidateOptimizationSet(o));
  }
  return absl::OkStatus();
}

SearchSpace DefaultSearchSpace(const ModelArchitecture& arch,
                               const HardwareSpec& hw, int64_t num_gpus,
                               int64_t global_batch_size) {
  SearchSpace s;
  s.num_gpus = num_gpus;
  s.global_batch_size = global_batch_size;
  const int64_t node = hw.gpus_per_node > 0 ? hw.gpus_per_node : num_gpus;
  const int experts =
      arch.structure == StructureKind::kMoe && arch.num_experts
          ? static_cast<int>(*arch.num_experts)
          : 1;
  s.t = PowersOfTwo<int>(static_cast<int>(std::min(node, num_gpus)));
  s.c = PowersOfTwo<int>(static_cast<int>(num_gpus));
  s.p = PowersOfTwo<int>(
      static_cast<int>(std::min<int64_t>(arch.num_layers, num_gpus)));
  s.e = PowersOfTwo<int>(std::min<int>(experts, static_cast<int>(num_gpus)));
  s.d = PowersOfTwo<int>(static_cast<int>(num_gpus));
  s.micro_batch_size = PowersOfTwo<int64_t>(global_batch_size);
  return s;
}

std::vector<OptimizationSet> DefaultAllowlist() {
  std::vector<OptimizationSet> out;
  for (OptimizerStrategy o : {OptimizerStrategy::kNone,
                              OptimizerStrategy::kDistributed,
                              OptimizerStrategy::kCpu}) {
    for (ActivationStrategy a :
         {ActivationStrategy::kNone, ActivationStrategy::kSelectiveRecompute,
          ActivationStrategy::kFullRecompute, ActivationStrategy::kOffload}) {
      OptimizationSet s;
      s.name = absl::StrCat(std::string(OptimizerStrategyName(o)), "/",
                            std::string(ActivationStrategyName(a)));
      s.tp_overlap = TpOverlapConfig{};
      s.cp_overlap = OverlapCoefficients{};
      s.ep_overlap = OverlapCoefficients{};
      s.pp_overlap = OverlapCoefficients{};
      s.dp_overlap = DpOverlapConfig{};
      s.optimizer = o;
      s.activation = a;
      out.push_back(std::move(s));
    }
  }
  return out;
}

PruneVerdict Prune(const PartialPlan& x, const PruneLimits& lim) {
  // Rules are checked level by level in DFS order so a full assignment gets
  // the same reason the search would have pruned it with.
  int64_t product = 1;
  auto over = [&](std::optional<int> dim) {
    if (!dim) return false;
    product *= *dim;
    return product > lim.num_gpus;
  };
  if (!x.t) return {};
  if (over(x.t)) return {Rejection::kResource};
  if (lim.gpus_per_node > 0 && *x.t > lim.gpus_per_node) {
    return {Rejection::kTensorExceedsNode};
  }
  for (const auto& dim : {x.c, x.p, x.e, x.d}) {
    if (!dim) return {};
    if (over(dim)) return {Rejection::kResource};
  }
  if (!x.micro_batch_size) return {};
  const int64_t m_bs = *x.micro_batch_size;
  if (m_bs > lim.global_batch_size ||
      lim.global_batch_size % (m_bs * *x.d) != 0) {
    return {Rejection::kBatchDivisibility};
  }
  if (lim.global_batch_size / m_bs < *x.p) {
    return {Rejection::kTooFewMicroBatches};
  }
  if (!x.v) return {};
  if (lim.num_layers % (static_cast<int64_t>(*x.p) * *x.v) != 0) {
    return {Rejection::kLayerDivisibility};
  }
  if (*x.v > 1 && *x.p == 1) return {Rejection::kInterleaving};
  return {};
}

bool CandidateLess(const Candidate& a, const Candidate& b) {
  if (a.cost.t_step != b.cost.t_step) return a.cost.t_step < b.cost.t_step;
  if (PlanLess(a.plan, b.plan)) return true;
  if (PlanLess(b.plan, a.plan)) return false;
  return a.opts_index < b.opts_index;
}

absl::StatusOr<TuneResult> TuneStep(const ModelContext& ctx,
                                    const SearchSpace& space,
                                    const TuneOptions& options) {
  RETURN_IF_ERROR(ValidateSearchSpace(space));
  const PruneLimits lim = LimitsFor(ctx, space);
  const int64_t layers = ctx.arch.num_layers;
  const std::vector<OptimizationSet> allow = Allowlist(space);
  TuneResult result;
  result.raw_candidates = SubtreeSize(space, layers, 0, std::nullopt);

  std::vector<Candidate> survivors;
  PartialPlan x;
  // Returns true when the node survives; otherwise books its subtree.
  auto admit = [&](int depth) {
    PruneVerdict verdict = Prune(x, lim);
    if (verdict.accepted()) return true;
    result.rejections[verdict.reason] += SubtreeSize(space, layers, depth, x.p);
    return false;
  };

  for (int t : space.t) {
    x = PartialPlan{};
    x.t = t;
    if (!admit(1)) continue;
    for (int c : space.c) {
      x.c = c;
      x.p.reset(), x.e.reset(), x.d.reset(), x.micro_batch_size.reset(),
          x.v.reset();
      if (!admit(2)) continue;
      for (int p : space.p) {
        x.p = p;
        x.e.reset(), x.d.reset(), x.micro_batch_size.reset(), x.v.reset();
        if (!admit(3)) continue;
        for (int e : space.e) {
          x.e = e;
          x.d.reset(), x.micro_batch_size.reset(), x.v.reset();
          if (!admit(4)) continue;
          for (int d : space.d) {
            x.d = d;
            x.micro_batch_size.reset(), x.v.reset();
            if (!admit(5)) continue;
            for (int64_t m_bs : space.micro_batch_size) {
              x.micro_batch_size = m_bs;
              x.v.reset();
              if (!admit(6)) continue;
              for (int v : VCandidates(space, layers, p)) {
                x.v = v;
                if (!admit(7)) continue;
                for (size_t k = 0; k < allow.size(); ++k) {
                  Candidate cand;
                  cand.plan = ParallelPlan{t, c, p, e, d, m_bs,
                                           space.global_batch_size, v};
                  cand.opts = allow[k];
                  cand.opts_index = static_cast<int>(k);
                  survivors.push_back(std::move(cand));
                }
              }
            }
          }
        }
      }
    }
  }
  EvaluateAll(ctx, survivors, options.workers);
  Rank(survivors, options.top_k, result);
  return result;
}

absl::StatusOr<TuneResult> TuneStepExhaustive(const ModelContext& ctx,
                                              const SearchSpace& space,
                                              const TuneOptions& options) {
  RETURN_IF_ERROR(ValidateSearchSpace(space));
  const int64_t layers = ctx.arch.num_layers;
  const int64_t g_bs = space.global_batch_size;
  const int node = ctx.hw.gpus_per_node;
  const std::vector<OptimizationSet> allow = Allowlist(space);
  TuneResult result;
  std::vector<Candidate> all;
  for (int t : space.t)
    for (int c : space.c)
      for (int p : space.p)
        for (int e : space.e)
          for (int d : space.d)
            for (int64_t m_bs : space.micro_batch_size)
              for (int v : VCandidates(space, layers, p))
                for (size_t k = 0; k < allow.size(); ++k) {
                  ++result.raw_candidates;
                  const ParallelPlan plan{t, c, p, e, d, m_bs, g_bs, v};
                  Rejection why = Rejection::kNone;
                  if (plan.WorldSize() > space.num_gpus) {
                    why = Rejection::kResource;
                  } else if (node > 0 && t > node) {
                    why = Rejection::kTensorExceedsNode;
                  } else if (m_bs > g_bs || g_bs % (m_bs * d) != 0) {
                    why = Rejection::kBatchDivisibility;
                  } else if (g_bs / m_bs < p) {
                    why = Rejection::kTooFewMicroBatches;
                  } else if (layers % (static_cast<int64_t>(p) * v) != 0) {
                    why = Rejection::kLayerDivisibility;
                  } else if (v > 1 && p == 1) {
                    why = Rejection::kInterleaving;
                  }
                  if (why != Rejection::kNone) {
                    ++result.rejections[why];
                    continue;
                  }
                  Candidate cand;
                  cand.plan = plan;
                  cand.opts = allow[k];
                  cand.opts_index = static_cast<int>(k);
                  all.push_back(std::move(cand));
                }
  EvaluateAll(ctx, all, options.workers);
  Rank(all, options.top_k, result);
  return result;
}

absl::StatusOr<E2eResult> TuneE2e(const ModelContext& ctx,
                                  const SearchSpace& space,
                                  const FaultModel& fault,
                                  const CheckpointPolicy& policy,
                                  const TuneOptions& options) {
  RETURN_IF_ERROR(ValidateFaultModel(fault));
  TuneOptions all = options;
  all.top_k = 0;
  E2eResult out;
  ASSIGN_OR_RETURN(out.step, TuneStep(ctx, space, all));

  // G is increasing in T_step for fixed fault inputs, so ranking by G after
  // the step search loses nothing.
  for (const Candidate& cand : out.step.ranked) {
    E2eCandidate row;
    row.candidate = cand;
    CheckpointPolicy pol = policy;
    pol.t_step = cand.cost.t_step;
    absl::StatusOr<IntervalChoice> choice =
        OptimalCheckpointInterval(fault, pol);
    if (!choice.ok() || choice->no_optimum) {
      row.fault_feasible = false;
      row.e2e = kInf;
      row.note = choice.ok() ? choice->note
                             : std::string(choice.status().message());
      if (choice.ok()) row.interval = *choice;
      out.ranked.push_back(std::move(row));
      continue;
    }
    row.interval = *choice;
    row.ettr = choice->ettr;
    row.e2e = choice->e2e;
    row.note = choice->note;
    out.ranked.push_back(std::move(row));
  }
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const E2eCandidate& a, const E2eCandidate& b) {
                     if (a.fault_feasible != b.fault_feasible) {
                       return a.fault_feasible;
                     }
                     if (a.e2e != b.e2e) return a.e2e < b.e2e;
                     return CandidateLess(a.candidate, b.candidate);
                   });
  if (options.top_k > 0 &&
      static_cast<int64_t>(out.ranked.size()) > options.top_k) {
    out.ranked.resize(options.top_k);
  }
  std::vector<Candidate> step_top = std::move(out.step.ranked);
  if (options.top_k > 0 &&
      static_cast<int64_t>(step_top.size()) > options.top_k) {
    step_top.resize(options.top_k);
  }
  out.step.ranked = std::move(step_top);
  return out;
}

namespace {

absl::StatusOr<int64_t> ParseInt(std::string_view parameter,
                                 const std::string& value) {
  int64_t x = 0;
  if (!absl::SimpleAtoi(value, &x) || x < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("sweep ", std::string(parameter),
                     ": expected a positive integer, got '", value, "'"));
  }
  return x;
}

absl::StatusOr<double> ParseDouble(std::string_view parameter,
                                   const std::string& value) {
  double x = 0;
  if (!absl::SimpleAtod(value, &x)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "sweep ", std::string(parameter), ": expected a number, got '", value,
        "'"));
  }
  return x;
}

}  // namespace

absl::StatusOr<std::vector<SweepRow>> SweepStrategy(
    const ModelContext& ctx, const SearchSpace& space,
    std::string_view parameter, const std::vector<std::string>& values,
    const TuneOptions& options) {
  static const std::vector<std::string_view> kKnown = {
      "v",   "t",   "c",    "p",   "e",   "d",   "m_bs",
      "g_bs", "g_n", "gpus_per_node", "optimizer", "activation",
      "dp_overlap"};
  if (std::find(kKnown.begin(), kKnown.end(), parameter) == kKnown.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown sweep parameter '", std::string(parameter),
                     "'"));
  }
  TuneOptions top1 = options;
  top1.top_k = 1;
  std::vector<SweepRow> rows;
  std::optional<std::pair<double, int64_t>> reference;  // (T_step, g_n)
  for (const std::string& value : values) {
    SearchSpace s = space;
    ModelContext c = ctx;
    std::vector<OptimizationSet> allow = Allowlist(space);
    if (parameter == "optimizer" || parameter == "activation") {
      std::vector<OptimizationSet> kept;
      if (parameter == "optimizer") {
        ASSIGN_OR_RETURN(OptimizerStrategy o, ParseOptimizerStrategy(value));
        for (const auto& a : allow) {
          if (a.optimizer == o) kept.push_back(a);
        }
        if (kept.empty()) {
          kept.push_back(allow.front());
          kept.back().optimizer = o;
        }
      } else {
        ASSIGN_OR_RETURN(ActivationStrategy a, ParseActivationStrategy(value));
        for (const auto& o : allow) {
          if (o.activation == a) kept.push_back(o);
        }
        if (kept.empty()) {
          kept.push_back(allow.front());
          kept.back().activation = a;
        }
      }
      s.optimizations = kept;
    } else if (parameter == "dp_overlap") {
      if (value != "on" && value != "off") {
        return absl::InvalidArgumentError(
            "sweep dp_overlap: values must be 'on' or 'off'");
      }
      for (auto& a : allow) {
        if (value == "off") {
          a.dp_overlap.reset();
        } else if (!a.dp_overlap) {
          a.dp_overlap = DpOverlapConfig{};
        }
      }
      s.optimizations = allow;
    } else {
      ASSIGN_OR_RETURN(int64_t x, ParseInt(parameter, value));
      const int xi = static_cast<int>(x);
      if (parameter == "v") s.v = {xi};
      if (parameter == "t") s.t = {xi};
      if (parameter == "c") s.c = {xi};
      if (parameter == "p") s.p = {xi};
      if (parameter == "e") s.e = {xi};
      if (parameter == "d") s.d = {xi};
      if (parameter == "m_bs") s.micro_batch_size = {x};
      if (parameter == "g_bs") s.global_batch_size = x;
      if (parameter == "g_n") s.num_gpus = x;
      if (parameter == "gpus_per_node") c.hw.gpus_per_node = xi;
    }
    ASSIGN_OR_RETURN(TuneResult r, TuneStep(c, s, top1));
    SweepRow row;
    row.value = value;
    if (r.ranked.empty()) {
      row.note = "no feasible candidate";
    } else {
      row.best = r.ranked.front();
      if (parameter == "g_n") {
        const double t = row.best->cost.t_step;
        if (!reference) reference.emplace(t, s.num_gpus);
        // Ideal strong scaling from the first row over the observed time.
        ASSIGN_OR_RETURN(
            row.linearity,
            Linearity(reference->first * static_cast<double>(reference->second) /
                          static_cast<double>(s.num_gpus),
                      t));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

absl::StatusOr<std::vector<SweepRow>> SweepFault(
    const FaultModel& fault, const CheckpointPolicy& policy,
    std::string_view parameter, const std::vector<std::string>& values) {
  static const std::vector<std::string_view> kKnown = {
      "r_f", "nodes", "u_b", "t_save", "interval"};
  if (std::find(kKnown.begin(), kKnown.end(), parameter) == kKnown.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown sweep parameter '", std::string(parameter),
                     "'"));
  }
  std::vector<SweepRow> rows;
  for (const std::string& value : values) {
    FaultModel f = fault;
    CheckpointPolicy pol = policy;
    if (parameter == "nodes") {
      ASSIGN_OR_RETURN(f.num_nodes, ParseInt(parameter, value));
    } else if (parameter == "interval") {
      ASSIGN_OR_RETURN(pol.interval, ParseInt(parameter, value));
    } else {
      ASSIGN_OR_RETURN(double x, ParseDouble(parameter, value));
      if (parameter == "r_f") f.failures_per_node_day = x;
      if (parameter == "u_b") f.mean_repair = x;
      if (parameter == "t_save") pol.t_save = x;
    }
    SweepRow row;
    row.value = value;
    row.interval = pol.interval;
    absl::StatusOr<double> ettr = EttrClosedForm(f, pol);
    if (!ettr.ok()) {
      if (!absl::IsFailedPrecondition(ettr.status())) return ettr.status();
      row.note = std::string(ettr.status().message());
    } else {
      row.ettr = *ettr;
      ASSIGN_OR_RETURN(row.e2e, E2eObjective(f, pol));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

absl::StatusOr<double> Linearity(double t_step_small, double t_step_large) {
  if (!(t_step_small > 0) || !(t_step_large > 0)) {
    return absl::InvalidArgumentError("linearity needs positive step times");
  }
  return t_step_small / t_step_large;
}

}  // namespace ptperf
