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

#include <cmath>
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"

namespace ptperf {
namespace {

using ::ptperf::testing::Plan;
using ::ptperf::testing::TinyContext;

ModelArchitecture SmallDense(int64_t layers = 16) {
  ModelArchitecture m;
  m.name = "small";
  m.num_layers = layers;
  m.hidden = 1024;
  m.seq_len = 1024;
  m.heads = 16;
  m.dense_ffn = 4096;
  m.vocab = 32000;
  return m;
}

SearchSpace TinySpace() {
  SearchSpace s;
  s.t = {1, 2};
  s.c = {1};
  s.p = {1, 2};
  s.e = {1};
  s.d = {1, 2};
  s.micro_batch_size = {1};
  s.v = {1};
  s.num_gpus = 8;
  s.global_batch_size = 16;
  return s;
}

std::string Render(const std::vector<Candidate>& ranked) {
  std::ostringstream out;
  for (const Candidate& c : ranked) {
    out << c.plan.ToString() << " opts=" << c.opts_index << " t_step="
        << c.cost.t_step << " m_peak=" << c.memory.m_peak << "\n";
  }
  return out.str();
}

PruneLimits Limits(int64_t g_n, int64_t g_bs, int n = 8, int64_t layers = 16) {
  return PruneLimits{g_n, g_bs, n, layers};
}

TEST(PruneTest, BatchDivisibility) {
  PartialPlan x;
  x.t = x.c = x.p = x.e = x.d = 1;
  x.micro_batch_size = 3;
  EXPECT_EQ(Prune(x, Limits(8, 16)).reason, Rejection::kBatchDivisibility);
}

TEST(PruneTest, TensorWithinNode) {
  PartialPlan x;
  x.t = 16;
  EXPECT_EQ(Prune(x, Limits(64, 16)).reason, Rejection::kTensorExceedsNode);
  x.t = 8;
  EXPECT_TRUE(Prune(x, Limits(64, 16)).accepted());
}

TEST(PruneTest, MicroBatchBoundary) {
  PartialPlan x;
  x.t = x.c = x.e = x.d = 1;
  x.p = 8;
  x.micro_batch_size = 2;
  EXPECT_TRUE(Prune(x, Limits(8, 16)).accepted());
  x.micro_batch_size = 4;
  EXPECT_EQ(Prune(x, Limits(8, 16)).reason, Rejection::kTooFewMicroBatches);
}

TEST(PruneTest, Resource) {
  PartialPlan x;
  x.t = 4;
  x.c = 1;
  x.p = 4;
  EXPECT_EQ(Prune(x, Limits(8, 16)).reason, Rejection::kResource);
}

TEST(PruneTest, LayerDivisibilityAndInterleaving) {
  PartialPlan x;
  x.t = x.c = x.e = x.d = 1;
  x.p = 1;
  x.micro_batch_size = 1;
  x.v = 2;
  EXPECT_EQ(Prune(x, Limits(8, 16)).reason, Rejection::kInterleaving);
  x.p = 2;
  x.v = 3;
  EXPECT_EQ(Prune(x, Limits(8, 16)).reason, Rejection::kLayerDivisibility);
  x.v = 4;
  EXPECT_TRUE(Prune(x, Limits(8, 16)).accepted());
}

TEST(PruneTest, EmptyPartialIsAccepted) {
  EXPECT_TRUE(Prune(PartialPlan{}, Limits(8, 16)).accepted());
}

TEST(TuneStepTest, TinySpaceMatchesExhaustive) {
  const ModelContext ctx = TinyContext(SmallDense());
  auto dfs = TuneStep(ctx, TinySpace(), {0, 1});
  auto all = TuneStepExhaustive(ctx, TinySpace(), {0, 1});
  ASSERT_OK(dfs);
  ASSERT_OK(all);
  EXPECT_EQ(dfs->raw_candidates, 8);
  EXPECT_FALSE(dfs->ranked.empty());
  EXPECT_EQ(Render(dfs->ranked), Render(all->ranked));
  EXPECT_EQ(dfs->feasible, all->feasible);
}

TEST(TuneStepTest, RankingIsSortedWithTieBreak) {
  const ModelContext ctx = TinyContext(SmallDense());
  auto r = TuneStep(ctx, TinySpace(), {0, 1});
  ASSERT_OK(r);
  for (size_t i = 1; i < r->ranked.size(); ++i) {
    EXPECT_FALSE(CandidateLess(r->ranked[i], r->ranked[i - 1]));
    EXPECT_LE(r->ranked[i - 1].cost.t_step, r->ranked[i].cost.t_step);
  }
}

TEST(TuneStepTest, RandomSpacesMatchExhaustive) {
  std::mt19937_64 rng(17);
  auto subset = [&](std::vector<int> pool) {
    std::vector<int> out;
    for (int x : pool) {
      if (rng() % 2) out.push_back(x);
    }
    if (out.empty()) out.push_back(pool[rng() % pool.size()]);
    return out;
  };
  std::vector<OptimizationSet> allow = DefaultAllowlist();
  for (int trial = 0; trial < 25; ++trial) {
    SearchSpace s;
    s.t = subset({1, 2, 4});
    s.c = subset({1, 2});
    s.p = subset({1, 2, 4});
    s.e = {1};
    s.d = subset({1, 2, 4});
    for (int m : subset({1, 2, 4})) s.micro_batch_size.push_back(m);
    s.v = subset({1, 2});
    s.num_gpus = trial % 2 ? 8 : 16;
    s.global_batch_size = trial % 3 ? 16 : 32;
    if (trial % 2) s.optimizations = {allow[rng() % allow.size()], allow[0]};
    ModelContext ctx = TinyContext(SmallDense(), 1e12, 1e10 * (1 + trial));
    const int top_k = 1 + static_cast<int>(rng() % 5);
    auto dfs = TuneStep(ctx, s, {top_k, 1});
    auto all = TuneStepExhaustive(ctx, s, {top_k, 1});
    ASSERT_OK(dfs);
    ASSERT_OK(all);
    ASSERT_LE(dfs->raw_candidates, 256);
    EXPECT_EQ(Render(dfs->ranked), Render(all->ranked)) << "trial " << trial;
    EXPECT_EQ(dfs->feasible, all->feasible) << "trial " << trial;
  }
}

TEST(TuneStepTest, DeterministicAcrossWorkers) {
  const ModelContext ctx = TinyContext(SmallDense());
  SearchSpace s = DefaultSearchSpace(ctx.arch, ctx.hw, 16, 32);
  s.optimizations = {OptimizationSet{}, DefaultAllowlist()[5]};
  auto one = TuneStep(ctx, s, {8, 1});
  auto four = TuneStep(ctx, s, {8, 4});
  auto again = TuneStep(ctx, s, {8, 4});
  ASSERT_OK(one);
  ASSERT_OK(four);
  ASSERT_OK(again);
  EXPECT_EQ(Render(one->ranked), Render(four->ranked));
  EXPECT_EQ(Render(four->ranked), Render(again->ranked));
  EXPECT_EQ(one->rejections, four->rejections);
}

TEST(TuneStepTest, NoMemoryRejectsEverything) {
  ModelContext ctx = TinyContext(SmallDense());
  ctx.hw.gpu_memory = 0;
  auto r = TuneStep(ctx, TinySpace(), {4, 1});
  ASSERT_OK(r);
  EXPECT_TRUE(r->ranked.empty());
  EXPECT_EQ(r->feasible, 0);
  EXPECT_GT(r->rejections[Rejection::kMemory], 0);
  for (const auto& [reason, count] : r->rejections) {
    if (reason != Rejection::kMemory) EXPECT_NE(reason, Rejection::kNone);
  }
}

TEST(TuneStepTest, SlowTensorParallelPicksNoTensorParallel) {
  const ModelContext ctx = TinyContext(SmallDense(), 1e12, 1e11, 1e6);
  SearchSpace s = TinySpace();
  s.t = {1, 2, 4, 8};
  auto r = TuneStep(ctx, s, {1, 1});
  ASSERT_OK(r);
  ASSERT_EQ(r->ranked.size(), 1u);
  EXPECT_EQ(r->ranked[0].plan.t, 1);
}

TEST(TuneStepTest, GrowingTheSpaceNeverWorsensTopOne) {
  const ModelContext ctx = TinyContext(SmallDense(), 1e12, 2e10);
  SearchSpace s = TinySpace();
  auto before = TuneStep(ctx, s, {1, 1});
  s.t.push_back(4);
  s.p.push_back(4);
  s.micro_batch_size.push_back(2);
  auto after = TuneStep(ctx, s, {1, 1});
  ASSERT_OK(before);
  ASSERT_OK(after);
  EXPECT_LE(after->ranked[0].cost.t_step, before->ranked[0].cost.t_step);
}

TEST(TuneE2eTest, NoFailuresKeepsStepOrder) {
  const ModelContext ctx = TinyContext(SmallDense());
  FaultModel fault;
  const CheckpointPolicy policy{1, 0, 1000, 1};
  auto e2e = TuneE2e(ctx, TinySpace(), fault, policy, {0, 1});
  auto step = TuneStep(ctx, TinySpace(), {0, 1});
  ASSERT_OK(e2e);
  ASSERT_OK(step);
  ASSERT_EQ(e2e->ranked.size(), step->ranked.size());
  for (size_t i = 0; i < step->ranked.size(); ++i) {
    EXPECT_EQ(e2e->ranked[i].candidate.plan, step->ranked[i].plan);
    EXPECT_DOUBLE_EQ(e2e->ranked[i].e2e, 1000 * step->ranked[i].cost.t_step);
    EXPECT_EQ(e2e->ranked[i].ettr, 1.0);
  }
}

TEST(TuneE2eTest, FigureFaultInputsGiveInterval37) {
  // Scale every rate so the single plan's step takes 28 s.
  ModelContext ctx = TinyContext(SmallDense());
  const ParallelPlan plan = Plan(2, 1, 2, 1, 2, 1, 16, 1);
  auto probe = EvaluatePlan(ctx, plan, {});
  ASSERT_OK(probe);
  const double k = probe->cost.t_step / 28;
  ctx = TinyContext(SmallDense(), 1e12 * k, 1e11 * k);
  ctx.hw.optimizer_throughput *= k;
  SearchSpace s;
  s.t = {2};
  s.c = {1};
  s.p = {2};
  s.e = {1};
  s.d = {2};
  s.micro_batch_size = {1};
  s.v = {1};
  s.num_gpus = 8;
  s.global_batch_size = 16;
  FaultModel fault;
  fault.failures_per_node_day = 0.01;
  fault.num_nodes = 32;
  fault.mean_repair = 60;
  auto r = TuneE2e(ctx, s, fault, {1, 2, 100000, 0}, {1, 1});
  ASSERT_OK(r);
  ASSERT_EQ(r->ranked.size(), 1u);
  EXPECT_NEAR(r->ranked[0].candidate.cost.t_step, 28, 1e-9);
  EXPECT_EQ(r->ranked[0].interval.interval, 37);
  EXPECT_NEAR(r->ranked[0].ettr, 0.9959, 0.0001);
}

TEST(TuneE2eTest, InfeasibleRegimeIsAnnotated) {
  const ModelContext ctx = TinyContext(SmallDense(), 1e9, 1e8);
  FaultModel fault;
  fault.failures_per_node_day = 5000;
  fault.num_nodes = 64;
  fault.mean_repair = 600;
  auto r = TuneE2e(ctx, TinySpace(), fault, {1, 100, 1000, 0}, {0, 1});
  ASSERT_OK(r);
  ASSERT_FALSE(r->ranked.empty());
  EXPECT_FALSE(r->ranked.back().fault_feasible);
  EXPECT_FALSE(r->ranked.back().note.empty());
}

TEST(TuneE2eTest, TwoPhaseMatchesJointGrid) {
  const ModelContext ctx = TinyContext(SmallDense(), 1e12, 1e10);
  FaultModel fault;
  fault.failures_per_node_day = 0.02;
  fault.num_nodes = 16;
  fault.mean_repair = 200;
  const CheckpointPolicy policy{1, 3, 50000, 0};
  auto r = TuneE2e(ctx, TinySpace(), fault, policy, {0, 1});
  auto step = TuneStep(ctx, TinySpace(), {0, 1});
  ASSERT_OK(r);
  ASSERT_OK(step);
  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& c : step->ranked) {
    CheckpointPolicy p = policy;
    p.t_step = c.cost.t_step;
    for (int64_t i = 1; i <= 2000; ++i) {
      p.interval = i;
      if (auto g = E2eObjective(fault, p); g.ok()) best = std::min(best, *g);
    }
  }
  ASSERT_FALSE(r->ranked.empty());
  EXPECT_NEAR(r->ranked[0].e2e, best, 1e-9 * best);
}

TEST(LinearityTest, Ratios) {
  EXPECT_DOUBLE_EQ(*Linearity(60, 75), 0.8);
  EXPECT_EQ(*Linearity(3, 3), 1.0);
  EXPECT_FALSE(Linearity(0, 1).ok());
}

TEST(SweepTest, FailureRateLowersEttr) {
  FaultModel fault;
  fault.num_nodes = 16;
  fault.mean_repair = 134.41;
  const CheckpointPolicy policy{10, 4.19, 953675, 27.83};
  auto rows = SweepFault(fault, policy, "r_f",
                         {"0.001", "0.002", "0.005", "0.01", "0.02"});
  ASSERT_OK(rows);
  ASSERT_EQ(rows->size(), 5u);
  for (size_t i = 1; i < rows->size(); ++i) {
    ASSERT_TRUE((*rows)[i].ettr.has_value());
    EXPECT_LT(*(*rows)[i].ettr, *(*rows)[i - 1].ettr);
  }
}

TEST(SweepTest, UnknownParameter) {
  const ModelContext ctx = TinyContext(SmallDense());
  auto rows = SweepStrategy(ctx, TinySpace(), "colour", {"1"}, {1, 1});
  ASSERT_FALSE(rows.ok());
  EXPECT_TRUE(absl::IsInvalidArgument(rows.status()));
  EXPECT_FALSE(SweepFault(FaultModel{}, {1, 0, 1, 1}, "colour", {"1"}).ok());
}

TEST(SweepTest, GpuCountReportsLinearity) {
  const ModelContext ctx = TinyContext(SmallDense());
  SearchSpace s = DefaultSearchSpace(ctx.arch, ctx.hw, 8, 64);
  auto rows = SweepStrategy(ctx, s, "g_n", {"8", "16", "32"}, {1, 1});
  ASSERT_OK(rows);
  ASSERT_EQ(rows->size(), 3u);
  ASSERT_TRUE((*rows)[0].best && (*rows)[2].best);
  const double t0 = (*rows)[0].best->cost.t_step;
  const double t2 = (*rows)[2].best->cost.t_step;
  ASSERT_TRUE((*rows)[2].linearity.has_value());
  EXPECT_NEAR(*(*rows)[2].linearity, *Linearity(t0 * 8 / 32, t2), 1e-12);
  EXPECT_EQ(*(*rows)[0].linearity, 1.0);
}

// Bubble shrinks as 1/v while steady-phase hops grow linearly in v.
TEST(SweepTest, ChunkCountHasInteriorMinimum) {
  const ModelContext ctx = TinyContext(SmallDense(64), 1e12, 1e8);
  SearchSpace s;
  s.t = {1};
  s.c = {1};
  s.p = {4};
  s.e = {1};
  s.d = {1};
  s.micro_batch_size = {1};
  s.num_gpus = 4;
  s.global_batch_size = 16;
  s.optimizations = {OptimizationSet{}};
  ModelContext roomy = ctx;
  roomy.hw.gpu_memory = 1e15;
  auto rows = SweepStrategy(roomy, s, "v", {"1", "2", "4", "8", "16"}, {1, 1});
  ASSERT_OK(rows);
  std::vector<double> t;
  for (const SweepRow& r : *rows) {
    ASSERT_TRUE(r.best.has_value()) << r.value << " " << r.note;
    t.push_back(r.best->cost.t_step);
  }
  const size_t argmin = std::min_element(t.begin(), t.end()) - t.begin();
  EXPECT_GT(argmin, 0u);
  EXPECT_LT(argmin, t.size() - 1);
  for (size_t i = 1; i < t.size(); ++i) {
    if (i <= argmin) {
      EXPECT_LT(t[i], t[i - 1]);
    } else {
      EXPECT_GT(t[i], t[i - 1]);
    }
  }
}

}  // namespace
}  // namespace ptperf
