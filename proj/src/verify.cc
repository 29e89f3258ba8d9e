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

#include "ptperf/verify.h"

#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"
#include "ptperf/config.h"
#include "ptperf/oracle.h"
#include "ptperf/tuner.h"

namespace ptperf {
namespace {

using Rng = std::mt19937_64;

int UniformInt(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double Uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

CheckResult PipelineSuite(Rng& rng) {
  CheckResult r{"pipeline-des", true, ""};
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const int p = UniformInt(rng, 1, 8);
    StageTimes st;
    st.fwd = Uniform(rng, 0.1, 2.0);
    st.bwd = Uniform(rng, 0.1, 4.0);
    const PipelineSchedule s{p, 1, UniformInt(rng, 1, 4),
                             UniformInt(rng, p, 4 * p)};
    auto sim = SimulatePipeline(st, s);
    if (!sim.ok()) {
      return {r.suite, false, std::string(sim.status().message())};
    }
    const double analytic = PipelineTime(st, s).total;
    worst = std::max(worst, std::abs(sim->makespan - analytic) / analytic);
  }
  r.passed = worst <= 1e-12;
  r.detail = absl::StrCat("50 instances, max relative gap ", worst);
  return r;
}

CheckResult LedgerSuite(Rng& rng) {
  CheckResult r{"activation-ledger", true, ""};
  int bad = 0;
  for (int i = 0; i < 20; ++i) {
    const int p = UniformInt(rng, 1, 8);
    const int v = UniformInt(rng, 1, 4);
    // m_b: a multiple of p that fills the warmup.
    const int64_t m_b = static_cast<int64_t>(p) * UniformInt(rng, v + 1, v + 4);
    const double act = Uniform(rng, 1.0, 1e6);
    auto ledger = SimulateActivationLedger(PipelineSchedule{p, v, 1, m_b}, act);
    if (!ledger.ok() ||
        ledger->peak_bytes[0] != static_cast<double>(v * p + p - 1) * act) {
      ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = absl::StrCat("20 instances, ", bad, " mismatches");
  return r;
}

CheckResult IntervalSuite(Rng& rng) {
  CheckResult r{"interval-grid", true, ""};
  int bad = 0, tested = 0;
  while (tested < 100) {
    FaultModel f;
    f.num_nodes = UniformInt(rng, 1, 256);
    f.failures_per_node_day = Uniform(rng, 0.0005, 0.05);
    f.mean_repair = Uniform(rng, 0, 600);
    CheckpointPolicy pol{1, Uniform(rng, 0.5, 60), UniformInt(rng, 1000, 1000000),
                         Uniform(rng, 1, 60)};
    auto best = OptimalCheckpointInterval(f, pol);
    if (!best.ok() || best->no_optimum) continue;
    auto grid = GridSearchInterval(f, pol, 1, std::max<int64_t>(
                                                  10 * best->interval, 10));
    if (!grid.ok()) continue;
    ++tested;
    if (std::abs(grid->interval - best->interval) > 1) ++bad;
  }
  r.passed = bad == 0;
  r.detail = absl::StrCat(tested, " configurations, ", bad, " off by more than 1");
  return r;
}

CheckResult MonteCarloSuite(const VerifyOptions& options) {
  CheckResult r{"monte-carlo", true, ""};
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    FaultModel f;
    f.num_nodes = 16;
    f.failures_per_node_day = 0.001 + i * (0.019 / 9);
    CheckpointPolicy pol{10, 2, 100000, 28};
    FaultSimulationOptions mc;
    mc.trials = options.mc_trials;
    mc.seed = options.seed;
    mc.workers = options.workers;
    auto sim = SimulateFaults(f, pol, mc);
    auto closed = EttrClosedForm(f, pol);
    if (!sim.ok() || !closed.ok()) {
      return {r.suite, false, "simulation failed"};
    }
    const double z = sim->standard_error > 0
                         ? std::abs(sim->mean_ettr - *closed) / sim->standard_error
                         : 0;
    worst = std::max(worst, z);
  }
  r.passed = worst <= 3;
  r.detail = absl::StrCat("10 configurations, worst |z| = ", worst);
  return r;
}

CheckResult OverlapSuite(Rng& rng) {
  CheckResult r{"overlap-bounds", true, ""};
  int bad = 0;
  const OverlapCoefficients k;
  for (int i = 0; i < 1000; ++i) {
    const double a = Uniform(rng, 0, 10), b = Uniform(rng, 0, 10);
    const double tp = TpOverlap(a, b, UniformInt(rng, 1, 8), k);
    const double cp = CpOverlap(a, b, UniformInt(rng, 1, 8), k);
    const double ep = EpOverlap(a, b, k);
    const double pp = PpOverlap(a, b, k);
    const double lo = std::max(a, b), hi = a + b;
    if (tp < lo || tp > hi || cp < lo || cp > hi || ep < lo || ep > hi ||
        pp < 0 || pp > a) {
      ++bad;
    }
    // Dyadic times, so T_BWD' - T_BWD is computed without rounding.
    ActivationStrategyInputs in;
    in.t_fwd = UniformInt(rng, 0, 1 << 20) / 1024.0;
    in.t_bwd = UniformInt(rng, 0, 1 << 20) / 1024.0;
    auto full = ApplyActivationStrategy(ActivationStrategy::kFullRecompute, in,
                                        OffloadCoefficients{}, HardwareSpec{});
    if (!full.ok() || full->t_bwd - in.t_bwd != in.t_fwd) ++bad;
  }
  r.passed = bad == 0;
  r.detail = absl::StrCat("1000 inputs, ", bad, " violations");
  return r;
}

CheckResult TunerSuite(Rng& rng, int workers) {
  CheckResult r{"tuner-soundness", true, ""};
  const ModelContext ctx = SyntheticContext();
  const std::vector<OptimizationSet> allow = DefaultAllowlist();
  int bad = 0;
  for (int i = 0; i < 10; ++i) {
    auto pick = [&](std::vector<int> pool) {
      std::vector<int> out;
      for (int x : pool) {
        if (UniformInt(rng, 0, 1)) out.push_back(x);
      }
      if (out.empty()) out.push_back(pool.front());
      return out;
    };
    SearchSpace s;
    s.num_gpus = 1 << UniformInt(rng, 2, 4);
    s.global_batch_size = 1 << UniformInt(rng, 3, 5);
    s.t = pick({1, 2, 4});
    s.c = {1};
    s.p = pick({1, 2, 4});
    s.e = {1};
    s.d = pick({1, 2, 4});
    for (int x : pick({1, 2, 4})) s.micro_batch_size.push_back(x);
    s.optimizations = {allow[UniformInt(rng, 0, 11)],
                       allow[UniformInt(rng, 0, 11)]};
    TuneOptions opts{5, workers};
    auto fast = TuneStep(ctx, s, opts);
    auto slow = TuneStepExhaustive(ctx, s, opts);
    if (!fast.ok() || !slow.ok() || fast->feasible != slow->feasible ||
        fast->ranked.size() != slow->ranked.size()) {
      ++bad;
      continue;
    }
    for (size_t k = 0; k < fast->ranked.size(); ++k) {
      const Candidate& a = fast->ranked[k];
      const Candidate& b = slow->ranked[k];
      if (!(a.plan == b.plan) || a.opts_index != b.opts_index ||
          a.cost.t_step != b.cost.t_step) {
        ++bad;
        break;
      }
    }
  }
  r.passed = bad == 0;
  r.detail = absl::StrCat("10 random spaces, ", bad, " disagreements");
  return r;
}

}  // namespace

ModelContext SyntheticContext() {
  ModelContext ctx;
  ModelArchitecture& m = ctx.arch;
  m.name = "synthetic-dense";
  m.num_layers = 8;
  m.hidden = 1024;
  m.seq_len = 1024;
  m.heads = 8;
  m.dense_ffn = 4096;
  m.vocab = 8192;

  HardwareSpec& hw = ctx.hw;
  hw.h2d_bandwidth = 25e9;
  hw.d2h_bandwidth = 25e9;
  hw.disk_load_bandwidth = 5e9;
  hw.disk_write_bandwidth = 5e9;
  hw.cpu_memory = 512e9;
  hw.cpu_ops_per_second = 2e9;
  hw.gpu_peak_flops = 300e12;
  hw.gpu_memory = 80e9;
  hw.gpus_per_node = 8;
  hw.hbm_bandwidth = 2e12;
  hw.optimizer_throughput = 5e9;

  for (std::string_view name :
       {"norm", "qkv", "attention-map", "softmax", "attention-on-value",
        "o-projection", "router", "mlp-linear-1", "swiglu", "mlp-linear-2",
        "embedding", "head"}) {
    (void)ctx.profile.compute.Add(std::string(name), "*", 150e12);
  }
  for (CollectiveKind kind :
       {CollectiveKind::kAllGather, CollectiveKind::kReduceScatter,
        CollectiveKind::kAllReduce, CollectiveKind::kAllToAll,
        CollectiveKind::kP2p}) {
    (void)ctx.profile.comm.Add(kind, 0, 1e6, 50e9, 0.9);
    (void)ctx.profile.comm.Add(kind, 0, 1e9, 150e9, 0.9);
  }
  return ctx;
}

std::vector<CheckResult> RunVerification(const VerifyOptions& options) {
  Rng rng(options.seed);
  std::vector<CheckResult> out;
  out.push_back(PipelineSuite(rng));
  out.push_back(LedgerSuite(rng));
  out.push_back(IntervalSuite(rng));
  out.push_back(MonteCarloSuite(options));
  out.push_back(OverlapSuite(rng));
  out.push_back(TunerSuite(rng, options.workers));
  return out;
}

nlohmann::json VerificationToJson(const std::vector<CheckResult>& checks) {
  nlohmann::json list = nlohmann::json::array();
  bool all = true;
  for (const CheckResult& c : checks) {
    all = all && c.passed;
    list.push_back(
        {{"suite", c.suite}, {"passed", c.passed}, {"detail", c.detail}});
  }
  return {{"schema_version", kSchemaVersion}, {"passed", all}, {"checks", list}};
}

}  // namespace ptperf
