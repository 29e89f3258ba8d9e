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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ptperf/cost_model.h"
#include "ptperf/fault.h"
#include "ptperf/optim.h"
#include "ptperf/oracle.h"
#include "ptperf/report.h"
#include "ptperf/tuner.h"
#include "test_util.h"

namespace ptperf {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void Fail(std::string why) {
    if (pass) detail = std::move(why);
    pass = false;
  }
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

int Workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

FaultModel Fault(double r_f, int64_t nodes, std::optional<double> u_b) {
  FaultModel f;
  f.failures_per_node_day = r_f;
  f.num_nodes = nodes;
  f.mean_repair = u_b;
  return f;
}

// 1. ETTR and T_e2e of the four LLaMA2-70B evaluation rows.
Outcome EttrTable() {
  struct Row {
    int64_t nodes;
    double t_save, u_b, t_step;
    int64_t steps;
    double ettr, e2e;
  };
  constexpr Row kRows[] = {
      {16, 4.19, 134.41, 27.83, 953675, 0.9849, 26947191},
      {32, 2.35, 147.72, 27.99, 476838, 0.9911, 13465926.21},
      {64, 1.59, 174.34, 28.33, 238419, 0.9932, 6800277.57},
      {128, 0.95, 227.58, 28.83, 119210, 0.9939, 3457670.27},
  };
  Outcome out;
  std::string values;
  for (const Row& r : kRows) {
    const FaultModel f = Fault(0.005, r.nodes, r.u_b);
    const CheckpointPolicy p{10, r.t_save, r.steps, r.t_step};
    absl::StatusOr<double> ettr = EttrClosedForm(f, p);
    absl::StatusOr<double> g = E2eObjective(f, p);
    if (!ettr.ok() || !g.ok()) {
      out.Fail(absl::StrCat("N=", r.nodes, ": ", ettr.status().ToString(),
                            " ", g.status().ToString()));
      continue;
    }
    absl::StrAppendFormat(&values, " N=%d:%.4f%%/%.0fs", r.nodes,
                          100 * *ettr, *g);
    if (std::abs(*ettr - r.ettr) > 0.0002) {
      out.Fail(absl::StrFormat("N=%d ETTR %.6f vs %.4f", r.nodes, *ettr,
                               r.ettr));
    }
    if (std::abs(*g - r.e2e) > 1e-3 * r.e2e) {
      out.Fail(absl::StrFormat("N=%d T_e2e %.2f vs %.2f", r.nodes, *g, r.e2e));
    }
  }
  if (out.pass) out.detail = absl::StrCat("tol 0.02pp, 0.1%;", values);
  return out;
}

// 2. Optimal interval at u_b=60, T_save=2, r_f=0.01, N=32, T_step=28.
Outcome OptimalInterval() {
  Outcome out;
  const FaultModel f = Fault(0.01, 32, 60);
  const CheckpointPolicy p{1, 2, 100000, 28};
  absl::StatusOr<IntervalChoice> c = OptimalCheckpointInterval(f, p);
  absl::StatusOr<GridSearchResult> g = GridSearchInterval(f, p, 1, 1000);
  if (!c.ok() || !g.ok()) {
    out.Fail(absl::StrCat(c.status().ToString(), " ", g.status().ToString()));
    return out;
  }
  out.detail = absl::StrFormat("I*=%d (continuous %.4f) ETTR=%.4f%% grid=%d",
                               c->interval, c->continuous, 100 * c->ettr,
                               g->interval);
  if (c->interval != 37) out.Fail(absl::StrCat("I*=", c->interval));
  if (std::abs(c->ettr - 0.9959) > 0.0001) {
    out.Fail(absl::StrFormat("ETTR %.6f", c->ettr));
  }
  if (g->interval != c->interval) {
    out.Fail(absl::StrCat("grid ", g->interval, " vs closed ", c->interval));
  }
  return out;
}

// 3. Closed-form I* within one step of the exhaustive argmin.
Outcome IntervalVsGrid() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0, 1);
  int checked = 0, worst = 0;
  while (checked < 200) {
    const FaultModel f = Fault(0.001 + 0.03 * u(rng),
                               1 + static_cast<int64_t>(128 * u(rng)),
                               10 + 400 * u(rng));
    const CheckpointPolicy p{1, 0.2 + 20 * u(rng), 1000000, 2 + 40 * u(rng)};
    absl::StatusOr<IntervalChoice> c = OptimalCheckpointInterval(f, p);
    if (!c.ok() || c->no_optimum || c->interval < 1) continue;
    absl::StatusOr<GridSearchResult> g =
        GridSearchInterval(f, p, 1, 10 * c->interval);
    if (!g.ok()) {
      out.Fail(g.status().ToString());
      break;
    }
    const int gap = static_cast<int>(std::abs(g->interval - c->interval));
    worst = std::max(worst, gap);
    if (gap > 1) {
      out.Fail(absl::StrCat("closed ", c->interval, " grid ", g->interval));
    }
    ++checked;
  }
  const double secs = Seconds(start);
  if (secs >= 5) out.Fail(absl::StrFormat("runtime %.2fs", secs));
  if (out.pass) {
    out.detail = absl::StrFormat("%d configs, max |gap|=%d, %.3fs", checked,
                                 worst, secs);
  }
  return out;
}

// 4. Monte Carlo ETTR within 3 SE of the closed form.
Outcome MonteCarlo() {
  Outcome out;
  const auto start = Clock::now();
  double worst = 0;
  for (int i = 0; i < 10; ++i) {
    const double r_f = 0.001 + i * (0.02 - 0.001) / 9;
    FaultModel f = Fault(r_f, 16, std::nullopt);
    const CheckpointPolicy p{10, 2, 100000, 28};
    FaultSimulationOptions o;
    o.trials = 10000;
    o.seed = 1;
    o.workers = Workers();
    absl::StatusOr<FaultSimulation> sim = SimulateFaults(f, p, o);
    absl::StatusOr<double> closed = EttrClosedForm(f, p);
    if (!sim.ok() || !closed.ok()) {
      out.Fail(absl::StrCat(sim.status().ToString(), " ",
                            closed.status().ToString()));
      continue;
    }
    const double z = (sim->mean_ettr - *closed) / sim->standard_error;
    worst = std::max(worst, std::abs(z));
    if (!(std::abs(z) <= 3)) {
      out.Fail(absl::StrFormat("r_f=%.4f mean=%.7f closed=%.7f z=%.2f", r_f,
                               sim->mean_ettr, *closed, z));
    }
  }
  const double secs = Seconds(start);
  if (secs >= 60) out.Fail(absl::StrFormat("runtime %.2fs", secs));
  if (out.pass) {
    out.detail = absl::StrFormat(
        "10 configs r_f 0.001..0.02, 10000 trials, max |z|=%.2f, %.2fs", worst,
        secs);
  }
  return out;
}

// 5. Analytic pipeline time equals the DES makespan for v=1.
Outcome PipelineDes() {
  Outcome out;
  const auto start = Clock::now();
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> t(0.01, 10);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const int p = std::uniform_int_distribution<int>(1, 8)(rng);
    const int64_t m_b = p + std::uniform_int_distribution<int>(0, 32)(rng);
    const int64_t l = std::uniform_int_distribution<int>(1, 8)(rng);
    StageTimes times;
    times.fwd = t(rng);
    times.bwd = t(rng);
    const PipelineSchedule s{p, 1, l, m_b};
    const double analytic = PipelineTime(times, s).total;
    absl::StatusOr<PipelineSimulation> sim = SimulatePipeline(times, s);
    if (!sim.ok()) {
      out.Fail(sim.status().ToString());
      continue;
    }
    const double rel = std::abs(analytic - sim->makespan) / sim->makespan;
    worst = std::max(worst, rel);
    if (rel > 1e-12) {
      out.Fail(absl::StrFormat("p=%d m_b=%d analytic %.17g des %.17g", p, m_b,
                               analytic, sim->makespan));
    }
  }
  const double secs = Seconds(start);
  if (secs >= 5) out.Fail(absl::StrFormat("runtime %.2fs", secs));
  if (out.pass) {
    out.detail = absl::StrFormat("50 instances, max rel err %.2g, %.3fs",
                                 worst, secs);
  }
  return out;
}

// 6. Stage-0 ledger peak equals (vp + p - 1) per-layer activations.
Outcome ActivationLedgerPeak() {
  Outcome out;
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> bytes(1e6, 1e9);
  for (int i = 0; i < 20; ++i) {
    const int p = std::uniform_int_distribution<int>(1, 8)(rng);
    const int v = p == 1 ? 1 : std::uniform_int_distribution<int>(1, 4)(rng);
    const int64_t m_b =
        int64_t{p} * (v + 1 + std::uniform_int_distribution<int>(0, 4)(rng));
    const double act = bytes(rng);
    absl::StatusOr<ActivationLedger> ledger =
        SimulateActivationLedger({p, v, 1, m_b}, act);
    if (!ledger.ok()) {
      out.Fail(ledger.status().ToString());
      continue;
    }
    const double want = static_cast<double>(v * p + p - 1) * act;
    if (ledger->peak_bytes[0] != want) {
      out.Fail(absl::StrFormat("p=%d v=%d m_b=%d peak %d layers, want %d", p,
                               v, m_b, ledger->peak_live[0], v * p + p - 1));
    }
  }
  if (out.pass) out.detail = "20 instances, p<=8, v<=4, exact";
  return out;
}

// 7. Overlap bounds and the full-recompute identity.
Outcome OverlapProperties() {
  Outcome out;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 100);
  const OverlapCoefficients one;
  auto check = [&](const char* name, double lo, double x, double hi) {
    if (!(lo <= x && x <= hi)) {
      out.Fail(absl::StrFormat("%s: %.17g not in [%.17g, %.17g]", name, x, lo,
                               hi));
    }
  };
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const int s_n = std::uniform_int_distribution<int>(1, 8)(rng);
    check("tp", std::max(a, b), TpOverlap(a, b, s_n, one), a + b);
    check("cp", std::max(a, b), CpOverlap(a, b, s_n, one), a + b);
    check("ep", std::max(a, b), EpOverlap(a, b, one), a + b);
    // PP overlap returns the exposed hop b' of a hop b next to compute a, so
    // max(a, b) <= a + b' <= a + b reads max(0, b - a) <= b' <= b.
    check("pp", std::max(0.0, b - a), PpOverlap(b, a, one), b);
  }
  // Dyadic times so that T_BWD' - T_BWD is computed without rounding.
  std::uniform_int_distribution<int> k(0, 1 << 20);
  for (int i = 0; i < 1000; ++i) {
    ActivationStrategyInputs in;
    in.factor = 3;
    in.layer_act_bytes = 1e6;
    in.input_act_bytes = 1e5;
    in.t_fwd = k(rng) / 1024.0;
    in.t_bwd = k(rng) / 1024.0;
    absl::StatusOr<ActivationStrategyResult> r = ApplyActivationStrategy(
        ActivationStrategy::kFullRecompute, in, {}, {});
    if (!r.ok() || r->t_bwd - in.t_bwd != in.t_fwd) {
      out.Fail("full recompute: T_BWD' - T_BWD != T_FWD");
      break;
    }
  }
  if (out.pass) out.detail = "1000 inputs per overlap, alpha=beta=1";
  return out;
}

ModelArchitecture SmallDense(int64_t layers) {
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

std::string Dump(const TuneResult& r) {
  std::string out;
  for (const Candidate& c : r.ranked) {
    out += CandidateToJson(c, 0).dump();
    out += "\n";
  }
  return out;
}

// 8. Pruned DFS top-k equals exhaustive top-k.
Outcome TunerSoundness() {
  Outcome out;
  std::mt19937_64 rng(88);
  auto subset = [&](std::vector<int> pool) {
    std::vector<int> s;
    for (int x : pool) {
      if (rng() % 2) s.push_back(x);
    }
    if (s.empty()) s.push_back(pool[rng() % pool.size()]);
    return s;
  };
  const std::vector<OptimizationSet> allow = DefaultAllowlist();
  int64_t raw_max = 0, feasible = 0;
  for (int trial = 0; trial < 40; ++trial) {
    SearchSpace s;
    s.t = subset({1, 2, 4, 8});
    s.c = subset({1, 2});
    s.p = subset({1, 2, 4});
    s.e = {1};
    s.d = subset({1, 2, 4});
    for (int m : subset({1, 2})) s.micro_batch_size.push_back(m);
    s.v = subset({1, 2});
    s.num_gpus = trial % 2 ? 8 : 16;
    s.global_batch_size = trial % 3 ? 16 : 32;
    s.optimizations = {allow[rng() % allow.size()]};
    if (trial % 2) s.optimizations.push_back(allow[rng() % allow.size()]);
    const ModelContext ctx =
        testing::TinyContext(SmallDense(16), 1e12, 1e9 * (1 + trial));
    const int top_k = 1 + static_cast<int>(rng() % 6);
    absl::StatusOr<TuneResult> dfs = TuneStep(ctx, s, {top_k, Workers()});
    absl::StatusOr<TuneResult> all = TuneStepExhaustive(ctx, s, {top_k, 1});
    if (!dfs.ok() || !all.ok()) {
      out.Fail(absl::StrCat(dfs.status().ToString(), " ",
                            all.status().ToString()));
      continue;
    }
    raw_max = std::max(raw_max, dfs->raw_candidates);
    feasible += dfs->feasible;
    if (dfs->raw_candidates > 256) {
      out.Fail(absl::StrCat("space ", trial, " has ", dfs->raw_candidates,
                            " raw candidates"));
    }
    if (Dump(*dfs) != Dump(*all)) {
      out.Fail(absl::StrCat("space ", trial, ": top-", top_k, " differs"));
    }
  }
  if (out.pass) {
    out.detail = absl::StrCat("40 spaces, <= ", raw_max,
                              " raw candidates, ", feasible,
                              " feasible in total, byte-identical");
  }
  return out;
}

// 9. ETTR monotonicity and the interior minimum of the v sweep.
Outcome MonotonicitySweeps() {
  Outcome out;
  const std::vector<double> nodes = {8, 16, 32, 64, 128};
  const std::vector<double> rates = {0.001, 0.002, 0.005, 0.01, 0.02};
  const std::vector<double> repairs = {30, 60, 120, 240, 480};
  const std::vector<double> saves = {0.5, 1, 2, 4, 8};
  const std::vector<const std::vector<double>*> grids = {&nodes, &rates,
                                                         &repairs, &saves};
  const char* names[] = {"N_nodes", "r_f", "u_b", "T_save"};
  auto ettr = [](const double x[4]) -> std::optional<double> {
    const FaultModel f = Fault(x[1], static_cast<int64_t>(x[0]), x[2]);
    absl::StatusOr<double> e = EttrClosedForm(f, {10, x[3], 100000, 28});
    if (!e.ok()) return std::nullopt;
    return *e;
  };
  int sweeps = 0;
  for (int axis = 0; axis < 4; ++axis) {
    // Every combination of the other three axes.
    for (int combo = 0; combo < 125; ++combo) {
      double x[4];
      int rest = combo;
      for (int a = 0; a < 4; ++a) {
        if (a == axis) continue;
        x[a] = (*grids[a])[rest % 5];
        rest /= 5;
      }
      std::optional<double> prev;
      for (double value : *grids[axis]) {
        x[axis] = value;
        std::optional<double> e = ettr(x);
        if (!e) break;
        if (prev && !(*e < *prev)) {
          out.Fail(absl::StrFormat("ETTR not decreasing in %s at %g",
                                   names[axis], value));
        }
        prev = e;
      }
      ++sweeps;
    }
  }

  // Bubble shrinks as 1/v while steady-phase hops grow linearly in v.
  ModelContext ctx = testing::TinyContext(SmallDense(64), 1e12, 1e8);
  ctx.hw.gpu_memory = 1e15;
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
  absl::StatusOr<std::vector<SweepRow>> rows =
      SweepStrategy(ctx, s, "v", {"1", "2", "4", "8", "16"}, {1, 1});
  std::string curve;
  if (!rows.ok()) {
    out.Fail(rows.status().ToString());
    return out;
  }
  std::vector<double> t;
  for (const SweepRow& r : *rows) {
    if (!r.best) {
      out.Fail(absl::StrCat("v=", r.value, " infeasible: ", r.note));
      return out;
    }
    t.push_back(r.best->cost.t_step);
    absl::StrAppendFormat(&curve, " v=%s:%.2fs", r.value, t.back());
  }
  const size_t argmin = std::min_element(t.begin(), t.end()) - t.begin();
  if (argmin == 0 || argmin + 1 == t.size()) {
    out.Fail(absl::StrCat("v sweep minimum at the boundary:", curve));
  }
  for (size_t i = 1; i < t.size(); ++i) {
    if ((i <= argmin && !(t[i] < t[i - 1])) ||
        (i > argmin && !(t[i] > t[i - 1]))) {
      out.Fail(absl::StrCat("v sweep is not U-shaped:", curve));
    }
  }
  if (out.pass) {
    out.detail = absl::StrCat(sweeps, " ETTR sweeps strictly decreasing;",
                              curve);
  }
  return out;
}

// 10. Published results that need unpublished GPU profiles.
Outcome DocumentedFixtures(bool substitutes_pass) {
  Outcome out;
  std::printf(
      "  fixture: modeled vs measured step accuracy 99.60%% (128 GPUs) to "
      "97.65%% (1024 GPUs) for LLaMA2-70B, 98.73%% LLaMA3-405B, 97.72%% "
      "DeepSeek-V3-671B\n"
      "  fixture: absolute TFLOPS and T_step of the tuning tables\n"
      "  fixture: optimal e as a function of N\n"
      "  fixture: EP overlap gains above 17%%\n"
      "  these need the original per-module GPU profiles and are not "
      "reproduced; criteria 5-9 are the substitutes\n");
  if (!substitutes_pass) out.Fail("a substitute criterion (5-9) failed");
  out.detail = "not reproducible at desk scale; property substitutes 5-9";
  return out;
}

int Run() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ettr-table", EttrTable},
      {2, "optimal-interval", OptimalInterval},
      {3, "interval-vs-grid", IntervalVsGrid},
      {4, "monte-carlo", MonteCarlo},
      {5, "pipeline-des", PipelineDes},
      {6, "activation-ledger", ActivationLedgerPeak},
      {7, "overlap-properties", OverlapProperties},
      {8, "tuner-soundness", TunerSoundness},
      {9, "monotonicity-sweeps", MonotonicitySweeps},
  };
  int failed = 0;
  bool substitutes = true;
  for (const Criterion& c : criteria) {
    const Outcome o = c.run();
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) {
      ++failed;
      if (c.id >= 5) substitutes = false;
    }
  }
  const Outcome o = DocumentedFixtures(substitutes);
  std::printf("%s 10 documented-fixtures: %s\n", o.pass ? "PASS" : "FAIL",
              o.detail.c_str());
  if (!o.pass) ++failed;
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace ptperf

int main() { return ptperf::Run(); }
