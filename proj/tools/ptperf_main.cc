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

// ptperf: evaluate, tune and sweep distributed-training plans from a JSON
// config.
//
// Exit codes: 0 success, 1 usage or input error, 2 infeasible or no
// candidate (also: a failed `verify` check).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "ptperf/config.h"
#include "ptperf/cost_model.h"
#include "ptperf/fault.h"
#include "ptperf/oracle.h"
#include "ptperf/report.h"
#include "ptperf/status_macros.h"
#include "ptperf/tuner.h"
#include "ptperf/verify.h"

namespace ptperf {
namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;

struct Flags {
  std::string config;
  std::string format;
  int workers = 0;
  int top_k = 4;
  bool echo_config = false;
  std::string trace;
  std::string space;
  std::string parameter;
  std::vector<std::string> values;
  int64_t interval = 0;
  uint64_t seed = 1;
  int64_t trials = 10000;
};

int ExitCode(const absl::Status& s) {
  if (s.ok()) return kOk;
  std::cerr << "error: " << s.message() << "\n";
  return absl::IsFailedPrecondition(s) ? kInfeasible : kUsage;
}

absl::StatusOr<nlohmann::json> ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::InvalidArgumentError(absl::StrCat("cannot read '", path, "'"));
  }
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat("'", path, "' is not valid JSON"));
  }
  return doc;
}

absl::StatusOr<RunConfig> Load(const Flags& flags) {
  RunConfig rc;
  if (flags.space.empty()) {
    ASSIGN_OR_RETURN(rc, LoadConfig(flags.config));
  } else {
    // The space file replaces the config's own `space` section.
    ASSIGN_OR_RETURN(nlohmann::json doc, ReadJson(flags.config));
    ASSIGN_OR_RETURN(doc["space"], ReadJson(flags.space));
    ASSIGN_OR_RETURN(
        rc, ParseConfig(doc, std::filesystem::path(flags.config)
                                 .parent_path()
                                 .string()));
  }
  if (!flags.format.empty()) {
    ASSIGN_OR_RETURN(rc.format, ParseOutputFormat(flags.format));
  }
  if (flags.echo_config) std::cerr << RunConfigToJson(rc).dump(2) << "\n";
  return rc;
}

int Workers(const Flags& flags) {
  if (flags.workers > 0) return flags.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

Precision PrecisionFor(OutputFormat f) {
  return f == OutputFormat::kMarkdown ? Precision::kHuman : Precision::kExact;
}

// T_step from the fault section, or from evaluating the configured plan.
absl::StatusOr<double> StepTimeFor(const RunConfig& rc) {
  if (rc.fault && rc.fault->has_t_step) return rc.fault->policy.t_step;
  if (!rc.plan) {
    return absl::InvalidArgumentError(
        "field 'fault.T_step': required when the config has no plan");
  }
  ASSIGN_OR_RETURN(Evaluation ev,
                   EvaluatePlan(rc.context, *rc.plan, rc.optimization));
  return ev.cost.t_step;
}

absl::StatusOr<FaultConfig> FaultFor(const RunConfig& rc) {
  if (!rc.fault) {
    return absl::InvalidArgumentError("field 'fault': required");
  }
  FaultConfig fc = *rc.fault;
  ASSIGN_OR_RETURN(fc.policy.t_step, StepTimeFor(rc));
  return fc;
}

absl::Status RunEval(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  if (!rc.plan) return absl::InvalidArgumentError("field 'plan': required");
  ASSIGN_OR_RETURN(Evaluation ev,
                   EvaluatePlan(rc.context, *rc.plan, rc.optimization));
  Candidate row;
  row.plan = ev.plan;
  row.opts = rc.optimization;
  row.cost = ev.cost;
  row.memory = ev.memory;
  row.features = ev.features;
  std::cout << Render(EvaluationToJson(ev),
                      CandidateTable({row}, ev.plan.WorldSize(),
                                     PrecisionFor(rc.format)),
                      rc.format);
  for (const std::string& w : ev.cost.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (!flags.trace.empty()) {
    StageTimes st;
    st.fwd = ev.cost.t_fwd;
    st.bwd = ev.cost.t_bwd;
    const ParallelPlan& p = ev.plan;
    ASSIGN_OR_RETURN(
        PipelineSimulation sim,
        SimulatePipeline(st, PipelineSchedule{p.p, p.v,
                                              p.LayersPerChunk(
                                                  rc.context.arch.num_layers),
                                              p.NumMicroBatches()}));
    std::ofstream out(flags.trace);
    if (!out) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot write '", flags.trace, "'"));
    }
    out << PipelineTraceToChromeJson(sim.trace) << "\n";
  }
  return absl::OkStatus();
}

absl::Status NoCandidate(const TuneResult& r) {
  std::string why;
  for (const auto& [reason, count] : r.rejections) {
    absl::StrAppend(&why, " ", std::string(RejectionName(reason)), "=", count);
  }
  return absl::FailedPreconditionError(
      absl::StrCat("no feasible candidate; rejections:", why));
}

absl::Status RunTuneStep(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  if (!rc.space) return absl::InvalidArgumentError("field 'space': required");
  ASSIGN_OR_RETURN(TuneResult r,
                   TuneStep(rc.context, *rc.space,
                            TuneOptions{flags.top_k, Workers(flags)}));
  std::cout << Render(TuneResultToJson(r, *rc.space),
                      CandidateTable(r.ranked, rc.space->num_gpus,
                                     PrecisionFor(rc.format)),
                      rc.format);
  if (r.ranked.empty()) return NoCandidate(r);
  return absl::OkStatus();
}

absl::Status RunTuneE2e(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  if (!rc.space) return absl::InvalidArgumentError("field 'space': required");
  if (!rc.fault) return absl::InvalidArgumentError("field 'fault': required");
  FaultConfig fc = *rc.fault;
  if (!fc.has_nodes) {
    // Whole-cluster failure rate: every node of g_n participates.
    fc.model.num_nodes =
        (rc.space->num_gpus + rc.context.hw.gpus_per_node - 1) /
        rc.context.hw.gpus_per_node;
  }
  ASSIGN_OR_RETURN(E2eResult r,
                   TuneE2e(rc.context, *rc.space, fc.model, fc.policy,
                           TuneOptions{flags.top_k, Workers(flags)}));
  std::cout << Render(E2eResultToJson(r, *rc.space),
                      E2eTable(r.ranked, rc.space->num_gpus,
                               PrecisionFor(rc.format)),
                      rc.format);
  if (r.ranked.empty()) return NoCandidate(r.step);
  return absl::OkStatus();
}

absl::Status RunSweep(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  static const std::vector<std::string> kFaultParams = {
      "r_f", "nodes", "u_b", "t_save", "interval"};
  std::vector<SweepRow> rows;
  if (std::find(kFaultParams.begin(), kFaultParams.end(), flags.parameter) !=
      kFaultParams.end()) {
    ASSIGN_OR_RETURN(FaultConfig fc, FaultFor(rc));
    ASSIGN_OR_RETURN(rows, SweepFault(fc.model, fc.policy, flags.parameter,
                                      flags.values));
  } else {
    if (!rc.space) return absl::InvalidArgumentError("field 'space': required");
    ASSIGN_OR_RETURN(rows, SweepStrategy(rc.context, *rc.space,
                                         flags.parameter, flags.values,
                                         TuneOptions{1, Workers(flags)}));
  }
  std::cout << Render(SweepToJson(flags.parameter, rows),
                      SweepTable(flags.parameter, rows,
                                 PrecisionFor(rc.format)),
                      rc.format);
  return absl::OkStatus();
}

absl::Status RunEttr(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  ASSIGN_OR_RETURN(FaultConfig fc, FaultFor(rc));
  if (flags.interval > 0) {
    fc.policy.interval = flags.interval;
  } else if (!fc.has_interval) {
    return absl::InvalidArgumentError(
        "field 'fault.I_ckpt': required (or pass --interval)");
  }
  ASSIGN_OR_RETURN(EttrReport exact, EttrExact(fc.model, fc.policy));
  ASSIGN_OR_RETURN(double closed, EttrClosedForm(fc.model, fc.policy));
  ASSIGN_OR_RETURN(double g, E2eObjective(fc.model, fc.policy));
  nlohmann::json doc = EttrReportToJson(exact);
  doc["ETTR_closed_form"] = closed;
  doc["T_e2e_objective"] = g;
  doc["I_ckpt"] = fc.policy.interval;
  doc["T_step"] = fc.policy.t_step;
  std::cout << Render(doc,
                      EttrTable(exact, closed, g, PrecisionFor(rc.format)),
                      rc.format);
  return absl::OkStatus();
}

absl::Status RunInterval(const Flags& flags) {
  ASSIGN_OR_RETURN(RunConfig rc, Load(flags));
  ASSIGN_OR_RETURN(FaultConfig fc, FaultFor(rc));
  ASSIGN_OR_RETURN(IntervalChoice choice,
                   OptimalCheckpointInterval(fc.model, fc.policy));
  Table t{{"I_ckpt", "I_continuous", "ETTR", "T_e2e", "note"}, {}};
  const Precision prec = PrecisionFor(rc.format);
  t.rows.push_back(
      {choice.no_optimum ? std::string() : absl::StrCat(choice.interval),
       FormatNumber(choice.continuous),
       choice.no_optimum ? std::string() : FormatNumber(choice.ettr),
       choice.no_optimum            ? std::string()
       : prec == Precision::kHuman ? absl::StrFormat("%.2f", choice.e2e)
                                   : FormatNumber(choice.e2e),
       choice.note});
  std::cout << Render(IntervalChoiceToJson(choice), t, rc.format);
  if (choice.no_optimum) {
    return absl::FailedPreconditionError(choice.note);
  }
  return absl::OkStatus();
}

int RunVerify(const Flags& flags) {
  OutputFormat format = OutputFormat::kJson;
  if (!flags.format.empty()) {
    absl::StatusOr<OutputFormat> f = ParseOutputFormat(flags.format);
    if (!f.ok()) return ExitCode(f.status());
    format = *f;
  }
  VerifyOptions options;
  options.seed = flags.seed;
  options.workers = Workers(flags);
  options.mc_trials = flags.trials;
  const std::vector<CheckResult> checks = RunVerification(options);
  Table t{{"suite", "passed", "detail"}, {}};
  bool all = true;
  for (const CheckResult& c : checks) {
    all = all && c.passed;
    t.rows.push_back({c.suite, c.passed ? "PASS" : "FAIL", c.detail});
  }
  std::cout << Render(VerificationToJson(checks), t, format);
  return all ? kOk : kInfeasible;
}

int Main(int argc, char** argv) {
  CLI::App app{"Analytical cost model and strategy tuner for distributed "
               "LLM pretraining"};
  app.require_subcommand(1);
  Flags flags;
  auto common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("config", flags.config, "run config (JSON)")
          ->required()
          ->check(CLI::ExistingFile);
    }
    sub->add_option("--format", flags.format, "json, csv or markdown");
    sub->add_option("--workers", flags.workers,
                    "evaluation threads (default: available cores)");
    sub->add_flag("--echo-config", flags.echo_config,
                  "print the resolved config to stderr");
  };

  CLI::App* eval = app.add_subcommand("eval", "cost and memory of one plan");
  common(eval, true);
  eval->add_option("--trace", flags.trace,
                   "write the simulated pipeline as a chrome trace");

  CLI::App* tune = app.add_subcommand("tune", "search the strategy space");
  tune->require_subcommand(1);
  CLI::App* step = tune->add_subcommand("step", "minimize T_step");
  CLI::App* e2e = tune->add_subcommand("e2e", "minimize end-to-end time");
  for (CLI::App* sub : {step, e2e}) {
    common(sub, true);
    sub->add_option("--top-k", flags.top_k, "candidates to report");
    sub->add_option("--space", flags.space,
                    "search space file, replaces the config's space")
        ->check(CLI::ExistingFile);
  }

  CLI::App* sweep = app.add_subcommand("sweep", "re-tune across one knob");
  common(sweep, true);
  sweep->add_option("--param", flags.parameter,
                    "v, t, c, p, e, d, m_bs, g_bs, g_n, gpus_per_node, "
                    "optimizer, activation, dp_overlap, r_f, nodes, u_b, "
                    "t_save, interval")
      ->required();
  sweep->add_option("--values", flags.values, "comma-separated values")
      ->required()
      ->delimiter(',');

  CLI::App* ettr = app.add_subcommand("ettr", "ETTR at a fixed interval");
  common(ettr, true);
  ettr->add_option("--interval", flags.interval, "override I_ckpt");

  CLI::App* interval =
      app.add_subcommand("interval", "optimal checkpoint interval");
  common(interval, true);

  CLI::App* verify =
      app.add_subcommand("verify", "run the oracle-vs-closed-form suites");
  common(verify, false);
  verify->add_option("--seed", flags.seed, "random seed");
  verify->add_option("--trials", flags.trials, "Monte Carlo trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*eval) return ExitCode(RunEval(flags));
  if (*step) return ExitCode(RunTuneStep(flags));
  if (*e2e) return ExitCode(RunTuneE2e(flags));
  if (*sweep) return ExitCode(RunSweep(flags));
  if (*ettr) return ExitCode(RunEttr(flags));
  if (*interval) return ExitCode(RunInterval(flags));
  if (*verify) return RunVerify(flags);
  return kUsage;
}

}  // namespace
}  // namespace ptperf

int main(int argc, char** argv) { return ptperf::Main(argc, argv); }
