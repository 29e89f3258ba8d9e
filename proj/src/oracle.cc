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

#include "ptperf/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

absl::Status CheckSchedule(const PipelineSchedule& s) {
  if (s.p < 1 || s.v < 1 || s.micro_batches < 1 || s.layers_per_chunk < 1) {
    return absl::InvalidArgumentError(
        "pipeline schedule needs p, v, l and m_b >= 1");
  }
  if (s.v > 1 && s.micro_batches % s.p != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "interleaved schedule needs m_b divisible by p, got m_b=",
        s.micro_batches, " p=", s.p));
  }
  return absl::OkStatus();
}

// Dense (stage, micro-batch, chunk) table of completion times.
class PassTable {
 public:
  PassTable(int p, int64_t m_b, int v)
      : m_b_(m_b), v_(v),
        end_(static_cast<size_t>(p) * m_b * v, -1.0) {}
  double& at(int stage, int64_t mb, int chunk) {
    return end_[(static_cast<size_t>(stage) * m_b_ + mb) * v_ + chunk];
  }

 private:
  int64_t m_b_;
  int v_;
  std::vector<double> end_;
};

}  // namespace

std::string_view PipelineEventKindName(PipelineEventKind kind) {
  switch (kind) {
    case PipelineEventKind::kForward:
      return "fwd";
    case PipelineEventKind::kBackward:
      return "bwd";
    case PipelineEventKind::kP2p:
      return "p2p";
    case PipelineEventKind::kIdle:
      return "idle";
  }
  return "?";
}

absl::StatusOr<std::vector<ScheduledPass>> InterleavedOrder(
    const PipelineSchedule& schedule, int stage) {
  RETURN_IF_ERROR(CheckSchedule(schedule));
  const int p = schedule.p;
  const int v = schedule.v;
  if (stage < 0 || stage >= p) {
    return absl::InvalidArgumentError(
        absl::StrCat("stage ", stage, " out of range for p=", p));
  }
  const int64_t total = schedule.micro_batches * v;
  const int64_t warmup = std::min<int64_t>(
      total, 2 * static_cast<int64_t>(p - stage - 1) +
                 static_cast<int64_t>(v - 1) * p);

  auto micro_batch = [&](int64_t k) {
    return v == 1 ? k : (k / (static_cast<int64_t>(p) * v)) * p + k % p;
  };
  auto forward = [&](int64_t k) {
    return ScheduledPass{true, micro_batch(k),
                         v == 1 ? 0 : static_cast<int>((k / p) % v)};
  };
  auto backward = [&](int64_t k) {
    return ScheduledPass{false, micro_batch(k),
                         v == 1 ? 0 : v - 1 - static_cast<int>((k / p) % v)};
  };

  std::vector<ScheduledPass> order;
  order.reserve(2 * total);
  for (int64_t k = 0; k < warmup; ++k) order.push_back(forward(k));
  for (int64_t i = 0; i < total - warmup; ++i) {
    order.push_back(forward(warmup + i));
    order.push_back(backward(i));
  }
  for (int64_t k = total - warmup; k < total; ++k) {
    order.push_back(backward(k));
  }
  return order;
}

absl::StatusOr<PipelineSimulation> SimulatePipeline(
    const StageTimes& times, const PipelineSchedule& schedule) {
  RETURN_IF_ERROR(CheckSchedule(schedule));
  const int p = schedule.p;
  const int v = schedule.v;
  const int64_t m_b = schedule.micro_batches;
  if (m_b < p) {
    return absl::FailedPreconditionError(absl::StrCat(
        "unsupported regime: m_b=", m_b, " < p=", p,
        "; the analytic pipeline time is still available"));
  }
  const double l = static_cast<double>(schedule.layers_per_chunk);

  std::vector<std::vector<ScheduledPass>> orders(p);
  for (int r = 0; r < p; ++r) {
    ASSIGN_OR_RETURN(orders[r], InterleavedOrder(schedule, r));
  }

  PassTable fwd_end(p, m_b, v), bwd_end(p, m_b, v);
  std::vector<size_t> next(p, 0);
  std::vector<double> free_at(p, 0.0);
  PipelineSimulation sim;
  sim.trace.devices.resize(p);

  auto duration = [&](int r, const ScheduledPass& op) {
    double d = l * (op.forward ? times.fwd : times.bwd);
    if (r == 0 && op.chunk == 0) {
      d += op.forward ? times.embed_fwd : times.embed_bwd;
    }
    if (r == p - 1 && op.chunk == v - 1) {
      d += op.forward ? times.head_fwd : times.head_bwd;
    }
    return d;
  };
  // Returns the time the input of `op` is available on device r, or a
  // negative value while the producer has not run. `remote` reports whether
  // the producer sits on another device.
  auto ready = [&](int r, const ScheduledPass& op, bool& remote) {
    double dep;
    if (op.forward) {
      if (r > 0) {
        dep = fwd_end.at(r - 1, op.micro_batch, op.chunk);
        remote = true;
      } else if (op.chunk > 0) {
        dep = fwd_end.at(p - 1, op.micro_batch, op.chunk - 1);
        remote = p > 1;
      } else {
        remote = false;
        return 0.0;
      }
    } else {
      if (r < p - 1) {
        dep = bwd_end.at(r + 1, op.micro_batch, op.chunk);
        remote = true;
      } else if (op.chunk < v - 1) {
        dep = bwd_end.at(0, op.micro_batch, op.chunk + 1);
        remote = p > 1;
      } else {
        dep = fwd_end.at(p - 1, op.micro_batch, op.chunk);
        remote = false;
      }
    }
    if (dep < 0) return -1.0;
    return remote ? dep + times.pp : dep;
  };

  size_t remaining = 0;
  for (const auto& o : orders) remaining += o.size();
  while (remaining > 0) {
    bool progressed = false;
    for (int r = 0; r < p; ++r) {
      while (next[r] < orders[r].size()) {
        const ScheduledPass& op = orders[r][next[r]];
        bool remote = false;
        const double in = ready(r, op, remote);
        if (in < 0) break;
        const double start = std::max(free_at[r], in);
        const double end = start + duration(r, op);
        auto& events = sim.trace.devices[r];
        if (start > free_at[r]) {
          events.push_back({PipelineEventKind::kIdle, r, -1, -1, free_at[r],
                            start});
        }
        if (remote && times.pp > 0) {
          sim.trace.transfers.push_back({PipelineEventKind::kP2p, r,
                                         op.micro_batch, op.chunk,
                                         in - times.pp, in});
        }
        events.push_back({op.forward ? PipelineEventKind::kForward
                                     : PipelineEventKind::kBackward,
                          r, op.micro_batch, op.chunk, start, end});
        (op.forward ? fwd_end : bwd_end).at(r, op.micro_batch, op.chunk) = end;
        free_at[r] = end;
        ++next[r];
        --remaining;
        progressed = true;
      }
    }
    if (!progressed) {
      return absl::InternalError("pipeline schedule deadlocked");
    }
  }
  sim.makespan = *std::max_element(free_at.begin(), free_at.end());
  return sim;
}

std::string PipelineTraceToChromeJson(const PipelineTrace& trace) {
  nlohmann::json events = nlohmann::json::array();
  auto emit = [&](const PipelineEvent& e, int pid) {
    std::string name(PipelineEventKindName(e.kind));
    if (e.micro_batch >= 0) {
      name += absl::StrCat(" mb", e.micro_batch, " c", e.chunk);
    }
    events.push_back({{"name", name},
                      {"cat", std::string(PipelineEventKindName(e.kind))},
                      {"ph", "X"},
                      {"pid", pid},
                      {"tid", e.device},
                      {"ts", e.start * 1e6},
                      {"dur", (e.end - e.start) * 1e6}});
  };
  for (const auto& device : trace.devices) {
    for (const auto& e : device) emit(e, 0);
  }
  for (const auto& e : trace.transfers) emit(e, 1);
  return nlohmann::json{{"traceEvents", events}, {"displayTimeUnit", "ms"}}
      .dump();
}

absl::StatusOr<ActivationLedger> SimulateActivationLedger(
    const PipelineSchedule& schedule, double layer_act_bytes) {
  RETURN_IF_ERROR(CheckSchedule(schedule));
  ActivationLedger ledger;
  for (int r = 0; r < schedule.p; ++r) {
    ASSIGN_OR_RETURN(std::vector<ScheduledPass> order,
                     InterleavedOrder(schedule, r));
    int64_t live = 0, peak = 0;
    for (const ScheduledPass& op : order) {
      live += op.forward ? 1 : -1;
      peak = std::max(peak, live);
    }
    ledger.peak_live.push_back(peak);
    ledger.peak_bytes.push_back(static_cast<double>(peak) * layer_act_bytes);
  }
  return ledger;
}

namespace {

struct TrialOutcome {
  double ettr = 0;
  int64_t failures = 0;
};

class FaultTrial {
 public:
  FaultTrial(const FaultModel& fault, const CheckpointPolicy& policy,
             const FaultSimulationOptions& options, double rate,
             uint64_t trial)
      : fault_(fault), policy_(policy), options_(options), rate_(rate) {
    std::seed_seq seq{static_cast<uint32_t>(options.seed),
                      static_cast<uint32_t>(options.seed >> 32),
                      static_cast<uint32_t>(trial),
                      static_cast<uint32_t>(trial >> 32)};
    gen_.seed(seq);
    mix_ = std::discrete_distribution<int>(
        {fault.mix.process, fault.mix.pod, fault.mix.job});
  }

  TrialOutcome Run() {
    const int64_t s = policy_.steps;
    const int64_t interval = policy_.interval;
    const double t_step = policy_.t_step;
    const double t_save = policy_.t_save;
    const bool rollback = options_.rollback;
    next_failure_ = Arrival(0.0);

    Recover(fault_.u0);
    int64_t done = 0;
    while (done < s) {
      // Skip whole train+save cycles that finish before the next failure.
      const int64_t full = (s - done) / interval;
      if (full > 0) {
        const double cycle = static_cast<double>(interval) * t_step + t_save;
        int64_t n = full;
        if (std::isfinite(next_failure_)) {
          n = std::min<int64_t>(
              full, static_cast<int64_t>(
                        std::floor((next_failure_ - t_) / cycle)));
        }
        t_ += static_cast<double>(n) * cycle;
        done += n * interval;
        if (done >= s) break;
      }

      const int64_t k = std::min(interval, s - done);
      double left = static_cast<double>(k) * t_step;
      bool lost = false;
      while (t_ + left > next_failure_) {
        left -= next_failure_ - t_;
        Fail();
        if (rollback) {
          lost = true;
          break;
        }
      }
      if (lost) continue;
      t_ += left;

      if (t_ + t_save <= next_failure_) {
        t_ += t_save;
        done += k;
      } else {
        Fail();
        if (!rollback ||
            options_.save_failure == SaveFailureMode::kCommitAtSaveStart) {
          done += k;
        }
      }
    }
    return {static_cast<double>(s) * t_step / t_, failures_};
  }

 private:
  double Arrival(double from) {
    if (rate_ <= 0) return kNever;
    return from + std::exponential_distribution<double>(rate_)(gen_);
  }

  // Moves the clock to the pending failure and pays the repair.
  void Fail() {
    t_ = next_failure_;
    ++failures_;
    next_failure_ = Arrival(t_);
    Recover(-1);
  }

  // Runs a repair of length `fixed` (or a sampled one when negative); a
  // failure in the middle restarts it.
  void Recover(double fixed) {
    while (true) {
      double u = fixed;
      if (u < 0) {
        u = fault_.mean_repair ? *fault_.mean_repair : Sample();
      }
      if (t_ + u <= next_failure_) {
        t_ += u;
        return;
      }
      t_ = next_failure_;
      ++failures_;
      next_failure_ = Arrival(t_);
      fixed = -1;
    }
  }

  double Sample() {
    switch (mix_(gen_)) {
      case 0:
        return fault_.u_process;
      case 1:
        return fault_.u_pod;
      default:
        return fault_.u_job;
    }
  }

  const FaultModel& fault_;
  const CheckpointPolicy& policy_;
  const FaultSimulationOptions& options_;
  double rate_;
  std::mt19937_64 gen_;
  std::discrete_distribution<int> mix_;
  double t_ = 0;
  double next_failure_ = kNever;
  int64_t failures_ = 0;
};

}  // namespace

absl::StatusOr<FaultSimulation> SimulateFaults(
    const FaultModel& fault, const CheckpointPolicy& policy,
    const FaultSimulationOptions& options) {
  RETURN_IF_ERROR(ValidateFaultModel(fault));
  RETURN_IF_ERROR(ValidateCheckpointPolicy(policy));
  if (options.trials < 1) {
    return absl::InvalidArgumentError("trials must be >= 1");
  }
  const double rate = ClusterFailureRate(fault);
  std::vector<TrialOutcome> outcomes(options.trials);
  const int workers = static_cast<int>(
      std::clamp<int64_t>(options.workers, 1, options.trials));
  auto run = [&](int w) {
    for (int64_t i = w; i < options.trials; i += workers) {
      outcomes[i] =
          FaultTrial(fault, policy, options, rate, static_cast<uint64_t>(i))
              .Run();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }

  const double n = static_cast<double>(options.trials);
  double sum = 0, failures = 0;
  for (const TrialOutcome& o : outcomes) {
    sum += o.ettr;
    failures += static_cast<double>(o.failures);
  }
  FaultSimulation out;
  out.trials = options.trials;
  out.mean_ettr = sum / n;
  out.mean_failures = failures / n;
  if (options.trials > 1) {
    double ss = 0;
    for (const TrialOutcome& o : outcomes) {
      ss += (o.ettr - out.mean_ettr) * (o.ettr - out.mean_ettr);
    }
    out.standard_error = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

absl::StatusOr<GridSearchResult> GridSearchInterval(
    const FaultModel& fault, const CheckpointPolicy& policy, int64_t lo,
    int64_t hi) {
  if (lo < 1 || hi < lo) {
    return absl::InvalidArgumentError(
        absl::StrCat("empty interval range [", lo, ", ", hi, "]"));
  }
  CheckpointPolicy probe = policy;
  GridSearchResult best;
  bool found = false;
  for (int64_t i = lo; i <= hi; ++i) {
    probe.interval = i;
    absl::StatusOr<double> g = E2eObjective(fault, probe);
    if (!g.ok()) {
      if (absl::IsFailedPrecondition(g.status())) continue;
      return g.status();
    }
    if (!found || *g < best.e2e) {
      found = true;
      best = {i, *g};
    }
  }
  if (!found) {
    return absl::FailedPreconditionError(
        "no feasible checkpoint interval in range");
  }
  return best;
}

}  // namespace ptperf
