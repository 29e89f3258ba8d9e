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

#include "ptperf/report.h"

#include <charconv>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "ptperf/status_macros.h"

namespace ptperf {
namespace {

using nlohmann::json;

constexpr double kGb = 1e9;

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  return absl::StrCat("\"", absl::StrReplaceAll(s, {{"\"", "\"\""}}), "\"");
}

std::string Num(double x, Precision precision, int digits = 2) {
  if (precision == Precision::kExact) return FormatNumber(x);
  if (!std::isfinite(x)) return FormatNumber(x);
  return absl::StrFormat("%.*f", digits, x);
}

// JSON has no infinity; infeasible objectives serialize as null.
json Finite(double x) { return std::isfinite(x) ? json(x) : json(); }

json PlanJson(const ParallelPlan& p) {
  return {{"t", p.t}, {"c", p.c}, {"p", p.p}, {"e", p.e}, {"d", p.d},
          {"m_bs", p.micro_batch_size}, {"g_bs", p.global_batch_size},
          {"v", p.v}};
}

json CostJson(const CostReport& c) {
  return {{"T_FWD", c.t_fwd},       {"T_BWD", c.t_bwd},
          {"T_Warmup", c.t_warmup}, {"T_Steady", c.t_steady},
          {"T_Cooldown", c.t_cooldown}, {"T_Pipeline", c.t_pipeline},
          {"T_DP", c.t_dp},         {"T_update", c.t_update},
          {"T_Opt", c.t_opt},       {"T_step", c.t_step},
          {"TFLOPS", c.tflops},     {"T_cal", c.t_cal},
          {"T_TP", c.t_tp},         {"T_PP", c.t_pp},
          {"T_EP", c.t_ep},         {"T_CP", c.t_cp},
          {"warnings", c.warnings}};
}

json MemoryJson(const MemoryReport& m) {
  return {{"params", m.params}, {"grads", m.grads},
          {"optimizer", m.optimizer}, {"M_sta", m.m_sta},
          {"M_act", m.m_act},   {"M_peak", m.m_peak},
          {"Memory_GB", m.m_peak / kGb}};
}

json FeaturesJson(const FeatureLabels& f) {
  return {{"LO", f.lo}, {"PO", f.po}, {"OO", f.oo}, {"MO", f.mo}};
}

std::vector<std::string> CandidateHeader() {
  return {"G_n", "G_bs", "t",  "c",  "p",      "e",      "d",     "m_bs",
          "v",   "LO",   "PO", "OO", "MO",     "Memory", "TFLOPS", "T_step",
          "T_cal", "T_TP", "T_PP", "T_DP", "T_EP", "T_update"};
}

std::vector<std::string> CandidateCells(const Candidate& c, int64_t num_gpus,
                                        Precision precision) {
  const ParallelPlan& p = c.plan;
  const CostReport& k = c.cost;
  return {absl::StrCat(num_gpus), absl::StrCat(p.global_batch_size),
          absl::StrCat(p.t), absl::StrCat(p.c), absl::StrCat(p.p),
          absl::StrCat(p.e), absl::StrCat(p.d),
          absl::StrCat(p.micro_batch_size), absl::StrCat(p.v),
          c.features.lo, c.features.po, c.features.oo, c.features.mo,
          Num(c.memory.m_peak / kGb, precision), Num(k.tflops, precision),
          Num(k.t_step, precision), Num(k.t_cal, precision),
          Num(k.t_tp, precision), Num(k.t_pp, precision),
          Num(k.t_dp, precision), Num(k.t_ep, precision),
          Num(k.t_update, precision)};
}

json RejectionsJson(const TuneResult& r) {
  json out = json::object();
  for (const auto& [reason, count] : r.rejections) {
    out[std::string(RejectionName(reason))] = count;
  }
  return out;
}

}  // namespace

std::string FormatNumber(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

std::string RenderCsv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ",";
      out += CsvField(cells[i]);
    }
    out += "\r\n";
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  return out;
}

std::string RenderMarkdown(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    out += "|";
    for (const std::string& c : cells) {
      absl::StrAppend(&out, " ", absl::StrReplaceAll(c, {{"|", "\\|"}}), " |");
    }
    out += "\n";
  };
  line(table.header);
  out += "|";
  for (size_t i = 0; i < table.header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : table.rows) line(row);
  return out;
}

std::string Render(const json& doc, const Table& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson:
      return doc.dump(2) + "\n";
    case OutputFormat::kCsv:
      return RenderCsv(table);
    case OutputFormat::kMarkdown:
      return RenderMarkdown(table);
  }
  return "";
}

json EvaluationToJson(const Evaluation& ev) {
  return {{"schema_version", kSchemaVersion},
          {"plan", PlanJson(ev.plan)},
          {"features", FeaturesJson(ev.features)},
          {"cost", CostJson(ev.cost)},
          {"memory", MemoryJson(ev.memory)}};
}

json CandidateToJson(const Candidate& c, int64_t num_gpus) {
  return {{"G_n", num_gpus},
          {"plan", PlanJson(c.plan)},
          {"optimization", c.opts.name},
          {"features", FeaturesJson(c.features)},
          {"cost", CostJson(c.cost)},
          {"memory", MemoryJson(c.memory)}};
}

json TuneResultToJson(const TuneResult& r, const SearchSpace& space) {
  json ranked = json::array();
  for (const Candidate& c : r.ranked) {
    ranked.push_back(CandidateToJson(c, space.num_gpus));
  }
  return {{"schema_version", kSchemaVersion},
          {"ranked", ranked},
          {"raw_candidates", r.raw_candidates},
          {"evaluated", r.evaluated},
          {"feasible", r.feasible},
          {"rejections", RejectionsJson(r)}};
}

json E2eResultToJson(const E2eResult& r, const SearchSpace& space) {
  json ranked = json::array();
  for (const E2eCandidate& c : r.ranked) {
    json row = CandidateToJson(c.candidate, space.num_gpus);
    row["I_ckpt"] = c.fault_feasible ? json(c.interval.interval) : json();
    row["I_continuous"] = c.interval.continuous;
    row["ETTR"] = c.fault_feasible ? json(c.ettr) : json();
    row["T_e2e"] = Finite(c.e2e);
    row["fault_feasible"] = c.fault_feasible;
    row["note"] = c.note;
    ranked.push_back(std::move(row));
  }
  json out = TuneResultToJson(r.step, space);
  out["ranked"] = ranked;
  return out;
}

json SweepToJson(std::string_view parameter, const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const SweepRow& r : rows) {
    json row = {{"value", r.value}, {"note", r.note}};
    row["best"] = r.best ? CandidateToJson(*r.best, 0) : json();
    row["linearity"] = r.linearity ? json(*r.linearity) : json();
    row["ETTR"] = r.ettr ? json(*r.ettr) : json();
    row["T_e2e"] = r.e2e ? json(*r.e2e) : json();
    row["I_ckpt"] = r.interval ? json(*r.interval) : json();
    out.push_back(std::move(row));
  }
  return {{"schema_version", kSchemaVersion},
          {"parameter", std::string(parameter)},
          {"rows", out}};
}

json EttrReportToJson(const EttrReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"ETTR", r.ettr},
          {"T_tr", r.t_tr},
          {"T_in", r.t_in},
          {"T_e2e", r.t_e2e},
          {"F_f", r.failures}};
}

absl::StatusOr<EttrReport> EttrReportFromJson(const json& j) {
  EttrReport r;
  for (auto [key, field] :
       std::initializer_list<std::pair<const char*, double*>>{
           {"ETTR", &r.ettr},
           {"T_tr", &r.t_tr},
           {"T_in", &r.t_in},
           {"T_e2e", &r.t_e2e},
           {"F_f", &r.failures}}) {
    if (!j.contains(key) || !j.at(key).is_number()) {
      return absl::InvalidArgumentError(
          absl::StrCat("field '", key, "': expected a number"));
    }
    *field = j.at(key).get<double>();
  }
  return r;
}

json IntervalChoiceToJson(const IntervalChoice& c) {
  return {{"schema_version", kSchemaVersion},
          {"I_ckpt", c.no_optimum ? json() : json(c.interval)},
          {"I_continuous", c.continuous},
          {"ETTR", c.no_optimum ? json() : json(c.ettr)},
          {"T_e2e", c.no_optimum ? json() : json(c.e2e)},
          {"no_optimum", c.no_optimum},
          {"note", c.note}};
}

Table CandidateTable(const std::vector<Candidate>& rows, int64_t num_gpus,
                     Precision precision) {
  Table t{CandidateHeader(), {}};
  for (const Candidate& c : rows) {
    t.rows.push_back(CandidateCells(c, num_gpus, precision));
  }
  return t;
}

Table E2eTable(const std::vector<E2eCandidate>& rows, int64_t num_gpus,
               Precision precision) {
  Table t{CandidateHeader(), {}};
  for (const char* h : {"I_ckpt", "ETTR", "T_e2e", "note"}) t.header.push_back(h);
  for (const E2eCandidate& c : rows) {
    std::vector<std::string> cells =
        CandidateCells(c.candidate, num_gpus, precision);
    cells.push_back(c.fault_feasible ? absl::StrCat(c.interval.interval) : "");
    cells.push_back(c.fault_feasible ? Num(c.ettr, precision, 4) : "");
    cells.push_back(c.fault_feasible ? Num(c.e2e, precision) : "");
    cells.push_back(c.note);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table SweepTable(std::string_view parameter, const std::vector<SweepRow>& rows,
                 Precision precision) {
  Table t{{std::string(parameter), "t", "c", "p", "e", "d", "m_bs", "v",
           "optimization", "T_step", "TFLOPS", "Memory", "linearity", "ETTR",
           "T_e2e", "I_ckpt", "note"},
          {}};
  for (const SweepRow& r : rows) {
    std::vector<std::string> cells = {r.value};
    if (r.best) {
      const ParallelPlan& p = r.best->plan;
      for (int64_t x : {int64_t{p.t}, int64_t{p.c}, int64_t{p.p}, int64_t{p.e},
                        int64_t{p.d}, p.micro_batch_size, int64_t{p.v}}) {
        cells.push_back(absl::StrCat(x));
      }
      cells.push_back(r.best->opts.name);
      cells.push_back(Num(r.best->cost.t_step, precision));
      cells.push_back(Num(r.best->cost.tflops, precision));
      cells.push_back(Num(r.best->memory.m_peak / kGb, precision));
    } else {
      cells.resize(cells.size() + 11);
    }
    cells.push_back(r.linearity ? Num(*r.linearity, precision, 4) : "");
    cells.push_back(r.ettr ? Num(*r.ettr, precision, 6) : "");
    cells.push_back(r.e2e ? Num(*r.e2e, precision) : "");
    cells.push_back(r.interval ? absl::StrCat(*r.interval) : "");
    cells.push_back(r.note);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

Table EttrTable(const EttrReport& r, double closed_form, double objective,
                Precision precision) {
  return Table{{"ETTR", "ETTR_closed_form", "T_tr", "T_in", "T_e2e",
                "T_e2e_objective", "F_f"},
               {{Num(r.ettr, precision, 6), Num(closed_form, precision, 6),
                 Num(r.t_tr, precision), Num(r.t_in, precision),
                 Num(r.t_e2e, precision), Num(objective, precision),
                 Num(r.failures, precision, 4)}}};
}

}  // namespace ptperf
