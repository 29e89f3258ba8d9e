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

#ifndef PTPERF_REPORT_H_
#define PTPERF_REPORT_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ptperf/config.h"
#include "ptperf/cost_model.h"
#include "ptperf/fault.h"
#include "ptperf/tuner.h"

namespace ptperf {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180: CRLF line ends, fields quoted when they hold a comma, quote or
// line break.
std::string RenderCsv(const Table& table);
std::string RenderMarkdown(const Table& table);
// JSON (pretty, trailing newline), CSV or markdown.
std::string Render(const nlohmann::json& doc, const Table& table,
                   OutputFormat format);

// Shortest text that parses back to the same double.
std::string FormatNumber(double x);

enum class Precision {
  kExact,  // FormatNumber
  kHuman,  // GB and seconds to two decimals
};

nlohmann::json EvaluationToJson(const Evaluation& ev);
nlohmann::json CandidateToJson(const Candidate& c, int64_t num_gpus);
nlohmann::json TuneResultToJson(const TuneResult& r, const SearchSpace& space);
nlohmann::json E2eResultToJson(const E2eResult& r, const SearchSpace& space);
nlohmann::json SweepToJson(std::string_view parameter,
                           const std::vector<SweepRow>& rows);
nlohmann::json EttrReportToJson(const EttrReport& r);
absl::StatusOr<EttrReport> EttrReportFromJson(const nlohmann::json& j);
nlohmann::json IntervalChoiceToJson(const IntervalChoice& c);

// Tuning report columns: G_n, G_bs, t, c, p, e, d, m_bs, v, LO, PO, OO,
// MO, Memory (GB), TFLOPS, T_step, T_cal, T_TP, T_PP, T_DP, T_EP, T_update.
Table CandidateTable(const std::vector<Candidate>& rows, int64_t num_gpus,
                     Precision precision);
Table E2eTable(const std::vector<E2eCandidate>& rows, int64_t num_gpus,
               Precision precision);
Table SweepTable(std::string_view parameter, const std::vector<SweepRow>& rows,
                 Precision precision);
Table EttrTable(const EttrReport& r, double closed_form, double objective,
                Precision precision);

}  // namespace ptperf

#endif  // PTPERF_REPORT_H_
