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

#include "gtest/gtest.h"
#include "test_util.h"

namespace ptperf {
namespace {

using nlohmann::json;

Candidate Hand() {
  Candidate c;
  c.plan = testing::Plan(8, 1, 4, 1, 4, 1, 512, 5);
  c.cost.t_step = 12.345;
  c.cost.tflops = 155.5;
  c.cost.t_cal = 9.5;
  c.cost.t_tp = 1.25;
  c.cost.t_pp = 0.5;
  c.cost.t_dp = 0.75;
  c.cost.t_ep = 0;
  c.cost.t_update = 0.125;
  c.memory.m_peak = 61.5e9;
  c.features = FeatureLabels{"tp-overlap", "-", "dp-overlap",
                             "distributed-optimizer"};
  c.feasible = true;
  return c;
}

TEST(RenderCsvTest, QuotingAndLineEnds) {
  Table t{{"a", "b"}, {{"x,y", "say \"hi\""}, {"line\nbreak", "plain"}}};
  EXPECT_EQ(RenderCsv(t),
            "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\n\"line\nbreak\",plain\r\n");
}

TEST(RenderCsvTest, EmptyTuneResultIsHeaderOnly) {
  const std::string csv =
      RenderCsv(CandidateTable({}, 128, Precision::kExact));
  EXPECT_EQ(csv.find("\r\n"), csv.size() - 2);
  EXPECT_EQ(csv.rfind("G_n,", 0), 0u);
}

TEST(RenderMarkdownTest, CandidateRow) {
  const std::string md =
      RenderMarkdown(CandidateTable({Hand()}, 128, Precision::kHuman));
  EXPECT_EQ(md,
            "| G_n | G_bs | t | c | p | e | d | m_bs | v | LO | PO | OO | MO | "
            "Memory | TFLOPS | T_step | T_cal | T_TP | T_PP | T_DP | T_EP | "
            "T_update |\n"
            "| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- | --- "
            "| --- | --- | --- | --- | --- | --- | --- | --- | --- | --- | --- "
            "|\n"
            "| 128 | 512 | 8 | 1 | 4 | 1 | 4 | 1 | 5 | tp-overlap | - | "
            "dp-overlap | distributed-optimizer | 61.50 | 155.50 | 12.35 | "
            "9.50 | 1.25 | 0.50 | 0.75 | 0.00 | 0.12 |\n");
}

TEST(RenderMarkdownTest, EscapesPipes) {
  EXPECT_EQ(RenderMarkdown(Table{{"a"}, {{"x|y"}}}),
            "| a |\n| --- |\n| x\\|y |\n");
}

TEST(EttrReportJsonTest, RoundTrip) {
  const EttrReport r{0.98491838, 26540975.25, 406215.5, 26947190.75,
                     24.953};
  const json j = json::parse(EttrReportToJson(r).dump());
  auto back = EttrReportFromJson(j);
  ASSERT_OK(back);
  EXPECT_EQ(back->ettr, r.ettr);
  EXPECT_EQ(back->t_tr, r.t_tr);
  EXPECT_EQ(back->t_in, r.t_in);
  EXPECT_EQ(back->t_e2e, r.t_e2e);
  EXPECT_EQ(back->failures, r.failures);
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
}

TEST(EttrReportJsonTest, MissingField) {
  json j = EttrReportToJson(EttrReport{});
  j.erase("T_in");
  EXPECT_FALSE(EttrReportFromJson(j).ok());
}

TEST(FormatNumberTest, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3, 26947190.75, 1e-300, 0.0}) {
    EXPECT_EQ(std::stod(FormatNumber(x)), x);
  }
  EXPECT_EQ(FormatNumber(0.1), "0.1");
}

TEST(CandidateJsonTest, StableFields) {
  const json j = CandidateToJson(Hand(), 128);
  EXPECT_EQ(j.dump(), CandidateToJson(Hand(), 128).dump());
  EXPECT_EQ(json::parse(j.dump()), j);
}

}  // namespace
}  // namespace ptperf
