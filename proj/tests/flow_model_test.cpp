// Copyright 2026 The edaflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

#include "edaflow/flow_model.hpp"
#include "edaflow/rng.hpp"
#include "test_support.hpp"

namespace edaflow {
namespace {

using testing::complete_job_json;

TEST(StageKind, FullFlowExpandsInFlowOrder) {
  const StageKind full[] = {StageKind::kFullFlow};
  const auto expanded = expand_stages(full);
  ASSERT_EQ(expanded.size(), 5u);
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    EXPECT_EQ(expanded[i], kFlowStages[i]);
    EXPECT_EQ(stage_rank(expanded[i]), static_cast<int>(i));
  }
}

TEST(StageKind, NamesRoundTrip) {
  for (StageKind s : {StageKind::kFloorplan, StageKind::kPlacement, StageKind::kCts,
                      StageKind::kRouting, StageKind::kSta, StageKind::kFullFlow}) {
    EXPECT_EQ(parse_stage(to_string(s)), s);
  }
  EXPECT_FALSE(parse_stage("synthesis"));
  EXPECT_EQ(parse_tool("openroad"), ToolKind::kOpenRoad);
  EXPECT_FALSE(parse_tool("innovus"));
}

TEST(ValidateJobSpec, CompleteDocumentGivesJob) {
  auto result = validate_job_spec(complete_job_json());
  ASSERT_TRUE(std::holds_alternative<JobSpec>(result));
  const auto& job = std::get<JobSpec>(result);
  EXPECT_EQ(job.design.name, "gcd");
  EXPECT_EQ(job.design.cell_count, 450);
  EXPECT_EQ(job.tool, ToolKind::kMock);
  EXPECT_EQ(flow_stages(job).size(), 5u);
  EXPECT_EQ(job.options.clock_period_ns, 1.1);
  EXPECT_FALSE(job.options.core_utilization);
}

TEST(ValidateJobSpec, MissingConstraintPathIsReportedByName) {
  Json doc = complete_job_json();
  doc.erase("constraint_path");
  auto result = validate_job_spec(doc);
  ASSERT_TRUE(std::holds_alternative<IncompleteReport>(result));
  const auto& report = std::get<IncompleteReport>(result);
  EXPECT_EQ(report.missing, std::vector<std::string>{"constraint_path"});
  EXPECT_TRUE(report.out_of_range.empty());
  EXPECT_TRUE(report.invalid.empty());
}

TEST(ValidateJobSpec, EveryMissingEssentialFieldIsListed) {
  Json doc = complete_job_json();
  doc.erase("tool");
  doc.erase("stages");
  doc["design"].erase("cell_count");
  doc["tech"].erase("name");
  const auto report = std::get<IncompleteReport>(validate_job_spec(doc));
  std::set<std::string> missing(report.missing.begin(), report.missing.end());
  EXPECT_EQ(missing, (std::set<std::string>{"tool", "stages", "design.cell_count", "tech.name"}));
}

TEST(ValidateJobSpec, UtilizationAboveOneIsARangeViolation) {
  Json doc = complete_job_json();
  doc["options"]["core_utilization"] = 1.7;
  const auto report = std::get<IncompleteReport>(validate_job_spec(doc));
  ASSERT_EQ(report.out_of_range.size(), 1u);
  EXPECT_EQ(report.out_of_range[0].field, "options.core_utilization");
  EXPECT_DOUBLE_EQ(report.out_of_range[0].given, 1.7);
  EXPECT_EQ(report.out_of_range[0].allowed, "(0, 1]");
  EXPECT_TRUE(report.missing.empty());
}

TEST(ValidateJobSpec, RangeEdges) {
  for (double ok : {1.0, 1e-9}) {
    Json doc = complete_job_json();
    doc["options"]["placement_density"] = ok;
    EXPECT_TRUE(std::holds_alternative<JobSpec>(validate_job_spec(doc))) << ok;
  }
  for (double bad : {0.0, -0.1, 1.0000001}) {
    Json doc = complete_job_json();
    doc["options"]["placement_density"] = bad;
    EXPECT_TRUE(std::holds_alternative<IncompleteReport>(validate_job_spec(doc))) << bad;
  }
  Json doc = complete_job_json();
  doc["options"]["clock_period_ns"] = 0.0;
  EXPECT_EQ(std::get<IncompleteReport>(validate_job_spec(doc)).out_of_range.at(0).allowed,
            "(0, inf)");
  doc = complete_job_json();
  doc["design"]["cell_count"] = 0;
  EXPECT_EQ(std::get<IncompleteReport>(validate_job_spec(doc)).out_of_range.at(0).field,
            "design.cell_count");
}

TEST(ValidateJobSpec, StageOrderIsEnforced) {
  Json doc = complete_job_json();
  doc["stages"] = {"routing", "placement"};
  EXPECT_FALSE(std::get<IncompleteReport>(validate_job_spec(doc)).invalid.empty());
  doc["stages"] = {"placement", "placement"};
  EXPECT_FALSE(std::get<IncompleteReport>(validate_job_spec(doc)).invalid.empty());
  doc["stages"] = {"full_flow", "sta"};
  EXPECT_FALSE(std::get<IncompleteReport>(validate_job_spec(doc)).invalid.empty());
  doc["stages"] = Json::array();
  EXPECT_FALSE(std::get<IncompleteReport>(validate_job_spec(doc)).invalid.empty());
  doc["stages"] = {"placement", "routing", "sta"};
  EXPECT_TRUE(std::holds_alternative<JobSpec>(validate_job_spec(doc)));
}

TEST(ValidateJobSpec, UnknownToolAndStageAreInvalid) {
  Json doc = complete_job_json();
  doc["tool"] = "innovus";
  doc["stages"] = {"synthesis"};
  const auto report = std::get<IncompleteReport>(validate_job_spec(doc));
  EXPECT_EQ(report.invalid.size(), 2u);
}

TEST(ValidateJobSpec, NonObjectAndUnparsableInputAreMalformed) {
  EXPECT_THROW(validate_job_spec(Json::array()), MalformedDocument);
  EXPECT_THROW(validate_job_spec_text("{\"design\": "), MalformedDocument);
  EXPECT_TRUE(std::holds_alternative<JobSpec>(
      validate_job_spec_text(complete_job_json().dump())));
}

TEST(ValidateJobSpec, IdempotentOnSerializedJobs) {
  Rng rng(2024);
  const char* stage_sets[][3] = {{"placement", "routing", "sta"},
                                 {"floorplan", "cts", nullptr},
                                 {"full_flow", nullptr, nullptr}};
  for (int i = 0; i < 200; ++i) {
    Json doc = complete_job_json("d" + std::to_string(i),
                                 1 + static_cast<std::int64_t>(rng.below(1'000'000)));
    Json stages = Json::array();
    for (const char* s : stage_sets[rng.below(3)]) {
      if (s) stages.push_back(s);
    }
    doc["stages"] = stages;
    doc["options"] = Json::object();
    if (rng.uniform() < 0.5) doc["options"]["core_utilization"] = rng.uniform(0.01, 1.0);
    if (rng.uniform() < 0.5) doc["options"]["placement_density"] = rng.uniform(0.01, 1.0);
    if (rng.uniform() < 0.5) doc["options"]["clock_period_ns"] = rng.uniform(0.1, 20.0);
    if (rng.uniform() < 0.5) doc["options"]["params"] = {{"seed_name", "x"}, {"iters", 3}};
    if (rng.uniform() < 0.3) doc["design"]["netlist_path"] = "netlist.v";
    const auto first = std::get<JobSpec>(validate_job_spec(doc));
    const auto second = std::get<JobSpec>(validate_job_spec(to_json(first)));
    EXPECT_EQ(first, second);
  }
}

TEST(PpaProduct, ReferenceRows) {
  EXPECT_NEAR(ppa_product(PpaMetrics(1.1529, 447.0, 53141)), 2.7386e7, 2.7386e7 * 1e-4);
  EXPECT_EQ(ppa_product(PpaMetrics(1.0, 1.0, 1.0)), 1.0);
  EXPECT_NEAR(ppa_product(PpaMetrics(1.9330, 24.8, 57593)), 2.7609e6, 2.7609e6 * 1e-4);
}

TEST(PpaMetrics, RejectsNonPositiveComponents) {
  EXPECT_THROW(PpaMetrics(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(PpaMetrics(1.0, -1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(PpaMetrics(1.0, 1.0, std::numeric_limits<double>::infinity()),
               std::invalid_argument);
  EXPECT_THROW(PpaMetrics(1.0, 1.0, std::nan("")), std::invalid_argument);
}

TEST(PpaMetrics, JsonRoundTrip) {
  const PpaMetrics m(1.25, 3.5, 1024.0);
  EXPECT_EQ(ppa_from_json(to_json(m)), m);
}

TEST(PpaImprovement, PublishedRows) {
  for (const auto& row : testing::kPpaRows) {
    const PpaMetrics before(row.before[0], row.before[1], row.before[2]);
    const PpaMetrics after(row.after[0], row.after[1], row.after[2]);
    // Independent evaluation of 1 - (d' p' a') / (d p a).
    const double oracle = 1.0 - (row.after[0] * row.after[1] * row.after[2]) /
                                    (row.before[0] * row.before[1] * row.before[2]);
    EXPECT_NEAR(ppa_improvement(before, after), oracle, 1e-12) << row.design;
    EXPECT_NEAR(ppa_improvement(before, after), row.improvement_pct / 100.0, 0.0005)
        << row.design;
  }
}

TEST(PpaImprovement, ZeroForIdenticalMetrics) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const PpaMetrics m(rng.uniform(0.1, 5.0), rng.uniform(0.1, 500.0), rng.uniform(10, 1e5));
    EXPECT_EQ(ppa_improvement(m, m), 0.0);
  }
}

TEST(PpaImprovement, StrictlyDecreasingInEachAfterComponent) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const PpaMetrics before(rng.uniform(0.1, 5.0), rng.uniform(0.1, 500.0),
                            rng.uniform(10, 1e5));
    double c[3] = {rng.uniform(0.1, 5.0), rng.uniform(0.1, 500.0), rng.uniform(10, 1e5)};
    const double base = ppa_improvement(before, PpaMetrics(c[0], c[1], c[2]));
    for (int k = 0; k < 3; ++k) {
      double bumped[3] = {c[0], c[1], c[2]};
      bumped[k] *= 1.0 + rng.uniform(0.001, 1.0);
      EXPECT_LT(ppa_improvement(before, PpaMetrics(bumped[0], bumped[1], bumped[2])), base);
    }
  }
}

TEST(RoundPercent, HalfAwayFromZero) {
  EXPECT_EQ(round_percent(0.0775625), 7.76);
  EXPECT_EQ(round_percent(0.3274541), 32.75);
  EXPECT_EQ(round_percent(0.0000625), 0.01);
  EXPECT_EQ(round_percent(-0.0000625), -0.01);
  for (double f : {0.1234, 0.98765, 0.5555}) EXPECT_EQ(round_percent(-f), -round_percent(f));
  EXPECT_EQ(round_percent(0.0), 0.0);
}

}  // namespace
}  // namespace edaflow
