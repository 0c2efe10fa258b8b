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

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "edaflow/allocator.hpp"
#include "test_support.hpp"

namespace edaflow {
namespace {

namespace fs = std::filesystem;
using testing::fixture;
using testing::mask_wall_fields;

struct CliResult {
  int code = -1;
  std::string output;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("edaflow-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    for (const auto& entry : fs::directory_iterator(fixture(""))) {
      fs::copy(entry.path(), dir_ / entry.path().filename());
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI inside the scratch directory; `prefix` goes before the
  // binary (environment or a pipe).
  CliResult cli(const std::string& args, const std::string& prefix = "") const {
    const std::string cmd = "cd '" + dir_.string() + "' && " + prefix + "'" EDAFLOW_CLI_PATH "' " +
                            args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    CliResult r;
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
  }

  fs::path dir_;
};

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

TEST_F(CliTest, ValidateCompleteAndIncompleteJobs) {
  auto ok = cli("validate --job gcd_job.json");
  EXPECT_EQ(ok.code, 0) << ok.output;
  EXPECT_TRUE(contains(ok.output, "valid job: design gcd (450 cells)"));
  auto bad = cli("validate --job gcd_incomplete_job.json");
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(contains(bad.output, "missing: constraint_path")) << bad.output;
}

TEST_F(CliTest, InteractiveModePromptsForMissingFields) {
  auto r = cli("validate --interactive --job gcd_incomplete_job.json",
               "printf 'constraints/gcd.sdc\\n' | ");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "constraint_path: "));
  auto eof = cli("validate --interactive --job gcd_incomplete_job.json", "true | ");
  EXPECT_EQ(eof.code, 1);
}

TEST_F(CliTest, RunFlowWritesTheReport) {
  auto r = cli("run-flow --job gcd_job.json --mode flow --out runs-root");
  EXPECT_EQ(r.code, 0) << r.output;
  const auto report_path = dir_ / "runs-root" / "runs" / "run-0001" / "report.json";
  ASSERT_TRUE(fs::exists(report_path));
  const Json report = Json::parse(slurp(report_path));
  EXPECT_EQ(report.at("tasks").size(), 5u);
  EXPECT_TRUE(contains(r.output, "final: cp_delay"));
  EXPECT_TRUE(fs::exists(dir_ / "runs-root" / "runs" / "run-0001" / "events.jsonl"));
}

TEST_F(CliTest, RunFlowRejectsIncompleteJobs) {
  auto r = cli("run-flow --job gcd_incomplete_job.json --out runs-root");
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(contains(r.output, "constraint_path"));
  EXPECT_FALSE(fs::exists(dir_ / "runs-root" / "runs"));
}

TEST_F(CliTest, RunFlowAllocateNeedsADeadline) {
  EXPECT_EQ(cli("run-flow --job picorv32_job.json --mode allocate --out r").code, 1);
  EXPECT_EQ(cli("run-flow --job picorv32_job.json --mode sideways --out r").code, 1);
}

TEST_F(CliTest, RunFlowAllocateOnThePicorv32Fixture) {
  auto r = cli("run-flow --job picorv32_job.json --mode allocate --deadline 480 --out r");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "allocation (4,8,1) 467s 21.46 CNY")) << r.output;
  const Json report = Json::parse(slurp(dir_ / "r" / "runs" / "run-0001" / "report.json"));
  EXPECT_EQ(report.at("allocation").at("choices"), Json({4, 8, 1}));

  auto again = cli("run-flow --job picorv32_job.json --mode allocate --deadline 480 --out r");
  EXPECT_EQ(again.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "r" / "runs" / "run-0002" / "report.json"));
}

TEST_F(CliTest, RunFlowInfeasibleDeadlineExitsTwo) {
  auto r = cli("run-flow --job picorv32_job.json --mode allocate --deadline 400 --out r");
  EXPECT_EQ(r.code, 2) << r.output;
  EXPECT_TRUE(contains(r.output, "minimum achievable total time 455 s")) << r.output;
}

TEST_F(CliTest, RunFlowReplayIsReproducible) {
  const std::string args = "run-flow --job gcd_job.json --mode dse --dse-budget 10 --seed 9 --out r";
  ASSERT_EQ(cli(args).code, 0);
  ASSERT_EQ(cli(args).code, 0);
  const auto a = mask_wall_fields(Json::parse(slurp(dir_ / "r/runs/run-0001/report.json")));
  const auto b = mask_wall_fields(Json::parse(slurp(dir_ / "r/runs/run-0002/report.json")));
  EXPECT_EQ(a.dump(2), b.dump(2));
}

TEST_F(CliTest, AllocateReproducesTheTableRow) {
  auto r = cli("allocate --options picorv32_options.json --budget 480 --out plan.json");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "(4,8,1) 467s 21.46 CNY")) << r.output;
  const Json plan = Json::parse(slurp(dir_ / "plan.json"));
  EXPECT_EQ(plan.at("choices"), Json({4, 8, 1}));
  EXPECT_NEAR(plan.at("total_cost").get<double>(), 21.465, 0.01);

  auto min_cost = cli("allocate --options picorv32_options.json --budget 480 --objective min-cost");
  EXPECT_TRUE(contains(min_cost.output, "(4,8,1)"));
}

TEST_F(CliTest, AllocateWithAGenerousBudgetMatchesBruteForce) {
  auto r = cli("allocate --options picorv32_options.json --budget 10000 --out plan.json");
  ASSERT_EQ(r.code, 0) << r.output;
  const auto expected =
      brute_force_allocate(testing::table_options(false), 10000).choices();
  EXPECT_EQ(Json::parse(slurp(dir_ / "plan.json")).at("choices"), Json(expected));
}

TEST_F(CliTest, AllocateErrors) {
  auto infeasible = cli("allocate --options picorv32_options.json --budget 400");
  EXPECT_EQ(infeasible.code, 2);
  EXPECT_TRUE(contains(infeasible.output, "455"));
  { std::ofstream(dir_ / "broken.json") << "{\"stages\": [ {\"name\": "; }
  EXPECT_EQ(cli("allocate --options broken.json --budget 480").code, 4);
  { std::ofstream(dir_ / "shape.json") << "{\"stages\": 3}"; }
  EXPECT_EQ(cli("allocate --options shape.json --budget 480").code, 4);
  EXPECT_EQ(cli("allocate --options missing.json --budget 480").code, 4);
}

TEST_F(CliTest, PriceListFromTheEnvironment) {
  {
    std::ofstream(dir_ / "usd.json")
        << R"({"currency": "USD", "rates": {"1": 5.0, "2": 9.0, "4": 16.0, "8": 30.0}})";
  }
  auto r = cli("allocate --options picorv32_options.json --budget 480", "EDAFLOW_PRICES=usd.json ");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "USD"));
}

TEST_F(CliTest, PredictTrainAndPredict) {
  auto train = cli("predict-train --data synthetic --seed 7 --out model.json");
  EXPECT_EQ(train.code, 0) << train.output;
  EXPECT_TRUE(contains(train.output, "holdout MAPE"));
  EXPECT_TRUE(fs::exists(dir_ / "model.json"));
  auto predict = cli("predict --model model.json --cells 11000 --stage routing --vcpus 1 8 --out p.json");
  EXPECT_EQ(predict.code, 0) << predict.output;
  const Json p = Json::parse(slurp(dir_ / "p.json"));
  ASSERT_EQ(p.size(), 2u);
  EXPECT_GT(p[0].at("runtime_s").get<double>(), p[1].at("runtime_s").get<double>());

  EXPECT_EQ(cli("predict-train --data synthetic --seed 7 --out model2.json").code, 0);
  EXPECT_EQ(slurp(dir_ / "model.json"), slurp(dir_ / "model2.json"));
  EXPECT_EQ(cli("predict --model model.json --cells 100 --stage bogus").code, 1);
}

TEST_F(CliTest, PredictTrainFromCsvNeedsEnoughRows) {
  EXPECT_EQ(cli("predict-train --data picorv32_runtimes.csv --out m.json").code, 1);
}

TEST_F(CliTest, DseWritesReportAndTrace) {
  auto r = cli("dse --job gcd_job.json --budget 16 --seed 3 --out d1");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "improvement over defaults"));
  ASSERT_TRUE(fs::exists(dir_ / "d1" / "dse_report.json"));
  ASSERT_TRUE(fs::exists(dir_ / "d1" / "trace.csv"));
  ASSERT_EQ(cli("dse --job gcd_job.json --budget 16 --seed 3 --out d2").code, 0);
  EXPECT_EQ(slurp(dir_ / "d1" / "dse_report.json"), slurp(dir_ / "d2" / "dse_report.json"));
  EXPECT_EQ(slurp(dir_ / "d1" / "trace.csv"), slurp(dir_ / "d2" / "trace.csv"));
  EXPECT_EQ(cli("dse --job gcd_job.json --strategy greedy").code, 1);
}

TEST_F(CliTest, SimulateTheUniformFixture) {
  auto r = cli("simulate --cluster 4x8 --tasks eight_uniform.json --compare 1x8 --out s.json");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(contains(r.output, "makespan 100 s")) << r.output;
  EXPECT_TRUE(contains(r.output, "speedup vs 1x8: 4")) << r.output;
  EXPECT_EQ(Json::parse(slurp(dir_ / "s.json")).at("speedup"), 4.0);
  EXPECT_TRUE(fs::exists(dir_ / "s.events.jsonl"));
  EXPECT_EQ(cli("simulate --cluster 1x2 --tasks eight_uniform.json").code, 1);
}

TEST_F(CliTest, HistoryAndStatus) {
  ASSERT_EQ(cli("run-flow --job gcd_job.json --out r").code, 0);
  ASSERT_EQ(cli("run-flow --job picorv32_job.json --mode allocate --deadline 480 --out r").code, 0);
  ASSERT_EQ(cli("run-flow --job gcd_job.json --out r").code, 0);

  auto all = cli("history --root r --out h.json");
  EXPECT_EQ(all.code, 0);
  EXPECT_EQ(Json::parse(slurp(dir_ / "h.json")).size(), 3u);
  auto pico = cli("history --root r --design picorv32");
  EXPECT_TRUE(contains(pico.output, "run-0002"));
  EXPECT_FALSE(contains(pico.output, "run-0001"));
  auto none = cli("history --root r --to 1999-12-31");
  EXPECT_TRUE(contains(none.output, "no matching runs"));

  auto status = cli("status --root r --run run-0002");
  EXPECT_EQ(status.code, 0) << status.output;
  EXPECT_TRUE(contains(status.output, "run run-0002: 7 tasks"));
  EXPECT_EQ(cli("status --root r --run run-0404").code, 4);
}

TEST_F(CliTest, UsageAndFormatErrors) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  { std::ofstream(dir_ / "notjson.json") << "design: gcd"; }
  EXPECT_EQ(cli("validate --job notjson.json").code, 4);
  EXPECT_EQ(cli("validate --job nowhere.json").code, 4);
}

}  // namespace
}  // namespace edaflow
