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

#include <algorithm>
#include <filesystem>
#include <set>
#include <thread>

#include <unistd.h>

#include "edaflow/orchestrator.hpp"
#include "test_support.hpp"

namespace edaflow {
namespace {

namespace fs = std::filesystem;
using testing::load_job;
using testing::mask_wall_fields;

class RoutingCrashBackend : public ToolBackend {
 public:
  ToolKind kind() const override { return ToolKind::kMock; }
  StageResult run(const StageScript& script, const MachineConfig& machine) const override {
    if (script.stage == StageKind::kRouting) {
      StageResult r;
      r.stage = script.stage;
      r.outcome = StageOutcome::failure("TOOL_CRASH", "router segfault");
      return r;
    }
    return mock_.run(script, machine);
  }

 private:
  MockBackend mock_;
};

class OrchestratorTest : public ::testing::Test {
 protected:
  ExecutionContext context(const ToolBackend* backend = nullptr) const {
    ExecutionContext ctx;
    ctx.backend = backend != nullptr ? backend : &mock_;
    ctx.templates = &templates_;
    ctx.prices = PriceList::default_list();
    ctx.base_dir = testing::fixture("");
    ctx.dse.budget = 12;
    ctx.synthetic_samples = 200;
    return ctx;
  }

  RunReport run(const JobSpec& job, PlanMode mode, std::optional<double> deadline,
                EventLog* log = nullptr) const {
    EventLog local;
    return execute(job, plan(job, mode, deadline), context(), log != nullptr ? *log : local);
  }

  fs::path temp_root(const std::string& name) const {
    const auto root = fs::temp_directory_path() /
                      ("edaflow-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(root);
    return root;
  }

  MockBackend mock_;
  TemplateStore templates_ = TemplateStore::load(TemplateStore::default_root());
};

std::vector<std::string> ids(const std::vector<Task>& tasks) {
  std::vector<std::string> out;
  for (const auto& t : tasks) out.push_back(t.id);
  return out;
}

const Task& by_id(const std::vector<Task>& tasks, const std::string& id) {
  return *std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == id; });
}

TEST(Plan, AllocateModeOnThePicorv32Fixture) {
  const auto tasks = plan(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 480.0);
  EXPECT_EQ(ids(tasks), (std::vector<std::string>{"predict:placement", "predict:routing",
                                                  "predict:sta", "allocate", "stage:placement",
                                                  "stage:routing", "stage:sta"}));
  const Task& alloc = by_id(tasks, "allocate");
  EXPECT_EQ(alloc.kind, TaskKind(AllocateTask{480.0}));
  EXPECT_EQ(alloc.inputs, (std::vector<std::string>{"predict:placement", "predict:routing",
                                                    "predict:sta"}));
  for (const char* s : {"stage:placement", "stage:routing", "stage:sta"}) {
    const auto& in = by_id(tasks, s).inputs;
    EXPECT_NE(std::find(in.begin(), in.end(), "allocate"), in.end()) << s;
  }
}

TEST(Plan, FullFlowWithoutRuntimeDataTrainsFirst) {
  const auto tasks = plan(testing::complete_job(), PlanMode::kAllocateThenFlow, 480.0);
  ASSERT_EQ(tasks.size(), 1u + 5u + 1u + 5u);
  EXPECT_EQ(tasks[0].kind, TaskKind(TrainTask{}));
  for (int i = 1; i <= 5; ++i) {
    EXPECT_TRUE(std::holds_alternative<PredictTask>(tasks[i].kind));
    EXPECT_EQ(tasks[i].inputs, (std::vector<std::string>{"train"}));
  }
  EXPECT_EQ(tasks[6].inputs.size(), 5u);
}

TEST(Plan, FlowOnlyIsOneStageTaskPerStage) {
  auto job = testing::complete_job();
  job.stages = {StageKind::kSta};
  const auto single = plan(job, PlanMode::kFlowOnly);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].kind, TaskKind(RunStageTask{StageKind::kSta}));
  EXPECT_TRUE(single[0].inputs.empty());

  const auto full = plan(testing::complete_job(), PlanMode::kFlowOnly);
  ASSERT_EQ(full.size(), 5u);
  for (std::size_t i = 1; i < full.size(); ++i) {
    EXPECT_EQ(full[i].inputs, std::vector<std::string>{full[i - 1].id});
  }
}

TEST(Plan, DseModeWrapsTheFlow) {
  const auto tasks = plan(testing::complete_job(), PlanMode::kFlowWithDse);
  ASSERT_EQ(tasks.size(), 6u);
  EXPECT_EQ(tasks[0].kind, TaskKind(RunDseTask{}));
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    EXPECT_EQ(tasks[i].inputs.front(), "dse");
  }
}

TEST(Plan, AllocateWithoutDeadline) {
  EXPECT_THROW(plan(testing::complete_job(), PlanMode::kAllocateThenFlow), DeadlineRequired);
}

TEST(Plan, InputsOnlyReferenceEarlierTasksAndStartPending) {
  for (auto mode : {PlanMode::kFlowOnly, PlanMode::kFlowWithDse, PlanMode::kAllocateThenFlow}) {
    const auto tasks = plan(testing::complete_job(), mode, 100.0);
    EXPECT_EQ(tasks, plan(testing::complete_job(), mode, 100.0));
    std::set<std::string> seen;
    for (const auto& t : tasks) {
      EXPECT_EQ(t.status, TaskStatus::kPending);
      for (const auto& in : t.inputs) EXPECT_TRUE(seen.count(in)) << t.id << " <- " << in;
      EXPECT_TRUE(seen.insert(t.id).second);
    }
  }
}

TEST(Plan, TasksRoundTripThroughJson) {
  for (const auto& t : plan(testing::complete_job(), PlanMode::kAllocateThenFlow, 480.0)) {
    EXPECT_EQ(task_from_json(to_json(t)), t);
  }
  EXPECT_EQ(parse_plan_mode("allocate"), PlanMode::kAllocateThenFlow);
  EXPECT_EQ(parse_task_status(to_string(TaskStatus::kSkipped)), TaskStatus::kSkipped);
  EXPECT_FALSE(parse_plan_mode("bogus"));
}

TEST_F(OrchestratorTest, FlowOnlyHappyPath) {
  const auto report = run(testing::complete_job(), PlanMode::kFlowOnly, std::nullopt);
  EXPECT_EQ(report.status_counts().at(TaskStatus::kDone), 5);
  EXPECT_EQ(report.stage_results.size(), 5u);
  ASSERT_TRUE(report.final_metrics);
  EXPECT_EQ(report.final_metrics, report.stage_results.back().metrics);
  EXPECT_FALSE(report.has_failures());
  ASSERT_TRUE(report.schedule);
  double chain = 0.0;
  for (const auto& s : report.stage_results) chain += s.runtime_s;
  EXPECT_NEAR(report.schedule->makespan_s, chain, 1e-9 * chain);
  EXPECT_GT(report.executed_cost, 0.0);
}

TEST_F(OrchestratorTest, AllocateModeRunsStagesOnTheChosenMachines) {
  const auto report = run(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 480.0);
  EXPECT_FALSE(report.has_failures());
  ASSERT_TRUE(report.allocation);
  EXPECT_EQ(report.allocation->choices(), (std::vector<int>{4, 8, 1}));
  EXPECT_EQ(report.allocation->total_time_s, 467.0);
  EXPECT_EQ(report.stage_vcpus, (std::map<std::string, int>{
                                    {"stage:placement", 4}, {"stage:routing", 8}, {"stage:sta", 1}}));
  EXPECT_EQ(report.predictions.at(StageKind::kRouting).at(8), 378.0);
  const Json j = to_json(report);
  EXPECT_EQ(j.at("allocation").at("choices"), Json({4, 8, 1}));
}

TEST_F(OrchestratorTest, InfeasibleDeadlineFailsAllocateAndSkipsStages) {
  const auto report = run(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 400.0);
  EXPECT_EQ(by_id(report.tasks, "allocate").status, TaskStatus::kFailed);
  for (const char* s : {"stage:placement", "stage:routing", "stage:sta"}) {
    EXPECT_EQ(by_id(report.tasks, s).status, TaskStatus::kSkipped) << s;
  }
  ASSERT_TRUE(report.min_total_time_s);
  EXPECT_EQ(*report.min_total_time_s, 455.0);
  EXPECT_NE(report.details.at("allocate").find("455"), std::string::npos);
  EXPECT_FALSE(report.allocation);
  EXPECT_FALSE(report.final_metrics);
}

TEST_F(OrchestratorTest, StageFailureSkipsLaterStages) {
  RoutingCrashBackend crash;
  EventLog log;
  const auto job = testing::complete_job();
  const auto report = execute(job, plan(job, PlanMode::kFlowOnly), context(&crash), log);
  EXPECT_EQ(by_id(report.tasks, "stage:cts").status, TaskStatus::kDone);
  EXPECT_EQ(by_id(report.tasks, "stage:routing").status, TaskStatus::kFailed);
  EXPECT_EQ(by_id(report.tasks, "stage:sta").status, TaskStatus::kSkipped);
  EXPECT_NE(report.details.at("stage:routing").find("TOOL_CRASH"), std::string::npos);
  EXPECT_FALSE(report.final_metrics);
  EXPECT_TRUE(report.has_failures());
}

TEST_F(OrchestratorTest, DseModeFeedsBestParamsIntoTheFlow) {
  const auto report = run(testing::complete_job(), PlanMode::kFlowWithDse, std::nullopt);
  ASSERT_TRUE(report.dse);
  EXPECT_EQ(report.dse->trials.size(), 12u);
  ASSERT_TRUE(report.final_metrics);
  EXPECT_EQ(*report.final_metrics, *report.dse->best_metrics);
}

TEST_F(OrchestratorTest, TrainedPredictorPathCompletes) {
  const auto report = run(testing::complete_job(), PlanMode::kAllocateThenFlow, 100000.0);
  EXPECT_FALSE(report.has_failures()) << to_json(report).dump(2);
  ASSERT_TRUE(report.training);
  EXPECT_EQ(report.predictions.size(), 5u);
  ASSERT_TRUE(report.allocation);
  EXPECT_EQ(report.allocation->chosen.size(), 5u);
}

TEST_F(OrchestratorTest, SameSeedsGiveEqualReports) {
  for (auto mode : {PlanMode::kFlowOnly, PlanMode::kFlowWithDse, PlanMode::kAllocateThenFlow}) {
    const auto job = testing::complete_job();
    const Json a = mask_wall_fields(to_json(run(job, mode, 100000.0)));
    const Json b = mask_wall_fields(to_json(run(job, mode, 100000.0)));
    EXPECT_EQ(a.dump(), b.dump()) << to_string(mode);
  }
}

TEST_F(OrchestratorTest, EventStreamIsGapFreeAndCoversEveryTransition) {
  for (auto [job, mode, deadline] :
       {std::tuple{testing::complete_job(), PlanMode::kAllocateThenFlow, 100000.0},
        std::tuple{load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 400.0},
        std::tuple{testing::complete_job(), PlanMode::kFlowWithDse, 0.0}}) {
    EventLog log;
    const auto report = run(job, mode, deadline, &log);
    const auto events = log.snapshot();
    std::map<std::string, std::vector<std::string>> path;
    for (std::size_t i = 0; i < events.size(); ++i) {
      EXPECT_EQ(events[i].seq, i + 1);
      const auto& p = events[i].payload;
      auto& steps = path[events[i].task_id];
      EXPECT_EQ(p.at("from").get<std::string>(), steps.empty() ? "pending" : steps.back());
      steps.push_back(p.at("to").get<std::string>());
    }
    for (const auto& t : report.tasks) {
      EXPECT_TRUE(is_terminal(t.status)) << t.id;
      const auto& steps = path.at(t.id);
      EXPECT_EQ(steps.back(), to_string(t.status));
      if (t.status == TaskStatus::kSkipped) {
        EXPECT_EQ(steps.size(), 1u);
      } else {
        EXPECT_EQ(steps, (std::vector<std::string>{"running", std::string(to_string(t.status))}));
      }
    }
  }
}

TEST_F(OrchestratorTest, StatusDuringARunIsConsistent) {
  HistoryStore store;
  Orchestrator orch(store);
  const std::string run_id = store.next_run_id();
  int checks = 0;
  orch.on_event([&](const EventRecord& e) {
    const auto s = orch.status(run_id);
    EXPECT_TRUE(s.live);
    int sum = 0;
    for (const auto& [status, n] : s.counts) sum += n;
    EXPECT_EQ(sum, static_cast<int>(s.total));
    ASSERT_TRUE(s.latest);
    EXPECT_GE(s.latest->seq, e.seq);
    ++checks;
  });
  const auto report = orch.submit(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow,
                                  480.0, context());
  EXPECT_EQ(report.run_id, run_id);
  EXPECT_EQ(checks, 14);

  const auto done = orch.status(run_id);
  EXPECT_FALSE(done.live);
  EXPECT_EQ(done.total, 7u);
  EXPECT_EQ(done.counts.at(TaskStatus::kRunning), 0);
  EXPECT_EQ(done.counts.at(TaskStatus::kPending), 0);
  EXPECT_EQ(done.counts.at(TaskStatus::kDone), 7);
  EXPECT_EQ(done.latest->seq, 14u);
  EXPECT_THROW(orch.status("run-9999"), UnknownRun);
}

TEST_F(OrchestratorTest, HistoryInSubmissionOrderWithFilters) {
  HistoryStore store;
  Orchestrator orch(store);
  orch.submit(testing::complete_job(), PlanMode::kFlowOnly, std::nullopt, context());
  orch.submit(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 480.0, context());
  orch.submit(testing::complete_job(), PlanMode::kFlowOnly, std::nullopt, context());

  const auto all = orch.history();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].run_id, "run-0001");
  EXPECT_EQ(all[1].run_id, "run-0002");
  EXPECT_EQ(all[2].run_id, "run-0003");
  EXPECT_EQ(all[1].design, "picorv32");

  const auto pico = orch.history({"picorv32", std::nullopt, std::nullopt});
  ASSERT_EQ(pico.size(), 1u);
  EXPECT_EQ(pico[0].run_id, "run-0002");

  EXPECT_TRUE(orch.history({std::nullopt, "1990-01-01", "1990-12-31"}).empty());
  const std::string today = all[0].submitted_at.substr(0, 10);
  EXPECT_EQ(orch.history({std::nullopt, today, std::nullopt}).size(), 3u);
  EXPECT_TRUE(orch.history({"gcd", "2999", std::nullopt}).empty());
  EXPECT_EQ(orch.history({"gcd", std::nullopt, "2999"}).size(), 2u);
}

TEST_F(OrchestratorTest, PersistedHistoryReloadsEqual) {
  const auto root = temp_root("history");
  std::vector<RunRecord> originals;
  {
    HistoryStore store(root);
    Orchestrator orch(store);
    orch.submit(testing::complete_job(), PlanMode::kFlowWithDse, std::nullopt, context());
    orch.submit(load_job("picorv32_job.json"), PlanMode::kAllocateThenFlow, 400.0, context());
    originals = {store.lookup("run-0001"), store.lookup("run-0002")};
  }
  for (const char* f : {"jobspec.json", "tasks.json", "events.jsonl", "report.json"}) {
    EXPECT_TRUE(fs::exists(root / "runs" / "run-0002" / f)) << f;
  }
  HistoryStore reloaded(root);
  ASSERT_EQ(reloaded.size(), 2u);
  EXPECT_EQ(reloaded.lookup("run-0001"), originals[0]);
  EXPECT_EQ(reloaded.lookup("run-0002"), originals[1]);
  EXPECT_EQ(reloaded.next_run_id(), "run-0003");
  fs::remove_all(root);
}

TEST_F(OrchestratorTest, RunIdsSkipExistingDirectories) {
  const auto root = temp_root("ids");
  fs::create_directories(root / "runs" / "run-0007");
  HistoryStore store(root);
  Orchestrator orch(store);
  const auto report = orch.submit(testing::complete_job(), PlanMode::kFlowOnly, std::nullopt, context());
  EXPECT_EQ(report.run_id, "run-0008");
  EXPECT_TRUE(fs::exists(root / "runs" / "run-0008" / "report.json"));
  fs::remove_all(root);
}

TEST_F(OrchestratorTest, StoreIsAppendOnly) {
  HistoryStore store;
  Orchestrator orch(store);
  orch.submit(testing::complete_job(), PlanMode::kFlowOnly, std::nullopt, context());
  RunRecord dup = store.lookup("run-0001");
  EXPECT_THROW(store.append(dup), std::invalid_argument);

  auto other = testing::complete_job("gcd", 9999);
  EXPECT_THROW(orch.submit(other, PlanMode::kFlowOnly, std::nullopt, context()), DesignConflict);
  EXPECT_EQ(store.size(), 1u);
  EXPECT_THROW(store.lookup("run-0042"), UnknownRun);
}

TEST(EventLog, ConcurrentAppendsStayGapFree) {
  EventLog log;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&log, t] {
      for (int i = 0; i < 250; ++i) log.append("t" + std::to_string(t), Json{{"i", i}});
    });
  }
  for (auto& th : threads) th.join();
  const auto events = log.snapshot();
  ASSERT_EQ(events.size(), 1000u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, i + 1);
  EXPECT_EQ(event_from_json(to_json(events[5])), events[5]);
}

}  // namespace
}  // namespace edaflow
