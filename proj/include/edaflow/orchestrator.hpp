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

#ifndef EDAFLOW_ORCHESTRATOR_HPP_
#define EDAFLOW_ORCHESTRATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edaflow/allocator.hpp"
#include "edaflow/cluster_sim.hpp"
#include "edaflow/dse_engine.hpp"
#include "edaflow/eda_adapter.hpp"
#include "edaflow/flow_model.hpp"
#include "edaflow/runtime_predictor.hpp"

namespace edaflow {

enum class PlanMode { kFlowOnly, kFlowWithDse, kAllocateThenFlow };

std::string_view to_string(PlanMode mode);
// Accepts "flow", "dse" and "allocate".
std::optional<PlanMode> parse_plan_mode(std::string_view name);

enum class TaskStatus { kPending, kRunning, kDone, kFailed, kSkipped };

std::string_view to_string(TaskStatus status);
std::optional<TaskStatus> parse_task_status(std::string_view name);
bool is_terminal(TaskStatus status);

struct RunStageTask {
  StageKind stage;
  bool operator==(const RunStageTask&) const = default;
};
struct RunDseTask {
  bool operator==(const RunDseTask&) const = default;
};
struct AllocateTask {
  double deadline_s = 0.0;
  bool operator==(const AllocateTask&) const = default;
};
struct PredictTask {
  StageKind stage;
  bool operator==(const PredictTask&) const = default;
};
struct TrainTask {
  bool operator==(const TrainTask&) const = default;
};
using TaskKind =
    std::variant<RunStageTask, RunDseTask, AllocateTask, PredictTask, TrainTask>;

struct Task {
  std::string id;
  TaskKind kind;
  std::vector<std::string> inputs;  // ids of earlier tasks
  TaskStatus status = TaskStatus::kPending;

  bool operator==(const Task&) const = default;
};

std::string describe(const TaskKind& kind);
Json to_json(const Task& task);
Task task_from_json(const Json& j);

class DeadlineRequired : public std::invalid_argument {
 public:
  DeadlineRequired()
      : std::invalid_argument("allocate mode needs a deadline in seconds") {}
};

// Turns a validated job into a dependency-annotated task list.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual std::vector<Task> plan(const JobSpec& job, PlanMode mode,
                                 std::optional<double> deadline_s) const = 0;
};

// Fixed task shapes per mode:
//   flow     -> stage:<s> for each stage, chained
//   dse      -> dse, then the chained stages using the best parameters
//   allocate -> [train,] predict:<s> per stage, allocate, chained stages
// A train task is added only when the job names no runtime table or model.
class RuleBasedPlanner : public Planner {
 public:
  std::vector<Task> plan(const JobSpec& job, PlanMode mode,
                         std::optional<double> deadline_s) const override;
};

std::vector<Task> plan(const JobSpec& job, PlanMode mode,
                       std::optional<double> deadline_s = std::nullopt);

struct EventRecord {
  std::uint64_t seq = 0;
  std::int64_t wall_time_ms = 0;
  std::string task_id;
  Json payload;

  bool operator==(const EventRecord&) const = default;
};

Json to_json(const EventRecord& e);
EventRecord event_from_json(const Json& j);

// Append-only, gap-free sequence starting at 1. Observers run on the
// appending thread after the lock is released.
class EventLog {
 public:
  using Observer = std::function<void(const EventRecord&)>;

  EventRecord append(std::string task_id, Json payload);
  std::vector<EventRecord> snapshot() const;
  void subscribe(Observer observer);

 private:
  mutable std::mutex mu_;
  std::vector<EventRecord> records_;
  std::vector<Observer> observers_;
};

// Modules and settings execute() dispatches to.
struct ExecutionContext {
  const ToolBackend* backend = nullptr;
  const TemplateStore* templates = nullptr;
  PriceList prices;
  std::vector<Node> cluster = uniform_cluster(4, 8);
  std::uint64_t seed = 1;
  int default_vcpus = 4;
  // Budget, strategy and fault rules for dse tasks; the seed comes from `seed`.
  DseConfig dse;
  std::size_t synthetic_samples = 400;
  // Overrides the job's runtime table/model and any train task.
  std::shared_ptr<const RuntimeSource> runtime_source;
  // Base for relative paths in job options.
  std::filesystem::path base_dir;
};

struct RunReport {
  std::string run_id;
  std::string design;
  PlanMode mode = PlanMode::kFlowOnly;
  std::optional<double> deadline_s;
  std::uint64_t seed = 0;
  std::vector<Task> tasks;
  std::map<std::string, std::string> details;  // task id -> outcome text
  std::vector<StageResult> stage_results;
  std::map<std::string, int> stage_vcpus;  // task id -> vCPUs used
  std::map<StageKind, std::map<int, double>> predictions;
  std::optional<TrainingSummary> training;
  std::optional<AllocationPlan> allocation;
  std::optional<double> min_total_time_s;  // set when allocation was infeasible
  std::optional<DseReport> dse;
  std::optional<PpaMetrics> final_metrics;
  std::optional<SimulationResult> schedule;
  double executed_cost = 0.0;
  std::string currency;
  std::int64_t wall_started_ms = 0;
  std::int64_t wall_finished_ms = 0;

  bool has_failures() const;
  std::map<TaskStatus, int> status_counts() const;
};

// Keys starting with "wall_" hold wall-clock values.
Json to_json(const RunReport& report);

// Runs `tasks` in dependency order. Tasks whose inputs are all done form a
// wave and run concurrently; their events are recorded in task-list order.
// A failed task marks its transitive dependents Skipped.
RunReport execute(const JobSpec& job, std::vector<Task> tasks,
                  const ExecutionContext& ctx, EventLog& log,
                  const std::function<void(const std::vector<Task>&)>& on_progress = {});

struct RunRecord {
  std::string run_id;
  std::string submitted_at;  // ISO 8601, UTC
  JobSpec job;
  PlanMode mode = PlanMode::kFlowOnly;
  std::vector<Task> tasks;
  std::vector<EventRecord> events;
  Json report;

  bool operator==(const RunRecord&) const = default;
};

struct RunSummary {
  std::string run_id;
  std::string design;
  std::string submitted_at;
  PlanMode mode = PlanMode::kFlowOnly;
  std::map<TaskStatus, int> counts;
};

struct HistoryFilter {
  std::optional<std::string> design;
  // Inclusive, compared against the leading characters of submitted_at, so
  // "2026-10-15" selects the whole day.
  std::optional<std::string> from;
  std::optional<std::string> to;
};

class UnknownRun : public std::out_of_range {
 public:
  explicit UnknownRun(const std::string& id) : std::out_of_range("unknown run " + id) {}
};

class DesignConflict : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Append-only run history. With a root directory every run is written to
// <root>/runs/<run_id>/{jobspec.json, tasks.json, events.jsonl, report.json}
// and listed in <root>/runs/index.jsonl.
class HistoryStore {
 public:
  HistoryStore() = default;
  // Loads the runs already stored under `root`.
  explicit HistoryStore(std::filesystem::path root);

  // Never reuses an id, including directories present on disk.
  std::string next_run_id() const;
  // Throws DesignConflict if the design name is known with another
  // descriptor, std::invalid_argument if the id is taken.
  const RunRecord& append(RunRecord record);
  const RunRecord& lookup(const std::string& run_id) const;
  std::vector<RunSummary> history(const HistoryFilter& filter = {}) const;
  std::size_t size() const;
  const std::optional<std::filesystem::path>& root() const { return root_; }

 private:
  void persist(const RunRecord& record) const;

  mutable std::mutex mu_;
  std::optional<std::filesystem::path> root_;
  std::vector<std::unique_ptr<RunRecord>> runs_;
};

struct StatusReport {
  std::string run_id;
  bool live = false;
  std::size_t total = 0;
  std::map<TaskStatus, int> counts;
  std::optional<EventRecord> latest;
  double elapsed_s = 0.0;
};

Json to_json(const StatusReport& status);

// Plans, executes, and records runs; answers status queries for live and
// stored runs.
class Orchestrator {
 public:
  explicit Orchestrator(HistoryStore& store,
                        std::shared_ptr<const Planner> planner =
                            std::make_shared<RuleBasedPlanner>());

  // Called after every event of a run, on the executing thread.
  void on_event(EventLog::Observer observer) { observer_ = std::move(observer); }

  // Returns the stored report; its run_id names the new history entry.
  RunReport submit(const JobSpec& job, PlanMode mode, std::optional<double> deadline_s,
                   const ExecutionContext& ctx);
  StatusReport status(const std::string& run_id) const;
  std::vector<RunSummary> history(const HistoryFilter& filter = {}) const {
    return store_.history(filter);
  }

 private:
  struct LiveRun {
    mutable std::mutex mu;
    std::vector<Task> tasks;
    EventLog log;
    std::int64_t started_ms = 0;
  };

  HistoryStore& store_;
  std::shared_ptr<const Planner> planner_;
  EventLog::Observer observer_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<LiveRun>> live_;
};

std::int64_t wall_clock_ms();
std::string format_utc(std::int64_t ms);

}  // namespace edaflow

#endif  // EDAFLOW_ORCHESTRATOR_HPP_
