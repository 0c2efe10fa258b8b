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

#include "edaflow/orchestrator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

namespace edaflow {

namespace {

std::string task_kind_name(const TaskKind& kind) {
  struct {
    std::string operator()(const RunStageTask&) const { return "run_stage"; }
    std::string operator()(const RunDseTask&) const { return "run_dse"; }
    std::string operator()(const AllocateTask&) const { return "allocate"; }
    std::string operator()(const PredictTask&) const { return "predict"; }
    std::string operator()(const TrainTask&) const { return "train"; }
  } visitor;
  return std::visit(visitor, kind);
}

StageKind required_stage(const Json& j) {
  auto stage = parse_stage(j.at("stage").get<std::string>());
  if (!stage) throw std::invalid_argument("unknown stage in task");
  return *stage;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Json::parse(in);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::map<TaskStatus, int> count_statuses(const std::vector<Task>& tasks) {
  std::map<TaskStatus, int> counts;
  for (TaskStatus s : {TaskStatus::kPending, TaskStatus::kRunning, TaskStatus::kDone,
                       TaskStatus::kFailed, TaskStatus::kSkipped}) {
    counts[s] = 0;
  }
  for (const auto& t : tasks) ++counts[t.status];
  return counts;
}

Json counts_to_json(const std::map<TaskStatus, int>& counts) {
  Json j = Json::object();
  for (const auto& [status, n] : counts) j[std::string(to_string(status))] = n;
  return j;
}

}  // namespace

std::string_view to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::kFlowOnly: return "flow";
    case PlanMode::kFlowWithDse: return "dse";
    case PlanMode::kAllocateThenFlow: return "allocate";
  }
  return "flow";
}

std::optional<PlanMode> parse_plan_mode(std::string_view name) {
  if (name == "flow") return PlanMode::kFlowOnly;
  if (name == "dse") return PlanMode::kFlowWithDse;
  if (name == "allocate") return PlanMode::kAllocateThenFlow;
  return std::nullopt;
}

std::string_view to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kRunning: return "running";
    case TaskStatus::kDone: return "done";
    case TaskStatus::kFailed: return "failed";
    case TaskStatus::kSkipped: return "skipped";
  }
  return "pending";
}

std::optional<TaskStatus> parse_task_status(std::string_view name) {
  for (TaskStatus s : {TaskStatus::kPending, TaskStatus::kRunning, TaskStatus::kDone,
                       TaskStatus::kFailed, TaskStatus::kSkipped}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool is_terminal(TaskStatus status) {
  return status == TaskStatus::kDone || status == TaskStatus::kFailed ||
         status == TaskStatus::kSkipped;
}

std::string describe(const TaskKind& kind) {
  struct {
    std::string operator()(const RunStageTask& t) const {
      return fmt::format("RunStage({})", to_string(t.stage));
    }
    std::string operator()(const RunDseTask&) const { return "RunDse"; }
    std::string operator()(const AllocateTask& t) const {
      return fmt::format("Allocate({}s)", t.deadline_s);
    }
    std::string operator()(const PredictTask& t) const {
      return fmt::format("Predict({})", to_string(t.stage));
    }
    std::string operator()(const TrainTask&) const { return "Train"; }
  } visitor;
  return std::visit(visitor, kind);
}

Json to_json(const Task& task) {
  Json j;
  j["id"] = task.id;
  j["kind"] = task_kind_name(task.kind);
  if (const auto* s = std::get_if<RunStageTask>(&task.kind)) j["stage"] = to_string(s->stage);
  if (const auto* p = std::get_if<PredictTask>(&task.kind)) j["stage"] = to_string(p->stage);
  if (const auto* a = std::get_if<AllocateTask>(&task.kind)) j["deadline_s"] = a->deadline_s;
  j["inputs"] = task.inputs;
  j["status"] = to_string(task.status);
  return j;
}

Task task_from_json(const Json& j) {
  Task t;
  t.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "run_stage") {
    t.kind = RunStageTask{required_stage(j)};
  } else if (kind == "run_dse") {
    t.kind = RunDseTask{};
  } else if (kind == "allocate") {
    t.kind = AllocateTask{j.at("deadline_s").get<double>()};
  } else if (kind == "predict") {
    t.kind = PredictTask{required_stage(j)};
  } else if (kind == "train") {
    t.kind = TrainTask{};
  } else {
    throw std::invalid_argument("unknown task kind " + kind);
  }
  t.inputs = j.at("inputs").get<std::vector<std::string>>();
  auto status = parse_task_status(j.at("status").get<std::string>());
  if (!status) throw std::invalid_argument("unknown task status");
  t.status = *status;
  return t;
}

std::vector<Task> RuleBasedPlanner::plan(const JobSpec& job, PlanMode mode,
                                         std::optional<double> deadline_s) const {
  if (mode == PlanMode::kAllocateThenFlow && !deadline_s) throw DeadlineRequired();
  const auto stages = flow_stages(job);
  std::vector<Task> tasks;
  std::vector<std::string> stage_inputs;

  if (mode == PlanMode::kFlowWithDse) {
    tasks.push_back({"dse", RunDseTask{}, {}});
    stage_inputs.push_back("dse");
  }
  if (mode == PlanMode::kAllocateThenFlow) {
    std::vector<std::string> predict_inputs;
    if (!job.options.runtime_table && !job.options.runtime_model) {
      tasks.push_back({"train", TrainTask{}, {}});
      predict_inputs.push_back("train");
    }
    std::vector<std::string> predictions;
    for (StageKind s : stages) {
      std::string id = fmt::format("predict:{}", to_string(s));
      tasks.push_back({id, PredictTask{s}, predict_inputs});
      predictions.push_back(std::move(id));
    }
    tasks.push_back({"allocate", AllocateTask{*deadline_s}, predictions});
    stage_inputs.push_back("allocate");
  }
  std::string previous;
  for (StageKind s : stages) {
    std::vector<std::string> inputs = stage_inputs;
    if (!previous.empty()) inputs.push_back(previous);
    previous = fmt::format("stage:{}", to_string(s));
    tasks.push_back({previous, RunStageTask{s}, std::move(inputs)});
  }
  return tasks;
}

std::vector<Task> plan(const JobSpec& job, PlanMode mode, std::optional<double> deadline_s) {
  return RuleBasedPlanner{}.plan(job, mode, deadline_s);
}

Json to_json(const EventRecord& e) {
  return Json{{"seq", e.seq}, {"wall_time", e.wall_time_ms}, {"task_id", e.task_id},
              {"payload", e.payload}};
}

EventRecord event_from_json(const Json& j) {
  return EventRecord{j.at("seq").get<std::uint64_t>(), j.at("wall_time").get<std::int64_t>(),
                     j.at("task_id").get<std::string>(), j.at("payload")};
}

EventRecord EventLog::append(std::string task_id, Json payload) {
  std::vector<Observer> observers;
  EventRecord appended;
  {
    std::lock_guard lock(mu_);
    EventRecord record{records_.size() + 1, wall_clock_ms(), std::move(task_id),
                       std::move(payload)};
    records_.push_back(record);
    observers = observers_;
    appended = std::move(record);
  }
  for (const auto& observer : observers) observer(appended);
  return appended;
}

std::vector<EventRecord> EventLog::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

void EventLog::subscribe(Observer observer) {
  std::lock_guard lock(mu_);
  observers_.push_back(std::move(observer));
}

bool RunReport::has_failures() const {
  return std::any_of(tasks.begin(), tasks.end(), [](const Task& t) {
    return t.status == TaskStatus::kFailed || t.status == TaskStatus::kSkipped;
  });
}

std::map<TaskStatus, int> RunReport::status_counts() const { return count_statuses(tasks); }

Json to_json(const RunReport& r) {
  Json j;
  j["run_id"] = r.run_id;
  j["design"] = r.design;
  j["mode"] = to_string(r.mode);
  j["deadline_s"] = r.deadline_s ? Json(*r.deadline_s) : Json(nullptr);
  j["seed"] = r.seed;
  j["tasks"] = Json::array();
  for (const auto& t : r.tasks) {
    Json tj = to_json(t);
    if (auto it = r.details.find(t.id); it != r.details.end()) tj["detail"] = it->second;
    if (auto it = r.stage_vcpus.find(t.id); it != r.stage_vcpus.end()) tj["vcpus"] = it->second;
    j["tasks"].push_back(std::move(tj));
  }
  j["status_counts"] = counts_to_json(r.status_counts());
  j["stage_results"] = Json::array();
  for (const auto& s : r.stage_results) j["stage_results"].push_back(to_json(s));
  Json predictions = Json::object();
  for (const auto& [stage, by_vcpus] : r.predictions) {
    Json row = Json::object();
    for (const auto& [vcpus, runtime] : by_vcpus) row[std::to_string(vcpus)] = runtime;
    predictions[std::string(to_string(stage))] = std::move(row);
  }
  j["predictions"] = std::move(predictions);
  if (r.training) {
    j["training"] = {{"n_samples", r.training->n_samples},
                     {"n_train", r.training->n_train},
                     {"n_holdout", r.training->n_holdout},
                     {"mean_abs_pct_error_on_holdout",
                      r.training->mean_abs_pct_error_on_holdout}};
  } else {
    j["training"] = nullptr;
  }
  j["allocation"] = r.allocation ? to_json(*r.allocation) : Json(nullptr);
  j["min_total_time_s"] = r.min_total_time_s ? Json(*r.min_total_time_s) : Json(nullptr);
  j["dse"] = r.dse ? to_json(*r.dse) : Json(nullptr);
  j["final_metrics"] = r.final_metrics ? to_json(*r.final_metrics) : Json(nullptr);
  j["schedule"] = r.schedule ? to_json(*r.schedule) : Json(nullptr);
  j["executed_cost"] = r.executed_cost;
  j["currency"] = r.currency;
  j["wall_started_ms"] = r.wall_started_ms;
  j["wall_finished_ms"] = r.wall_finished_ms;
  return j;
}

namespace {

struct TaskOutput {
  std::shared_ptr<const RuntimeSource> source;
  std::optional<TrainingSummary> training;
  std::map<int, double> predictions;
  std::optional<AllocationPlan> allocation;
  std::optional<double> min_total_time_s;
  std::optional<DseReport> dse;
  std::optional<StageResult> stage;
  int vcpus = 0;
};

struct TaskResult {
  bool ok = false;
  std::string detail;
  TaskOutput output;
};

class Runner {
 public:
  Runner(const JobSpec& job, const std::vector<Task>& tasks, const ExecutionContext& ctx,
         const std::vector<TaskOutput>& outputs)
      : job_(job), tasks_(tasks), ctx_(ctx), outputs_(outputs) {
    for (std::size_t i = 0; i < tasks.size(); ++i) index_[tasks[i].id] = i;
  }

  TaskResult run(std::size_t i) const {
    const Task& task = tasks_[i];
    try {
      return std::visit([&](const auto& kind) { return run_kind(task, kind); }, task.kind);
    } catch (const std::exception& e) {
      return {false, e.what(), {}};
    }
  }

 private:
  const TaskOutput& input(const std::string& id) const { return outputs_[index_.at(id)]; }

  template <typename Kind>
  std::vector<const TaskOutput*> inputs_of(const Task& task) const {
    std::vector<const TaskOutput*> found;
    for (const auto& id : task.inputs) {
      if (std::holds_alternative<Kind>(tasks_[index_.at(id)].kind)) {
        found.push_back(&input(id));
      }
    }
    return found;
  }

  std::filesystem::path resolve(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.is_relative() && !ctx_.base_dir.empty()) p = ctx_.base_dir / p;
    return p;
  }

  std::shared_ptr<const RuntimeSource> runtime_source(const Task& task) const {
    if (ctx_.runtime_source) return ctx_.runtime_source;
    for (const auto* trained : inputs_of<TrainTask>(task)) {
      if (trained->source) return trained->source;
    }
    if (job_.options.runtime_table) {
      auto samples = read_samples_csv(resolve(*job_.options.runtime_table));
      return std::make_shared<MeasuredRuntimes>(samples);
    }
    if (job_.options.runtime_model) {
      return std::make_shared<ModelRuntimeSource>(
          TrainedModel::load(resolve(*job_.options.runtime_model)));
    }
    throw std::runtime_error("no runtime source for prediction");
  }

  TaskResult run_kind(const Task&, const TrainTask&) const {
    auto samples = generate_synthetic_dataset(ctx_.seed, ctx_.synthetic_samples);
    auto model = train(samples, ctx_.seed);
    TaskResult result{true, "", {}};
    result.output.training = model.summary();
    result.detail = fmt::format("trained on {} samples, holdout MAPE {:.4f}",
                                model.summary().n_samples,
                                model.summary().mean_abs_pct_error_on_holdout);
    result.output.source = std::make_shared<ModelRuntimeSource>(std::move(model));
    return result;
  }

  TaskResult run_kind(const Task& task, const PredictTask& kind) const {
    auto source = runtime_source(task);
    TaskResult result{true, "", {}};
    for (const auto& [vcpus, rate] : ctx_.prices.rates) {
      try {
        result.output.predictions[vcpus] =
            source->runtime(job_.design.cell_count, kind.stage, vcpus);
      } catch (const std::out_of_range&) {
        // Measured tables need not cover every priced machine.
      }
    }
    if (result.output.predictions.empty()) {
      return {false, fmt::format("no {} runtime for {} on any priced machine",
                                 source->describe(), to_string(kind.stage)),
              {}};
    }
    std::vector<std::string> parts;
    for (const auto& [vcpus, t] : result.output.predictions) {
      parts.push_back(fmt::format("{}:{:.3f}s", vcpus, t));
    }
    result.detail = fmt::format("{} runtimes {}", source->describe(), fmt::join(parts, " "));
    return result;
  }

  TaskResult run_kind(const Task& task, const AllocateTask& kind) const {
    std::vector<StageOptions> options;
    int index = 0;
    for (const auto* predicted : inputs_of<PredictTask>(task)) {
      options.push_back(build_stage_options(index++, predicted->predictions, ctx_.prices));
    }
    TaskResult result;
    try {
      auto plan = mckp_allocate(options, kind.deadline_s);
      std::vector<std::string> vcpus;
      for (const auto& c : plan.chosen) vcpus.push_back(std::to_string(c.vcpus));
      result.ok = true;
      result.detail = fmt::format("({}) {:.3f}s {:.4f} {}", fmt::join(vcpus, ","),
                                  plan.total_time_s, plan.total_cost, ctx_.prices.currency);
      result.output.allocation = std::move(plan);
    } catch (const Infeasible& e) {
      result.ok = false;
      result.detail = e.what();
      result.output.min_total_time_s = e.min_total_time_s();
    }
    return result;
  }

  TaskResult run_kind(const Task&, const RunDseTask&) const {
    if (!ctx_.backend || !ctx_.templates) throw std::runtime_error("no tool backend wired");
    DseConfig config = ctx_.dse;
    config.seed = ctx_.seed;
    auto space = default_param_space(job_, *ctx_.templates);
    auto evaluator = make_flow_evaluator(*ctx_.backend, *ctx_.templates, job_,
                                         ctx_.prices.machine(ctx_.default_vcpus));
    TaskResult result;
    try {
      auto report = run_dse(space, evaluator, config);
      result.ok = true;
      result.detail = fmt::format("best trial {} of {}, improvement {:.4f}", report.best_trial,
                                  report.trials.size(), report.improvement);
      result.output.dse = std::move(report);
    } catch (const AllTrialsFailed& e) {
      result.detail = e.what();
      result.output.dse = e.partial();
    } catch (const UnremediableFault& e) {
      result.detail = e.what();
      result.output.dse = e.partial();
    }
    return result;
  }

  TaskResult run_kind(const Task& task, const RunStageTask& kind) const {
    if (!ctx_.backend || !ctx_.templates) throw std::runtime_error("no tool backend wired");
    int vcpus = ctx_.default_vcpus;
    for (const auto* allocated : inputs_of<AllocateTask>(task)) {
      const auto stages = flow_stages(job_);
      auto pos = std::find(stages.begin(), stages.end(), kind.stage);
      vcpus = allocated->allocation->chosen.at(pos - stages.begin()).vcpus;
    }
    ParamMap params;
    for (const auto* tuned : inputs_of<RunDseTask>(task)) params = tuned->dse->best_params;

    TaskResult result;
    result.output.vcpus = vcpus;
    StageResult stage;
    try {
      auto script = render_script(*ctx_.templates, job_.tool, kind.stage, job_, params);
      stage = run_stage(*ctx_.backend, script, ctx_.prices.machine(vcpus));
    } catch (const AdapterError& e) {
      stage.stage = kind.stage;
      stage.outcome = StageOutcome::failure("SCRIPT", e.what());
    }
    result.ok = stage.outcome.success;
    result.detail = result.ok ? fmt::format("{} vCPU, {:.3f}s", vcpus, stage.runtime_s)
                              : fmt::format("{}: {}", stage.outcome.fault_code,
                                            stage.outcome.message);
    result.output.stage = std::move(stage);
    return result;
  }

  const JobSpec& job_;
  const std::vector<Task>& tasks_;
  const ExecutionContext& ctx_;
  const std::vector<TaskOutput>& outputs_;
  std::map<std::string, std::size_t> index_;
};

void check_plan(const std::vector<Task>& tasks) {
  std::set<std::string> seen;
  for (const auto& t : tasks) {
    for (const auto& in : t.inputs) {
      if (!seen.count(in)) {
        throw std::invalid_argument(
            fmt::format("task {} depends on {}, which is not an earlier task", t.id, in));
      }
    }
    if (!seen.insert(t.id).second) throw std::invalid_argument("duplicate task id " + t.id);
  }
}

}  // namespace

RunReport execute(const JobSpec& job, std::vector<Task> tasks, const ExecutionContext& ctx,
                  EventLog& log,
                  const std::function<void(const std::vector<Task>&)>& on_progress) {
  check_plan(tasks);
  RunReport report;
  report.design = job.design.name;
  report.seed = ctx.seed;
  report.currency = ctx.prices.currency;
  report.wall_started_ms = wall_clock_ms();

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < tasks.size(); ++i) index[tasks[i].id] = i;
  std::vector<TaskOutput> outputs(tasks.size());
  std::vector<std::string> details(tasks.size());
  Runner runner(job, tasks, ctx, outputs);

  auto transition = [&](std::size_t i, TaskStatus to, const std::string& detail) {
    const TaskStatus from = tasks[i].status;
    tasks[i].status = to;
    if (on_progress) on_progress(tasks);
    Json payload{{"type", "status"},
                 {"kind", task_kind_name(tasks[i].kind)},
                 {"from", to_string(from)},
                 {"to", to_string(to)}};
    if (!detail.empty()) payload["detail"] = detail;
    log.append(tasks[i].id, std::move(payload));
  };

  for (;;) {
    std::vector<std::size_t> wave;
    bool progressed = false;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].status != TaskStatus::kPending) continue;
      bool blocked = false;
      bool ready = true;
      std::string cause;
      for (const auto& in : tasks[i].inputs) {
        TaskStatus s = tasks[index.at(in)].status;
        if (s == TaskStatus::kFailed || s == TaskStatus::kSkipped) {
          blocked = true;
          cause = in;
          break;
        }
        if (s != TaskStatus::kDone) ready = false;
      }
      if (blocked) {
        details[i] = fmt::format("skipped: {} did not complete", cause);
        transition(i, TaskStatus::kSkipped, details[i]);
        progressed = true;
      } else if (ready) {
        wave.push_back(i);
      }
    }
    if (wave.empty()) {
      if (progressed) continue;
      break;
    }

    for (std::size_t i : wave) transition(i, TaskStatus::kRunning, "");
    std::vector<TaskResult> results(wave.size());
    if (wave.size() == 1) {
      results[0] = runner.run(wave[0]);
    } else {
      std::vector<std::future<TaskResult>> futures;
      for (std::size_t i : wave) {
        futures.push_back(std::async(std::launch::async, [&runner, i] { return runner.run(i); }));
      }
      for (std::size_t k = 0; k < wave.size(); ++k) results[k] = futures[k].get();
    }
    for (std::size_t k = 0; k < wave.size(); ++k) {
      const std::size_t i = wave[k];
      outputs[i] = std::move(results[k].output);
      details[i] = results[k].detail;
      transition(i, results[k].ok ? TaskStatus::kDone : TaskStatus::kFailed, details[i]);
    }
  }

  std::vector<ContainerRequest> containers;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& out = outputs[i];
    if (!details[i].empty()) report.details[tasks[i].id] = details[i];
    if (out.training) report.training = out.training;
    if (const auto* p = std::get_if<PredictTask>(&tasks[i].kind); p && !out.predictions.empty()) {
      report.predictions[p->stage] = out.predictions;
    }
    if (out.allocation) report.allocation = out.allocation;
    if (out.min_total_time_s) report.min_total_time_s = out.min_total_time_s;
    if (out.dse) report.dse = out.dse;
    if (out.stage) {
      report.stage_results.push_back(*out.stage);
      report.stage_vcpus[tasks[i].id] = out.vcpus;
      if (tasks[i].status == TaskStatus::kDone) {
        if (auto it = ctx.prices.rates.find(out.vcpus); it != ctx.prices.rates.end()) {
          report.executed_cost += stage_cost(it->second, out.stage->runtime_s);
        }
        ContainerRequest request{tasks[i].id, out.vcpus, out.stage->runtime_s, {}};
        for (const auto& in : tasks[i].inputs) {
          if (outputs[index.at(in)].stage) request.dependencies.insert(in);
        }
        containers.push_back(std::move(request));
      }
    }
  }
  // Final metrics come from the last stage, and only when it ran.
  for (auto it = tasks.rbegin(); it != tasks.rend(); ++it) {
    if (!std::holds_alternative<RunStageTask>(it->kind)) continue;
    const auto& out = outputs[index.at(it->id)];
    if (it->status == TaskStatus::kDone && out.stage) report.final_metrics = out.stage->metrics;
    break;
  }
  if (!containers.empty()) {
    try {
      report.schedule = simulate(ctx.cluster, containers);
    } catch (const SchedulingError& e) {
      report.details["schedule"] = e.what();
    }
  }
  report.tasks = std::move(tasks);
  report.wall_finished_ms = wall_clock_ms();
  return report;
}

HistoryStore::HistoryStore(std::filesystem::path root) : root_(std::move(root)) {
  const auto index_path = *root_ / "runs" / "index.jsonl";
  if (!std::filesystem::exists(index_path)) return;
  std::ifstream in(index_path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto entry = Json::parse(line);
    const auto dir = *root_ / "runs" / entry.at("run_id").get<std::string>();
    auto record = std::make_unique<RunRecord>();
    record->run_id = entry.at("run_id").get<std::string>();
    record->submitted_at = entry.at("submitted_at").get<std::string>();
    auto mode = parse_plan_mode(entry.at("mode").get<std::string>());
    if (!mode) throw std::runtime_error("bad mode in run index");
    record->mode = *mode;
    auto validated = validate_job_spec(read_json_file(dir / "jobspec.json"));
    if (auto* report = std::get_if<IncompleteReport>(&validated)) {
      throw std::runtime_error("stored job of " + record->run_id + " is invalid: " +
                               report->describe());
    }
    record->job = std::get<JobSpec>(std::move(validated));
    for (const auto& t : read_json_file(dir / "tasks.json")) {
      record->tasks.push_back(task_from_json(t));
    }
    std::ifstream events(dir / "events.jsonl");
    std::string event_line;
    while (std::getline(events, event_line)) {
      if (!event_line.empty()) record->events.push_back(event_from_json(Json::parse(event_line)));
    }
    record->report = read_json_file(dir / "report.json");
    runs_.push_back(std::move(record));
  }
}

std::string HistoryStore::next_run_id() const {
  std::lock_guard lock(mu_);
  int highest = 0;
  auto consider = [&](const std::string& id) {
    int n = 0;
    if (std::sscanf(id.c_str(), "run-%d", &n) == 1) highest = std::max(highest, n);
  };
  for (const auto& r : runs_) consider(r->run_id);
  if (root_ && std::filesystem::is_directory(*root_ / "runs")) {
    for (const auto& entry : std::filesystem::directory_iterator(*root_ / "runs")) {
      if (entry.is_directory()) consider(entry.path().filename().string());
    }
  }
  return fmt::format("run-{:04d}", highest + 1);
}

const RunRecord& HistoryStore::append(RunRecord record) {
  std::lock_guard lock(mu_);
  for (const auto& r : runs_) {
    if (r->run_id == record.run_id) {
      throw std::invalid_argument("run id already stored: " + record.run_id);
    }
    if (r->job.design.name == record.job.design.name && !(r->job.design == record.job.design)) {
      throw DesignConflict("design " + record.job.design.name +
                           " is already recorded with a different descriptor");
    }
  }
  if (root_) persist(record);
  runs_.push_back(std::make_unique<RunRecord>(std::move(record)));
  return *runs_.back();
}

void HistoryStore::persist(const RunRecord& record) const {
  const auto runs_dir = *root_ / "runs";
  std::filesystem::create_directories(runs_dir);
  const auto dir = runs_dir / record.run_id;
  if (!std::filesystem::create_directory(dir)) {
    throw std::runtime_error("run directory already exists: " + dir.string());
  }
  write_text_file(dir / "jobspec.json", to_json(record.job).dump(2) + "\n");
  Json tasks = Json::array();
  for (const auto& t : record.tasks) tasks.push_back(to_json(t));
  write_text_file(dir / "tasks.json", tasks.dump(2) + "\n");
  std::string events;
  for (const auto& e : record.events) events += to_json(e).dump() + "\n";
  write_text_file(dir / "events.jsonl", events);
  write_text_file(dir / "report.json", record.report.dump(2) + "\n");

  Json entry{{"run_id", record.run_id},
             {"design", record.job.design.name},
             {"mode", to_string(record.mode)},
             {"submitted_at", record.submitted_at},
             {"status_counts", counts_to_json(count_statuses(record.tasks))}};
  std::ofstream index(runs_dir / "index.jsonl", std::ios::app);
  if (!index) throw std::runtime_error("cannot append to run index");
  index << entry.dump() << "\n";
}

const RunRecord& HistoryStore::lookup(const std::string& run_id) const {
  std::lock_guard lock(mu_);
  for (const auto& r : runs_) {
    if (r->run_id == run_id) return *r;
  }
  throw UnknownRun(run_id);
}

std::vector<RunSummary> HistoryStore::history(const HistoryFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<RunSummary> out;
  for (const auto& r : runs_) {
    if (filter.design && r->job.design.name != *filter.design) continue;
    if (filter.from && r->submitted_at.substr(0, filter.from->size()) < *filter.from) continue;
    if (filter.to && r->submitted_at.substr(0, filter.to->size()) > *filter.to) continue;
    out.push_back({r->run_id, r->job.design.name, r->submitted_at, r->mode,
                   count_statuses(r->tasks)});
  }
  return out;
}

std::size_t HistoryStore::size() const {
  std::lock_guard lock(mu_);
  return runs_.size();
}

Json to_json(const StatusReport& s) {
  Json j{{"run_id", s.run_id},
         {"live", s.live},
         {"total", s.total},
         {"counts", counts_to_json(s.counts)},
         {"elapsed_s", s.elapsed_s}};
  j["latest"] = s.latest ? to_json(*s.latest) : Json(nullptr);
  return j;
}

Orchestrator::Orchestrator(HistoryStore& store, std::shared_ptr<const Planner> planner)
    : store_(store), planner_(std::move(planner)) {}

RunReport Orchestrator::submit(const JobSpec& job, PlanMode mode,
                               std::optional<double> deadline_s,
                               const ExecutionContext& ctx) {
  auto tasks = planner_->plan(job, mode, deadline_s);
  const std::string run_id = store_.next_run_id();
  auto live = std::make_shared<LiveRun>();
  live->tasks = tasks;
  live->started_ms = wall_clock_ms();
  if (observer_) live->log.subscribe(observer_);
  {
    std::lock_guard lock(mu_);
    live_[run_id] = live;
  }
  const std::string submitted_at = format_utc(live->started_ms);

  auto report = execute(job, std::move(tasks), ctx, live->log,
                        [&live](const std::vector<Task>& current) {
                          std::lock_guard lock(live->mu);
                          live->tasks = current;
                        });
  report.run_id = run_id;
  report.mode = mode;
  report.deadline_s = deadline_s;

  RunRecord record{run_id,      submitted_at,          job,
                   mode,        report.tasks,          live->log.snapshot(),
                   to_json(report)};
  store_.append(std::move(record));
  std::lock_guard lock(mu_);
  live_.erase(run_id);
  return report;
}

StatusReport Orchestrator::status(const std::string& run_id) const {
  StatusReport out;
  out.run_id = run_id;
  std::shared_ptr<LiveRun> live;
  {
    std::lock_guard lock(mu_);
    if (auto it = live_.find(run_id); it != live_.end()) live = it->second;
  }
  if (live) {
    std::lock_guard lock(live->mu);
    out.live = true;
    out.total = live->tasks.size();
    out.counts = count_statuses(live->tasks);
    auto events = live->log.snapshot();
    if (!events.empty()) out.latest = events.back();
    out.elapsed_s = static_cast<double>(wall_clock_ms() - live->started_ms) / 1000.0;
    return out;
  }
  const RunRecord& record = store_.lookup(run_id);
  out.total = record.tasks.size();
  out.counts = count_statuses(record.tasks);
  if (!record.events.empty()) {
    out.latest = record.events.back();
    out.elapsed_s = static_cast<double>(record.events.back().wall_time_ms -
                                        record.events.front().wall_time_ms) /
                    1000.0;
  }
  return out;
}

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string format_utc(std::int64_t ms) {
  const std::time_t seconds = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", tm.tm_year + 1900,
                     tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                     static_cast<int>(ms % 1000));
}

}  // namespace edaflow
