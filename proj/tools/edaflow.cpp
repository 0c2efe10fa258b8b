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

// edaflow command-line front end.
//
// Exit codes: 0 success, 1 invalid or incomplete input, 2 infeasible
// allocation, 3 run finished with failed tasks, 4 I/O or format error.

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "edaflow/allocator.hpp"
#include "edaflow/cluster_sim.hpp"
#include "edaflow/dse_engine.hpp"
#include "edaflow/eda_adapter.hpp"
#include "edaflow/flow_model.hpp"
#include "edaflow/orchestrator.hpp"
#include "edaflow/runtime_predictor.hpp"

namespace fs = std::filesystem;
using namespace edaflow;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInvalid = 1,
  kInfeasible = 2,
  kTaskFailures = 3,
  kIoError = 4,
};

// Thrown for malformed inputs the commands cannot proceed with.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

PriceList load_prices(const std::string& path) {
  return path.empty() ? PriceList::default_list() : PriceList::load(path);
}

TemplateStore load_templates(const std::string& root) {
  return TemplateStore::load(root.empty() ? TemplateStore::default_root() : fs::path(root));
}

std::vector<FaultRule> load_faults(const std::string& path) {
  return path.empty() ? default_fault_rules() : load_fault_rules(path);
}

std::string vcpu_tuple(const AllocationPlan& plan) {
  std::vector<int> choices = plan.choices();
  return fmt::format("({})", fmt::join(choices, ","));
}

std::string format_params(const ParamMap& params) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : params) parts.push_back(k + "=" + format_scalar(v));
  return fmt::format("{}", fmt::join(parts, " "));
}

std::string format_metrics(const PpaMetrics& m) {
  return fmt::format("cp_delay {} ns, power {} mW, area {} um2, product {}", m.cp_delay_ns(),
                     m.power_mw(), m.area_um2(), ppa_product(m));
}

std::unique_ptr<ToolBackend> make_backend(ToolKind tool, const fs::path& workdir) {
  switch (tool) {
    case ToolKind::kMock: return std::make_unique<MockBackend>();
    case ToolKind::kIeda: return std::make_unique<ExternalToolBackend>(tool, "iEDA", workdir);
    case ToolKind::kOpenRoad:
      return std::make_unique<ExternalToolBackend>(tool, "openroad", workdir);
  }
  return std::make_unique<MockBackend>();
}

void set_path(Json& doc, const std::string& dotted, Json value) {
  Json* node = &doc;
  std::stringstream ss(dotted);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) {
      (*node)[parts[i]] = Json::object();
    }
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = std::move(value);
}

Json parse_answer(const std::string& field, const std::string& answer) {
  auto split = [](const std::string& text) {
    Json list = Json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      if (!item.empty()) list.push_back(item);
    }
    return list;
  };
  if (field == "stages" || field.ends_with("_paths")) return split(answer);
  if (field == "design.cell_count") {
    try {
      return std::stoll(answer);
    } catch (const std::exception&) {
      return answer;
    }
  }
  return answer;
}

// Validates `doc`; with `interactive`, asks for each missing essential field
// on stdin until the job is complete or input ends.
std::optional<JobSpec> validate_document(Json doc, bool interactive) {
  for (;;) {
    auto result = validate_job_spec(doc);
    if (auto* job = std::get_if<JobSpec>(&result)) return std::move(*job);
    auto& report = std::get<IncompleteReport>(result);
    if (!interactive || report.missing.empty() || !report.out_of_range.empty() ||
        !report.invalid.empty()) {
      std::cout << "incomplete job: " << report.describe() << "\n";
      for (const auto& name : report.missing) std::cout << "missing: " << name << "\n";
      for (const auto& r : report.out_of_range) {
        std::cout << fmt::format("out of range: {} = {} (allowed {})\n", r.field, r.given,
                                 r.allowed);
      }
      for (const auto& f : report.invalid) {
        std::cout << fmt::format("invalid: {}: {}\n", f.field, f.reason);
      }
      return std::nullopt;
    }
    const std::string field = report.missing.front();
    if (field == "design" || field == "tech") {
      doc[field] = Json::object();
      continue;
    }
    std::cout << field << ": " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer)) {
      std::cout << "\nincomplete job: no value for " << field << "\n";
      return std::nullopt;
    }
    set_path(doc, field, parse_answer(field, answer));
  }
}

Json load_job_document(const fs::path& path) {
  Json doc = read_json(path);
  if (!doc.is_object()) throw FormatError(path.string() + ": job must be a JSON object");
  return doc;
}

struct RunFlowArgs {
  std::string job;
  std::string mode = "flow";
  std::optional<double> deadline;
  std::uint64_t seed = 1;
  std::string out = "edaflow-runs";
  std::string prices;
  std::string templates;
  std::string faults;
  std::string cluster = "4x8";
  std::string strategy = "random";
  int dse_budget = 64;
  int vcpus = 4;
  bool interactive = false;
};

void print_report(const RunReport& r) {
  std::cout << fmt::format("run {} design {} mode {} seed {}\n", r.run_id, r.design,
                           to_string(r.mode), r.seed);
  if (r.deadline_s) std::cout << fmt::format("deadline {} s\n", *r.deadline_s);
  for (const auto& t : r.tasks) {
    std::string line = fmt::format("  {:<18} {:<8}", t.id, to_string(t.status));
    if (auto it = r.details.find(t.id); it != r.details.end()) line += " " + it->second;
    std::cout << line << "\n";
  }
  if (r.training) {
    std::cout << fmt::format("training: {} samples ({} train, {} holdout), holdout MAPE {}\n",
                             r.training->n_samples, r.training->n_train, r.training->n_holdout,
                             r.training->mean_abs_pct_error_on_holdout);
  }
  for (const auto& [stage, by_vcpus] : r.predictions) {
    for (const auto& [vcpus, t] : by_vcpus) {
      std::cout << fmt::format("predicted {} on {} vCPU: {} s\n", to_string(stage), vcpus, t);
    }
  }
  if (r.allocation) {
    std::cout << fmt::format("allocation {} {}s {:.2f} {} (objective {})\n",
                             vcpu_tuple(*r.allocation), r.allocation->total_time_s,
                             r.allocation->total_cost, r.currency,
                             r.allocation->objective_value);
    for (const auto& c : r.allocation->chosen) {
      std::cout << fmt::format("  stage {}: {} vCPU, {} s, {} {}\n", c.stage_index, c.vcpus,
                               c.runtime_s, c.cost, r.currency);
    }
  }
  if (r.min_total_time_s) {
    std::cout << fmt::format("infeasible: minimum achievable total time {} s\n",
                             *r.min_total_time_s);
  }
  if (r.dse) {
    std::cout << fmt::format("dse: {} trials, best trial {} ({}), improvement {} ({}%)\n",
                             r.dse->trials.size(), r.dse->best_trial,
                             format_params(r.dse->best_params), r.dse->improvement,
                             round_percent(r.dse->improvement));
    for (const auto& rem : r.dse->remediations) {
      std::cout << fmt::format("  remediation at trial {}: {} {} {} -> {}\n", rem.trial_index,
                               rem.fault_code, rem.remedy, rem.before, rem.after);
    }
  }
  for (const auto& s : r.stage_results) {
    std::cout << fmt::format("stage {}: runtime {} s", to_string(s.stage), s.runtime_s);
    if (s.metrics) std::cout << ", " << format_metrics(*s.metrics);
    if (!s.outcome.success) std::cout << ", " << s.outcome.fault_code << ": " << s.outcome.message;
    std::cout << "\n";
  }
  if (r.final_metrics) std::cout << "final: " << format_metrics(*r.final_metrics) << "\n";
  if (r.schedule) std::cout << fmt::format("cluster makespan {} s\n", r.schedule->makespan_s);
  std::cout << fmt::format("executed cost {} {}\n", r.executed_cost, r.currency);
}

int cmd_validate(const std::string& path, bool interactive) {
  auto job = validate_document(load_job_document(path), interactive);
  if (!job) return kInvalid;
  std::vector<std::string> stages;
  for (auto s : job->stages) stages.emplace_back(to_string(s));
  std::cout << fmt::format("valid job: design {} ({} cells), stages {}, tool {}\n",
                           job->design.name, job->design.cell_count, fmt::join(stages, ","),
                           to_string(job->tool));
  return kOk;
}

int cmd_run_flow(const RunFlowArgs& a) {
  auto mode = parse_plan_mode(a.mode);
  if (!mode) {
    std::cerr << "unknown mode " << a.mode << "\n";
    return kInvalid;
  }
  auto strategy = parse_strategy(a.strategy);
  if (!strategy) {
    std::cerr << "unknown strategy " << a.strategy << "\n";
    return kInvalid;
  }
  auto job = validate_document(load_job_document(a.job), a.interactive);
  if (!job) return kInvalid;

  const TemplateStore templates = load_templates(a.templates);
  auto backend = make_backend(job->tool, fs::path(a.out) / "work");
  ExecutionContext ctx;
  ctx.backend = backend.get();
  ctx.templates = &templates;
  ctx.prices = load_prices(a.prices);
  ctx.cluster = parse_cluster(a.cluster);
  ctx.seed = a.seed;
  ctx.default_vcpus = a.vcpus;
  ctx.dse.budget = a.dse_budget;
  ctx.dse.strategy = *strategy;
  ctx.dse.faults = load_faults(a.faults);
  ctx.base_dir = fs::path(a.job).parent_path();

  HistoryStore store{fs::path(a.out)};
  Orchestrator orchestrator(store);
  RunReport report;
  try {
    report = orchestrator.submit(*job, *mode, a.deadline, ctx);
  } catch (const DeadlineRequired& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  }
  print_report(report);
  std::cout << "report: " << (fs::path(a.out) / "runs" / report.run_id / "report.json").string()
            << "\n";
  if (report.min_total_time_s) return kInfeasible;
  return report.has_failures() ? kTaskFailures : kOk;
}

int cmd_allocate(const std::string& options_path, double budget, const std::string& prices_path,
                 const std::string& objective_name, const std::string& out) {
  Objective objective = Objective::kInverseCost;
  if (objective_name == "min-cost") {
    objective = Objective::kMinCost;
  } else if (objective_name != "inverse-cost") {
    std::cerr << "unknown objective " << objective_name << "\n";
    return kInvalid;
  }
  const PriceList prices = load_prices(prices_path);
  OptionsTable table;
  try {
    table = options_table_from_json(read_json(options_path), prices);
  } catch (const Json::exception& e) {
    throw FormatError(options_path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(options_path + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw FormatError(options_path + ": " + e.what());
  }
  AllocationPlan plan;
  try {
    plan = mckp_allocate(table.stages, budget, objective);
  } catch (const Infeasible& e) {
    std::cout << fmt::format("infeasible: budget {} s, minimum achievable total time {} s\n",
                             e.budget_s(), e.min_total_time_s());
    return kInfeasible;
  }
  std::cout << fmt::format("{} {}s {:.2f} {}\n", vcpu_tuple(plan), plan.total_time_s,
                           plan.total_cost, prices.currency);
  for (const auto& c : plan.chosen) {
    std::cout << fmt::format("  {}: {} vCPU, {} s, {} {}\n", table.stage_names[c.stage_index],
                             c.vcpus, c.runtime_s, c.cost, prices.currency);
  }
  std::cout << fmt::format("total time {} s, total cost {} {}, objective {}\n", plan.total_time_s,
                           plan.total_cost, prices.currency, plan.objective_value);
  if (!out.empty()) {
    Json j = to_json(plan);
    j["stages"] = table.stage_names;
    j["budget_s"] = budget;
    j["currency"] = prices.currency;
    write_json(out, j);
  }
  return kOk;
}

int cmd_predict_train(const std::string& data, std::uint64_t seed, std::size_t samples,
                      bool noise_free, const std::string& out) {
  std::vector<RuntimeSample> rows;
  if (data == "synthetic") {
    rows = generate_synthetic_dataset(seed, samples, MockModel::builtin(), !noise_free);
  } else {
    rows = read_samples_csv(fs::path(data));
  }
  TrainedModel model;
  try {
    model = train(rows, seed);
  } catch (const InsufficientData& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  }
  model.save(out);
  const auto& s = model.summary();
  std::cout << fmt::format("trained {} trees on {} samples ({} train, {} holdout)\n",
                           model.tree_count(), s.n_samples, s.n_train, s.n_holdout);
  std::cout << fmt::format("holdout MAPE {} ({}%)\n", s.mean_abs_pct_error_on_holdout,
                           round_percent(s.mean_abs_pct_error_on_holdout));
  std::cout << "model: " << out << "\n";
  return kOk;
}

int cmd_predict(const std::string& model_path, std::int64_t cells, const std::string& stage_name,
                const std::vector<int>& vcpus_list, const std::string& out) {
  auto stage = parse_stage(stage_name);
  if (!stage || *stage == StageKind::kFullFlow) {
    std::cerr << "unknown stage " << stage_name << "\n";
    return kInvalid;
  }
  const TrainedModel model = TrainedModel::load(model_path);
  Json j = Json::array();
  for (int vcpus : vcpus_list) {
    const double t = model.predict(cells, *stage, vcpus);
    std::cout << fmt::format("{} cells, {}, {} vCPU: {} s\n", cells, stage_name, vcpus, t);
    j.push_back({{"cell_count", cells}, {"stage", stage_name}, {"vcpus", vcpus},
                 {"runtime_s", t}});
  }
  if (!out.empty()) write_json(out, j);
  return kOk;
}

int cmd_dse(const std::string& job_path, int budget, const std::string& strategy_name,
            std::uint64_t seed, const std::string& faults, const std::string& templates_root,
            int vcpus, const std::string& prices_path, const std::string& out) {
  auto strategy = parse_strategy(strategy_name);
  if (!strategy) {
    std::cerr << "unknown strategy " << strategy_name << "\n";
    return kInvalid;
  }
  auto job = validate_document(load_job_document(job_path), false);
  if (!job) return kInvalid;
  const TemplateStore templates = load_templates(templates_root);
  const fs::path workdir = out.empty() ? fs::path("edaflow-dse") : fs::path(out);
  auto backend = make_backend(job->tool, workdir / "work");
  const PriceList prices = load_prices(prices_path);
  DseConfig config{budget, *strategy, seed, load_faults(faults)};
  const auto space = default_param_space(*job, templates);
  const auto evaluator = make_flow_evaluator(*backend, templates, *job, prices.machine(vcpus));

  std::optional<DseReport> report;
  int code = kOk;
  try {
    report = run_dse(space, evaluator, config);
  } catch (const AllTrialsFailed& e) {
    std::cout << e.what() << "\n";
    report = e.partial();
    code = kTaskFailures;
  } catch (const UnremediableFault& e) {
    std::cout << e.what() << "\n";
    report = e.partial();
    code = kTaskFailures;
  }
  const auto best = report->best_so_far();
  for (const auto& t : report->trials) {
    std::string line = fmt::format("trial {:>3} {}", t.index, format_params(t.params));
    line += t.ok() ? fmt::format(" objective {} best {}", *t.objective, best[t.index])
                   : fmt::format(" failed {}: {}", t.fault_code, t.message);
    std::cout << line << "\n";
  }
  for (const auto& rem : report->remediations) {
    std::cout << fmt::format("remediation at trial {}: {} {} {} -> {}\n", rem.trial_index,
                             rem.fault_code, rem.remedy, rem.before, rem.after);
  }
  if (report->best_metrics) {
    std::cout << fmt::format("best trial {} ({}): {}\n", report->best_trial,
                             format_params(report->best_params),
                             format_metrics(*report->best_metrics));
    std::cout << fmt::format("improvement over defaults {} ({}%)\n", report->improvement,
                             round_percent(report->improvement));
  }
  if (!out.empty()) {
    write_json(fs::path(out) / "dse_report.json", to_json(*report));
    std::ofstream trace(fs::path(out) / "trace.csv");
    if (!trace) throw FormatError("cannot write trace.csv");
    write_trace_csv(trace, *report);
  }
  return code;
}

int cmd_simulate(const std::string& cluster, const std::string& tasks_path,
                 const std::string& compare, const std::string& out) {
  const auto nodes = parse_cluster(cluster);
  std::vector<ContainerRequest> requests;
  try {
    requests = requests_from_json(read_json(tasks_path));
  } catch (const Json::exception& e) {
    throw FormatError(tasks_path + ": " + e.what());
  }
  SimulationResult result;
  try {
    result = simulate(nodes, requests);
  } catch (const SchedulingError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  }
  for (const auto& p : result.placements) {
    std::cout << fmt::format("{} on {}: {} vCPU, {} s -> {} s\n", p.task_id, p.node_id, p.vcpus,
                             p.start_s, p.finish_s);
  }
  std::cout << fmt::format("makespan {} s on {} nodes\n", result.makespan_s, nodes.size());
  Json j = to_json(result);
  if (!compare.empty()) {
    const auto baseline = parse_cluster(compare);
    const double s = speedup(nodes, baseline, requests);
    std::cout << fmt::format("speedup vs {}: {}\n", compare, s);
    j["speedup"] = s;
  }
  if (!out.empty()) {
    write_json(out, j);
    std::ofstream events(fs::path(out).replace_extension(".events.jsonl"));
    write_events_jsonl(events, result.events);
  }
  return kOk;
}

int cmd_status(const std::string& root, const std::string& run_id) {
  HistoryStore store{fs::path(root)};
  Orchestrator orchestrator(store);
  StatusReport status;
  try {
    status = orchestrator.status(run_id);
  } catch (const UnknownRun& e) {
    std::cerr << e.what() << "\n";
    return kIoError;
  }
  std::cout << fmt::format("run {}: {} tasks, elapsed {} s\n", status.run_id, status.total,
                           status.elapsed_s);
  for (const auto& [s, n] : status.counts) {
    std::cout << fmt::format("  {:<8} {}\n", to_string(s), n);
  }
  if (status.latest) {
    std::cout << fmt::format("latest event #{} {} {}\n", status.latest->seq,
                             status.latest->task_id, status.latest->payload.dump());
  }
  return kOk;
}

int cmd_history(const std::string& root, const HistoryFilter& filter, const std::string& out) {
  HistoryStore store{fs::path(root)};
  const auto runs = store.history(filter);
  Json j = Json::array();
  for (const auto& r : runs) {
    std::cout << fmt::format("{} {} {} {} done {} failed {} skipped {}\n", r.run_id,
                             r.submitted_at, r.design, to_string(r.mode),
                             r.counts.at(TaskStatus::kDone), r.counts.at(TaskStatus::kFailed),
                             r.counts.at(TaskStatus::kSkipped));
    Json counts = Json::object();
    for (const auto& [s, n] : r.counts) counts[std::string(to_string(s))] = n;
    j.push_back({{"run_id", r.run_id},
                 {"submitted_at", r.submitted_at},
                 {"design", r.design},
                 {"mode", to_string(r.mode)},
                 {"status_counts", counts}});
  }
  if (runs.empty()) std::cout << "no matching runs\n";
  if (!out.empty()) write_json(out, j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edaflow: IC backend flow automation"};
  app.require_subcommand(1);

  std::string job_path;
  bool interactive = false;
  auto* validate = app.add_subcommand("validate", "Check a job file");
  validate->add_option("--job", job_path, "Job specification (JSON)")->required();
  validate->add_flag("--interactive", interactive, "Prompt for missing essential fields");

  RunFlowArgs rf;
  auto* run_flow = app.add_subcommand("run-flow", "Plan and execute a job");
  run_flow->add_option("--job", rf.job, "Job specification (JSON)")->required();
  run_flow->add_option("--mode", rf.mode, "flow, dse or allocate")->capture_default_str();
  run_flow->add_option("--deadline", rf.deadline, "Deadline in seconds (allocate mode)");
  run_flow->add_option("--seed", rf.seed, "Seed for training and search")->capture_default_str();
  run_flow->add_option("--out", rf.out, "History root; runs go to <out>/runs/<run_id>")
      ->capture_default_str();
  run_flow->add_option("--prices", rf.prices, "Price list (JSON)");
  run_flow->add_option("--templates", rf.templates, "Template root directory");
  run_flow->add_option("--faults", rf.faults, "Fault list (JSON)");
  run_flow->add_option("--cluster", rf.cluster, "Cluster, e.g. 4x8 or a JSON file")
      ->capture_default_str();
  run_flow->add_option("--strategy", rf.strategy, "random or anneal")->capture_default_str();
  run_flow->add_option("--dse-budget", rf.dse_budget, "DSE trials")->capture_default_str();
  run_flow->add_option("--vcpus", rf.vcpus, "vCPUs for stages without an allocation")
      ->capture_default_str();
  run_flow->add_flag("--interactive", rf.interactive, "Prompt for missing essential fields");

  std::string options_path, prices_path, objective = "inverse-cost", out;
  double budget = 0.0;
  auto* allocate = app.add_subcommand("allocate", "Choose vCPUs per stage under a deadline");
  allocate->add_option("--options", options_path, "Per-stage runtimes (JSON)")->required();
  allocate->add_option("--budget", budget, "Time budget in seconds")->required();
  allocate->add_option("--prices", prices_path, "Price list (JSON)");
  allocate->add_option("--objective", objective, "inverse-cost or min-cost")
      ->capture_default_str();
  allocate->add_option("--out", out, "Write the plan as JSON");

  std::string data = "synthetic";
  std::uint64_t seed = 1;
  std::size_t samples = 400;
  bool noise_free = false;
  std::string model_path = "runtime_model.json";
  auto* predict_train = app.add_subcommand("predict-train", "Train the runtime model");
  predict_train->add_option("--data", data, "CSV file or 'synthetic'")->capture_default_str();
  predict_train->add_option("--seed", seed, "Seed")->capture_default_str();
  predict_train->add_option("--samples", samples, "Synthetic sample count")
      ->capture_default_str();
  predict_train->add_flag("--noise-free", noise_free, "Synthetic samples without noise");
  predict_train->add_option("--out", model_path, "Model file")->capture_default_str();

  std::int64_t cells = 0;
  std::string stage;
  std::vector<int> vcpus_list{1, 2, 4, 8};
  auto* predict_cmd = app.add_subcommand("predict", "Predict stage runtimes");
  predict_cmd->add_option("--model", model_path, "Model file")->capture_default_str();
  predict_cmd->add_option("--cells", cells, "Cell count")->required();
  predict_cmd->add_option("--stage", stage, "Stage name")->required();
  predict_cmd->add_option("--vcpus", vcpus_list, "vCPU counts")->capture_default_str();
  predict_cmd->add_option("--out", out, "Write predictions as JSON");

  int dse_budget = 64;
  std::string strategy = "random", faults, templates_root;
  int vcpus = 4;
  auto* dse = app.add_subcommand("dse", "Explore placement density and utilization");
  dse->add_option("--job", job_path, "Job specification (JSON)")->required();
  dse->add_option("--budget", dse_budget, "Trials")->capture_default_str();
  dse->add_option("--strategy", strategy, "random or anneal")->capture_default_str();
  dse->add_option("--seed", seed, "Seed")->capture_default_str();
  dse->add_option("--faults", faults, "Fault list (JSON)");
  dse->add_option("--templates", templates_root, "Template root directory");
  dse->add_option("--vcpus", vcpus, "vCPUs per evaluation")->capture_default_str();
  dse->add_option("--prices", prices_path, "Price list (JSON)");
  dse->add_option("--out", out, "Directory for dse_report.json and trace.csv");

  std::string cluster = "4x8", tasks_path, compare;
  auto* simulate_cmd = app.add_subcommand("simulate", "Schedule containers on a cluster");
  simulate_cmd->add_option("--cluster", cluster, "e.g. 4x8 or a JSON file")
      ->capture_default_str();
  simulate_cmd->add_option("--tasks", tasks_path, "Container requests (JSON)")->required();
  simulate_cmd->add_option("--compare", compare, "Baseline cluster for a speedup figure");
  simulate_cmd->add_option("--out", out, "Write the schedule as JSON");

  std::string root = "edaflow-runs", run_id;
  auto* status = app.add_subcommand("status", "Task counts and latest event of a run");
  status->add_option("--root", root, "History root")->capture_default_str();
  status->add_option("--run", run_id, "Run id")->required();

  HistoryFilter filter;
  auto* history = app.add_subcommand("history", "List stored runs");
  history->add_option("--root", root, "History root")->capture_default_str();
  history->add_option("--design", filter.design, "Design name");
  history->add_option("--from", filter.from, "Earliest submission date, e.g. 2026-01-31");
  history->add_option("--to", filter.to, "Latest submission date");
  history->add_option("--out", out, "Write summaries as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(job_path, interactive);
    if (*run_flow) return cmd_run_flow(rf);
    if (*allocate) return cmd_allocate(options_path, budget, prices_path, objective, out);
    if (*predict_train) return cmd_predict_train(data, seed, samples, noise_free, model_path);
    if (*predict_cmd) return cmd_predict(model_path, cells, stage, vcpus_list, out);
    if (*dse) {
      return cmd_dse(job_path, dse_budget, strategy, seed, faults, templates_root, vcpus,
                     prices_path, out);
    }
    if (*simulate_cmd) return cmd_simulate(cluster, tasks_path, compare, out);
    if (*status) return cmd_status(root, run_id);
    if (*history) return cmd_history(root, filter, out);
  } catch (const MalformedDocument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}
