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

#include "edaflow/eda_adapter.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "edaflow/embedded_data.hpp"

namespace edaflow {

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Length of the placeholder starting at `pos` ("{{name}}"), or 0.
std::size_t placeholder_at(std::string_view text, std::size_t pos,
                           std::string_view* name) {
  if (text.compare(pos, 2, "{{") != 0) return 0;
  std::size_t end = pos + 2;
  while (end < text.size() && is_name_char(text[end])) ++end;
  if (end == pos + 2 || text.compare(end, 2, "}}") != 0) return 0;
  *name = text.substr(pos + 2, end - pos - 2);
  return end + 2 - pos;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::optional<std::filesystem::path> find_executable(const std::string& exe) {
  namespace fs = std::filesystem;
  if (exe.find('/') != std::string::npos) {
    if (fs::exists(exe)) return fs::path(exe);
    return std::nullopt;
  }
  const char* path_env = std::getenv("PATH");
  if (path_env == nullptr) return std::nullopt;
  std::string_view paths(path_env);
  while (!paths.empty()) {
    auto sep = paths.find(':');
    fs::path candidate = fs::path(std::string(paths.substr(0, sep))) / exe;
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
    if (sep == std::string_view::npos) break;
    paths.remove_prefix(sep + 1);
  }
  return std::nullopt;
}

}  // namespace

UnknownTemplate::UnknownTemplate(ToolKind tool, StageKind stage)
    : AdapterError(fmt::format("no template for tool '{}' stage '{}'",
                               to_string(tool), to_string(stage))) {}

UnboundPlaceholder::UnboundPlaceholder(std::string name)
    : AdapterError(fmt::format("template placeholder '{{{{{}}}}}' is unbound",
                               name)),
      name_(std::move(name)) {}

MockModel MockModel::from_json(const Json& j) {
  MockModel m;
  m.version = j.at("version").get<int>();
  const Json& ppa = j.at("ppa");
  m.area_per_cell_um2 = ppa.at("area_per_cell_um2").get<double>();
  m.power_per_cell_mw = ppa.at("power_per_cell_mw").get<double>();
  m.delay_curvature = ppa.at("delay_curvature").get<double>();
  m.delay_util_coeff = ppa.at("delay_util_coeff").get<double>();
  m.optimal_density = ppa.at("optimal_density").get<double>();
  for (const auto& [name, range] : j.at("legal").items()) {
    m.legal[name] = {range.at(0).get<double>(), range.at(1).get<double>()};
  }
  const Json& rt = j.at("runtime");
  m.saturation_vcpus = rt.at("saturation_vcpus").get<int>();
  m.saturation_exponent = rt.at("saturation_exponent").get<double>();
  for (StageKind s : kFlowStages) {
    const Json& c = rt.at("stages").at(std::string(to_string(s)));
    m.runtime_constants[s] = {c.at("k").get<double>(),
                              c.at("exponent").get<double>()};
  }
  return m;
}

MockModel MockModel::load(const std::filesystem::path& path) {
  return from_json(Json::parse(read_file(path)));
}

const MockModel& MockModel::builtin() {
  static const MockModel model = from_json(Json::parse(embedded::kMockModelJson));
  return model;
}

double MockModel::runtime(StageKind stage, std::int64_t cells,
                          int vcpus) const {
  if (vcpus < 1 || cells < 1) {
    throw std::invalid_argument("runtime needs positive cells and vcpus");
  }
  const StageRuntime& c = runtime_constants.at(stage);
  const double n = static_cast<double>(cells);
  if (vcpus <= saturation_vcpus) {
    return c.k * n / std::pow(static_cast<double>(vcpus), c.exponent);
  }
  const double at_cap =
      c.k * n / std::pow(static_cast<double>(saturation_vcpus), c.exponent);
  return at_cap * std::pow(static_cast<double>(saturation_vcpus) / vcpus,
                           saturation_exponent);
}

PpaMetrics MockModel::ppa(std::int64_t cells, double utilization,
                          double density, double clock_period_ns) const {
  const double n = static_cast<double>(cells);
  const double area = n * area_per_cell_um2 / utilization;
  const double power = power_per_cell_mw * n * (0.6 + 0.4 * density);
  const double dd = density - optimal_density;
  const double delay =
      clock_period_ns *
      (0.7 + delay_curvature * dd * dd + delay_util_coeff / utilization);
  return PpaMetrics(delay, power, area);
}

TemplateStore TemplateStore::load(const std::filesystem::path& root) {
  TemplateStore store;
  for (ToolKind tool : {ToolKind::kIeda, ToolKind::kOpenRoad, ToolKind::kMock}) {
    const auto dir = root / std::string(to_string(tool));
    if (!std::filesystem::is_directory(dir)) continue;
    for (StageKind stage : kFlowStages) {
      const auto file = dir / (std::string(to_string(stage)) + ".tcl");
      if (std::filesystem::exists(file)) store.add(tool, stage, read_file(file));
    }
    const auto defaults = dir / "defaults.json";
    if (std::filesystem::exists(defaults)) {
      ParamMap values;
      const Json doc = Json::parse(read_file(defaults));
      for (const auto& [k, v] : doc.items()) {
        auto s = scalar_from_json(v);
        if (!s) {
          throw AdapterError(fmt::format("{}: '{}' is not a scalar",
                                         defaults.string(), k));
        }
        values.emplace(k, *s);
      }
      store.set_defaults(tool, std::move(values));
    }
  }
  return store;
}

std::filesystem::path TemplateStore::default_root() {
  if (const char* env = std::getenv("EDAFLOW_TEMPLATES")) return env;
  return std::filesystem::path(EDAFLOW_SOURCE_DIR) / "templates";
}

void TemplateStore::add(ToolKind tool, StageKind stage, std::string text) {
  templates_[{tool, stage}] = std::move(text);
}

void TemplateStore::set_defaults(ToolKind tool, ParamMap defaults) {
  defaults_[tool] = std::move(defaults);
}

const std::string* TemplateStore::find(ToolKind tool, StageKind stage) const {
  auto it = templates_.find({tool, stage});
  return it == templates_.end() ? nullptr : &it->second;
}

const ParamMap& TemplateStore::defaults(ToolKind tool) const {
  static const ParamMap kEmpty;
  auto it = defaults_.find(tool);
  return it == defaults_.end() ? kEmpty : it->second;
}

std::vector<std::string> template_placeholders(std::string_view text) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < text.size();) {
    std::string_view name;
    if (std::size_t len = placeholder_at(text, i, &name)) {
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        names.emplace_back(name);
      }
      i += len;
    } else {
      ++i;
    }
  }
  return names;
}

std::string render_template(std::string_view text, const ParamMap& bindings,
                            ParamMap* used) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    std::string_view name;
    if (std::size_t len = placeholder_at(text, i, &name)) {
      auto it = bindings.find(std::string(name));
      if (it == bindings.end()) throw UnboundPlaceholder(std::string(name));
      out += format_scalar(it->second);
      if (used != nullptr) used->insert(*it);
      i += len;
    } else {
      out += text[i++];
    }
  }
  return out;
}

StageScript render_script(const TemplateStore& templates, ToolKind tool,
                          StageKind stage, const JobSpec& job,
                          const ParamMap& params) {
  const std::string* text = templates.find(tool, stage);
  if (text == nullptr) throw UnknownTemplate(tool, stage);

  ParamMap bindings = templates.defaults(tool);
  const JobOptions& o = job.options;
  if (o.clock_period_ns) bindings["clock_period_ns"] = *o.clock_period_ns;
  if (o.core_utilization) bindings["core_utilization"] = *o.core_utilization;
  if (o.placement_density) bindings["placement_density"] = *o.placement_density;
  for (const auto& [k, v] : o.extra_params) bindings[k] = v;
  for (const auto& [k, v] : params) bindings[k] = v;

  bindings["design_name"] = job.design.name;
  bindings["cell_count"] = job.design.cell_count;
  bindings["rtl_path"] = job.design.rtl_path;
  if (job.design.netlist_path) bindings["netlist_path"] = *job.design.netlist_path;
  bindings["tech_name"] = job.tech.name;
  if (!job.tech.lib_paths.empty()) {
    bindings["lib_files"] = fmt::format("{}", fmt::join(job.tech.lib_paths, " "));
  }
  if (!job.tech.lef_paths.empty()) {
    bindings["lef_files"] = fmt::format("{}", fmt::join(job.tech.lef_paths, " "));
  }
  bindings["constraint_path"] = job.constraint_path;
  bindings["stage"] = std::string(to_string(stage));
  bindings["tool"] = std::string(to_string(tool));

  StageScript script;
  script.tool = tool;
  script.stage = stage;
  script.text = render_template(*text, bindings, &script.injected_params);
  return script;
}

Json to_json(const StageResult& r) {
  Json j = {{"stage", std::string(to_string(r.stage))},
            {"runtime_s", r.runtime_s},
            {"log", r.log},
            {"outcome", r.outcome.success ? "success" : "failure"}};
  j["metrics"] = r.metrics ? to_json(*r.metrics) : Json(nullptr);
  if (!r.outcome.success) {
    j["fault_code"] = r.outcome.fault_code;
    j["message"] = r.outcome.message;
  }
  return j;
}

StageResult stage_result_from_json(const Json& j) {
  StageResult r;
  auto stage = parse_stage(j.at("stage").get<std::string>());
  if (!stage) throw std::invalid_argument("unknown stage in stage result");
  r.stage = *stage;
  r.runtime_s = j.at("runtime_s").get<double>();
  r.log = j.at("log").get<std::string>();
  if (!j.at("metrics").is_null()) r.metrics = ppa_from_json(j.at("metrics"));
  if (j.at("outcome").get<std::string>() != "success") {
    r.outcome = StageOutcome::failure(j.at("fault_code").get<std::string>(),
                                      j.at("message").get<std::string>());
  }
  return r;
}

StageResult MockBackend::run(const StageScript& script,
                             const MachineConfig& machine) const {
  StageResult result;
  result.stage = script.stage;
  const auto& p = script.injected_params;

  auto cells_it = p.find("cell_count");
  if (cells_it == p.end() ||
      !std::holds_alternative<std::int64_t>(cells_it->second)) {
    result.outcome = StageOutcome::failure(
        "SCRIPT_INCOMPLETE", "mock script does not bind cell_count");
    return result;
  }
  const std::int64_t cells = std::get<std::int64_t>(cells_it->second);

  std::map<std::string, double> values;
  for (const char* name :
       {"clock_period_ns", "core_utilization", "placement_density"}) {
    auto it = p.find(name);
    std::optional<double> v;
    if (it != p.end()) v = scalar_as_double(it->second);
    if (!v) {
      result.outcome = StageOutcome::failure(
          "SCRIPT_INCOMPLETE",
          fmt::format("mock script does not bind numeric {}", name));
      return result;
    }
    values[name] = *v;
  }
  for (const auto& [name, range] : model_.legal) {
    auto it = values.find(name);
    if (it == values.end()) continue;
    if (it->second < range.first || it->second > range.second) {
      result.outcome = StageOutcome::failure(
          "PARAM_RANGE",
          fmt::format("{}={} outside legal range [{}, {}]", name, it->second,
                      range.first, range.second));
      result.log = result.outcome.message;
      return result;
    }
  }

  const PpaMetrics m =
      model_.ppa(cells, values["core_utilization"], values["placement_density"],
                 values["clock_period_ns"]);
  result.metrics = m;
  result.runtime_s = model_.runtime(script.stage, cells, machine.vcpus);
  result.log = fmt::format(
      "mock {} cells={} vcpus={} runtime_s={} cp_delay_ns={} power_mw={} "
      "area_um2={}",
      to_string(script.stage), cells, machine.vcpus, result.runtime_s,
      m.cp_delay_ns(), m.power_mw(), m.area_um2());
  return result;
}

ExternalToolBackend::ExternalToolBackend(ToolKind tool, std::string executable,
                                         std::filesystem::path workdir)
    : tool_(tool), executable_(std::move(executable)), workdir_(std::move(workdir)) {
  if (tool == ToolKind::kMock) {
    throw std::invalid_argument("the mock tool has no external binary");
  }
}

StageResult ExternalToolBackend::run(const StageScript& script,
                                     const MachineConfig& machine) const {
  auto exe = find_executable(executable_);
  if (!exe) {
    throw BackendUnavailable(fmt::format("{} executable '{}' not found",
                                         to_string(tool_), executable_));
  }
  std::filesystem::create_directories(workdir_);
  const std::string stage(to_string(script.stage));
  const auto script_path = workdir_ / (stage + ".tcl");
  const auto log_path = workdir_ / (stage + ".log");
  const auto metrics_path = workdir_ / "metrics.json";
  std::filesystem::remove(metrics_path);
  {
    std::ofstream out(script_path, std::ios::binary);
    out << script.text;
  }
  const std::string cmd = fmt::format(
      "cd {} && OMP_NUM_THREADS={} {} {} > {} 2>&1",
      shell_quote(workdir_.string()), machine.vcpus, shell_quote(exe->string()),
      shell_quote(script_path.string()), shell_quote(log_path.string()));

  const auto start = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  const auto stop = std::chrono::steady_clock::now();

  StageResult result;
  result.stage = script.stage;
  result.runtime_s = std::chrono::duration<double>(stop - start).count();
  if (std::filesystem::exists(log_path)) result.log = read_file(log_path);
  if (status != 0) {
    result.outcome = StageOutcome::failure(
        "TOOL_CRASH", fmt::format("{} exited with status {}", executable_, status));
    return result;
  }
  try {
    result.metrics = ppa_from_json(Json::parse(read_file(metrics_path)));
  } catch (const std::exception& e) {
    result.outcome = StageOutcome::failure(
        "NO_METRICS", fmt::format("could not read metrics: {}", e.what()));
  }
  return result;
}

StageResult run_stage(const ToolBackend& backend, const StageScript& script,
                      const MachineConfig& machine) {
  if (script.tool != backend.kind()) {
    throw std::invalid_argument(
        fmt::format("script for '{}' given to the '{}' backend",
                    to_string(script.tool), to_string(backend.kind())));
  }
  return backend.run(script, machine);
}

FlowOutcome run_flow(const ToolBackend& backend, const TemplateStore& templates,
                     const JobSpec& job, const ParamMap& params,
                     const MachineConfig& machine) {
  FlowOutcome flow;
  for (StageKind stage : flow_stages(job)) {
    StageScript script;
    try {
      script = render_script(templates, backend.kind(), stage, job, params);
    } catch (const AdapterError& e) {
      flow.outcome = StageOutcome::failure("SCRIPT", e.what());
      flow.metrics.reset();
      return flow;
    }
    StageResult r = run_stage(backend, script, machine);
    flow.stages.push_back(r);
    if (!r.outcome.success) {
      flow.outcome = r.outcome;
      flow.metrics.reset();
      return flow;
    }
    flow.metrics = r.metrics;
  }
  return flow;
}

}  // namespace edaflow
