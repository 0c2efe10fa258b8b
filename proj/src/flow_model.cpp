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

#include "edaflow/flow_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace edaflow {

namespace {

constexpr std::string_view kStageNames[] = {"floorplan", "placement", "cts",
                                            "routing",   "sta",       "full_flow"};
constexpr std::string_view kToolNames[] = {"ieda", "openroad", "mock"};

// Collects findings while walking a job document.
class Checker {
 public:
  explicit Checker(IncompleteReport& report) : report_(report) {}

  const Json* require(const Json& parent, const std::string& key,
                      const std::string& path) {
    auto it = parent.find(key);
    if (it == parent.end() || it->is_null()) {
      report_.missing.push_back(path);
      return nullptr;
    }
    return &*it;
  }

  std::optional<std::string> require_string(const Json& parent,
                                            const std::string& key,
                                            const std::string& path) {
    const Json* v = require(parent, key, path);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) {
      invalid(path, "expected a string");
      return std::nullopt;
    }
    std::string s = v->get<std::string>();
    if (s.empty()) {
      report_.missing.push_back(path);
      return std::nullopt;
    }
    return s;
  }

  std::vector<std::string> string_list(const Json& parent,
                                       const std::string& key,
                                       const std::string& path) {
    std::vector<std::string> out;
    auto it = parent.find(key);
    if (it == parent.end() || it->is_null()) return out;
    if (!it->is_array()) {
      invalid(path, "expected an array of strings");
      return out;
    }
    for (const auto& e : *it) {
      if (!e.is_string()) {
        invalid(path, "expected an array of strings");
        return {};
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  // Optional real in (0, hi]; hi = infinity means unbounded above.
  std::optional<double> optional_fraction(const Json& parent,
                                          const std::string& key,
                                          const std::string& path, double hi,
                                          const std::string& allowed) {
    auto it = parent.find(key);
    if (it == parent.end() || it->is_null()) return std::nullopt;
    if (!it->is_number()) {
      invalid(path, "expected a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!(v > 0.0 && v <= hi) || !std::isfinite(v)) {
      report_.out_of_range.push_back({path, v, allowed});
      return std::nullopt;
    }
    return v;
  }

  void invalid(const std::string& field, const std::string& reason) {
    report_.invalid.push_back({field, reason});
  }

  void out_of_range(const std::string& field, double given,
                    const std::string& allowed) {
    report_.out_of_range.push_back({field, given, allowed});
  }

 private:
  IncompleteReport& report_;
};

std::vector<StageKind> check_stages(Checker& check, const Json& raw) {
  const Json* v = check.require(raw, "stages", "stages");
  if (v == nullptr) return {};
  std::vector<std::string> names;
  if (v->is_string()) {
    names.push_back(v->get<std::string>());
  } else if (v->is_array()) {
    for (const auto& e : *v) {
      if (!e.is_string()) {
        check.invalid("stages", "expected stage names");
        return {};
      }
      names.push_back(e.get<std::string>());
    }
  } else {
    check.invalid("stages", "expected a stage name or a list of stage names");
    return {};
  }
  if (names.empty()) {
    check.invalid("stages", "must list at least one stage");
    return {};
  }
  std::vector<StageKind> stages;
  for (const auto& n : names) {
    auto s = parse_stage(n);
    if (!s) {
      check.invalid("stages", fmt::format("unknown stage '{}'", n));
      return {};
    }
    stages.push_back(*s);
  }
  const bool has_full =
      std::find(stages.begin(), stages.end(), StageKind::kFullFlow) !=
      stages.end();
  if (has_full && stages.size() > 1) {
    check.invalid("stages", "full_flow cannot be combined with other stages");
    return {};
  }
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stage_rank(stages[i - 1]) >= stage_rank(stages[i])) {
      check.invalid("stages",
                    "stages must be distinct and follow the flow order "
                    "floorplan < placement < cts < routing < sta");
      return {};
    }
  }
  return stages;
}

}  // namespace

std::string_view to_string(StageKind stage) {
  return kStageNames[static_cast<int>(stage)];
}

std::optional<StageKind> parse_stage(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kStageNames[i] == name) return static_cast<StageKind>(i);
  }
  return std::nullopt;
}

std::vector<StageKind> expand_stages(std::span<const StageKind> stages) {
  std::vector<StageKind> out;
  for (StageKind s : stages) {
    if (s == StageKind::kFullFlow) {
      out.insert(out.end(), std::begin(kFlowStages), std::end(kFlowStages));
    } else {
      out.push_back(s);
    }
  }
  return out;
}

int stage_rank(StageKind stage) { return static_cast<int>(stage); }

std::string_view to_string(ToolKind tool) {
  return kToolNames[static_cast<int>(tool)];
}

std::optional<ToolKind> parse_tool(std::string_view name) {
  for (int i = 0; i < 3; ++i) {
    if (kToolNames[i] == name) return static_cast<ToolKind>(i);
  }
  return std::nullopt;
}

std::string format_scalar(const Scalar& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return fmt::format("{}", v);
        }
      },
      value);
}

std::optional<double> scalar_as_double(const Scalar& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) {
    return static_cast<double>(*i);
  }
  if (const auto* d = std::get_if<double>(&value)) return *d;
  return std::nullopt;
}

Json scalar_to_json(const Scalar& value) {
  return std::visit([](const auto& v) { return Json(v); }, value);
}

std::optional<Scalar> scalar_from_json(const Json& value) {
  if (value.is_number_integer()) return Scalar{value.get<std::int64_t>()};
  if (value.is_number_float()) return Scalar{value.get<double>()};
  if (value.is_string()) return Scalar{value.get<std::string>()};
  return std::nullopt;
}

std::vector<StageKind> flow_stages(const JobSpec& job) {
  return expand_stages(job.stages);
}

std::string IncompleteReport::describe() const {
  std::vector<std::string> parts;
  if (!missing.empty()) {
    parts.push_back(fmt::format("missing: {}", fmt::join(missing, ", ")));
  }
  for (const auto& r : out_of_range) {
    parts.push_back(fmt::format("{} = {} outside {}", r.field, r.given,
                                r.allowed));
  }
  for (const auto& e : invalid) {
    parts.push_back(fmt::format("{}: {}", e.field, e.reason));
  }
  return fmt::format("{}", fmt::join(parts, "; "));
}

ValidationResult validate_job_spec(const Json& raw) {
  if (!raw.is_object()) {
    throw MalformedDocument("job document must be a JSON object");
  }
  IncompleteReport report;
  Checker check(report);
  JobSpec job;

  if (const Json* d = check.require(raw, "design", "design")) {
    if (!d->is_object()) {
      check.invalid("design", "expected an object");
    } else {
      if (auto name = check.require_string(*d, "name", "design.name")) {
        job.design.name = *name;
      }
      if (const Json* n = check.require(*d, "cell_count", "design.cell_count")) {
        if (!n->is_number_integer()) {
          check.invalid("design.cell_count", "expected an integer");
        } else if (n->get<std::int64_t>() < 1) {
          check.out_of_range("design.cell_count",
                             static_cast<double>(n->get<std::int64_t>()),
                             "[1, inf)");
        } else {
          job.design.cell_count = n->get<std::int64_t>();
        }
      }
      if (auto rtl = check.require_string(*d, "rtl_path", "design.rtl_path")) {
        job.design.rtl_path = *rtl;
      }
      auto nl = d->find("netlist_path");
      if (nl != d->end() && !nl->is_null()) {
        if (nl->is_string()) {
          job.design.netlist_path = nl->get<std::string>();
        } else {
          check.invalid("design.netlist_path", "expected a string");
        }
      }
    }
  }

  job.stages = check_stages(check, raw);

  if (const Json* t = check.require(raw, "tech", "tech")) {
    if (!t->is_object()) {
      check.invalid("tech", "expected an object");
    } else {
      if (auto name = check.require_string(*t, "name", "tech.name")) {
        job.tech.name = *name;
      }
      job.tech.lib_paths = check.string_list(*t, "lib_paths", "tech.lib_paths");
      job.tech.lef_paths = check.string_list(*t, "lef_paths", "tech.lef_paths");
    }
  }

  if (auto c = check.require_string(raw, "constraint_path", "constraint_path")) {
    job.constraint_path = *c;
  }

  if (auto tool = check.require_string(raw, "tool", "tool")) {
    if (auto kind = parse_tool(*tool)) {
      job.tool = *kind;
    } else {
      check.invalid("tool", fmt::format("unknown tool '{}'", *tool));
    }
  }

  auto opts = raw.find("options");
  if (opts != raw.end() && !opts->is_null()) {
    if (!opts->is_object()) {
      check.invalid("options", "expected an object");
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      job.options.clock_period_ns = check.optional_fraction(
          *opts, "clock_period_ns", "options.clock_period_ns", inf, "(0, inf)");
      job.options.core_utilization = check.optional_fraction(
          *opts, "core_utilization", "options.core_utilization", 1.0, "(0, 1]");
      job.options.placement_density =
          check.optional_fraction(*opts, "placement_density",
                                  "options.placement_density", 1.0, "(0, 1]");
      auto params = opts->find("params");
      if (params != opts->end() && !params->is_null()) {
        if (!params->is_object()) {
          check.invalid("options.params", "expected an object");
        } else {
          for (const auto& [k, v] : params->items()) {
            if (auto s = scalar_from_json(v)) {
              job.options.extra_params.emplace(k, *s);
            } else {
              check.invalid("options.params." + k,
                            "expected a number or a string");
            }
          }
        }
      }
      for (const char* key : {"runtime_table", "runtime_model"}) {
        auto it = opts->find(key);
        if (it == opts->end() || it->is_null()) continue;
        if (!it->is_string()) {
          check.invalid(std::string("options.") + key, "expected a string");
          continue;
        }
        (std::string_view(key) == "runtime_table" ? job.options.runtime_table
                                                  : job.options.runtime_model) =
            it->get<std::string>();
      }
    }
  }

  if (!report.empty()) return report;
  return job;
}

ValidationResult validate_job_spec_text(std::string_view text) {
  Json raw;
  try {
    raw = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw MalformedDocument(e.what());
  }
  return validate_job_spec(raw);
}

Json to_json(const JobSpec& job) {
  Json design = {{"name", job.design.name},
                 {"cell_count", job.design.cell_count},
                 {"rtl_path", job.design.rtl_path}};
  if (job.design.netlist_path) design["netlist_path"] = *job.design.netlist_path;
  Json stages = Json::array();
  for (StageKind s : job.stages) stages.push_back(std::string(to_string(s)));
  Json options = Json::object();
  const auto& o = job.options;
  if (o.clock_period_ns) options["clock_period_ns"] = *o.clock_period_ns;
  if (o.core_utilization) options["core_utilization"] = *o.core_utilization;
  if (o.placement_density) options["placement_density"] = *o.placement_density;
  if (!o.extra_params.empty()) {
    Json params = Json::object();
    for (const auto& [k, v] : o.extra_params) params[k] = scalar_to_json(v);
    options["params"] = params;
  }
  if (o.runtime_table) options["runtime_table"] = *o.runtime_table;
  if (o.runtime_model) options["runtime_model"] = *o.runtime_model;
  return {{"design", design},
          {"stages", stages},
          {"tech",
           {{"name", job.tech.name},
            {"lib_paths", job.tech.lib_paths},
            {"lef_paths", job.tech.lef_paths}}},
          {"constraint_path", job.constraint_path},
          {"tool", std::string(to_string(job.tool))},
          {"options", options}};
}

PpaMetrics::PpaMetrics(double cp_delay_ns, double power_mw, double area_um2)
    : cp_delay_ns_(cp_delay_ns), power_mw_(power_mw), area_um2_(area_um2) {
  for (double v : {cp_delay_ns, power_mw, area_um2}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(fmt::format(
          "PPA components must be positive and finite (got {}, {}, {})",
          cp_delay_ns, power_mw, area_um2));
    }
  }
}

Json to_json(const PpaMetrics& m) {
  return {{"cp_delay_ns", m.cp_delay_ns()},
          {"power_mw", m.power_mw()},
          {"area_um2", m.area_um2()}};
}

PpaMetrics ppa_from_json(const Json& j) {
  return PpaMetrics(j.at("cp_delay_ns").get<double>(),
                    j.at("power_mw").get<double>(),
                    j.at("area_um2").get<double>());
}

double ppa_product(const PpaMetrics& m) {
  return m.cp_delay_ns() * m.power_mw() * m.area_um2();
}

double ppa_improvement(const PpaMetrics& before, const PpaMetrics& after) {
  return 1.0 - ppa_product(after) / ppa_product(before);
}

double round_percent(double fraction) {
  return std::round(fraction * 100.0 * 100.0) / 100.0;
}

}  // namespace edaflow
