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

#ifndef EDAFLOW_EDA_ADAPTER_HPP_
#define EDAFLOW_EDA_ADAPTER_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edaflow/flow_model.hpp"

namespace edaflow {

class AdapterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTemplate : public AdapterError {
 public:
  UnknownTemplate(ToolKind tool, StageKind stage);
};

class UnboundPlaceholder : public AdapterError {
 public:
  explicit UnboundPlaceholder(std::string name);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class BackendUnavailable : public AdapterError {
 public:
  using AdapterError::AdapterError;
};

// Constants of the closed-form mock tool. Loaded from data/mock_model.json;
// the same file is compiled in as the default.
//
//   area     = n * a0 / u
//   power    = p0 * n * (0.6 + 0.4 d)
//   cp_delay = T * (0.7 + w (d - d*)^2 + v / u)
//   runtime  = k_stage * n / c^e_stage                  for c <= 4
//              runtime(stage, n, 4) * (4 / c)^0.1       for c > 4
//
// with n cells, utilization u, placement density d, clock period T and c
// vCPUs.
struct MockModel {
  struct StageRuntime {
    double k = 0.0;
    double exponent = 1.0;
  };

  int version = 1;
  double area_per_cell_um2 = 0.0;
  double power_per_cell_mw = 0.0;
  double delay_curvature = 0.0;
  double delay_util_coeff = 0.0;
  double optimal_density = 0.0;
  int saturation_vcpus = 4;
  double saturation_exponent = 0.1;
  std::map<StageKind, StageRuntime> runtime_constants;
  // Legal parameter ranges, closed on both ends. Outside them the mock tool
  // fails with PARAM_RANGE.
  std::map<std::string, std::pair<double, double>> legal;

  static MockModel from_json(const Json& j);
  static MockModel load(const std::filesystem::path& path);
  static const MockModel& builtin();

  double runtime(StageKind stage, std::int64_t cells, int vcpus) const;
  PpaMetrics ppa(std::int64_t cells, double utilization, double density,
                 double clock_period_ns) const;
};

// Script templates per (tool, stage) plus per-tool defaults for the optional
// job parameters. Templates are plain text with {{name}} placeholders.
class TemplateStore {
 public:
  TemplateStore() = default;

  // Reads <root>/<tool>/<stage>.tcl and <root>/<tool>/defaults.json.
  static TemplateStore load(const std::filesystem::path& root);
  // Directory shipped with the sources; overridable via EDAFLOW_TEMPLATES.
  static std::filesystem::path default_root();

  void add(ToolKind tool, StageKind stage, std::string text);
  void set_defaults(ToolKind tool, ParamMap defaults);

  const std::string* find(ToolKind tool, StageKind stage) const;
  const ParamMap& defaults(ToolKind tool) const;

 private:
  std::map<std::pair<ToolKind, StageKind>, std::string> templates_;
  std::map<ToolKind, ParamMap> defaults_;
};

// Placeholder names in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view text);

// Substitutes every {{name}}. Throws UnboundPlaceholder for a name missing
// from `bindings`. When `used` is given it receives exactly the bindings the
// text consumed.
std::string render_template(std::string_view text, const ParamMap& bindings,
                            ParamMap* used = nullptr);

struct StageScript {
  ToolKind tool = ToolKind::kMock;
  StageKind stage = StageKind::kPlacement;
  std::string text;
  ParamMap injected_params;

  bool operator==(const StageScript&) const = default;
};

// Binding precedence, lowest first: template defaults, optional job fields,
// `params`. Essential job fields are bound under fixed names (design_name,
// cell_count, rtl_path, netlist_path, tech_name, lib_files, lef_files,
// constraint_path, stage, tool); empty path lists stay unbound.
StageScript render_script(const TemplateStore& templates, ToolKind tool,
                          StageKind stage, const JobSpec& job,
                          const ParamMap& params);

struct StageOutcome {
  bool success = true;
  std::string fault_code;
  std::string message;

  static StageOutcome ok() { return {}; }
  static StageOutcome failure(std::string code, std::string message) {
    return {false, std::move(code), std::move(message)};
  }
  bool operator==(const StageOutcome&) const = default;
};

struct StageResult {
  StageKind stage = StageKind::kPlacement;
  std::optional<PpaMetrics> metrics;
  double runtime_s = 0.0;
  std::string log;
  StageOutcome outcome;

  bool operator==(const StageResult&) const = default;
};

Json to_json(const StageResult& result);
StageResult stage_result_from_json(const Json& j);

class ToolBackend {
 public:
  virtual ~ToolBackend() = default;
  virtual ToolKind kind() const = 0;
  // Tool faults are reported in StageResult::outcome. Only transport-level
  // problems throw (BackendUnavailable).
  virtual StageResult run(const StageScript& script,
                          const MachineConfig& machine) const = 0;
};

// Stateless closed-form tool.
class MockBackend : public ToolBackend {
 public:
  explicit MockBackend(MockModel model = MockModel::builtin())
      : model_(std::move(model)) {}

  ToolKind kind() const override { return ToolKind::kMock; }
  StageResult run(const StageScript& script,
                  const MachineConfig& machine) const override;
  const MockModel& model() const { return model_; }

 private:
  MockModel model_;
};

// Runs a real tool binary on the rendered script in a work directory. The
// shipped templates write <workdir>/metrics.json at the end of each stage.
class ExternalToolBackend : public ToolBackend {
 public:
  ExternalToolBackend(ToolKind tool, std::string executable,
                      std::filesystem::path workdir);

  ToolKind kind() const override { return tool_; }
  StageResult run(const StageScript& script,
                  const MachineConfig& machine) const override;

 private:
  ToolKind tool_;
  std::string executable_;
  std::filesystem::path workdir_;
};

// Throws std::invalid_argument if the script targets another tool.
StageResult run_stage(const ToolBackend& backend, const StageScript& script,
                      const MachineConfig& machine);

struct FlowOutcome {
  std::vector<StageResult> stages;
  // Metrics of the last stage when every stage succeeded.
  std::optional<PpaMetrics> metrics;
  StageOutcome outcome;
};

// Renders and runs every stage of `job` in order, stopping at the first
// failure. Template errors are reported as a SCRIPT fault.
FlowOutcome run_flow(const ToolBackend& backend, const TemplateStore& templates,
                     const JobSpec& job, const ParamMap& params,
                     const MachineConfig& machine);

}  // namespace edaflow

#endif  // EDAFLOW_EDA_ADAPTER_HPP_
