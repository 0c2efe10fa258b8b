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

#ifndef EDAFLOW_FLOW_MODEL_HPP_
#define EDAFLOW_FLOW_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace edaflow {

using Json = nlohmann::json;

// Backend stages in flow order. FullFlow is shorthand for all five.
enum class StageKind { kFloorplan, kPlacement, kCts, kRouting, kSta, kFullFlow };

inline constexpr StageKind kFlowStages[] = {
    StageKind::kFloorplan, StageKind::kPlacement, StageKind::kCts,
    StageKind::kRouting, StageKind::kSta};

std::string_view to_string(StageKind stage);
std::optional<StageKind> parse_stage(std::string_view name);
// Replaces FullFlow by the concrete stage sequence.
std::vector<StageKind> expand_stages(std::span<const StageKind> stages);
// Index of a concrete stage in flow order (Floorplan = 0).
int stage_rank(StageKind stage);

enum class ToolKind { kIeda, kOpenRoad, kMock };

std::string_view to_string(ToolKind tool);
std::optional<ToolKind> parse_tool(std::string_view name);

// Parameter values carried by job options, templates, and DSE trials.
using Scalar = std::variant<std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, Scalar>;

std::string format_scalar(const Scalar& value);
// Numeric view of a scalar; nullopt for strings.
std::optional<double> scalar_as_double(const Scalar& value);
Json scalar_to_json(const Scalar& value);
std::optional<Scalar> scalar_from_json(const Json& value);

struct DesignDescriptor {
  std::string name;
  std::int64_t cell_count = 1;
  std::string rtl_path;
  std::optional<std::string> netlist_path;

  bool operator==(const DesignDescriptor&) const = default;
};

struct TechNode {
  std::string name;
  std::vector<std::string> lib_paths;
  std::vector<std::string> lef_paths;

  bool operator==(const TechNode&) const = default;
};

struct JobOptions {
  std::optional<double> clock_period_ns;
  std::optional<double> core_utilization;
  std::optional<double> placement_density;
  ParamMap extra_params;
  // Where AllocateThenFlow runs get stage runtimes from: a CSV of measured
  // samples, or a persisted model. With neither, a model is trained.
  std::optional<std::string> runtime_table;
  std::optional<std::string> runtime_model;

  bool operator==(const JobOptions&) const = default;
};

struct JobSpec {
  DesignDescriptor design;
  std::vector<StageKind> stages;
  TechNode tech;
  std::string constraint_path;
  ToolKind tool = ToolKind::kMock;
  JobOptions options;

  bool operator==(const JobSpec&) const = default;
};

// Concrete stages a job runs, FullFlow expanded.
std::vector<StageKind> flow_stages(const JobSpec& job);

struct RangeViolation {
  std::string field;
  double given = 0.0;
  std::string allowed;

  bool operator==(const RangeViolation&) const = default;
};

struct FieldError {
  std::string field;
  std::string reason;

  bool operator==(const FieldError&) const = default;
};

// Why a job document is not executable. Essential fields are never defaulted.
struct IncompleteReport {
  std::vector<std::string> missing;
  std::vector<RangeViolation> out_of_range;
  std::vector<FieldError> invalid;

  bool empty() const {
    return missing.empty() && out_of_range.empty() && invalid.empty();
  }
  std::string describe() const;
};

class MalformedDocument : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ValidationResult = std::variant<JobSpec, IncompleteReport>;

ValidationResult validate_job_spec(const Json& raw);
// Parses text first; throws MalformedDocument when it is not JSON.
ValidationResult validate_job_spec_text(std::string_view text);

Json to_json(const JobSpec& job);

// Critical-path delay, power and area of a finished flow.
class PpaMetrics {
 public:
  // Throws std::invalid_argument unless all components are positive and finite.
  PpaMetrics(double cp_delay_ns, double power_mw, double area_um2);

  double cp_delay_ns() const { return cp_delay_ns_; }
  double power_mw() const { return power_mw_; }
  double area_um2() const { return area_um2_; }

  bool operator==(const PpaMetrics&) const = default;

 private:
  double cp_delay_ns_;
  double power_mw_;
  double area_um2_;
};

Json to_json(const PpaMetrics& metrics);
PpaMetrics ppa_from_json(const Json& j);

double ppa_product(const PpaMetrics& m);
// 1 - product(after)/product(before); positive means `after` is better.
double ppa_improvement(const PpaMetrics& before, const PpaMetrics& after);
// Fraction to percent, rounded half away from zero to two decimals.
double round_percent(double fraction);

struct MachineConfig {
  int vcpus = 1;
  double rate_per_hour = 1.0;

  bool operator==(const MachineConfig&) const = default;
};

}  // namespace edaflow

#endif  // EDAFLOW_FLOW_MODEL_HPP_
