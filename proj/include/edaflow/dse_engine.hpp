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

#ifndef EDAFLOW_DSE_ENGINE_HPP_
#define EDAFLOW_DSE_ENGINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edaflow/eda_adapter.hpp"
#include "edaflow/flow_model.hpp"
#include "edaflow/rng.hpp"

namespace edaflow {

struct ContinuousRange {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const ContinuousRange&) const = default;
};

struct IntegerRange {
  std::int64_t lo = 0;
  std::int64_t hi = 1;
  bool operator==(const IntegerRange&) const = default;
};

struct CategoricalValues {
  std::vector<Scalar> values;
  bool operator==(const CategoricalValues&) const = default;
};

using DimKind = std::variant<ContinuousRange, IntegerRange, CategoricalValues>;

struct ParamDim {
  std::string name;
  DimKind kind;
  // Set by a ResetToDefault remedy: the dimension stays at its default.
  bool fixed = false;

  bool operator==(const ParamDim&) const = default;
};

class ParamSpace {
 public:
  // Throws std::invalid_argument unless names are unique, ranged dims have
  // lo < hi, categorical dims are non-empty, and every default lies inside
  // its dim. Dims without an explicit default are rejected too.
  ParamSpace(std::vector<ParamDim> dims, ParamMap defaults);

  const std::vector<ParamDim>& dims() const { return dims_; }
  const ParamMap& defaults() const { return defaults_; }
  const ParamDim* find(const std::string& name) const;
  bool contains(const ParamMap& params) const;
  bool operator==(const ParamSpace&) const = default;

  static ParamSpace from_json(const Json& j);
  Json to_json() const;

 private:
  friend class SpaceEditor;
  std::vector<ParamDim> dims_;
  ParamMap defaults_;
};

bool dim_contains(const ParamDim& dim, const Scalar& value);

// Remedies a fault rule can prescribe.
struct ShrinkRange {
  std::string dim;
  double factor = 0.5;
};
struct ResetToDefault {
  std::string dim;
};
struct ClampToBound {
  std::string dim;
};
struct Abort {};
using Remedy = std::variant<ShrinkRange, ResetToDefault, ClampToBound, Abort>;

// Matches faults whose code equals `fault_code` ("*" matches any) and whose
// message contains `match`.
struct FaultRule {
  std::string fault_code;
  std::string match;
  Remedy remedy;
};

std::vector<FaultRule> fault_rules_from_json(const Json& j);
Json to_json(const FaultRule& rule);
std::vector<FaultRule> load_fault_rules(const std::filesystem::path& path);
// The shipped default list.
std::vector<FaultRule> default_fault_rules();

struct RemediationRecord {
  int trial_index = -1;
  std::string fault_code;
  std::string message;
  int rule_index = -1;       // -1: no rule matched
  std::string remedy;        // "shrink_range", ..., or "no_rule_matched"
  std::string dim;
  std::string before;        // dim description before / after
  std::string after;

  bool matched() const { return rule_index >= 0; }
};

Json to_json(const RemediationRecord& record);

struct RemediationResult {
  ParamSpace space;
  RemediationRecord record;
  bool abort = false;
};

// Applies the first matching rule. ShrinkRange(dim, f) replaces [lo, hi] by
// the sub-range of width f (hi - lo) centered on the default, shifted inward
// if it would cross a bound. ClampToBound intersects the range with a
// "legal range [a, b]" reported in the message and clamps the default.
RemediationResult remediate_space(const ParamSpace& space,
                                  const std::string& fault_code,
                                  const std::string& message,
                                  std::span<const FaultRule> rules);

// What one flow evaluation produced.
struct Evaluation {
  std::optional<PpaMetrics> metrics;
  std::string fault_code;
  std::string message;
  std::vector<StageResult> stages;

  bool ok() const { return metrics.has_value(); }
  static Evaluation failure(std::string code, std::string message) {
    return {std::nullopt, std::move(code), std::move(message), {}};
  }
};

using Evaluator = std::function<Evaluation(const ParamMap&)>;

struct Trial {
  int index = 0;
  ParamMap params;
  std::optional<PpaMetrics> metrics;
  std::optional<double> objective;  // ppa_product when successful
  std::string fault_code;
  std::string message;

  bool ok() const { return objective.has_value(); }
};

Json to_json(const Trial& trial);

enum class SearchStrategy { kRandom, kAnneal };

std::string_view to_string(SearchStrategy s);
std::optional<SearchStrategy> parse_strategy(std::string_view name);

// Proposal rule behind run_dse; new strategies plug in here.
class Proposer {
 public:
  virtual ~Proposer() = default;
  // `trial_index` is the index the proposal will run under.
  virtual ParamMap propose(const ParamSpace& space, std::span<const Trial> history,
                           int trial_index, Rng& rng) const = 0;
};

// Independent uniform draw per dimension.
class RandomProposer : public Proposer {
 public:
  ParamMap propose(const ParamSpace& space, std::span<const Trial> history,
                   int trial_index, Rng& rng) const override;
};

// Gaussian step around the best successful trial so far (defaults if none):
// sigma = 0.3 * range * T with T = 0.95^trial_index, clamped to bounds.
// Categorical dims are resampled uniformly with probability T.
class AnnealProposer : public Proposer {
 public:
  static double temperature(int trial_index);
  ParamMap propose(const ParamSpace& space, std::span<const Trial> history,
                   int trial_index, Rng& rng) const override;
};

std::unique_ptr<Proposer> make_proposer(SearchStrategy strategy);

ParamMap propose(SearchStrategy strategy, const ParamSpace& space,
                 std::span<const Trial> history, int trial_index, Rng& rng);

struct DseReport {
  ParamMap best_params;
  std::optional<PpaMetrics> best_metrics;
  int best_trial = -1;
  // Trial the improvement is measured against: trial 0 (the defaults) unless
  // it failed, then the first successful trial.
  int baseline_trial = -1;
  double improvement = 0.0;
  std::vector<Trial> trials;
  std::vector<RemediationRecord> remediations;
  ParamSpace final_space;

  // Best objective after each trial; +inf before the first success.
  std::vector<double> best_so_far() const;
};

Json to_json(const DseReport& report);
// `trial,objective,best_so_far`, one row per trial; failures leave objective
// empty.
void write_trace_csv(std::ostream& out, const DseReport& report);

class DseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AllTrialsFailed : public DseError {
 public:
  explicit AllTrialsFailed(DseReport partial);
  const DseReport& partial() const { return partial_; }

 private:
  DseReport partial_;
};

class UnremediableFault : public DseError {
 public:
  UnremediableFault(std::string reason, DseReport partial);
  const DseReport& partial() const { return partial_; }

 private:
  DseReport partial_;
};

inline constexpr int kMaxFaultRecurrence = 3;

struct DseConfig {
  int budget = 64;
  SearchStrategy strategy = SearchStrategy::kRandom;
  std::uint64_t seed = 1;
  std::vector<FaultRule> faults;
};

// Trial 0 evaluates the defaults, then budget - 1 proposals follow. A failed
// trial runs remediate_space before the next proposal. An Abort rule, or the
// same fault code hitting the same dim more than kMaxFaultRecurrence times,
// raises UnremediableFault.
DseReport run_dse(const ParamSpace& space, const Evaluator& evaluator,
                  const DseConfig& config);

// Same, with a caller-supplied proposal rule.
DseReport run_dse(const ParamSpace& space, const Evaluator& evaluator,
                  const DseConfig& config, const Proposer& proposer);

// Explores placement density and core utilization around the job's values
// (or the tool defaults), using the ranges in data/dse/default_space.json.
ParamSpace default_param_space(const JobSpec& job, const TemplateStore& templates);

// Runs the whole flow of `job` for each parameter set.
Evaluator make_flow_evaluator(const ToolBackend& backend,
                              const TemplateStore& templates, const JobSpec& job,
                              const MachineConfig& machine);

}  // namespace edaflow

#endif  // EDAFLOW_DSE_ENGINE_HPP_
