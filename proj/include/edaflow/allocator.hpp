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

#ifndef EDAFLOW_ALLOCATOR_HPP_
#define EDAFLOW_ALLOCATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edaflow/flow_model.hpp"

namespace edaflow {

// Hourly machine rates keyed by vCPU count.
struct PriceList {
  std::map<int, double> rates;
  std::string currency;

  // Throws std::out_of_range for an unlisted vCPU count.
  double rate(int vcpus) const;
  MachineConfig machine(int vcpus) const { return {vcpus, rate(vcpus)}; }

  static PriceList from_json(const Json& j);
  static PriceList load(const std::filesystem::path& path);
  // Path from EDAFLOW_PRICES, else the compiled-in list.
  static PriceList default_list();
  Json to_json() const;
};

// One choice cell: run stage `stage_index` on `vcpus` for `runtime_s` at `cost`.
struct ConfigOption {
  int stage_index = 0;
  int vcpus = 1;
  double runtime_s = 0.0;
  double cost = 0.0;

  bool operator==(const ConfigOption&) const = default;
};

using StageOptions = std::vector<ConfigOption>;

// rate_per_hour * runtime_s / 3600.
double stage_cost(double rate_per_hour, double runtime_s);

// Options for one stage from runtimes keyed by vcpus; every key must be priced.
StageOptions build_stage_options(int stage_index,
                                 const std::map<int, double>& runtimes,
                                 const PriceList& prices);

// Per-stage option table as stored in options files:
//   {"stages": [{"name": "placement", "runtimes": {"1": 346, ...},
//                "costs": {"1": 3.728, ...}}, ...]}
// "costs" is optional; missing entries are priced from `prices`.
struct OptionsTable {
  std::vector<std::string> stage_names;
  std::vector<StageOptions> stages;
};

OptionsTable options_table_from_json(const Json& j, const PriceList& prices);

class AllocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyOptions : public AllocationError {
 public:
  EmptyOptions() : AllocationError("stage has no configuration options") {}
};

// Even the fastest configuration of every stage overruns the budget.
class Infeasible : public AllocationError {
 public:
  Infeasible(double budget_s, double min_total_time_s);
  double budget_s() const { return budget_s_; }
  double min_total_time_s() const { return min_total_time_s_; }

 private:
  double budget_s_;
  double min_total_time_s_;
};

class TooLarge : public AllocationError {
 public:
  using AllocationError::AllocationError;
};

// Lowest cost option; ties go to fewer vCPUs.
ConfigOption cheapest_single_stage(std::span<const ConfigOption> options);

enum class Objective {
  kInverseCost,  // maximize sum of 1/c over chosen options
  kMinCost,      // minimize total cost
};

struct AllocationPlan {
  std::vector<ConfigOption> chosen;  // one per stage, in stage order
  double total_time_s = 0.0;
  double total_cost = 0.0;
  double objective_value = 0.0;  // sum of 1/c over `chosen`

  std::vector<int> choices() const;
};

Json to_json(const AllocationPlan& plan);

inline constexpr double kMaxBudgetSeconds = 1e6;
inline constexpr std::uint64_t kMaxBruteForceCombinations = 1'000'000;

// Exactly one option per stage, total runtime within `budget_s`, best
// objective. Dynamic program over whole seconds: each runtime is rounded up
// for indexing, reported totals use the exact runtimes. Equal objectives
// prefer lower total time, then fewer vCPUs stage by stage.
//
// Throws Infeasible, EmptyOptions, or AllocationError for a non-positive
// budget or one above kMaxBudgetSeconds.
AllocationPlan mckp_allocate(std::span<const StageOptions> stages, double budget_s,
                             Objective objective = Objective::kInverseCost);

// Exhaustive reference for mckp_allocate. Equal objectives prefer lower total
// cost, lower total time, then fewer vCPUs stage by stage. Throws TooLarge
// beyond kMaxBruteForceCombinations.
AllocationPlan brute_force_allocate(std::span<const StageOptions> stages,
                                    double budget_s,
                                    Objective objective = Objective::kInverseCost);

}  // namespace edaflow

#endif  // EDAFLOW_ALLOCATOR_HPP_
