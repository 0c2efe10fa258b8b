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

#include "edaflow/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "edaflow/embedded_data.hpp"

namespace edaflow {

namespace {

double option_value(const ConfigOption& o, Objective objective) {
  return objective == Objective::kInverseCost ? 1.0 / o.cost : -o.cost;
}

void check_stages(std::span<const StageOptions> stages, double budget_s) {
  if (stages.empty()) throw AllocationError("allocation needs at least one stage");
  for (const auto& opts : stages) {
    if (opts.empty()) throw EmptyOptions();
    for (const auto& o : opts) {
      if (!(o.runtime_s > 0.0) || !(o.cost > 0.0) || !std::isfinite(o.runtime_s) ||
          !std::isfinite(o.cost)) {
        throw AllocationError(fmt::format(
            "option (stage {}, {} vCPUs) needs positive runtime and cost",
            o.stage_index, o.vcpus));
      }
    }
  }
  if (!(budget_s > 0.0) || !std::isfinite(budget_s)) {
    throw AllocationError("time budget must be positive");
  }
  if (budget_s > kMaxBudgetSeconds) {
    throw AllocationError(fmt::format(
        "time budget {} s exceeds the {} s limit of the dynamic program",
        budget_s, kMaxBudgetSeconds));
  }
}

double min_total_time(std::span<const StageOptions> stages) {
  double total = 0.0;
  for (const auto& opts : stages) {
    total += std::min_element(opts.begin(), opts.end(),
                              [](const auto& a, const auto& b) {
                                return a.runtime_s < b.runtime_s;
                              })
                 ->runtime_s;
  }
  return total;
}

AllocationPlan make_plan(std::vector<ConfigOption> chosen) {
  AllocationPlan plan;
  for (const auto& o : chosen) {
    plan.total_time_s += o.runtime_s;
    plan.total_cost += o.cost;
    plan.objective_value += 1.0 / o.cost;
  }
  plan.chosen = std::move(chosen);
  return plan;
}

}  // namespace

double PriceList::rate(int vcpus) const {
  auto it = rates.find(vcpus);
  if (it == rates.end()) {
    throw std::out_of_range(fmt::format("no price for {} vCPUs", vcpus));
  }
  return it->second;
}

PriceList PriceList::from_json(const Json& j) {
  PriceList p;
  p.currency = j.at("currency").get<std::string>();
  for (const auto& [key, value] : j.at("rates").items()) {
    std::size_t used = 0;
    int vcpus = 0;
    try {
      vcpus = std::stoi(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != key.size() || vcpus < 1) {
      throw std::invalid_argument("price list key '" + key + "' is not a vCPU count");
    }
    const double rate = value.get<double>();
    if (!(rate > 0.0)) {
      throw std::invalid_argument(
          fmt::format("price for {} vCPUs must be positive", vcpus));
    }
    p.rates[vcpus] = rate;
  }
  if (p.rates.empty()) throw std::invalid_argument("price list has no entries");
  return p;
}

PriceList PriceList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return from_json(Json::parse(in));
}

PriceList PriceList::default_list() {
  if (const char* env = std::getenv("EDAFLOW_PRICES"); env != nullptr && *env) {
    return load(env);
  }
  return from_json(Json::parse(embedded::kPriceListJson));
}

Json PriceList::to_json() const {
  Json r = Json::object();
  for (const auto& [v, rate] : rates) r[std::to_string(v)] = rate;
  return {{"currency", currency}, {"rates", r}};
}

double stage_cost(double rate_per_hour, double runtime_s) {
  return rate_per_hour * runtime_s / 3600.0;
}

StageOptions build_stage_options(int stage_index,
                                 const std::map<int, double>& runtimes,
                                 const PriceList& prices) {
  StageOptions out;
  for (const auto& [vcpus, t] : runtimes) {
    out.push_back({stage_index, vcpus, t, stage_cost(prices.rate(vcpus), t)});
  }
  return out;
}

OptionsTable options_table_from_json(const Json& j, const PriceList& prices) {
  OptionsTable table;
  const Json& stages = j.at("stages");
  if (!stages.is_array() || stages.empty()) {
    throw std::invalid_argument("options file needs a non-empty stages array");
  }
  for (const auto& s : stages) {
    const int index = static_cast<int>(table.stages.size());
    table.stage_names.push_back(s.at("name").get<std::string>());
    StageOptions options;
    for (const auto& [key, t] : s.at("runtimes").items()) {
      const int vcpus = std::stoi(key);
      const double runtime = t.get<double>();
      if (vcpus < 1 || !(runtime > 0.0)) {
        throw std::invalid_argument("options need positive vcpus and runtimes");
      }
      double cost = 0.0;
      if (s.contains("costs") && s.at("costs").contains(key)) {
        cost = s.at("costs").at(key).get<double>();
      } else {
        cost = stage_cost(prices.rate(vcpus), runtime);
      }
      options.push_back({index, vcpus, runtime, cost});
    }
    std::sort(options.begin(), options.end(),
              [](const ConfigOption& a, const ConfigOption& b) { return a.vcpus < b.vcpus; });
    table.stages.push_back(std::move(options));
  }
  return table;
}

Infeasible::Infeasible(double budget_s, double min_total_time_s)
    : AllocationError(fmt::format(
          "infeasible: budget {} s is below the minimum achievable total time "
          "{} s",
          budget_s, min_total_time_s)),
      budget_s_(budget_s),
      min_total_time_s_(min_total_time_s) {}

ConfigOption cheapest_single_stage(std::span<const ConfigOption> options) {
  if (options.empty()) throw EmptyOptions();
  const ConfigOption* best = &options.front();
  for (const auto& o : options) {
    if (o.stage_index != best->stage_index) {
      throw std::invalid_argument("options span more than one stage");
    }
    if (o.cost < best->cost || (o.cost == best->cost && o.vcpus < best->vcpus)) {
      best = &o;
    }
  }
  return *best;
}

std::vector<int> AllocationPlan::choices() const {
  std::vector<int> v;
  for (const auto& o : chosen) v.push_back(o.vcpus);
  return v;
}

Json to_json(const AllocationPlan& plan) {
  Json chosen = Json::array();
  for (const auto& o : plan.chosen) {
    chosen.push_back({{"stage_index", o.stage_index},
                      {"vcpus", o.vcpus},
                      {"runtime_s", o.runtime_s},
                      {"cost", o.cost}});
  }
  return {{"choices", plan.choices()},
          {"chosen", chosen},
          {"total_time_s", plan.total_time_s},
          {"total_cost", plan.total_cost},
          {"objective_value", plan.objective_value}};
}

AllocationPlan mckp_allocate(std::span<const StageOptions> stages, double budget_s,
                             Objective objective) {
  check_stages(stages, budget_s);
  const std::size_t m = stages.size();

  std::vector<std::vector<std::int64_t>> weight(m);
  std::int64_t max_useful = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t widest = 0;
    for (const auto& o : stages[i]) {
      weight[i].push_back(static_cast<std::int64_t>(std::ceil(o.runtime_s)));
      widest = std::max(widest, weight[i].back());
    }
    max_useful += widest;
  }
  // Beyond the sum of the slowest options every combination fits.
  const std::int64_t capacity =
      std::min(static_cast<std::int64_t>(std::floor(budget_s)), max_useful);
  const auto width = static_cast<std::size_t>(capacity + 1);

  // Stages are folded from last to first so that, at equal objective and
  // time, the vCPU tie-break at stage i sees an already-resolved suffix.
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> value(width, 0.0), time(width, 0.0);
  std::vector<double> next_value(width), next_time(width);
  std::vector<std::vector<std::int32_t>> choice(m, std::vector<std::int32_t>(width, -1));

  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t i = m - 1 - step;
    const auto& opts = stages[i];
    for (std::size_t c = 0; c < width; ++c) {
      double best_v = kNone;
      double best_t = 0.0;
      std::int32_t best_j = -1;
      for (std::size_t j = 0; j < opts.size(); ++j) {
        const std::int64_t w = weight[i][j];
        if (w > static_cast<std::int64_t>(c)) continue;
        const auto rest = c - static_cast<std::size_t>(w);
        if (value[rest] == kNone) continue;
        const double v = value[rest] + option_value(opts[j], objective);
        const double t = time[rest] + opts[j].runtime_s;
        bool better = best_j < 0 || v > best_v;
        if (!better && v == best_v) {
          better = t < best_t ||
                   (t == best_t && opts[j].vcpus < opts[best_j].vcpus);
        }
        if (better) {
          best_v = v;
          best_t = t;
          best_j = static_cast<std::int32_t>(j);
        }
      }
      next_value[c] = best_v;
      next_time[c] = best_t;
      choice[i][c] = best_j;
    }
    std::swap(value, next_value);
    std::swap(time, next_time);
  }

  if (choice[0][capacity] < 0) throw Infeasible(budget_s, min_total_time(stages));

  std::vector<ConfigOption> chosen;
  auto c = static_cast<std::size_t>(capacity);
  for (std::size_t i = 0; i < m; ++i) {
    const auto j = static_cast<std::size_t>(choice[i][c]);
    chosen.push_back(stages[i][j]);
    c -= static_cast<std::size_t>(weight[i][j]);
  }
  return make_plan(std::move(chosen));
}

AllocationPlan brute_force_allocate(std::span<const StageOptions> stages,
                                    double budget_s, Objective objective) {
  if (stages.empty()) throw AllocationError("allocation needs at least one stage");
  std::uint64_t combos = 1;
  for (const auto& opts : stages) {
    if (opts.empty()) throw EmptyOptions();
    combos *= opts.size();
    if (combos > kMaxBruteForceCombinations) {
      throw TooLarge(fmt::format(
          "more than {} combinations; brute force is a small-instance oracle",
          kMaxBruteForceCombinations));
    }
  }
  check_stages(stages, budget_s);

  const std::size_t m = stages.size();
  std::vector<std::size_t> odometer(m, 0);
  std::vector<ConfigOption> best;
  double best_v = 0.0, best_cost = 0.0, best_time = 0.0;
  std::vector<int> best_vcpus;

  for (std::uint64_t k = 0; k < combos; ++k) {
    double v = 0.0, cost = 0.0, t = 0.0;
    std::vector<int> vcpus(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& o = stages[i][odometer[i]];
      v += option_value(o, objective);
      cost += o.cost;
      t += o.runtime_s;
      vcpus[i] = o.vcpus;
    }
    if (t <= budget_s) {
      bool better = best.empty() || v > best_v;
      if (!better && v == best_v) {
        better = cost < best_cost ||
                 (cost == best_cost &&
                  (t < best_time || (t == best_time && vcpus < best_vcpus)));
      }
      if (better) {
        best.clear();
        for (std::size_t i = 0; i < m; ++i) best.push_back(stages[i][odometer[i]]);
        best_v = v;
        best_cost = cost;
        best_time = t;
        best_vcpus = std::move(vcpus);
      }
    }
    for (std::size_t i = m; i-- > 0;) {
      if (++odometer[i] < stages[i].size()) break;
      odometer[i] = 0;
    }
  }
  if (best.empty()) throw Infeasible(budget_s, min_total_time(stages));
  return make_plan(std::move(best));
}

}  // namespace edaflow
