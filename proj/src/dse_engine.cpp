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

#include "edaflow/dse_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "edaflow/embedded_data.hpp"

namespace edaflow {

// Grants remediation write access to a space's internals.
class SpaceEditor {
 public:
  static std::vector<ParamDim>& dims(ParamSpace& s) { return s.dims_; }
  static ParamMap& defaults(ParamSpace& s) { return s.defaults_; }
};

namespace {

std::string describe_dim(const ParamDim& dim) {
  std::string range = std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, CategoricalValues>) {
          std::vector<std::string> v;
          for (const auto& s : k.values) v.push_back(format_scalar(s));
          return fmt::format("{{{}}}", fmt::join(v, ", "));
        } else {
          return fmt::format("[{}, {}]", k.lo, k.hi);
        }
      },
      dim.kind);
  return dim.fixed ? range + " fixed" : range;
}

std::string remedy_dim(const Remedy& r) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Abort>) {
          return "";
        } else {
          return x.dim;
        }
      },
      r);
}

std::string remedy_kind(const Remedy& r) {
  static constexpr const char* kNames[] = {"shrink_range", "reset_to_default",
                                           "clamp_to_bound", "abort"};
  return kNames[r.index()];
}

bool rule_matches(const FaultRule& rule, const std::string& code,
                  const std::string& message) {
  return (rule.fault_code == "*" || rule.fault_code == code) &&
         message.find(rule.match) != std::string::npos;
}

// Parses "legal range [a, b]" out of a fault message.
std::optional<std::pair<double, double>> legal_range_in(const std::string& msg) {
  static const std::regex re(
      R"(legal range \[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\])");
  std::smatch m;
  if (!std::regex_search(msg, m, re)) return std::nullopt;
  try {
    return std::make_pair(std::stod(m[1].str()), std::stod(m[2].str()));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double as_double(const Scalar& s) {
  auto d = scalar_as_double(s);
  if (!d) throw std::invalid_argument("expected a numeric parameter value");
  return *d;
}

void shrink(ParamDim& dim, const Scalar& def, double factor) {
  if (auto* c = std::get_if<ContinuousRange>(&dim.kind)) {
    const double width = factor * (c->hi - c->lo);
    const double center = as_double(def);
    double lo = center - width / 2.0;
    double hi = center + width / 2.0;
    if (lo < c->lo) {
      lo = c->lo;
      hi = c->lo + width;
    }
    if (hi > c->hi) {
      hi = c->hi;
      lo = c->hi - width;
    }
    c->lo = lo;
    c->hi = hi;
  } else if (auto* r = std::get_if<IntegerRange>(&dim.kind)) {
    const double width = factor * static_cast<double>(r->hi - r->lo);
    const double center = as_double(def);
    double lo = std::max(center - width / 2.0, static_cast<double>(r->lo));
    double hi = std::min(center + width / 2.0, static_cast<double>(r->hi));
    auto ilo = static_cast<std::int64_t>(std::ceil(lo));
    auto ihi = static_cast<std::int64_t>(std::floor(hi));
    const auto d = static_cast<std::int64_t>(center);
    if (ilo >= ihi) {
      if (d < r->hi) {
        ilo = d;
        ihi = d + 1;
      } else {
        ilo = d - 1;
        ihi = d;
      }
    }
    r->lo = ilo;
    r->hi = ihi;
  } else if (auto* cat = std::get_if<CategoricalValues>(&dim.kind)) {
    const auto n = cat->values.size();
    const auto keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::round(factor * static_cast<double>(n))));
    const auto at = static_cast<std::size_t>(
        std::find(cat->values.begin(), cat->values.end(), def) - cat->values.begin());
    std::size_t first = at >= keep / 2 ? at - keep / 2 : 0;
    first = std::min(first, n - keep);
    cat->values = std::vector<Scalar>(cat->values.begin() + first,
                                      cat->values.begin() + first + keep);
  }
}

void clamp_to(ParamDim& dim, Scalar& def, std::pair<double, double> legal) {
  if (auto* c = std::get_if<ContinuousRange>(&dim.kind)) {
    const double lo = std::max(c->lo, legal.first);
    const double hi = std::min(c->hi, legal.second);
    if (lo < hi) {
      c->lo = lo;
      c->hi = hi;
      def = std::clamp(as_double(def), lo, hi);
    }
  } else if (auto* r = std::get_if<IntegerRange>(&dim.kind)) {
    const auto lo = std::max(r->lo, static_cast<std::int64_t>(std::ceil(legal.first)));
    const auto hi = std::min(r->hi, static_cast<std::int64_t>(std::floor(legal.second)));
    if (lo < hi) {
      r->lo = lo;
      r->hi = hi;
      def = std::clamp(std::get<std::int64_t>(def), lo, hi);
    }
  }
}

Scalar clamp_into(const ParamDim& dim, const Scalar& v, const Scalar& fallback) {
  if (const auto* c = std::get_if<ContinuousRange>(&dim.kind)) {
    auto d = scalar_as_double(v);
    return std::clamp(d ? *d : as_double(fallback), c->lo, c->hi);
  }
  if (const auto* r = std::get_if<IntegerRange>(&dim.kind)) {
    auto d = scalar_as_double(v);
    const double x = d ? *d : as_double(fallback);
    return std::clamp(static_cast<std::int64_t>(std::llround(x)), r->lo, r->hi);
  }
  return dim_contains(dim, v) ? v : fallback;
}

const Trial* best_trial(std::span<const Trial> history) {
  const Trial* best = nullptr;
  for (const auto& t : history) {
    if (t.ok() && (best == nullptr || *t.objective < *best->objective)) best = &t;
  }
  return best;
}

Json dim_to_json(const ParamDim& d) {
  Json j = {{"name", d.name}};
  if (const auto* c = std::get_if<ContinuousRange>(&d.kind)) {
    j["kind"] = "continuous";
    j["lo"] = c->lo;
    j["hi"] = c->hi;
  } else if (const auto* r = std::get_if<IntegerRange>(&d.kind)) {
    j["kind"] = "integer";
    j["lo"] = r->lo;
    j["hi"] = r->hi;
  } else {
    Json values = Json::array();
    for (const auto& v : std::get<CategoricalValues>(d.kind).values) {
      values.push_back(scalar_to_json(v));
    }
    j["kind"] = "categorical";
    j["values"] = values;
  }
  if (d.fixed) j["fixed"] = true;
  return j;
}

ParamDim dim_from_json(const Json& j) {
  ParamDim d;
  d.name = j.at("name").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    d.kind = ContinuousRange{j.at("lo").get<double>(), j.at("hi").get<double>()};
  } else if (kind == "integer") {
    d.kind = IntegerRange{j.at("lo").get<std::int64_t>(), j.at("hi").get<std::int64_t>()};
  } else if (kind == "categorical") {
    CategoricalValues c;
    for (const auto& v : j.at("values")) {
      auto s = scalar_from_json(v);
      if (!s) throw std::invalid_argument("categorical values must be scalars");
      c.values.push_back(*s);
    }
    d.kind = std::move(c);
  } else {
    throw std::invalid_argument("unknown dimension kind '" + kind + "'");
  }
  d.fixed = j.value("fixed", false);
  return d;
}

Json params_to_json(const ParamMap& p) {
  Json j = Json::object();
  for (const auto& [k, v] : p) j[k] = scalar_to_json(v);
  return j;
}

}  // namespace

bool dim_contains(const ParamDim& dim, const Scalar& value) {
  if (const auto* c = std::get_if<ContinuousRange>(&dim.kind)) {
    auto d = scalar_as_double(value);
    return d && *d >= c->lo && *d <= c->hi;
  }
  if (const auto* r = std::get_if<IntegerRange>(&dim.kind)) {
    const auto* i = std::get_if<std::int64_t>(&value);
    return i != nullptr && *i >= r->lo && *i <= r->hi;
  }
  const auto& values = std::get<CategoricalValues>(dim.kind).values;
  return std::find(values.begin(), values.end(), value) != values.end();
}

ParamSpace::ParamSpace(std::vector<ParamDim> dims, ParamMap defaults)
    : dims_(std::move(dims)), defaults_(std::move(defaults)) {
  std::set<std::string> names;
  for (const auto& d : dims_) {
    if (d.name.empty() || !names.insert(d.name).second) {
      throw std::invalid_argument("dimension names must be unique and non-empty");
    }
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, CategoricalValues>) {
            if (k.values.empty()) {
              throw std::invalid_argument(d.name + ": no categorical values");
            }
          } else {
            if (!(k.lo < k.hi)) {
              throw std::invalid_argument(d.name + ": lo must be below hi");
            }
          }
        },
        d.kind);
    auto it = defaults_.find(d.name);
    if (it == defaults_.end()) {
      throw std::invalid_argument(d.name + ": missing default");
    }
    if (!dim_contains(d, it->second)) {
      throw std::invalid_argument(fmt::format("{}: default {} outside {}", d.name,
                                              format_scalar(it->second),
                                              describe_dim(d)));
    }
  }
}

const ParamDim* ParamSpace::find(const std::string& name) const {
  for (const auto& d : dims_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

bool ParamSpace::contains(const ParamMap& params) const {
  for (const auto& d : dims_) {
    auto it = params.find(d.name);
    if (it == params.end() || !dim_contains(d, it->second)) return false;
    if (d.fixed && it->second != defaults_.at(d.name)) return false;
  }
  return true;
}

ParamSpace ParamSpace::from_json(const Json& j) {
  std::vector<ParamDim> dims;
  for (const auto& d : j.at("dims")) dims.push_back(dim_from_json(d));
  ParamMap defaults;
  if (j.contains("defaults")) {
    for (const auto& [k, v] : j.at("defaults").items()) {
      auto s = scalar_from_json(v);
      if (!s) throw std::invalid_argument("default for " + k + " is not a scalar");
      defaults.emplace(k, *s);
    }
  }
  return ParamSpace(std::move(dims), std::move(defaults));
}

Json ParamSpace::to_json() const {
  Json dims = Json::array();
  for (const auto& d : dims_) dims.push_back(dim_to_json(d));
  return {{"dims", dims}, {"defaults", params_to_json(defaults_)}};
}

std::vector<FaultRule> fault_rules_from_json(const Json& j) {
  std::vector<FaultRule> rules;
  for (const auto& r : j) {
    FaultRule rule;
    rule.fault_code = r.at("fault_code").get<std::string>();
    rule.match = r.value("match", "");
    const Json& remedy = r.at("remedy");
    const auto kind = remedy.at("kind").get<std::string>();
    if (kind == "abort") {
      rule.remedy = Abort{};
    } else {
      const auto dim = remedy.at("dim").get<std::string>();
      if (kind == "shrink_range") {
        const double factor = remedy.at("factor").get<double>();
        if (!(factor > 0.0 && factor <= 1.0)) {
          throw std::invalid_argument("shrink_range factor must lie in (0, 1]");
        }
        rule.remedy = ShrinkRange{dim, factor};
      } else if (kind == "reset_to_default") {
        rule.remedy = ResetToDefault{dim};
      } else if (kind == "clamp_to_bound") {
        rule.remedy = ClampToBound{dim};
      } else {
        throw std::invalid_argument("unknown remedy kind '" + kind + "'");
      }
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

Json to_json(const FaultRule& rule) {
  Json remedy = {{"kind", remedy_kind(rule.remedy)}};
  if (!std::holds_alternative<Abort>(rule.remedy)) remedy["dim"] = remedy_dim(rule.remedy);
  if (const auto* s = std::get_if<ShrinkRange>(&rule.remedy)) remedy["factor"] = s->factor;
  return {{"fault_code", rule.fault_code}, {"match", rule.match}, {"remedy", remedy}};
}

std::vector<FaultRule> load_fault_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return fault_rules_from_json(Json::parse(in));
}

std::vector<FaultRule> default_fault_rules() {
  return fault_rules_from_json(Json::parse(embedded::kFaultListJson));
}

Json to_json(const RemediationRecord& r) {
  return {{"trial_index", r.trial_index}, {"fault_code", r.fault_code},
          {"message", r.message},         {"rule_index", r.rule_index},
          {"remedy", r.remedy},           {"dim", r.dim},
          {"before", r.before},           {"after", r.after}};
}

RemediationResult remediate_space(const ParamSpace& space,
                                  const std::string& fault_code,
                                  const std::string& message,
                                  std::span<const FaultRule> rules) {
  RemediationResult out{space, {}, false};
  out.record.fault_code = fault_code;
  out.record.message = message;
  out.record.remedy = "no_rule_matched";

  for (std::size_t i = 0; i < rules.size(); ++i) {
    const FaultRule& rule = rules[i];
    if (!rule_matches(rule, fault_code, message)) continue;
    const std::string dim_name = remedy_dim(rule.remedy);
    // Rules about dimensions this space does not explore do not apply.
    if (!std::holds_alternative<Abort>(rule.remedy) && space.find(dim_name) == nullptr) {
      continue;
    }
    out.record.rule_index = static_cast<int>(i);
    out.record.remedy = remedy_kind(rule.remedy);
    out.record.dim = dim_name;
    if (std::holds_alternative<Abort>(rule.remedy)) {
      out.abort = true;
      return out;
    }
    auto& dims = SpaceEditor::dims(out.space);
    auto& defaults = SpaceEditor::defaults(out.space);
    auto& dim = *std::find_if(dims.begin(), dims.end(),
                              [&](const ParamDim& d) { return d.name == dim_name; });
    Scalar& def = defaults.at(dim_name);
    out.record.before = describe_dim(dim);
    if (const auto* s = std::get_if<ShrinkRange>(&rule.remedy)) {
      shrink(dim, def, s->factor);
    } else if (std::holds_alternative<ResetToDefault>(rule.remedy)) {
      dim.fixed = true;
    } else if (auto legal = legal_range_in(message)) {
      clamp_to(dim, def, *legal);
    }
    out.record.after = describe_dim(dim);
    return out;
  }
  return out;
}

Json to_json(const Trial& t) {
  Json j = {{"index", t.index}, {"params", params_to_json(t.params)}};
  j["metrics"] = t.metrics ? to_json(*t.metrics) : Json(nullptr);
  j["objective"] = t.objective ? Json(*t.objective) : Json(nullptr);
  if (!t.ok()) {
    j["fault_code"] = t.fault_code;
    j["message"] = t.message;
  }
  return j;
}

std::string_view to_string(SearchStrategy s) {
  return s == SearchStrategy::kRandom ? "random" : "anneal";
}

std::optional<SearchStrategy> parse_strategy(std::string_view name) {
  if (name == "random") return SearchStrategy::kRandom;
  if (name == "anneal") return SearchStrategy::kAnneal;
  return std::nullopt;
}

ParamMap RandomProposer::propose(const ParamSpace& space, std::span<const Trial>,
                                 int, Rng& rng) const {
  ParamMap out;
  for (const auto& d : space.dims()) {
    if (d.fixed) {
      out[d.name] = space.defaults().at(d.name);
    } else if (const auto* c = std::get_if<ContinuousRange>(&d.kind)) {
      out[d.name] = rng.uniform(c->lo, c->hi);
    } else if (const auto* r = std::get_if<IntegerRange>(&d.kind)) {
      out[d.name] = rng.uniform_int(r->lo, r->hi);
    } else {
      const auto& values = std::get<CategoricalValues>(d.kind).values;
      out[d.name] = values[rng.below(values.size())];
    }
  }
  return out;
}

double AnnealProposer::temperature(int trial_index) {
  return std::pow(0.95, trial_index);
}

ParamMap AnnealProposer::propose(const ParamSpace& space,
                                 std::span<const Trial> history, int trial_index,
                                 Rng& rng) const {
  const Trial* best = best_trial(history);
  const ParamMap& base = best != nullptr ? best->params : space.defaults();
  const double temp = temperature(trial_index);
  ParamMap out;
  for (const auto& d : space.dims()) {
    const Scalar& def = space.defaults().at(d.name);
    auto it = base.find(d.name);
    const Scalar start = clamp_into(d, it != base.end() ? it->second : def, def);
    if (d.fixed) {
      out[d.name] = def;
    } else if (const auto* c = std::get_if<ContinuousRange>(&d.kind)) {
      const double sigma = 0.3 * (c->hi - c->lo) * temp;
      out[d.name] = std::clamp(as_double(start) + sigma * rng.normal(), c->lo, c->hi);
    } else if (const auto* r = std::get_if<IntegerRange>(&d.kind)) {
      const double sigma = 0.3 * static_cast<double>(r->hi - r->lo) * temp;
      const double x = as_double(start) + sigma * rng.normal();
      out[d.name] = std::clamp(static_cast<std::int64_t>(std::llround(x)), r->lo, r->hi);
    } else {
      const auto& values = std::get<CategoricalValues>(d.kind).values;
      out[d.name] = rng.uniform() < temp ? values[rng.below(values.size())] : start;
    }
  }
  return out;
}

std::unique_ptr<Proposer> make_proposer(SearchStrategy strategy) {
  if (strategy == SearchStrategy::kAnneal) return std::make_unique<AnnealProposer>();
  return std::make_unique<RandomProposer>();
}

ParamMap propose(SearchStrategy strategy, const ParamSpace& space,
                 std::span<const Trial> history, int trial_index, Rng& rng) {
  return make_proposer(strategy)->propose(space, history, trial_index, rng);
}

std::vector<double> DseReport::best_so_far() const {
  std::vector<double> out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : trials) {
    if (t.ok()) best = std::min(best, *t.objective);
    out.push_back(best);
  }
  return out;
}

Json to_json(const DseReport& r) {
  Json trials = Json::array();
  for (const auto& t : r.trials) trials.push_back(to_json(t));
  Json remediations = Json::array();
  for (const auto& rec : r.remediations) remediations.push_back(to_json(rec));
  return {{"best_params", params_to_json(r.best_params)},
          {"best_metrics", r.best_metrics ? to_json(*r.best_metrics) : Json(nullptr)},
          {"best_objective",
           r.best_metrics ? Json(ppa_product(*r.best_metrics)) : Json(nullptr)},
          {"best_trial", r.best_trial},
          {"baseline_trial", r.baseline_trial},
          {"improvement", r.improvement},
          {"improvement_percent", round_percent(r.improvement)},
          {"trials", trials},
          {"remediations_applied", remediations},
          {"final_space", r.final_space.to_json()}};
}

void write_trace_csv(std::ostream& out, const DseReport& report) {
  out << "trial,objective,best_so_far\n";
  const auto best = report.best_so_far();
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    const auto& t = report.trials[i];
    out << t.index << ',' << (t.ok() ? fmt::format("{}", *t.objective) : "") << ','
        << (std::isfinite(best[i]) ? fmt::format("{}", best[i]) : "") << '\n';
  }
}

AllTrialsFailed::AllTrialsFailed(DseReport partial)
    : DseError(fmt::format("all {} trials failed", partial.trials.size())),
      partial_(std::move(partial)) {}

UnremediableFault::UnremediableFault(std::string reason, DseReport partial)
    : DseError(std::move(reason)), partial_(std::move(partial)) {}

DseReport run_dse(const ParamSpace& space, const Evaluator& evaluator,
                  const DseConfig& config) {
  return run_dse(space, evaluator, config, *make_proposer(config.strategy));
}

DseReport run_dse(const ParamSpace& space, const Evaluator& evaluator,
                  const DseConfig& config, const Proposer& proposer) {
  if (config.budget < 1) throw std::invalid_argument("DSE budget must be at least 1");
  Rng rng(config.seed);
  DseReport report{{}, std::nullopt, -1, -1, 0.0, {}, {}, space};
  ParamSpace active = space;
  std::map<std::pair<std::string, std::string>, int> recurrences;

  for (int index = 0; index < config.budget; ++index) {
    ParamMap params = index == 0 ? active.defaults()
                                 : proposer.propose(active, report.trials, index, rng);
    Evaluation eval = evaluator(params);
    Trial trial{index, std::move(params), eval.metrics, std::nullopt, eval.fault_code,
                eval.message};
    if (eval.ok()) {
      trial.objective = ppa_product(*eval.metrics);
      trial.fault_code.clear();
      trial.message.clear();
    }
    report.trials.push_back(std::move(trial));
    if (eval.ok()) continue;

    RemediationResult fix =
        remediate_space(active, eval.fault_code, eval.message, config.faults);
    fix.record.trial_index = index;
    if (fix.abort) {
      report.remediations.push_back(fix.record);
      report.final_space = active;
      throw UnremediableFault(
          fmt::format("fault {} at trial {} hit an abort rule: {}", eval.fault_code,
                      index, eval.message),
          std::move(report));
    }
    if (fix.record.matched()) {
      const int seen = ++recurrences[{eval.fault_code, fix.record.dim}];
      if (seen > kMaxFaultRecurrence) {
        report.final_space = active;
        throw UnremediableFault(
            fmt::format("fault {} on '{}' recurred {} times", eval.fault_code,
                        fix.record.dim, seen),
            std::move(report));
      }
    }
    report.remediations.push_back(fix.record);
    active = std::move(fix.space);
  }
  report.final_space = active;

  for (const auto& t : report.trials) {
    if (!t.ok()) continue;
    if (report.baseline_trial < 0) report.baseline_trial = t.index;
    if (report.best_trial < 0 || *t.objective < *report.trials[report.best_trial].objective) {
      report.best_trial = t.index;
    }
  }
  if (report.best_trial < 0) throw AllTrialsFailed(std::move(report));
  const Trial& best = report.trials[report.best_trial];
  report.best_params = best.params;
  report.best_metrics = best.metrics;
  report.improvement = ppa_improvement(*report.trials[report.baseline_trial].metrics,
                                       *best.metrics);
  return report;
}

ParamSpace default_param_space(const JobSpec& job, const TemplateStore& templates) {
  const Json spec = Json::parse(embedded::kDefaultSpaceJson);
  const ParamMap& tool_defaults = templates.defaults(job.tool);
  std::vector<ParamDim> dims;
  ParamMap defaults;
  for (const auto& d : spec.at("dims")) {
    ParamDim dim = dim_from_json(d);
    std::optional<double> value;
    if (dim.name == "core_utilization") value = job.options.core_utilization;
    if (dim.name == "placement_density") value = job.options.placement_density;
    if (!value) {
      auto it = tool_defaults.find(dim.name);
      if (it != tool_defaults.end()) value = scalar_as_double(it->second);
    }
    auto& range = std::get<ContinuousRange>(dim.kind);
    if (!value) value = (range.lo + range.hi) / 2.0;
    range.lo = std::min(range.lo, *value);
    range.hi = std::max(range.hi, *value);
    defaults[dim.name] = *value;
    dims.push_back(std::move(dim));
  }
  return ParamSpace(std::move(dims), std::move(defaults));
}

Evaluator make_flow_evaluator(const ToolBackend& backend, const TemplateStore& templates,
                              const JobSpec& job, const MachineConfig& machine) {
  return [&backend, &templates, job, machine](const ParamMap& params) {
    FlowOutcome flow = run_flow(backend, templates, job, params, machine);
    Evaluation e;
    e.stages = std::move(flow.stages);
    if (flow.outcome.success && flow.metrics) {
      e.metrics = flow.metrics;
    } else {
      e.fault_code = flow.outcome.fault_code;
      e.message = flow.outcome.message;
    }
    return e;
  };
}

}  // namespace edaflow
