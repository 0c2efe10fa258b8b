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

#include "edaflow/runtime_predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "edaflow/rng.hpp"

namespace edaflow {

namespace {

using Features = std::array<double, TrainedModel::kNumFeatures>;

constexpr const char* kFeatureNames[] = {
    "log_cell_count", "stage_floorplan", "stage_placement", "stage_cts",
    "stage_routing",  "stage_sta",       "vcpus"};

Features features_of(std::int64_t cells, StageKind stage, int vcpus) {
  Features f{};
  f[0] = std::log(static_cast<double>(cells));
  f[1 + stage_rank(stage)] = 1.0;
  f[6] = static_cast<double>(vcpus);
  return f;
}

double target_of(const RuntimeSample& s) {
  return std::log(s.runtime_s / static_cast<double>(s.cell_count));
}

// CART on squared error. Rows are addressed through `index`, which is
// reordered in place while partitioning.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Features>& x, const std::vector<double>& y,
              const ForestParams& params)
      : x_(x), y_(y), params_(params) {}

  TrainedModel::Tree build(std::vector<std::size_t> index) {
    tree_.clear();
    grow(index, 0, index.size(), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& index, std::size_t begin, std::size_t end,
           int depth) {
    const std::size_t n = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[index[i]];
    const int id = static_cast<int>(tree_.size());
    tree_.push_back({});
    tree_[id].value = sum / static_cast<double>(n);

    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
    if (depth >= params_.max_depth || n < 2 * min_leaf) return id;

    const double parent_score = sum * sum / static_cast<double>(n);
    double best_score = parent_score;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::size_t> order(index.begin() + begin, index.begin() + end);
    for (int f = 0; f < TrainedModel::kNumFeatures; ++f) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x_[a][f] < x_[b][f];
      });
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += y_[order[k - 1]];
        const double lo = x_[order[k - 1]][f];
        const double hi = x_[order[k]][f];
        if (!(lo < hi)) continue;
        if (k < min_leaf || n - k < min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(k) +
                             right_sum * right_sum / static_cast<double>(n - k);
        // Relative margin keeps rounding noise from creating splits.
        if (score > best_score + 1e-12 * std::abs(best_score)) {
          best_score = score;
          best_feature = f;
          best_threshold = lo + (hi - lo) / 2.0;
        }
      }
    }
    if (best_feature < 0) return id;

    auto mid = std::stable_partition(
        index.begin() + begin, index.begin() + end,
        [&](std::size_t r) { return x_[r][best_feature] <= best_threshold; });
    const auto split = static_cast<std::size_t>(mid - index.begin());
    const int left = grow(index, begin, split, depth + 1);
    const int right = grow(index, split, end, depth + 1);
    tree_[id].feature = best_feature;
    tree_[id].threshold = best_threshold;
    tree_[id].left = left;
    tree_[id].right = right;
    return id;
  }

  const std::vector<Features>& x_;
  const std::vector<double>& y_;
  const ForestParams& params_;
  TrainedModel::Tree tree_;
};

double eval_tree(const TrainedModel::Tree& tree, const Features& f) {
  int node = 0;
  while (tree[node].feature >= 0) {
    node = f[tree[node].feature] <= tree[node].threshold ? tree[node].left
                                                         : tree[node].right;
  }
  return tree[node].value;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  s.erase(s.find_last_not_of(ws) + 1);
  return s;
}

}  // namespace

void check_sample(const RuntimeSample& s) {
  if (s.cell_count < 1 || s.vcpus < 1 || !(s.runtime_s > 0.0) ||
      !std::isfinite(s.runtime_s)) {
    throw std::invalid_argument("runtime sample fields must be positive");
  }
  if (s.stage == StageKind::kFullFlow) {
    throw std::invalid_argument("runtime samples describe a single stage");
  }
}

std::vector<RuntimeSample> generate_synthetic_dataset(std::uint64_t seed,
                                                      std::size_t n,
                                                      const MockModel& model,
                                                      bool noise) {
  if (n < 1) throw std::invalid_argument("dataset size must be positive");
  Rng rng(seed);
  const double log_lo = std::log(kSyntheticMinCells);
  const double log_hi = std::log(kSyntheticMaxCells);
  std::vector<RuntimeSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    RuntimeSample s;
    s.stage = kFlowStages[rng.below(5)];
    const double cells = std::round(std::exp(rng.uniform(log_lo, log_hi)));
    s.cell_count = std::clamp(static_cast<std::int64_t>(cells),
                              static_cast<std::int64_t>(kSyntheticMinCells),
                              static_cast<std::int64_t>(kSyntheticMaxCells));
    s.vcpus = kSyntheticVcpus[rng.below(4)];
    // Always drawn so the noise-free variant sees the same designs.
    const double eps = rng.uniform(0.9, 1.1);
    s.runtime_s = model.runtime(s.stage, s.cell_count, s.vcpus) * (noise ? eps : 1.0);
    out.push_back(s);
  }
  return out;
}

std::vector<RuntimeSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "cell_count,stage,vcpus,runtime_s") {
    throw std::invalid_argument(
        "runtime CSV must start with header cell_count,stage,vcpus,runtime_s");
  }
  std::vector<RuntimeSample> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(trim(col));
    try {
      if (cols.size() != 4) throw std::invalid_argument("expected 4 columns");
      RuntimeSample s;
      std::size_t used = 0;
      s.cell_count = std::stoll(cols[0], &used);
      if (used != cols[0].size()) throw std::invalid_argument("bad cell_count");
      auto stage = parse_stage(cols[1]);
      if (!stage) throw std::invalid_argument("unknown stage " + cols[1]);
      s.stage = *stage;
      s.vcpus = std::stoi(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("bad vcpus");
      s.runtime_s = std::stod(cols[3], &used);
      if (used != cols[3].size()) throw std::invalid_argument("bad runtime_s");
      check_sample(s);
      out.push_back(s);
    } catch (const std::exception& e) {
      throw std::invalid_argument(
          fmt::format("runtime CSV line {}: {}", line_no, e.what()));
    }
  }
  return out;
}

std::vector<RuntimeSample> read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_samples_csv(in);
}

void write_samples_csv(std::ostream& out, std::span<const RuntimeSample> samples) {
  out << "cell_count,stage,vcpus,runtime_s\n";
  for (const auto& s : samples) {
    out << fmt::format("{},{},{},{}\n", s.cell_count, to_string(s.stage), s.vcpus,
                       s.runtime_s);
  }
}

TrainedModel train(std::span<const RuntimeSample> samples, std::uint64_t seed,
                   const ForestParams& params) {
  if (samples.size() < 50) {
    throw InsufficientData(fmt::format(
        "training needs at least 50 samples, got {}", samples.size()));
  }
  std::vector<int> vcpus;
  for (const auto& s : samples) {
    check_sample(s);
    if (std::find(vcpus.begin(), vcpus.end(), s.vcpus) == vcpus.end()) {
      vcpus.push_back(s.vcpus);
    }
  }
  if (vcpus.size() < 2) {
    throw InsufficientData("training needs samples for at least two vcpus values");
  }

  std::vector<Features> x;
  std::vector<double> y;
  for (const auto& s : samples) {
    x.push_back(features_of(s.cell_count, s.stage, s.vcpus));
    y.push_back(target_of(s));
  }

  Rng rng(seed);
  std::vector<std::size_t> perm(samples.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  const auto n_holdout = static_cast<std::size_t>(
      std::floor(params.holdout_fraction * static_cast<double>(samples.size())));
  const std::vector<std::size_t> holdout(perm.begin(), perm.begin() + n_holdout);
  const std::vector<std::size_t> train_rows(perm.begin() + n_holdout, perm.end());

  TrainedModel model;
  model.params_ = params;
  TreeBuilder builder(x, y, params);
  const auto n_boot = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::round(params.bootstrap_fraction *
                                             static_cast<double>(train_rows.size()))));
  for (int t = 0; t < params.n_trees; ++t) {
    std::vector<std::size_t> boot(n_boot);
    for (auto& r : boot) r = train_rows[rng.below(train_rows.size())];
    model.trees_.push_back(builder.build(std::move(boot)));
  }

  double ape = 0.0;
  for (std::size_t r : holdout) {
    const auto& s = samples[r];
    ape += std::abs(model.predict(s.cell_count, s.stage, s.vcpus) - s.runtime_s) /
           s.runtime_s;
  }
  model.summary_ = {samples.size(), train_rows.size(), holdout.size(),
                    holdout.empty() ? 0.0 : ape / static_cast<double>(holdout.size())};
  return model;
}

double TrainedModel::predict(std::int64_t cell_count, StageKind stage,
                             int vcpus) const {
  if (!trained()) throw UntrainedModel();
  if (stage == StageKind::kFullFlow) {
    throw std::invalid_argument("predict takes a single stage, not full_flow");
  }
  if (cell_count < 1 || vcpus < 1) {
    throw std::invalid_argument("predict needs positive cell_count and vcpus");
  }
  const Features f = features_of(cell_count, stage, vcpus);
  double sum = 0.0;
  for (const auto& tree : trees_) sum += eval_tree(tree, f);
  return static_cast<double>(cell_count) *
         std::exp(sum / static_cast<double>(trees_.size()));
}

Json TrainedModel::to_json() const {
  Json trees = Json::array();
  for (const auto& tree : trees_) {
    Json nodes = Json::array();
    for (const auto& n : tree) {
      if (n.feature < 0) {
        nodes.push_back({{"value", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"value", n.value}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"format", "edaflow-runtime-model"},
          {"version", 1},
          {"model_kind", kModelKind},
          {"features", kFeatureNames},
          {"target", "log(runtime_s / cell_count)"},
          {"params",
           {{"n_trees", params_.n_trees},
            {"max_depth", params_.max_depth},
            {"bootstrap_fraction", params_.bootstrap_fraction},
            {"min_samples_leaf", params_.min_samples_leaf},
            {"holdout_fraction", params_.holdout_fraction}}},
          {"training_summary",
           {{"n_samples", summary_.n_samples},
            {"n_train", summary_.n_train},
            {"n_holdout", summary_.n_holdout},
            {"mean_abs_pct_error_on_holdout",
             summary_.mean_abs_pct_error_on_holdout}}},
          {"trees", trees}};
}

TrainedModel TrainedModel::from_json(const Json& j) {
  if (j.at("format") != "edaflow-runtime-model" || j.at("version") != 1) {
    throw std::invalid_argument("not an edaflow runtime model (version 1)");
  }
  TrainedModel m;
  const Json& p = j.at("params");
  m.params_.n_trees = p.at("n_trees").get<int>();
  m.params_.max_depth = p.at("max_depth").get<int>();
  m.params_.bootstrap_fraction = p.at("bootstrap_fraction").get<double>();
  m.params_.min_samples_leaf = p.at("min_samples_leaf").get<int>();
  m.params_.holdout_fraction = p.at("holdout_fraction").get<double>();
  const Json& s = j.at("training_summary");
  m.summary_.n_samples = s.at("n_samples").get<std::size_t>();
  m.summary_.n_train = s.at("n_train").get<std::size_t>();
  m.summary_.n_holdout = s.at("n_holdout").get<std::size_t>();
  m.summary_.mean_abs_pct_error_on_holdout =
      s.at("mean_abs_pct_error_on_holdout").get<double>();
  for (const auto& nodes : j.at("trees")) {
    Tree tree;
    for (const auto& n : nodes) {
      Node node;
      node.value = n.at("value").get<double>();
      if (n.contains("feature")) {
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
      }
      tree.push_back(node);
    }
    const int size = static_cast<int>(tree.size());
    for (const auto& node : tree) {
      if (node.feature >= kNumFeatures ||
          (node.feature >= 0 && (node.left <= 0 || node.left >= size ||
                                 node.right <= 0 || node.right >= size))) {
        throw std::invalid_argument("runtime model has a malformed tree");
      }
    }
    if (tree.empty()) throw std::invalid_argument("runtime model has an empty tree");
    m.trees_.push_back(std::move(tree));
  }
  return m;
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return from_json(Json::parse(in));
}

bool TrainedModel::operator==(const TrainedModel& other) const {
  auto same_node = [](const Node& a, const Node& b) {
    return a.feature == b.feature && a.threshold == b.threshold &&
           a.left == b.left && a.right == b.right && a.value == b.value;
  };
  if (trees_.size() != other.trees_.size()) return false;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (!std::equal(trees_[t].begin(), trees_[t].end(), other.trees_[t].begin(),
                    other.trees_[t].end(), same_node)) {
      return false;
    }
  }
  return summary_.n_samples == other.summary_.n_samples &&
         summary_.mean_abs_pct_error_on_holdout ==
             other.summary_.mean_abs_pct_error_on_holdout;
}

MeasuredRuntimes::MeasuredRuntimes(std::span<const RuntimeSample> samples) {
  std::map<std::tuple<std::int64_t, StageKind, int>, std::pair<double, int>> acc;
  for (const auto& s : samples) {
    check_sample(s);
    auto& [sum, count] = acc[{s.cell_count, s.stage, s.vcpus}];
    sum += s.runtime_s;
    ++count;
  }
  for (const auto& [key, v] : acc) table_[key] = v.first / v.second;
}

double MeasuredRuntimes::runtime(std::int64_t cell_count, StageKind stage,
                                 int vcpus) const {
  auto it = table_.find({cell_count, stage, vcpus});
  if (it == table_.end()) {
    throw std::out_of_range(fmt::format(
        "no measured runtime for cells={} stage={} vcpus={}", cell_count,
        to_string(stage), vcpus));
  }
  return it->second;
}

}  // namespace edaflow
