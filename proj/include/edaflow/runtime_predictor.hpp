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

#ifndef EDAFLOW_RUNTIME_PREDICTOR_HPP_
#define EDAFLOW_RUNTIME_PREDICTOR_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "edaflow/eda_adapter.hpp"
#include "edaflow/flow_model.hpp"

namespace edaflow {

// One measured (or synthesized) stage execution.
struct RuntimeSample {
  std::int64_t cell_count = 1;
  StageKind stage = StageKind::kPlacement;
  int vcpus = 1;
  double runtime_s = 1.0;

  bool operator==(const RuntimeSample&) const = default;
};

// Throws std::invalid_argument when a field is non-positive or the stage is
// FullFlow.
void check_sample(const RuntimeSample& sample);

inline constexpr int kSyntheticVcpus[] = {1, 2, 4, 8};
inline constexpr double kSyntheticMinCells = 500.0;
inline constexpr double kSyntheticMaxCells = 200000.0;

// Samples of the mock runtime model: stage uniform over the five flow stages,
// cell count log-uniform in [500, 200000], vcpus uniform over {1, 2, 4, 8}
// and, unless `noise` is false, a multiplicative factor uniform in [0.9, 1.1].
std::vector<RuntimeSample> generate_synthetic_dataset(
    std::uint64_t seed, std::size_t n, const MockModel& model = MockModel::builtin(),
    bool noise = true);

// CSV with header `cell_count,stage,vcpus,runtime_s`.
std::vector<RuntimeSample> read_samples_csv(std::istream& in);
std::vector<RuntimeSample> read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(std::ostream& out, std::span<const RuntimeSample> samples);

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UntrainedModel : public std::runtime_error {
 public:
  UntrainedModel() : std::runtime_error("runtime model has not been trained") {}
};

struct ForestParams {
  int n_trees = 50;
  int max_depth = 8;
  double bootstrap_fraction = 1.0;
  int min_samples_leaf = 1;
  double holdout_fraction = 0.2;
};

struct TrainingSummary {
  std::size_t n_samples = 0;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  double mean_abs_pct_error_on_holdout = 0.0;
};

// Bagged regression trees over (log cells, stage one-hot, vcpus). Trees fit
// log(runtime / cells); predictions average tree outputs and scale back by
// the cell count.
class TrainedModel {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using Tree = std::vector<Node>;

  static constexpr int kNumFeatures = 7;
  static constexpr const char* kModelKind = "tree-ensemble";

  TrainedModel() = default;

  bool trained() const { return !trees_.empty(); }
  const TrainingSummary& summary() const { return summary_; }
  const ForestParams& params() const { return params_; }
  std::size_t tree_count() const { return trees_.size(); }

  // Throws UntrainedModel, or std::invalid_argument for FullFlow or
  // non-positive inputs.
  double predict(std::int64_t cell_count, StageKind stage, int vcpus) const;

  Json to_json() const;
  static TrainedModel from_json(const Json& j);
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(const std::filesystem::path& path);

  bool operator==(const TrainedModel& other) const;

 private:
  friend TrainedModel train(std::span<const RuntimeSample>, std::uint64_t,
                            const ForestParams&);

  std::vector<Tree> trees_;
  ForestParams params_;
  TrainingSummary summary_;
};

// Seeded 80/20 holdout split, then the forest is fit on the training part.
// Throws InsufficientData below 50 samples or with fewer than two distinct
// vcpus values.
TrainedModel train(std::span<const RuntimeSample> samples, std::uint64_t seed,
                   const ForestParams& params = {});

inline double predict(const TrainedModel& model, std::int64_t cell_count,
                      StageKind stage, int vcpus) {
  return model.predict(cell_count, stage, vcpus);
}

// Where planners obtain stage runtimes.
class RuntimeSource {
 public:
  virtual ~RuntimeSource() = default;
  virtual double runtime(std::int64_t cell_count, StageKind stage,
                         int vcpus) const = 0;
  virtual std::string describe() const = 0;
};

class ModelRuntimeSource : public RuntimeSource {
 public:
  explicit ModelRuntimeSource(TrainedModel model) : model_(std::move(model)) {}
  double runtime(std::int64_t cell_count, StageKind stage,
                 int vcpus) const override {
    return model_.predict(cell_count, stage, vcpus);
  }
  std::string describe() const override { return "model"; }
  const TrainedModel& model() const { return model_; }

 private:
  TrainedModel model_;
};

// Exact lookup in measured samples; duplicates are averaged. Missing
// (cells, stage, vcpus) keys throw std::out_of_range.
class MeasuredRuntimes : public RuntimeSource {
 public:
  explicit MeasuredRuntimes(std::span<const RuntimeSample> samples);
  double runtime(std::int64_t cell_count, StageKind stage,
                 int vcpus) const override;
  std::string describe() const override { return "measured"; }

 private:
  std::map<std::tuple<std::int64_t, StageKind, int>, double> table_;
};

}  // namespace edaflow

#endif  // EDAFLOW_RUNTIME_PREDICTOR_HPP_
