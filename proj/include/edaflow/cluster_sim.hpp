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

#ifndef EDAFLOW_CLUSTER_SIM_HPP_
#define EDAFLOW_CLUSTER_SIM_HPP_

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "edaflow/flow_model.hpp"

namespace edaflow {

struct Node {
  std::string id;
  int vcpu_capacity = 1;
  int allocated = 0;

  bool operator==(const Node&) const = default;
};

struct ContainerRequest {
  std::string task_id;
  int vcpus = 1;
  double duration_s = 0.0;
  std::set<std::string> dependencies;

  bool operator==(const ContainerRequest&) const = default;
};

enum class EventKind { kSubmitted, kStarted, kFinished, kBlocked };

std::string_view to_string(EventKind kind);

struct ScheduleEvent {
  double time_s = 0.0;
  EventKind kind = EventKind::kSubmitted;
  std::string task_id;
  std::string node_id;  // set for kStarted

  bool operator==(const ScheduleEvent&) const = default;
};

struct Placement {
  std::string task_id;
  std::string node_id;
  double start_s = 0.0;
  double finish_s = 0.0;
  int vcpus = 0;
};

struct SimulationResult {
  std::vector<ScheduleEvent> events;
  std::vector<Placement> placements;  // ordered by start, then task id
  double makespan_s = 0.0;
};

class SchedulingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class UnschedulableRequest : public SchedulingError {
 public:
  using SchedulingError::SchedulingError;
};
class CyclicDependencies : public SchedulingError {
 public:
  using SchedulingError::SchedulingError;
};
class UnknownDependency : public SchedulingError {
 public:
  using SchedulingError::SchedulingError;
};

// Discrete-event run of `requests` on `nodes`. At every instant where a task
// finishes (and at t = 0) the ready tasks are taken in first-fit-decreasing
// order (vcpus descending, task id ascending) and each goes to the first node
// with room. Containers run to completion without migration. Events are
// ordered by time, then Submitted < Finished < Started < Blocked, then task
// id.
SimulationResult simulate(std::span<const Node> nodes,
                          std::span<const ContainerRequest> requests);

// makespan(single) / makespan(cluster).
double speedup(std::span<const Node> cluster, std::span<const Node> single,
               std::span<const ContainerRequest> requests);

// `count` nodes named node0..node{count-1} of `vcpus` each.
std::vector<Node> uniform_cluster(int count, int vcpus);
// "4x8" shorthand or a JSON file listing {id, vcpu_capacity}.
std::vector<Node> parse_cluster(std::string_view spec);
std::vector<Node> nodes_from_json(const Json& j);
Json to_json(std::span<const Node> nodes);

std::vector<ContainerRequest> requests_from_json(const Json& j);
Json to_json(std::span<const ContainerRequest> requests);

Json to_json(const ScheduleEvent& event);
Json to_json(const SimulationResult& result);
void write_events_jsonl(std::ostream& out, std::span<const ScheduleEvent> events);

// Submission front-end a real container platform would implement. Submits
// may come from several threads; collect() returns events ordered by
// (time, sequence).
class ClusterExecutor {
 public:
  virtual ~ClusterExecutor() = default;
  virtual void submit(ContainerRequest request) = 0;
  // True once every submitted request has finished.
  virtual bool poll() = 0;
  virtual SimulationResult collect() = 0;
};

// Runs submissions through simulate() on collect().
class SimulatedClusterExecutor : public ClusterExecutor {
 public:
  explicit SimulatedClusterExecutor(std::vector<Node> nodes)
      : nodes_(std::move(nodes)) {}

  void submit(ContainerRequest request) override;
  bool poll() override;
  SimulationResult collect() override;

 private:
  std::vector<Node> nodes_;
  std::mutex mu_;
  std::vector<ContainerRequest> pending_;
  std::optional<SimulationResult> last_;
};

}  // namespace edaflow

#endif  // EDAFLOW_CLUSTER_SIM_HPP_
