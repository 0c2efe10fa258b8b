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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "edaflow/cluster_sim.hpp"
#include "edaflow/rng.hpp"
#include "test_support.hpp"

namespace edaflow {
namespace {

std::vector<ContainerRequest> uniform_tasks(int n, int vcpus, double duration) {
  std::vector<ContainerRequest> out;
  for (int i = 0; i < n; ++i) out.push_back({"t" + std::to_string(i), vcpus, duration, {}});
  return out;
}

std::vector<ContainerRequest> random_dag(Rng& rng, int max_vcpus) {
  const int n = static_cast<int>(rng.uniform_int(1, 30));
  std::vector<ContainerRequest> out;
  for (int i = 0; i < n; ++i) {
    ContainerRequest r{"task" + std::to_string(i), static_cast<int>(rng.uniform_int(1, max_vcpus)),
                       static_cast<double>(rng.uniform_int(1, 500)), {}};
    for (int j = 0; j < i; ++j) {
      if (rng.uniform() < 0.15) r.dependencies.insert(out[j].task_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Node> random_cluster(Rng& rng, int* max_cap) {
  std::vector<Node> nodes;
  const int k = static_cast<int>(rng.uniform_int(1, 5));
  *max_cap = 0;
  for (int i = 0; i < k; ++i) {
    const int cap = static_cast<int>(rng.uniform_int(2, 16));
    *max_cap = std::max(*max_cap, cap);
    nodes.push_back({"n" + std::to_string(i), cap, 0});
  }
  return nodes;
}

double critical_path(const std::vector<ContainerRequest>& reqs) {
  // random_dag only points backwards, so list order is topological.
  std::map<std::string, double> finish;
  double longest = 0.0;
  for (const auto& r : reqs) {
    double start = 0.0;
    for (const auto& d : r.dependencies) start = std::max(start, finish.at(d));
    finish[r.task_id] = start + r.duration_s;
    longest = std::max(longest, finish[r.task_id]);
  }
  return longest;
}

struct Replay {
  std::map<std::string, const Placement*> by_task;
  std::vector<double> instants;
};

Replay replay(const SimulationResult& result) {
  Replay r;
  for (const auto& p : result.placements) {
    r.by_task[p.task_id] = &p;
    r.instants.push_back(p.start_s);
  }
  std::sort(r.instants.begin(), r.instants.end());
  r.instants.erase(std::unique(r.instants.begin(), r.instants.end()), r.instants.end());
  return r;
}

std::map<std::string, int> usage_at(const SimulationResult& result, double t) {
  std::map<std::string, int> used;
  for (const auto& p : result.placements) {
    if (p.start_s <= t && t < p.finish_s) used[p.node_id] += p.vcpus;
  }
  return used;
}

TEST(Simulate, EightUniformTasksOnFourNodesRunTogether) {
  const auto tasks = uniform_tasks(8, 4, 100.0);
  const auto cluster = uniform_cluster(4, 8);
  EXPECT_EQ(simulate(cluster, tasks).makespan_s, 100.0);
  EXPECT_EQ(simulate(uniform_cluster(1, 8), tasks).makespan_s, 400.0);
  EXPECT_EQ(speedup(cluster, uniform_cluster(1, 8), tasks), 4.0);
}

TEST(Simulate, FixtureFileMatchesTheInlineTasks) {
  std::ifstream in(testing::fixture("eight_uniform.json"));
  const auto tasks = requests_from_json(Json::parse(in));
  EXPECT_EQ(tasks, uniform_tasks(8, 4, 100.0));
}

TEST(Simulate, ChainTakesTheSumOfDurations) {
  const std::vector<ContainerRequest> chain{
      {"a", 2, 10.0, {}}, {"b", 2, 20.0, {"a"}}, {"c", 2, 30.0, {"b"}}};
  for (int k : {1, 2, 8}) {
    EXPECT_EQ(simulate(uniform_cluster(k, 8), chain).makespan_s, 60.0);
  }
  EXPECT_EQ(speedup(uniform_cluster(4, 8), uniform_cluster(1, 8), chain), 1.0);
}

TEST(Simulate, SingleTaskHasUnitSpeedup) {
  EXPECT_EQ(speedup(uniform_cluster(4, 8), uniform_cluster(1, 8), uniform_tasks(1, 8, 7.0)), 1.0);
}

TEST(Speedup, UniformTasksFollowSchedulingArithmetic) {
  for (int k = 1; k <= 6; ++k) {
    for (int n = k; n <= 20; ++n) {
      const auto tasks = uniform_tasks(n, 8, 50.0);
      const double s = speedup(uniform_cluster(k, 8), uniform_cluster(1, 8), tasks);
      EXPECT_LE(s, std::min(k, n)) << k << " " << n;
      EXPECT_EQ(s, static_cast<double>(n) / ((n + k - 1) / k)) << k << " " << n;
      if (n % k == 0) {
        EXPECT_EQ(s, static_cast<double>(k));
      }
    }
  }
}

TEST(Simulate, FirstFitDecreasingPlacement) {
  const std::vector<Node> nodes{{"a", 8, 0}, {"b", 8, 0}};
  const std::vector<ContainerRequest> reqs{
      {"small", 2, 10.0, {}}, {"big", 6, 10.0, {}}, {"mid", 4, 10.0, {}}};
  const auto r = simulate(nodes, reqs);
  std::map<std::string, std::string> where;
  for (const auto& p : r.placements) where[p.task_id] = p.node_id;
  // big -> a (2 left), mid -> b (4 left), small -> a.
  EXPECT_EQ(where["big"], "a");
  EXPECT_EQ(where["mid"], "b");
  EXPECT_EQ(where["small"], "a");
  EXPECT_EQ(r.makespan_s, 10.0);
}

TEST(Simulate, BlockedTasksWaitForCapacity) {
  const auto r = simulate(uniform_cluster(1, 8), uniform_tasks(3, 6, 5.0));
  EXPECT_EQ(r.makespan_s, 15.0);
  const auto blocked = std::count_if(r.events.begin(), r.events.end(), [](const ScheduleEvent& e) {
    return e.kind == EventKind::kBlocked;
  });
  EXPECT_EQ(blocked, 2);
}

TEST(Simulate, PreallocatedCapacityIsRespected) {
  const std::vector<Node> nodes{{"a", 8, 6}};
  EXPECT_THROW(simulate(nodes, uniform_tasks(1, 4, 1.0)), UnschedulableRequest);
  EXPECT_EQ(simulate(nodes, uniform_tasks(2, 2, 1.0)).makespan_s, 2.0);
}

TEST(Simulate, Errors) {
  EXPECT_THROW(simulate(uniform_cluster(2, 4), uniform_tasks(1, 5, 1.0)), UnschedulableRequest);
  const std::vector<ContainerRequest> cycle{{"a", 1, 1.0, {"b"}}, {"b", 1, 1.0, {"a"}}};
  EXPECT_THROW(simulate(uniform_cluster(1, 4), cycle), CyclicDependencies);
  const std::vector<ContainerRequest> self{{"a", 1, 1.0, {"a"}}};
  EXPECT_THROW(simulate(uniform_cluster(1, 4), self), CyclicDependencies);
  const std::vector<ContainerRequest> dangling{{"a", 1, 1.0, {"zz"}}};
  EXPECT_THROW(simulate(uniform_cluster(1, 4), dangling), UnknownDependency);
  const std::vector<ContainerRequest> dup{{"a", 1, 1.0, {}}, {"a", 1, 2.0, {}}};
  EXPECT_THROW(simulate(uniform_cluster(1, 4), dup), SchedulingError);
  EXPECT_THROW(simulate(std::vector<Node>{}, uniform_tasks(1, 1, 1.0)), SchedulingError);
  EXPECT_THROW(simulate(uniform_cluster(1, 4), uniform_tasks(1, 1, 0.0)), SchedulingError);
}

TEST(Simulate, EmptyRequestListHasZeroMakespan) {
  EXPECT_EQ(simulate(uniform_cluster(1, 4), std::vector<ContainerRequest>{}).makespan_s, 0.0);
}

TEST(Simulate, RandomDagsRespectCapacityOrderingAndLowerBounds) {
  Rng rng(2024);
  for (int n = 0; n < 100; ++n) {
    int max_cap = 0;
    const auto nodes = random_cluster(rng, &max_cap);
    const auto reqs = random_dag(rng, max_cap);
    const auto result = simulate(nodes, reqs);
    const auto rp = replay(result);
    ASSERT_EQ(rp.by_task.size(), reqs.size());

    double work = 0.0;
    int capacity = 0;
    for (const auto& r : reqs) work += r.vcpus * r.duration_s;
    for (const auto& node : nodes) capacity += node.vcpu_capacity;
    EXPECT_GE(result.makespan_s, critical_path(reqs) - 1e-9) << n;
    EXPECT_GE(result.makespan_s, work / capacity - 1e-9) << n;

    std::map<std::string, int> cap;
    for (const auto& node : nodes) cap[node.id] = node.vcpu_capacity;
    for (double t : rp.instants) {
      const auto used = usage_at(result, t);
      for (const auto& [id, u] : used) EXPECT_LE(u, cap[id]) << n << " t=" << t;
      // Work conservation: a ready, unstarted task cannot fit any node.
      for (const auto& r : reqs) {
        double ready = 0.0;
        for (const auto& d : r.dependencies) ready = std::max(ready, rp.by_task.at(d)->finish_s);
        const Placement& p = *rp.by_task.at(r.task_id);
        if (ready <= t && t < p.start_s) {
          for (const auto& node : nodes) {
            const auto it = used.find(node.id);
            EXPECT_LT(node.vcpu_capacity - (it == used.end() ? 0 : it->second), r.vcpus)
                << n << " " << r.task_id << " idles at t=" << t;
          }
        }
      }
    }

    for (const auto& r : reqs) {
      const Placement& p = *rp.by_task.at(r.task_id);
      EXPECT_EQ(p.finish_s - p.start_s, r.duration_s);
      for (const auto& d : r.dependencies) EXPECT_GE(p.start_s, rp.by_task.at(d)->finish_s);
    }
  }
}

TEST(Simulate, EventOrderPerTask) {
  Rng rng(77);
  int max_cap = 0;
  const auto nodes = random_cluster(rng, &max_cap);
  const auto reqs = random_dag(rng, max_cap);
  const auto result = simulate(nodes, reqs);
  EXPECT_TRUE(std::is_sorted(result.events.begin(), result.events.end(),
                             [](const ScheduleEvent& a, const ScheduleEvent& b) {
                               return a.time_s < b.time_s;
                             }));
  std::map<std::string, std::vector<std::pair<EventKind, double>>> per_task;
  for (const auto& e : result.events) per_task[e.task_id].push_back({e.kind, e.time_s});
  for (const auto& [id, evs] : per_task) {
    double submitted = -1, started = -1, finished = -1;
    for (const auto& [kind, t] : evs) {
      if (kind == EventKind::kSubmitted) submitted = t;
      if (kind == EventKind::kStarted) started = t;
      if (kind == EventKind::kFinished) finished = t;
    }
    EXPECT_GE(submitted, 0.0) << id;
    EXPECT_LE(submitted, started) << id;
    EXPECT_LE(started, finished) << id;
  }
}

TEST(Simulate, Deterministic) {
  Rng rng(5);
  int max_cap = 0;
  const auto nodes = random_cluster(rng, &max_cap);
  const auto reqs = random_dag(rng, max_cap);
  EXPECT_EQ(to_json(simulate(nodes, reqs)), to_json(simulate(nodes, reqs)));
}

TEST(ClusterJson, NodesAndRequestsRoundTrip) {
  const auto nodes = uniform_cluster(3, 16);
  EXPECT_EQ(nodes_from_json(to_json(std::span<const Node>(nodes))), nodes);
  const std::vector<ContainerRequest> reqs{{"a", 2, 1.5, {}}, {"b", 4, 3.0, {"a"}}};
  EXPECT_EQ(requests_from_json(to_json(std::span<const ContainerRequest>(reqs))), reqs);
}

TEST(ClusterJson, ParseClusterSpec) {
  const auto nodes = parse_cluster("4x8");
  ASSERT_EQ(nodes.size(), 4u);
  EXPECT_EQ(nodes[3].vcpu_capacity, 8);
  EXPECT_THROW(parse_cluster("no-such-file.json"), std::invalid_argument);
  EXPECT_THROW(parse_cluster("0x8"), std::invalid_argument);
}

TEST(ClusterJson, EventsJsonLines) {
  const auto r = simulate(uniform_cluster(2, 8), uniform_tasks(3, 8, 2.0));
  std::ostringstream out;
  write_events_jsonl(out, r.events);
  std::istringstream in(out.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    const Json e = Json::parse(line);
    EXPECT_TRUE(e.contains("time_s"));
    EXPECT_EQ(e.contains("node_id"), e.at("kind") == "started");
    ++count;
  }
  EXPECT_EQ(count, r.events.size());
}

TEST(Executor, SimulatedExecutorMatchesSimulate) {
  SimulatedClusterExecutor exec(uniform_cluster(4, 8));
  const auto tasks = uniform_tasks(8, 4, 100.0);
  for (auto it = tasks.rbegin(); it != tasks.rend(); ++it) exec.submit(*it);
  EXPECT_TRUE(exec.poll());
  EXPECT_EQ(to_json(exec.collect()), to_json(simulate(uniform_cluster(4, 8), tasks)));
}

}  // namespace
}  // namespace edaflow
