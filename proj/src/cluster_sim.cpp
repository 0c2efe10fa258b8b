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

#include "edaflow/cluster_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>

#include <fmt/format.h>

namespace edaflow {

namespace {

int phase_rank(EventKind k) {
  switch (k) {
    case EventKind::kSubmitted: return 0;
    case EventKind::kFinished: return 1;
    case EventKind::kStarted: return 2;
    case EventKind::kBlocked: return 3;
  }
  return 4;
}

struct Running {
  double finish_s;
  std::size_t task;
  std::size_t node;
};

void validate(std::span<const Node> nodes, std::span<const ContainerRequest> requests,
              const std::map<std::string, std::size_t>& by_id) {
  if (nodes.empty()) throw SchedulingError("cluster has no nodes");
  int max_free = 0;
  for (const auto& n : nodes) {
    if (n.vcpu_capacity < 1 || n.allocated < 0 || n.allocated > n.vcpu_capacity) {
      throw SchedulingError(fmt::format("node '{}' has an invalid capacity", n.id));
    }
    max_free = std::max(max_free, n.vcpu_capacity - n.allocated);
  }
  if (by_id.size() != requests.size()) {
    throw SchedulingError("task ids must be unique");
  }
  for (const auto& r : requests) {
    if (r.vcpus < 1 || !(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
      throw SchedulingError(
          fmt::format("task '{}' needs positive vcpus and duration", r.task_id));
    }
    if (r.vcpus > max_free) {
      throw UnschedulableRequest(fmt::format(
          "task '{}' needs {} vCPUs but the largest node offers {}", r.task_id,
          r.vcpus, max_free));
    }
    for (const auto& d : r.dependencies) {
      if (!by_id.contains(d)) {
        throw UnknownDependency(
            fmt::format("task '{}' depends on unknown task '{}'", r.task_id, d));
      }
    }
  }
  // Kahn's algorithm; leftovers sit on a cycle.
  std::vector<int> indegree(requests.size());
  std::vector<std::vector<std::size_t>> users(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    for (const auto& d : requests[i].dependencies) {
      users[by_id.at(d)].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> queue;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  std::size_t seen = 0;
  while (seen < queue.size()) {
    for (std::size_t u : users[queue[seen++]]) {
      if (--indegree[u] == 0) queue.push_back(u);
    }
  }
  if (queue.size() != requests.size()) {
    throw CyclicDependencies("task dependencies contain a cycle");
  }
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kSubmitted: return "submitted";
    case EventKind::kStarted: return "started";
    case EventKind::kFinished: return "finished";
    case EventKind::kBlocked: return "blocked";
  }
  return "unknown";
}

SimulationResult simulate(std::span<const Node> nodes,
                          std::span<const ContainerRequest> requests) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < requests.size(); ++i) by_id[requests[i].task_id] = i;
  validate(nodes, requests, by_id);

  SimulationResult out;
  const std::size_t n = requests.size();
  std::vector<int> free(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    free[k] = nodes[k].vcpu_capacity - nodes[k].allocated;
  }
  std::vector<int> waiting_on(n);
  std::vector<std::vector<std::size_t>> users(n);
  for (std::size_t i = 0; i < n; ++i) {
    waiting_on[i] = static_cast<int>(requests[i].dependencies.size());
    for (const auto& d : requests[i].dependencies) users[by_id.at(d)].push_back(i);
    out.events.push_back({0.0, EventKind::kSubmitted, requests[i].task_id, ""});
  }

  // FFD order is fixed, so the ready set can stay sorted by it.
  auto ffd_less = [&](std::size_t a, std::size_t b) {
    if (requests[a].vcpus != requests[b].vcpus) {
      return requests[a].vcpus > requests[b].vcpus;
    }
    return requests[a].task_id < requests[b].task_id;
  };
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (waiting_on[i] == 0) ready.push_back(i);
  }
  std::vector<bool> blocked(n, false);
  auto later = [](const Running& a, const Running& b) {
    if (a.finish_s != b.finish_s) return a.finish_s > b.finish_s;
    return a.task > b.task;
  };
  std::priority_queue<Running, std::vector<Running>, decltype(later)> running(later);

  double now = 0.0;
  std::size_t finished = 0;
  while (finished < n) {
    std::sort(ready.begin(), ready.end(), ffd_less);
    std::vector<std::size_t> still_waiting;
    for (std::size_t t : ready) {
      const auto& r = requests[t];
      std::size_t k = 0;
      while (k < nodes.size() && free[k] < r.vcpus) ++k;
      if (k == nodes.size()) {
        if (!blocked[t]) {
          out.events.push_back({now, EventKind::kBlocked, r.task_id, ""});
          blocked[t] = true;
        }
        still_waiting.push_back(t);
        continue;
      }
      free[k] -= r.vcpus;
      blocked[t] = false;
      const double finish = now + r.duration_s;
      running.push({finish, t, k});
      out.events.push_back({now, EventKind::kStarted, r.task_id, nodes[k].id});
      out.placements.push_back({r.task_id, nodes[k].id, now, finish, r.vcpus});
    }
    ready = std::move(still_waiting);

    // Acyclic and every task fits an empty node, so something always runs.
    if (running.empty()) throw SchedulingError("scheduler stalled");
    now = running.top().finish_s;
    while (!running.empty() && running.top().finish_s == now) {
      const Running done = running.top();
      running.pop();
      free[done.node] += requests[done.task].vcpus;
      ++finished;
      out.events.push_back({now, EventKind::kFinished, requests[done.task].task_id, ""});
      for (std::size_t u : users[done.task]) {
        if (--waiting_on[u] == 0) ready.push_back(u);
      }
    }
    out.makespan_s = now;
  }

  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const ScheduleEvent& a, const ScheduleEvent& b) {
                     if (a.time_s != b.time_s) return a.time_s < b.time_s;
                     if (a.kind != b.kind) return phase_rank(a.kind) < phase_rank(b.kind);
                     return a.task_id < b.task_id;
                   });
  std::stable_sort(out.placements.begin(), out.placements.end(),
                   [](const Placement& a, const Placement& b) {
                     if (a.start_s != b.start_s) return a.start_s < b.start_s;
                     return a.task_id < b.task_id;
                   });
  return out;
}

double speedup(std::span<const Node> cluster, std::span<const Node> single,
               std::span<const ContainerRequest> requests) {
  const double base = simulate(single, requests).makespan_s;
  const double scaled = simulate(cluster, requests).makespan_s;
  if (scaled == 0.0) return 1.0;
  return base / scaled;
}

std::vector<Node> uniform_cluster(int count, int vcpus) {
  if (count < 1 || vcpus < 1) {
    throw std::invalid_argument("cluster needs at least one node with one vCPU");
  }
  std::vector<Node> nodes;
  for (int i = 0; i < count; ++i) nodes.push_back({fmt::format("node{}", i), vcpus, 0});
  return nodes;
}

std::vector<Node> parse_cluster(std::string_view spec) {
  const auto x = spec.find('x');
  if (x != std::string_view::npos && x > 0) {
    int count = 0, vcpus = 0;
    auto [p1, e1] = std::from_chars(spec.data(), spec.data() + x, count);
    auto [p2, e2] = std::from_chars(spec.data() + x + 1, spec.data() + spec.size(), vcpus);
    if (e1 == std::errc() && e2 == std::errc() && p1 == spec.data() + x &&
        p2 == spec.data() + spec.size()) {
      return uniform_cluster(count, vcpus);
    }
  }
  std::ifstream in{std::string(spec)};
  if (!in) {
    throw std::invalid_argument(fmt::format(
        "cluster '{}' is neither <count>x<vcpus> nor a readable file", spec));
  }
  return nodes_from_json(Json::parse(in));
}

std::vector<Node> nodes_from_json(const Json& j) {
  std::vector<Node> nodes;
  for (const auto& e : j) {
    nodes.push_back({e.at("id").get<std::string>(), e.at("vcpu_capacity").get<int>(),
                     e.value("allocated", 0)});
  }
  return nodes;
}

Json to_json(std::span<const Node> nodes) {
  Json j = Json::array();
  for (const auto& n : nodes) {
    j.push_back({{"id", n.id}, {"vcpu_capacity", n.vcpu_capacity}});
  }
  return j;
}

std::vector<ContainerRequest> requests_from_json(const Json& j) {
  const Json& list = j.is_object() ? j.at("tasks") : j;
  std::vector<ContainerRequest> out;
  for (const auto& e : list) {
    ContainerRequest r;
    r.task_id = e.at("task_id").get<std::string>();
    r.vcpus = e.at("vcpus").get<int>();
    r.duration_s = e.at("duration_s").get<double>();
    if (e.contains("dependencies")) {
      for (const auto& d : e.at("dependencies")) r.dependencies.insert(d.get<std::string>());
    }
    out.push_back(std::move(r));
  }
  return out;
}

Json to_json(std::span<const ContainerRequest> requests) {
  Json j = Json::array();
  for (const auto& r : requests) {
    j.push_back({{"task_id", r.task_id},
                 {"vcpus", r.vcpus},
                 {"duration_s", r.duration_s},
                 {"dependencies", r.dependencies}});
  }
  return j;
}

Json to_json(const ScheduleEvent& e) {
  Json j = {{"time_s", e.time_s}, {"kind", to_string(e.kind)}, {"task_id", e.task_id}};
  if (e.kind == EventKind::kStarted) j["node_id"] = e.node_id;
  return j;
}

Json to_json(const SimulationResult& r) {
  Json events = Json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  Json placements = Json::array();
  for (const auto& p : r.placements) {
    placements.push_back({{"task_id", p.task_id},
                          {"node_id", p.node_id},
                          {"start_s", p.start_s},
                          {"finish_s", p.finish_s},
                          {"vcpus", p.vcpus}});
  }
  return {{"makespan_s", r.makespan_s}, {"placements", placements}, {"events", events}};
}

void write_events_jsonl(std::ostream& out, std::span<const ScheduleEvent> events) {
  for (const auto& e : events) out << to_json(e).dump() << '\n';
}

void SimulatedClusterExecutor::submit(ContainerRequest request) {
  std::lock_guard lock(mu_);
  pending_.push_back(std::move(request));
  last_.reset();
}

bool SimulatedClusterExecutor::poll() {
  // Simulated time passes instantly.
  return true;
}

SimulationResult SimulatedClusterExecutor::collect() {
  std::lock_guard lock(mu_);
  if (!last_) {
    auto requests = pending_;
    std::sort(requests.begin(), requests.end(),
              [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
    last_ = simulate(nodes_, requests);
  }
  return *last_;
}

}  // namespace edaflow
