#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aquanet/metering.hpp"
#include "aquanet/payload.hpp"
#include "aquanet/types.hpp"

namespace aquanet {

// --- pipeline topology ----------------------------------------------------

struct Reservoir {
  std::string id;
  double capacity_m3 = 0.0;  // storage volume; reported, not a flow bound
};

struct Consumer {
  std::string id;
  bool has_irrigation = false;
  std::string device;  // irrigation device instance backing this consumer
};

struct Pipe {
  std::string from;
  std::string to;
  MilliCubicMetersPerHour capacity_milli = 0;
};

struct PipelineTopology {
  std::vector<Reservoir> reservoirs;
  std::vector<std::string> junctions;
  std::vector<Consumer> consumers;
  std::vector<Pipe> pipes;

  void validate() const {
    std::set<std::string> ids;
    auto declare = [&](const std::string& id, const char* what) {
      if (id.empty()) throw ConfigError(std::string(what) + " with empty id");
      if (!ids.insert(id).second) throw ConfigError("duplicate topology node: " + id);
    };
    for (const auto& r : reservoirs) declare(r.id, "reservoir");
    for (const auto& j : junctions) declare(j, "junction");
    for (const auto& c : consumers) declare(c.id, "consumer");
    for (const auto& p : pipes) {
      if (!ids.count(p.from)) throw ConfigError("pipe references unknown node: " + p.from);
      if (!ids.count(p.to)) throw ConfigError("pipe references unknown node: " + p.to);
      if (p.from == p.to) throw ConfigError("pipe " + p.from + " loops onto itself");
      if (p.capacity_milli <= 0) throw ConfigError("pipe " + p.from + "->" + p.to + " capacity must be positive");
    }
  }
};

// --- flow network construction ---------------------------------------------

enum class VertexClass { Source, Reservoir, Junction, Consumer, IrrigatedConsumer, Sink };

struct FlowVertex {
  std::string id;
  VertexClass cls = VertexClass::Junction;
};

struct FlowEdge {
  int from = 0;
  int to = 0;
  MilliCubicMetersPerHour capacity = 0;
};

struct FlowNetwork {
  std::vector<FlowVertex> vertices;
  int source = 0;
  int sink = 0;
  std::vector<FlowEdge> edges;
  MilliCubicMetersPerHour w_milli = 0;
  MilliCubicMetersPerHour infinity = 0;  // sentinel strictly above any finite cut
  std::vector<std::string> warnings;

  int index_of(const std::string& id) const {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if (vertices[i].id == id) return static_cast<int>(i);
    throw ConfigError("unknown vertex: " + id);
  }
};

// The capacity function's second case reads "w if v2 is a junction", which
// conflicts with w being per-irrigation-system consumption; the default
// construction puts w on the consumer-to-sink edges instead. StrictEq1
// preserves the literal reading where it binds (reservoir out-edges become
// infinite, junction in-edges become w) and falls back to the construction
// defaults on the synthetic source/sink edges it leaves undefined.
enum class CapacityRule { Interpreted, StrictEq1 };

inline FlowNetwork build_flow_network(const PipelineTopology& topo,
                                      MilliCubicMetersPerHour w_milli,
                                      CapacityRule rule = CapacityRule::Interpreted) {
  topo.validate();
  FlowNetwork net;
  net.w_milli = w_milli;
  net.vertices.push_back({"s", VertexClass::Source});
  net.vertices.push_back({"t", VertexClass::Sink});
  net.source = 0;
  net.sink = 1;
  std::map<std::string, int> index;
  auto add_vertex = [&](const std::string& id, VertexClass cls) {
    index[id] = static_cast<int>(net.vertices.size());
    net.vertices.push_back({id, cls});
  };
  for (const auto& r : topo.reservoirs) add_vertex(r.id, VertexClass::Reservoir);
  for (const auto& j : topo.junctions) add_vertex(j, VertexClass::Junction);
  for (const auto& c : topo.consumers)
    add_vertex(c.id, c.has_irrigation ? VertexClass::IrrigatedConsumer : VertexClass::Consumer);

  MilliCubicMetersPerHour finite_sum = 0;
  auto cls_of = [&](int v) { return net.vertices[static_cast<std::size_t>(v)].cls; };

  // E': one edge per pipe, with its capacity
  for (const auto& p : topo.pipes) {
    net.edges.push_back({index[p.from], index[p.to], p.capacity_milli});
    finite_sum += p.capacity_milli;
  }
  // E''': irrigated consumers feed the sink at rate w
  for (const auto& c : topo.consumers) {
    if (!c.has_irrigation) continue;
    net.edges.push_back({index[c.id], net.sink, w_milli});
    finite_sum += w_milli;
  }
  net.infinity = finite_sum + 1;
  // E'': the source feeds every reservoir without bound
  for (const auto& r : topo.reservoirs) net.edges.push_back({net.source, index[r.id], net.infinity});

  if (rule == CapacityRule::StrictEq1) {
    for (auto& e : net.edges) {
      if (cls_of(e.from) == VertexClass::Reservoir)
        e.capacity = net.infinity;
      else if (cls_of(e.to) == VertexClass::Junction)
        e.capacity = w_milli;
    }
  }

  // reachability advisory, not an error
  std::vector<char> seen(net.vertices.size(), 0);
  std::deque<int> queue{net.source};
  seen[static_cast<std::size_t>(net.source)] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const auto& e : net.edges) {
      if (e.from == u && e.capacity > 0 && !seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = 1;
        queue.push_back(e.to);
      }
    }
  }
  for (const auto& c : topo.consumers) {
    if (c.has_irrigation && !seen[static_cast<std::size_t>(index[c.id])])
      net.warnings.push_back("consumer " + c.id +
                             " has irrigation but is unreachable from any reservoir");
  }
  return net;
}

// --- max flow ----------------------------------------------------------

enum class MaxFlowAlgorithm { Dinic, EdmondsKarp };

namespace flow_detail {

struct Arc {
  int to;
  std::size_t rev;  // index of the reverse arc in graph[to]
  MilliCubicMetersPerHour cap;
};

class ResidualGraph {
 public:
  explicit ResidualGraph(const FlowNetwork& net) : adj_(net.vertices.size()) {
    for (const auto& e : net.edges) add_edge(e.from, e.to, e.capacity);
  }

  void add_edge(int from, int to, MilliCubicMetersPerHour cap) {
    forward_.emplace_back(from, adj_[static_cast<std::size_t>(from)].size());
    adj_[static_cast<std::size_t>(from)].push_back({to, adj_[static_cast<std::size_t>(to)].size(), cap});
    adj_[static_cast<std::size_t>(to)].push_back(
        {from, adj_[static_cast<std::size_t>(from)].size() - 1, 0});
  }

  std::vector<Arc>& at(int v) { return adj_[static_cast<std::size_t>(v)]; }
  std::size_t size() const { return adj_.size(); }

  // residual capacity left on the i-th added edge's forward arc
  MilliCubicMetersPerHour forward_residual(std::size_t edge_index) const {
    const auto& [v, i] = forward_[edge_index];
    return adj_[static_cast<std::size_t>(v)][i].cap;
  }

 private:
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<int, std::size_t>> forward_;
};

inline MilliCubicMetersPerHour dinic(ResidualGraph& g, int s, int t) {
  const auto n = g.size();
  std::vector<int> level(n);
  std::vector<std::size_t> iter(n);

  auto bfs = [&]() {
    std::fill(level.begin(), level.end(), -1);
    std::deque<int> q{s};
    level[static_cast<std::size_t>(s)] = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (const Arc& a : g.at(u)) {
        if (a.cap > 0 && level[static_cast<std::size_t>(a.to)] < 0) {
          level[static_cast<std::size_t>(a.to)] = level[static_cast<std::size_t>(u)] + 1;
          q.push_back(a.to);
        }
      }
    }
    return level[static_cast<std::size_t>(t)] >= 0;
  };

  std::function<MilliCubicMetersPerHour(int, MilliCubicMetersPerHour)> dfs =
      [&](int u, MilliCubicMetersPerHour pushed) -> MilliCubicMetersPerHour {
    if (u == t) return pushed;
    for (std::size_t& i = iter[static_cast<std::size_t>(u)]; i < g.at(u).size(); ++i) {
      Arc& a = g.at(u)[i];
      if (a.cap <= 0 || level[static_cast<std::size_t>(a.to)] !=
                            level[static_cast<std::size_t>(u)] + 1)
        continue;
      const MilliCubicMetersPerHour got = dfs(a.to, std::min(pushed, a.cap));
      if (got > 0) {
        a.cap -= got;
        g.at(a.to)[a.rev].cap += got;
        return got;
      }
    }
    return 0;
  };

  MilliCubicMetersPerHour total = 0;
  while (bfs()) {
    std::fill(iter.begin(), iter.end(), 0);
    while (MilliCubicMetersPerHour pushed = dfs(s, std::numeric_limits<MilliCubicMetersPerHour>::max()))
      total += pushed;
  }
  return total;
}

inline MilliCubicMetersPerHour edmonds_karp(ResidualGraph& g, int s, int t) {
  const auto n = g.size();
  MilliCubicMetersPerHour total = 0;
  for (;;) {
    std::vector<int> prev_v(n, -1);
    std::vector<std::size_t> prev_a(n, 0);
    std::deque<int> q{s};
    prev_v[static_cast<std::size_t>(s)] = s;
    while (!q.empty() && prev_v[static_cast<std::size_t>(t)] < 0) {
      const int u = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < g.at(u).size(); ++i) {
        const Arc& a = g.at(u)[i];
        if (a.cap > 0 && prev_v[static_cast<std::size_t>(a.to)] < 0) {
          prev_v[static_cast<std::size_t>(a.to)] = u;
          prev_a[static_cast<std::size_t>(a.to)] = i;
          q.push_back(a.to);
        }
      }
    }
    if (prev_v[static_cast<std::size_t>(t)] < 0) return total;
    MilliCubicMetersPerHour bottleneck = std::numeric_limits<MilliCubicMetersPerHour>::max();
    for (int v = t; v != s; v = prev_v[static_cast<std::size_t>(v)]) {
      const Arc& a = g.at(prev_v[static_cast<std::size_t>(v)])[prev_a[static_cast<std::size_t>(v)]];
      bottleneck = std::min(bottleneck, a.cap);
    }
    for (int v = t; v != s; v = prev_v[static_cast<std::size_t>(v)]) {
      Arc& a = g.at(prev_v[static_cast<std::size_t>(v)])[prev_a[static_cast<std::size_t>(v)]];
      a.cap -= bottleneck;
      g.at(a.to)[a.rev].cap += bottleneck;
    }
    total += bottleneck;
  }
}

}  // namespace flow_detail

// Maximum s->t flow in milli-m3/h. Both algorithms are exact over the
// fixed-point capacities, so their agreement is an integer equality.
inline MilliCubicMetersPerHour max_flow(const FlowNetwork& net, MaxFlowAlgorithm algorithm) {
  if (net.vertices.empty() || net.source == net.sink) return 0;
  flow_detail::ResidualGraph g(net);
  return algorithm == MaxFlowAlgorithm::Dinic ? flow_detail::dinic(g, net.source, net.sink)
                                              : flow_detail::edmonds_karp(g, net.source, net.sink);
}

// Flow assignment per network edge, for conservation checks.
struct MaxFlowResult {
  MilliCubicMetersPerHour value = 0;
  std::vector<MilliCubicMetersPerHour> edge_flow;
};

inline MaxFlowResult max_flow_detailed(const FlowNetwork& net, MaxFlowAlgorithm algorithm) {
  MaxFlowResult result;
  if (net.vertices.empty() || net.source == net.sink) return result;
  flow_detail::ResidualGraph g(net);
  result.value = algorithm == MaxFlowAlgorithm::Dinic
                     ? flow_detail::dinic(g, net.source, net.sink)
                     : flow_detail::edmonds_karp(g, net.source, net.sink);
  result.edge_flow.reserve(net.edges.size());
  for (std::size_t i = 0; i < net.edges.size(); ++i)
    result.edge_flow.push_back(net.edges[i].capacity - g.forward_residual(i));
  return result;
}

// --- damage quantities ------------------------------------------------------

// Expected waste of a botnet of n single-sprinkler systems running for the
// given duration: flow x n x t, exact in milli-m3 whenever 3600 divides
// flow_milli * n * seconds.
inline MilliCubicMeters empirical_waste_milli(std::int64_t n_sprinklers, Seconds duration,
                                              MilliCubicMetersPerHour flow_milli = kSprinklerFlowMilli) {
  if (n_sprinklers < 0 || duration < 0 || flow_milli < 0)
    throw ConfigError("empirical waste arguments must be non-negative");
  const __int128 v = static_cast<__int128>(flow_milli) * n_sprinklers * duration / 3600;
  return static_cast<MilliCubicMeters>(v);
}

inline double empirical_waste(std::int64_t n_sprinklers, double hours,
                              double flow_m3_per_h = 2.795) {
  const auto seconds = static_cast<Seconds>(std::llround(hours * 3600.0));
  const auto flow_milli = static_cast<MilliCubicMetersPerHour>(std::llround(flow_m3_per_h * 1000.0));
  return static_cast<double>(empirical_waste_milli(n_sprinklers, seconds, flow_milli)) / 1000.0;
}

inline double financial_damage(double max_flow_m3_per_h, double tariff_per_m3, double hours) {
  if (max_flow_m3_per_h < 0 || tariff_per_m3 < 0 || hours < 0)
    throw ConfigError("financial damage arguments must be non-negative");
  return max_flow_m3_per_h * tariff_per_m3 * hours;
}

struct DamageReport {
  double max_flow_m3_per_h = 0.0;
  double wasted_water_m3 = 0.0;
  double financial = 0.0;
  double duration_h = 0.0;
  double tariff_per_m3 = 0.0;

  Document to_document() const {
    return {{"max_flow_m3_per_h", max_flow_m3_per_h},
            {"wasted_water_m3", wasted_water_m3},
            {"financial", financial},
            {"duration_h", duration_h},
            {"tariff_per_m3", tariff_per_m3}};
  }
};

// Consumption anomaly monitor: flags every period whose consumption exceeds
// baseline x (1 + threshold). Series must cover the same periods.
inline std::vector<Timestamp> monitor_consumption(const ConsumptionSeries& observed,
                                                  const ConsumptionSeries& baseline,
                                                  double threshold) {
  if (observed.size() != baseline.size())
    throw SimError("monitor_consumption: series lengths differ");
  std::vector<Timestamp> flagged;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i].start != baseline[i].start)
      throw SimError("monitor_consumption: misaligned periods");
    const double limit = static_cast<double>(baseline[i].flow_seconds) * (1.0 + threshold);
    if (static_cast<double>(observed[i].flow_seconds) > limit) flagged.push_back(observed[i].start);
  }
  return flagged;
}

}  // namespace aquanet
