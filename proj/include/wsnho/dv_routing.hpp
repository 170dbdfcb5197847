#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "wsnho/error.hpp"
#include "wsnho/sim_engine.hpp"

namespace wsnho {

// Hop-count metric; 16 means unreachable.
inline constexpr int kInfinityMetric = 16;

struct Route {
  int metric = kInfinityMetric;
  NodeId next_hop;

  bool operator==(const Route&) const = default;
};

struct DistanceVector {
  NodeId owner;
  std::map<NodeId, Route> entries;

  int metric_to(NodeId dst) const {
    auto it = entries.find(dst);
    return it == entries.end() ? kInfinityMetric : it->second.metric;
  }

  bool operator==(const DistanceVector&) const = default;
};

struct RouteUpdate {
  NodeId sender;
  std::map<NodeId, int> vector;
  bool triggered = false;
};

inline DistanceVector init_table(NodeId owner) {
  DistanceVector t{owner, {}};
  t.entries[owner] = Route{0, owner};
  return t;
}

inline RouteUpdate make_update(const DistanceVector& table, bool triggered) {
  RouteUpdate u{table.owner, {}, triggered};
  for (const auto& [dst, route] : table.entries) u.vector[dst] = route.metric;
  return u;
}

inline RouteUpdate periodic_update(const DistanceVector& table) { return make_update(table, false); }

inline RouteUpdate triggered_update(const DistanceVector& table) { return make_update(table, true); }

// Bellman-Ford relaxation with unit link cost. A route is replaced when the
// candidate is strictly better, or when it already points through the sender
// and the sender's figure changed (including a worsening). Returns the set of
// destinations whose entry changed; a non-empty set obliges the caller to send
// a triggered update.
inline std::set<NodeId> apply_update(DistanceVector& table, const RouteUpdate& update,
                                     std::span<const NodeId> neighbors) {
  if (std::find(neighbors.begin(), neighbors.end(), update.sender) == neighbors.end()) {
    throw Error(Errc::UnknownNeighbor, "update from non-adjacent node " + std::to_string(update.sender.value));
  }
  std::set<NodeId> changed;
  for (const auto& [dst, advertised] : update.vector) {
    if (dst == table.owner) continue;
    const int candidate = std::min(kInfinityMetric, std::max(advertised, 0) + 1);
    auto it = table.entries.find(dst);
    if (it == table.entries.end()) {
      if (candidate < kInfinityMetric) {
        table.entries[dst] = Route{candidate, update.sender};
        changed.insert(dst);
      }
      continue;
    }
    Route& cur = it->second;
    const bool better = candidate < cur.metric;
    const bool via_sender_moved = cur.next_hop == update.sender && candidate != cur.metric;
    if (better || via_sender_moved) {
      cur = Route{candidate, update.sender};
      changed.insert(dst);
    }
  }
  return changed;
}

// Follows next-hop pointers from src to dst. The returned list has
// metric(src, dst) + 1 entries.
inline std::vector<NodeId> shortest_path(const std::map<NodeId, DistanceVector>& tables, NodeId src, NodeId dst) {
  std::vector<NodeId> path{src};
  std::set<NodeId> visited{src};
  NodeId cur = src;
  while (cur != dst) {
    auto t = tables.find(cur);
    if (t == tables.end()) throw Error(Errc::Unreachable, "no table at " + std::to_string(cur.value));
    auto r = t->second.entries.find(dst);
    if (r == t->second.entries.end() || r->second.metric >= kInfinityMetric) {
      throw Error(Errc::Unreachable, std::to_string(dst.value) + " unreachable from " + std::to_string(cur.value));
    }
    cur = r->second.next_hop;
    if (!visited.insert(cur).second) {
      throw Error(Errc::LoopDetected, "next-hop chain revisits " + std::to_string(cur.value));
    }
    path.push_back(cur);
  }
  return path;
}

struct ExchangeStats {
  std::size_t updates_delivered = 0;
  std::size_t triggered_updates = 0;
};

// Runs the protocol to quiescence over a static topology: every node first
// advertises its table, then each changed table is re-advertised (triggered)
// until no table changes. Deliveries are processed in FIFO order.
inline ExchangeStats converge(std::map<NodeId, DistanceVector>& tables,
                              const std::map<NodeId, std::vector<NodeId>>& adjacency) {
  ExchangeStats stats;
  std::deque<RouteUpdate> pending;
  for (const auto& [id, table] : tables) pending.push_back(periodic_update(table));
  while (!pending.empty()) {
    RouteUpdate u = std::move(pending.front());
    pending.pop_front();
    auto adj = adjacency.find(u.sender);
    if (adj == adjacency.end()) continue;
    for (NodeId n : adj->second) {
      auto t = tables.find(n);
      if (t == tables.end()) continue;
      ++stats.updates_delivered;
      const auto& nbrs = adjacency.at(n);
      if (!apply_update(t->second, u, nbrs).empty()) {
        ++stats.triggered_updates;
        pending.push_back(triggered_update(t->second));
      }
    }
  }
  return stats;
}

}  // namespace wsnho
