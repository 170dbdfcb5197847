#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsnho/error.hpp"
#include "wsnho/sim_engine.hpp"

namespace wsnho {

struct Point {
  double x = 0.0;
  double y = 0.0;

  constexpr bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class NodeKind { MobileStation, BaseStation, Mote, Satellite, Msc };

constexpr std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::MobileStation: return "ms";
    case NodeKind::BaseStation: return "bs";
    case NodeKind::Mote: return "mote";
    case NodeKind::Satellite: return "satellite";
    case NodeKind::Msc: return "msc";
  }
  return "?";
}

inline std::optional<NodeKind> parse_kind(std::string_view s) {
  for (NodeKind k : {NodeKind::MobileStation, NodeKind::BaseStation, NodeKind::Mote, NodeKind::Satellite,
                     NodeKind::Msc}) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

// Log-distance path loss parameters. Powers in dBm, losses in dB, reference
// distance 1 m.
struct RadioProfile {
  double tx_power = 0.0;
  double sensitivity = -100.0;
  double error_margin = 0.0;
  double path_loss_exponent = 3.0;
  double reference_loss = 40.0;

  bool operator==(const RadioProfile&) const = default;
};

inline void validate(const RadioProfile& p) {
  const bool finite = std::isfinite(p.tx_power) && std::isfinite(p.sensitivity) && std::isfinite(p.error_margin) &&
                      std::isfinite(p.path_loss_exponent) && std::isfinite(p.reference_loss);
  if (!finite) throw Error(Errc::InvalidProfile, "non-finite radio parameter");
  if (!(p.sensitivity < p.tx_power - p.reference_loss)) {
    throw Error(Errc::InvalidProfile, "sensitivity must lie below tx_power - reference_loss");
  }
  if (p.error_margin < 0.0) throw Error(Errc::InvalidProfile, "negative error margin");
  if (p.path_loss_exponent < 1.6 || p.path_loss_exponent > 6.0) {
    throw Error(Errc::InvalidProfile, "path loss exponent outside [1.6, 6]");
  }
}

inline double received_power(const RadioProfile& p, double distance_m) {
  if (!(distance_m > 0.0)) throw Error(Errc::ZeroDistance, "received power needs a positive distance");
  return p.tx_power - p.reference_loss - 10.0 * p.path_loss_exponent * std::log10(distance_m);
}

// Distance at which received power equals sensitivity.
inline double range_radius(const RadioProfile& p) {
  return std::pow(10.0, (p.tx_power - p.reference_loss - p.sensitivity) / (10.0 * p.path_loss_exponent));
}

inline bool in_range(Point a, Point b, const RadioProfile& p) {
  return received_power(p, distance(a, b)) >= p.sensitivity;
}

enum class PacketOutcome { Delivered, Errored, Lost };

inline PacketOutcome packet_outcome(const RadioProfile& p, double rx_power) {
  if (rx_power < p.sensitivity) return PacketOutcome::Lost;
  if (rx_power < p.sensitivity + p.error_margin) return PacketOutcome::Errored;
  return PacketOutcome::Delivered;
}

// The profile with the shorter reach governs a bidirectional link.
inline const RadioProfile& link_profile(const RadioProfile& a, const RadioProfile& b) {
  return range_radius(b) < range_radius(a) ? b : a;
}

struct MobilityPath {
  std::vector<Point> waypoints;
  double speed = 1.0;
  double halt_fraction = 1.0;

  bool operator==(const MobilityPath&) const = default;
};

// The route starts at `start` and visits the waypoints in order.
inline void validate(const MobilityPath& path, Point start) {
  if (path.waypoints.empty()) throw Error(Errc::InvalidPath, "mobility path needs at least one waypoint");
  if (!(path.speed > 0.0) || !std::isfinite(path.speed)) throw Error(Errc::InvalidPath, "speed must be positive");
  if (!(path.halt_fraction > 0.0 && path.halt_fraction <= 1.0)) {
    throw Error(Errc::InvalidPath, "halt_fraction must lie in (0, 1]");
  }
  Point prev = start;
  for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
    const Point w = path.waypoints[i];
    if (!std::isfinite(w.x) || !std::isfinite(w.y)) throw Error(Errc::InvalidPath, "non-finite waypoint");
    if (i > 0 && w == prev) throw Error(Errc::InvalidPath, "consecutive waypoints coincide");
    prev = w;
  }
}

inline double route_length(const MobilityPath& path, Point start) {
  double total = 0.0;
  Point prev = start;
  for (Point w : path.waypoints) {
    total += distance(prev, w);
    prev = w;
  }
  return total;
}

inline double halt_time(const MobilityPath& path, Point start) {
  return path.halt_fraction * route_length(path, start) / path.speed;
}

inline Point point_at_arc_length(const MobilityPath& path, Point start, double s) {
  Point prev = start;
  for (Point w : path.waypoints) {
    const double seg = distance(prev, w);
    if (seg > 0.0 && s <= seg) {
      const double f = s / seg;
      return Point{prev.x + f * (w.x - prev.x), prev.y + f * (w.y - prev.y)};
    }
    s -= seg;
    prev = w;
  }
  return prev;
}

// Constant-speed piecewise-linear motion, frozen once the travelled arc length
// reaches halt_fraction of the route.
inline Point position_at(const MobilityPath& path, Point start, SimTime t) {
  const double halt_s = path.halt_fraction * route_length(path, start);
  const double s = std::min(path.speed * std::max(t.seconds, 0.0), halt_s);
  return point_at_arc_length(path, start, s);
}

struct RadioNode {
  NodeId id;
  NodeKind kind = NodeKind::Mote;
  Point pos;
  RadioProfile profile;
};

// Undirected adjacency snapshot.
class CommGraph {
 public:
  CommGraph() = default;

  void add_node(NodeId id, NodeKind kind) {
    kinds_[id] = kind;
    adjacency_[id];
  }

  void add_edge(NodeId a, NodeId b) {
    if (a == b) return;
    insert_sorted(adjacency_[a], b);
    insert_sorted(adjacency_[b], a);
  }

  bool contains(NodeId id) const { return kinds_.count(id) > 0; }

  NodeKind kind(NodeId id) const { return kinds_.at(id); }

  bool adjacent(NodeId a, NodeId b) const {
    auto it = adjacency_.find(a);
    if (it == adjacency_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), b);
  }

  const std::vector<NodeId>& neighbors(NodeId id) const {
    static const std::vector<NodeId> none;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? none : it->second;
  }

  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    out.reserve(kinds_.size());
    for (const auto& [id, kind] : kinds_) out.push_back(id);
    return out;
  }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& [id, adj] : adjacency_) twice += adj.size();
    return twice / 2;
  }

  bool operator==(const CommGraph&) const = default;

 private:
  static void insert_sorted(std::vector<NodeId>& v, NodeId id) {
    auto it = std::lower_bound(v.begin(), v.end(), id);
    if (it == v.end() || *it != id) v.insert(it, id);
  }

  std::map<NodeId, NodeKind> kinds_;
  std::map<NodeId, std::vector<NodeId>> adjacency_;
};

inline bool terrestrial(NodeKind k) {
  return k == NodeKind::MobileStation || k == NodeKind::BaseStation || k == NodeKind::Mote;
}

// Terrestrial links exist when both ends reach each other, which is decided by
// the shorter-reach profile. The satellite covers every terrestrial node; the
// MSC has no radio and stays isolated.
inline CommGraph comm_graph(std::span<const RadioNode> nodes) {
  CommGraph g;
  for (const auto& n : nodes) g.add_node(n.id, n.kind);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const RadioNode& a = nodes[i];
      const RadioNode& b = nodes[j];
      if (a.kind == NodeKind::Msc || b.kind == NodeKind::Msc) continue;
      if (a.kind == NodeKind::Satellite || b.kind == NodeKind::Satellite) {
        if (a.kind != b.kind) g.add_edge(a.id, b.id);
        continue;
      }
      if (a.pos == b.pos) {
        throw Error(Errc::CoLocated, "nodes " + std::to_string(a.id.value) + " and " + std::to_string(b.id.value) +
                                         " share a position");
      }
      if (in_range(a.pos, b.pos, link_profile(a.profile, b.profile))) g.add_edge(a.id, b.id);
    }
  }
  return g;
}

inline CommGraph comm_graph(const std::map<NodeId, Point>& positions, const std::map<NodeId, NodeKind>& kinds,
                            const std::map<NodeKind, RadioProfile>& profiles) {
  std::vector<RadioNode> nodes;
  nodes.reserve(positions.size());
  for (const auto& [id, pos] : positions) {
    const NodeKind k = kinds.at(id);
    auto it = profiles.find(k);
    nodes.push_back(RadioNode{id, k, pos, it == profiles.end() ? RadioProfile{} : it->second});
  }
  return comm_graph(std::span<const RadioNode>(nodes));
}

}  // namespace wsnho
