#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "wsnho/error.hpp"
#include "wsnho/sim_engine.hpp"
#include "wsnho/world.hpp"

namespace wsnho {

inline constexpr int kDefaultTtl = 16;

// Flooded handoff request. Carries the exact MS location at emission.
struct DiscoveryRequest {
  std::uint64_t request_id = 0;
  NodeId ms_id;
  Point ms_location;
  int ttl = kDefaultTtl;
  std::vector<NodeId> path;  // motes traversed, in order

  bool operator==(const DiscoveryRequest&) const = default;
};

enum class MoteMode { Active, Sleeping };

struct MoteState {
  MoteMode mode = MoteMode::Active;
  std::set<std::uint64_t> seen;
  double energy_consumed = 0.0;
};

struct SteerTo {
  NodeId bs;
  bool operator==(const SteerTo&) const = default;
};

struct SatelliteFallback {
  NodeId satellite;
  bool operator==(const SatelliteFallback&) const = default;
};

struct MscDecision {
  std::uint64_t request_id = 0;
  std::variant<SteerTo, SatelliteFallback> outcome;

  bool steers() const { return std::holds_alternative<SteerTo>(outcome); }
};

struct LinkEndpoint {
  enum class Kind { Bs, Satellite };
  Kind kind = Kind::Bs;
  NodeId id;

  bool operator==(const LinkEndpoint&) const = default;
};

struct LinkRecord {
  NodeId ms_id;
  LinkEndpoint endpoint;
  SimTime established_at;
  std::vector<NodeId> relay_path;
  std::uint64_t request_id = 0;
  std::vector<NodeId> dv_path;  // DV route from the entry mote to the receiving BS, when one existed
};

struct HandoffDelays {
  double steering_delay = 0.5;
  double satellite_acquisition_delay = 2.0;
};

class RequestIdSource {
 public:
  std::uint64_t next() { return ++last_; }

 private:
  std::uint64_t last_ = 0;
};

// True when the MS has no base station among its neighbours.
inline bool detect_loss(NodeId ms, const CommGraph& graph) {
  for (NodeId n : graph.neighbors(ms)) {
    if (graph.kind(n) == NodeKind::BaseStation) return false;
  }
  return true;
}

template <typename IsActive>
std::vector<NodeId> active_mote_neighbors(NodeId node, const CommGraph& graph, IsActive&& is_active) {
  std::vector<NodeId> out;
  for (NodeId n : graph.neighbors(node)) {
    if (graph.kind(n) == NodeKind::Mote && is_active(n)) out.push_back(n);
  }
  return out;
}

// Builds the request an MS broadcasts to its adjacent active motes.
template <typename IsActive>
DiscoveryRequest make_discovery(NodeId ms, Point location, const CommGraph& graph, IsActive&& is_active,
                                RequestIdSource& ids, int default_ttl = kDefaultTtl) {
  if (active_mote_neighbors(ms, graph, is_active).empty()) {
    throw Error(Errc::NoMotesInRange, "mobile station " + std::to_string(ms.value) + " hears no active mote");
  }
  return DiscoveryRequest{ids.next(), ms, location, default_ttl, {}};
}

struct ForwardAction {
  enum class Kind { Unicast, Broadcast };
  Kind kind = Kind::Broadcast;
  std::vector<NodeId> targets;
  DiscoveryRequest request;
};

// One mote's reaction to a received request. A sleeping mote ignores
// everything. Otherwise the request is recorded as seen and, unless it is
// exhausted or already passed through this mote, forwarded: straight to an
// adjacent base station (lowest id) when there is one, else broadcast to the
// adjacent active motes not yet on the path.
template <typename IsActive>
std::vector<ForwardAction> mote_forward(NodeId mote, MoteState& state, const DiscoveryRequest& req,
                                        const CommGraph& graph, IsActive&& is_active, double tx_energy = 1.0) {
  if (state.mode == MoteMode::Sleeping) return {};
  if (!state.seen.insert(req.request_id).second) return {};
  if (req.ttl <= 0) return {};
  if (std::find(req.path.begin(), req.path.end(), mote) != req.path.end()) return {};

  DiscoveryRequest out = req;
  out.path.push_back(mote);
  out.ttl -= 1;
  state.energy_consumed += tx_energy;

  for (NodeId n : graph.neighbors(mote)) {
    if (graph.kind(n) == NodeKind::BaseStation) {
      return {ForwardAction{ForwardAction::Kind::Unicast, {n}, std::move(out)}};
    }
  }
  std::vector<NodeId> targets;
  for (NodeId n : active_mote_neighbors(mote, graph, is_active)) {
    if (std::find(out.path.begin(), out.path.end(), n) == out.path.end()) targets.push_back(n);
  }
  return {ForwardAction{ForwardAction::Kind::Broadcast, std::move(targets), std::move(out)}};
}

struct Escalation {
  std::uint64_t request_id = 0;
  NodeId ms_id;
  Point ms_location;
  std::vector<NodeId> relay_path;
  NodeId bs;
};

struct BsState {
  std::set<std::uint64_t> escalated;
};

// First copy of a request at a BS is escalated to the MSC; later copies are
// suppressed.
inline std::optional<Escalation> bs_notify_msc(NodeId bs, BsState& state, const DiscoveryRequest& req) {
  if (!state.escalated.insert(req.request_id).second) return std::nullopt;
  return Escalation{req.request_id, req.ms_id, req.ms_location, req.path, bs};
}

struct MscState {
  std::set<std::uint64_t> decided;

  // True the first time a request id is presented.
  bool accept(std::uint64_t request_id) { return decided.insert(request_id).second; }
};

inline bool steer_feasible(Point bs_pos, Point ms_loc, double max_steer_range) {
  return distance(bs_pos, ms_loc) <= max_steer_range;
}

// Nearest steer-feasible BS (ties to the lower id), else the satellite.
inline MscDecision msc_decide(std::uint64_t request_id, Point ms_loc, const std::map<NodeId, Point>& bs_set,
                              double max_steer_range, std::optional<NodeId> satellite) {
  std::optional<NodeId> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, pos] : bs_set) {
    if (!steer_feasible(pos, ms_loc, max_steer_range)) continue;
    const double d = distance(pos, ms_loc);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  if (best) return MscDecision{request_id, SteerTo{*best}};
  if (!satellite) throw Error(Errc::NoSatellite, "satellite fallback required but no satellite is deployed");
  return MscDecision{request_id, SatelliteFallback{*satellite}};
}

inline LinkRecord establish_link(const MscDecision& decision, const DiscoveryRequest& req, SimTime t,
                                 const HandoffDelays& delays) {
  LinkRecord rec;
  rec.ms_id = req.ms_id;
  rec.relay_path = req.path;
  rec.request_id = decision.request_id;
  if (const auto* steer = std::get_if<SteerTo>(&decision.outcome)) {
    rec.endpoint = LinkEndpoint{LinkEndpoint::Kind::Bs, steer->bs};
    rec.established_at = t + delays.steering_delay;
  } else {
    rec.endpoint = LinkEndpoint{LinkEndpoint::Kind::Satellite, std::get<SatelliteFallback>(decision.outcome).satellite};
    rec.established_at = t + delays.satellite_acquisition_delay;
  }
  return rec;
}

// Puts the relay motes to sleep; their energy counters stop advancing.
inline void release_motes(const std::vector<NodeId>& path, std::map<NodeId, MoteState>& states) {
  for (NodeId m : path) {
    auto it = states.find(m);
    if (it != states.end()) it->second.mode = MoteMode::Sleeping;
  }
}

}  // namespace wsnho
