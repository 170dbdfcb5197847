#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wsnho/dv_routing.hpp"
#include "wsnho/error.hpp"
#include "wsnho/handoff_protocol.hpp"
#include "wsnho/layer_stats.hpp"
#include "wsnho/packet_queues.hpp"
#include "wsnho/scenario.hpp"
#include "wsnho/sim_engine.hpp"
#include "wsnho/world.hpp"

namespace wsnho {

struct AppData {
  std::uint64_t seq = 0;
};

// One frame handed to a node's 802.11 interface.
struct Frame {
  enum class Targets { Explicit, DvNeighbors, ActiveMotes };

  Packet packet;
  bool broadcast = false;
  bool beam = false;  // carried on a steered BS beam instead of the shared channel
  Targets resolve = Targets::Explicit;
  std::vector<NodeId> targets;
  int ip_ttl = 64;
  std::variant<DiscoveryRequest, RouteUpdate, AppData> body;

  bool is_udp() const { return !std::holds_alternative<DiscoveryRequest>(body); }
};

enum class Attachment { Direct, Steered, Satellite, Searching };

constexpr std::string_view attachment_name(Attachment a) {
  switch (a) {
    case Attachment::Direct: return "direct";
    case Attachment::Steered: return "steered";
    case Attachment::Satellite: return "satellite";
    case Attachment::Searching: return "searching";
  }
  return "?";
}

struct DecisionRecord {
  SimTime at;
  NodeId ms;
  MscDecision decision;
  bool located = false;  // false: blind satellite search, no location reached the MSC
};

struct Delivery {
  SimTime at;
  NodeId bs;
  DiscoveryRequest request;
};

struct Emission {
  SimTime at;
  DiscoveryRequest request;
};

struct MoteReport {
  NodeId id;
  double energy = 0.0;
  MoteMode mode = MoteMode::Active;
};

struct MsReport {
  NodeId id;
  Attachment attachment = Attachment::Direct;
  Point position;
};

struct RunReport {
  StatsLedger ledger;
  std::vector<LinkRecord> links;
  std::vector<MoteReport> motes;
  std::uint64_t digest = 0;

  std::vector<MsReport> mobiles;
  std::vector<DecisionRecord> decisions;
  std::vector<Delivery> deliveries;
  std::vector<Emission> emissions;
  std::vector<std::string> dispatch_log;  // filled when RunOptions::keep_log
  std::size_t events_processed = 0;
};

struct RunOptions {
  bool keep_log = false;
};

namespace detail {

inline std::string join_ids(const std::vector<NodeId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(ids[i].value);
  }
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace detail

// Executes one scenario. Owns all per-node state and the event loop; never
// shared across threads.
class Simulation {
 public:
  explicit Simulation(Scenario scenario, RunOptions options = {})
      : sc_(std::move(scenario)), opts_(options), rng_(sc_.params.seed) {
    validate(sc_);
    steer_range_ = sc_.max_steer_range();
    for (const auto& n : sc_.nodes) {
      NodeRuntime rt;
      rt.spec = n;
      rt.profile = sc_.profile_of(n);
      rt.queue = StrictPriorityQueue(sc_.params.queue_capacity);
      rt.sat_queue = FifoQueue(sc_.params.queue_capacity);
      nodes_.emplace(n.id, std::move(rt));
      switch (n.kind) {
        case NodeKind::BaseStation:
          bs_positions_[n.id] = n.pos;
          bs_state_[n.id];
          break;
        case NodeKind::Mote: motes_[n.id]; break;
        case NodeKind::Satellite:
          if (!satellite_) satellite_ = n.id;
          break;
        case NodeKind::Msc: msc_id_ = n.id; break;
        case NodeKind::MobileStation: mobiles_[n.id]; break;
      }
      if (n.kind == NodeKind::BaseStation || n.kind == NodeKind::Mote) tables_[n.id] = init_table(n.id);
    }
  }

  RunReport run() {
    bootstrap();
    report_.events_processed =
        sched_.run_until(SimTime{sc_.params.duration}, [this](const EventT& ev) { dispatch(ev); });
    finish();
    return std::move(report_);
  }

 private:
  struct CoverageCheck {};
  struct AppTick {};
  struct DvTick {};
  struct TxReady {};
  struct RxFrame {
    std::shared_ptr<const Frame> frame;
    NodeId sender;
    PacketOutcome outcome;
  };
  struct MscRx {
    Escalation esc;
  };
  struct Decide {
    std::uint64_t request_id;
    NodeId ms;
    Point location;
    bool located;
    std::vector<NodeId> relay_path;
    NodeId via_bs;
  };
  struct BlindDetect {
    NodeId ms;
  };
  struct DiscoveryTimeout {
    std::uint64_t request_id;
  };
  struct SatRelay {
    NodeId from;
  };
  struct SatDeliver {
    NodeId from;
  };
  struct LinkUp {
    LinkRecord record;
  };

  using Payload = std::variant<CoverageCheck, AppTick, DvTick, TxReady, RxFrame, MscRx, Decide, BlindDetect,
                               DiscoveryTimeout, SatRelay, SatDeliver, LinkUp>;
  using EventT = Event<Payload>;

  struct NodeRuntime {
    NodeSpec spec;
    RadioProfile profile;
    StrictPriorityQueue queue;
    FifoQueue sat_queue;
    bool busy = false;
  };

  struct MobileRuntime {
    Attachment attachment = Attachment::Direct;
    std::optional<NodeId> serving;
    std::uint64_t request_id = 0;
    bool decided = false;
    bool started = false;
    std::uint64_t app_seq = 0;
  };

  // ---- setup and teardown ----

  void bootstrap() {
    // Random offsets are drawn in node-id order so a seed fixes the schedule.
    for (const auto& [id, table] : tables_) {
      sched_.schedule(SimTime{rng_.uniform(0.0, sc_.params.dv_period)}, id, DvTick{});
    }
    for (const auto& [id, ms] : mobiles_) {
      sched_.schedule(SimTime{0.0}, id, CoverageCheck{});
      sched_.schedule(SimTime{rng_.uniform(0.0, sc_.params.app_interval)}, id, AppTick{});
    }
  }

  void finish() {
    StatsLedger& L = report_.ledger;
    std::uint64_t peak = 0;
    for (const auto& [id, rt] : nodes_) {
      const auto& sp = rt.queue.counters();
      if (sp.queued) L.record({Layer::NetStrictPrior, "packets_queued"}, sp.queued);
      if (sp.dequeued) L.record({Layer::NetStrictPrior, "packets_dequeued"}, sp.dequeued);
      auto add_fifo = [&](const FifoQueue& q) {
        if (q.counters().queued) L.record({Layer::NetFifo, "total_packets_queued"}, q.counters().queued);
        if (q.counters().dequeued) L.record({Layer::NetFifo, "total_packets_dequeued"}, q.counters().dequeued);
        peak = std::max(peak, q.counters().peak_size);
      };
      for (int c = 0; c < kPriorityClasses; ++c) add_fifo(rt.queue.class_queue(c));
      add_fifo(rt.sat_queue);
    }
    L.raise_to({Layer::NetFifo, "peak_queue_size"}, peak);

    for (const auto& [id, st] : motes_) report_.motes.push_back(MoteReport{id, st.energy_consumed, st.mode});
    for (const auto& [id, ms] : mobiles_) {
      report_.mobiles.push_back(MsReport{id, ms.attachment, position(id, sched_.now())});
    }
    report_.digest = digest_.value();
  }

  // ---- geometry ----

  Point position(NodeId id, SimTime t) const {
    const NodeSpec& n = nodes_.at(id).spec;
    auto it = sc_.mobility.find(id);
    return it == sc_.mobility.end() ? n.pos : position_at(it->second, n.pos, t);
  }

  const CommGraph& graph() {
    if (!graph_time_ || *graph_time_ != sched_.now()) {
      std::vector<RadioNode> radios;
      radios.reserve(nodes_.size());
      for (const auto& [id, rt] : nodes_) {
        if (rt.spec.kind == NodeKind::Msc) continue;
        radios.push_back(RadioNode{id, rt.spec.kind, position(id, sched_.now()), rt.profile});
      }
      graph_ = comm_graph(std::span<const RadioNode>(radios));
      graph_time_ = sched_.now();
    }
    return graph_;
  }

  bool sleeping(NodeId id) const {
    auto it = motes_.find(id);
    return it != motes_.end() && it->second.mode == MoteMode::Sleeping;
  }

  bool dv_node(NodeId id) const { return tables_.count(id) > 0; }

  NodeId msc() const { return msc_id_.value_or(NodeId{0}); }

  // ---- ledger shorthands ----

  void count(Layer layer, std::string_view name, std::uint64_t delta = 1) {
    report_.ledger.record(CounterKey{layer, name}, delta);
  }

  std::uint64_t airtime_us() const {
    // 2 Mb/s backhaul
    return static_cast<std::uint64_t>(sc_.params.packet_size) * 8 / 2;
  }

  // ---- dispatch ----

  void log(const EventT& ev, std::string_view kind, const std::string& detail = {}) {
    std::string line = std::to_string(ev.seq) + " " + detail::fmt(ev.fire_time.seconds) + " " +
                       std::to_string(ev.target.value) + " " + std::string(kind);
    if (!detail.empty()) line += " " + detail;
    digest_.update(line);
    digest_.update("\n");
    if (opts_.keep_log) report_.dispatch_log.push_back(std::move(line));
  }

  void dispatch(const EventT& ev) {
    std::visit([&](const auto& p) { handle(ev, p); }, ev.payload);
  }

  void handle(const EventT& ev, const CoverageCheck&) {
    log(ev, "coverage");
    const NodeId ms = ev.target;
    MobileRuntime& st = mobiles_.at(ms);
    const CommGraph& g = graph();
    const Point pos = position(ms, sched_.now());
    const bool lost = detect_loss(ms, g);

    auto attach_direct = [&] {
      std::optional<NodeId> best;
      double best_d = 0.0;
      for (NodeId n : g.neighbors(ms)) {
        if (g.kind(n) != NodeKind::BaseStation) continue;
        const double d = distance(pos, bs_positions_.at(n));
        if (!best || d < best_d) {
          best = n;
          best_d = d;
        }
      }
      st.attachment = Attachment::Direct;
      st.serving = best;
    };

    switch (st.attachment) {
      case Attachment::Direct:
        if (!lost) {
          attach_direct();
        } else if (!st.started || st.serving) {
          start_handoff(ms, pos);
        }
        break;
      case Attachment::Steered:
        if (!lost) {
          attach_direct();
        } else if (!steer_feasible(bs_positions_.at(*st.serving), pos, steer_range_)) {
          start_handoff(ms, pos);
        }
        break;
      case Attachment::Satellite:
      case Attachment::Searching:
        break;
    }
    st.started = true;
    reschedule(ms, sc_.params.coverage_interval, CoverageCheck{});
  }

  void start_handoff(NodeId ms, Point pos) {
    MobileRuntime& st = mobiles_.at(ms);
    st.attachment = Attachment::Searching;
    st.serving.reset();
    st.decided = false;
    const CommGraph& g = graph();
    auto active = [this](NodeId m) { return !sleeping(m); };
    if (active_mote_neighbors(ms, g, active).empty()) {
      st.request_id = 0;
      sched_.schedule_in(sc_.params.satellite_search_delay, msc(), BlindDetect{ms});
      return;
    }
    DiscoveryRequest req = make_discovery(ms, pos, g, active, request_ids_, sc_.params.default_ttl);
    st.request_id = req.request_id;
    report_.emissions.push_back(Emission{sched_.now(), req});
    auto frame = std::make_shared<Frame>();
    frame->broadcast = true;
    frame->resolve = Frame::Targets::ActiveMotes;
    frame->ip_ttl = req.ttl;
    frame->body = std::move(req);
    send(ms, std::move(frame), kControlClass);
    sched_.schedule_in(sc_.params.discovery_timeout, ms, DiscoveryTimeout{st.request_id});
  }

  void handle(const EventT& ev, const DiscoveryTimeout& t) {
    log(ev, "discovery_timeout", "req=" + std::to_string(t.request_id));
    MobileRuntime& st = mobiles_.at(ev.target);
    if (st.attachment != Attachment::Searching || st.request_id != t.request_id || st.decided) return;
    sched_.schedule_in(sc_.params.satellite_search_delay, msc(), BlindDetect{ev.target});
  }

  void handle(const EventT& ev, const BlindDetect& b) {
    log(ev, "blind_detect", "ms=" + std::to_string(b.ms.value));
    MobileRuntime& st = mobiles_.at(b.ms);
    if (st.attachment != Attachment::Searching || st.decided) return;
    if (satellite_) {
      // The satellite reports the MS it found to the MSC.
      count(Layer::MacSatCom, "frames_relayed");
      count(Layer::MacSatCom, "frames_received");
    }
    const std::uint64_t id = request_ids_.next();
    st.request_id = id;
    sched_.schedule(sched_.now(), msc(), Decide{id, b.ms, position(b.ms, sched_.now()), false, {}, NodeId{0}});
  }

  void handle(const EventT& ev, const AppTick&) {
    log(ev, "app");
    const NodeId ms = ev.target;
    MobileRuntime& st = mobiles_.at(ms);
    const std::uint64_t seq = ++st.app_seq;
    switch (st.attachment) {
      case Attachment::Direct:
        if (st.serving && graph().adjacent(ms, *st.serving)) {
          auto f = std::make_shared<Frame>();
          f->targets = {*st.serving};
          f->body = AppData{seq};
          send(ms, std::move(f), kPayloadClass);
        }
        break;
      case Attachment::Steered: {
        auto f = std::make_shared<Frame>();
        f->beam = true;
        f->targets = {*st.serving};
        f->body = AppData{seq};
        send(ms, std::move(f), kPayloadClass);
        break;
      }
      case Attachment::Satellite:
        satellite_uplink(ms, seq);
        break;
      case Attachment::Searching:
        break;
    }
    reschedule(ms, sc_.params.app_interval, AppTick{});
  }

  void handle(const EventT& ev, const DvTick&) {
    log(ev, "dv_periodic");
    const NodeId id = ev.target;
    if (sleeping(id)) return;
    emit_route_update(id, periodic_update(tables_.at(id)));
    reschedule(id, sc_.params.dv_period, DvTick{});
  }

  void emit_route_update(NodeId id, RouteUpdate u) {
    auto f = std::make_shared<Frame>();
    f->broadcast = true;
    f->resolve = Frame::Targets::DvNeighbors;
    f->body = std::move(u);
    send(id, std::move(f), kControlClass);
  }

  // ---- 802.11 interface ----

  void send(NodeId from, std::shared_ptr<Frame> frame, int cls) {
    NodeRuntime& rt = nodes_.at(from);
    if (sleeping(from)) return;
    frame->packet = Packet{++packet_ids_, from, frame->targets.size() == 1 ? frame->targets[0] : NodeId{0}, cls,
                           sc_.params.packet_size};
    count(Layer::NetIp, "out_requests");
    if (frame->is_udp()) count(Layer::TransportUdp, "packets_from_app");
    if (rt.queue.enqueue(frame->packet) == EnqueueResult::Dropped) return;
    in_flight_.emplace(frame->packet.id, std::move(frame));
    if (!rt.busy) {
      rt.busy = true;
      sched_.schedule(sched_.now(), from, TxReady{});
    }
  }

  std::vector<NodeId> resolve_receivers(NodeId from, const Frame& f) {
    const CommGraph& g = graph();
    std::vector<NodeId> out;
    switch (f.resolve) {
      case Frame::Targets::Explicit:
        for (NodeId t : f.targets) {
          if (f.beam || g.adjacent(from, t)) out.push_back(t);
        }
        break;
      case Frame::Targets::DvNeighbors:
        for (NodeId n : g.neighbors(from)) {
          if (dv_node(n)) out.push_back(n);
        }
        break;
      case Frame::Targets::ActiveMotes:
        for (NodeId n : g.neighbors(from)) {
          if (g.kind(n) == NodeKind::Mote) out.push_back(n);
        }
        break;
    }
    std::erase_if(out, [this](NodeId n) { return sleeping(n); });
    return out;
  }

  void handle(const EventT& ev, const TxReady&) {
    const NodeId from = ev.target;
    NodeRuntime& rt = nodes_.at(from);
    auto pkt = rt.queue.dequeue();
    if (!pkt) {
      log(ev, "tx_idle");
      rt.busy = false;
      return;
    }
    auto node = in_flight_.extract(pkt->id);
    std::shared_ptr<const Frame> frame = std::move(node.mapped());
    log(ev, "tx", frame_tag(*frame));

    count(Layer::Phy80211, "signals_transmitted");
    count(Layer::Mac80211, "packets_from_network");
    if (frame->broadcast) {
      count(Layer::Mac80211, "broadcast_sent");
      count(Layer::MacDcf, "broadcast_signals_sent");
    }
    if (motes_.count(from) && std::holds_alternative<RouteUpdate>(frame->body)) {
      motes_.at(from).energy_consumed += sc_.params.tx_energy;
    }

    const Point src = position(from, sched_.now());
    for (NodeId r : resolve_receivers(from, *frame)) {
      PacketOutcome outcome = PacketOutcome::Delivered;
      if (!frame->beam) {
        const RadioProfile& lp = link_profile(rt.profile, nodes_.at(r).profile);
        outcome = packet_outcome(lp, received_power(lp, distance(src, position(r, sched_.now()))));
      }
      sched_.schedule_in(sc_.params.tx_time, r, RxFrame{frame, from, outcome});
    }
    if (!rt.queue.empty()) {
      sched_.schedule_in(sc_.params.tx_time, from, TxReady{});
    } else {
      rt.busy = false;
    }
  }

  static std::string frame_tag(const Frame& f) {
    if (const auto* d = std::get_if<DiscoveryRequest>(&f.body)) {
      return "discovery req=" + std::to_string(d->request_id) + " ttl=" + std::to_string(d->ttl) +
             " path=" + detail::join_ids(d->path);
    }
    if (const auto* u = std::get_if<RouteUpdate>(&f.body)) {
      return std::string(u->triggered ? "dv_triggered" : "dv_periodic") + " entries=" + std::to_string(u->vector.size());
    }
    return std::string(f.beam ? "app_beam" : "app") + " seq=" + std::to_string(std::get<AppData>(f.body).seq);
  }

  void handle(const EventT& ev, const RxFrame& rx) {
    const NodeId me = ev.target;
    log(ev, "rx", "from=" + std::to_string(rx.sender.value) + " " + frame_tag(*rx.frame) + " outcome=" +
                      (rx.outcome == PacketOutcome::Delivered ? "ok" : rx.outcome == PacketOutcome::Errored ? "err" : "lost"));
    if (sleeping(me)) return;
    if (rx.outcome == PacketOutcome::Lost) return;
    count(Layer::Phy80211, "signals_locked_on");
    if (rx.outcome == PacketOutcome::Errored) {
      count(Layer::Phy80211, "signals_received_with_errors");
      return;
    }
    const Frame& f = *rx.frame;
    count(Layer::Phy80211, "signals_received_to_mac");
    if (f.broadcast) {
      count(Layer::Mac80211, "broadcast_received_clearly");
      count(Layer::MacDcf, "broadcast_signals_received");
    }
    count(Layer::NetIp, "in_received");
    count(Layer::NetIp, "in_delivers");
    count(Layer::NetIp, "in_delivers_ttl_sum", static_cast<std::uint64_t>(std::max(f.ip_ttl - 1, 0)));
    if (f.is_udp()) count(Layer::TransportUdp, "packets_to_app");

    if (const auto* req = std::get_if<DiscoveryRequest>(&f.body)) {
      on_discovery(me, *req);
    } else if (const auto* upd = std::get_if<RouteUpdate>(&f.body)) {
      on_route_update(me, *upd);
    }
  }

  void on_discovery(NodeId me, const DiscoveryRequest& req) {
    const NodeKind kind = nodes_.at(me).spec.kind;
    if (kind == NodeKind::Mote) {
      auto active = [this](NodeId m) { return !sleeping(m); };
      for (auto& action : mote_forward(me, motes_.at(me), req, graph(), active, sc_.params.tx_energy)) {
        auto f = std::make_shared<Frame>();
        f->broadcast = action.kind == ForwardAction::Kind::Broadcast;
        f->targets = std::move(action.targets);
        f->ip_ttl = action.request.ttl;
        f->body = std::move(action.request);
        send(me, std::move(f), kControlClass);
      }
    } else if (kind == NodeKind::BaseStation) {
      report_.deliveries.push_back(Delivery{sched_.now(), me, req});
      if (auto esc = bs_notify_msc(me, bs_state_.at(me), req)) {
        count(Layer::MacLink, "frames_sent");
        count(Layer::MacLink, "link_utilization", airtime_us());
        sched_.schedule_in(sc_.params.backhaul_delay, msc(), MscRx{std::move(*esc)});
      }
    }
  }

  void on_route_update(NodeId me, const RouteUpdate& upd) {
    if (!dv_node(me)) return;
    count(Layer::AppBellmanFord, "update_packets_received");
    std::vector<NodeId> nbrs;
    for (NodeId n : graph().neighbors(me)) {
      if (dv_node(n)) nbrs.push_back(n);
    }
    DistanceVector& table = tables_.at(me);
    if (!apply_update(table, upd, nbrs).empty()) {
      count(Layer::AppBellmanFord, "triggered_updates");
      emit_route_update(me, triggered_update(table));
    }
  }

  // ---- MSC and link establishment ----

  void handle(const EventT& ev, const MscRx& m) {
    log(ev, "msc_rx", "req=" + std::to_string(m.esc.request_id) + " bs=" + std::to_string(m.esc.bs.value));
    count(Layer::MacLink, "frames_received");
    if (!msc_state_.accept(m.esc.request_id)) return;
    MobileRuntime& st = mobiles_.at(m.esc.ms_id);
    if (st.attachment == Attachment::Searching && st.request_id == m.esc.request_id) st.decided = true;
    sched_.schedule(sched_.now(), msc(),
                    Decide{m.esc.request_id, m.esc.ms_id, m.esc.ms_location, true, m.esc.relay_path, m.esc.bs});
  }

  void handle(const EventT& ev, const Decide& d) {
    MscDecision decision = msc_decide(d.request_id, d.location, d.located ? bs_positions_ : std::map<NodeId, Point>{},
                                      steer_range_, satellite_);
    mobiles_.at(d.ms).decided = true;
    const bool steer = decision.steers();
    log(ev, "decide",
        "req=" + std::to_string(d.request_id) + " ms=" + std::to_string(d.ms.value) + " " +
            (steer ? "steer bs=" + std::to_string(std::get<SteerTo>(decision.outcome).bs.value)
                   : "satellite sat=" + std::to_string(std::get<SatelliteFallback>(decision.outcome).satellite.value)));
    report_.decisions.push_back(DecisionRecord{sched_.now(), d.ms, decision, d.located});

    if (steer) {
      count(Layer::MacLink, "frames_sent");
      count(Layer::MacLink, "frames_received");
      count(Layer::MacLink, "link_utilization", airtime_us());
    } else {
      // MSC -> satellite -> MS location page.
      count(Layer::MacSatCom, "frames_sent");
      count(Layer::MacSatCom, "frames_relayed");
      count(Layer::MacSatCom, "frames_received");
    }

    DiscoveryRequest req{d.request_id, d.ms, d.location, 0, d.relay_path};
    LinkRecord rec = establish_link(decision, req, sched_.now(),
                                    HandoffDelays{sc_.params.steering_delay, sc_.params.satellite_acquisition_delay});
    if (!d.relay_path.empty()) {
      try {
        rec.dv_path = shortest_path(tables_, d.relay_path.front(), d.via_bs);
      } catch (const Error&) {
        rec.dv_path.clear();
      }
    }
    sched_.schedule(rec.established_at, d.ms, LinkUp{std::move(rec)});
  }

  void handle(const EventT& ev, const LinkUp& l) {
    const LinkRecord& rec = l.record;
    log(ev, "link_up", "req=" + std::to_string(rec.request_id) + " path=" + detail::join_ids(rec.relay_path));
    MobileRuntime& st = mobiles_.at(rec.ms_id);
    if (rec.endpoint.kind == LinkEndpoint::Kind::Bs) {
      st.attachment = Attachment::Steered;
      st.serving = rec.endpoint.id;
    } else {
      st.attachment = Attachment::Satellite;
      st.serving = rec.endpoint.id;
    }
    report_.links.push_back(rec);
    release_motes(rec.relay_path, motes_);
    for (NodeId m : rec.relay_path) {
      auto it = nodes_.find(m);
      if (it != nodes_.end()) it->second.queue.flush();
    }
  }

  // ---- satellite path ----

  void satellite_uplink(NodeId ms, std::uint64_t /*seq*/) {
    NodeRuntime& rt = nodes_.at(ms);
    Packet p{++packet_ids_, ms, satellite_.value_or(NodeId{0}), kPayloadClass, sc_.params.packet_size};
    count(Layer::NetIp, "out_requests");
    count(Layer::TransportUdp, "packets_from_app");
    if (rt.sat_queue.enqueue(p) == EnqueueResult::Dropped) return;
    rt.sat_queue.dequeue();
    count(Layer::MacSatCom, "frames_sent");
    if (satellite_) sched_.schedule_in(sc_.params.satellite_hop_delay, *satellite_, SatRelay{ms});
  }

  void handle(const EventT& ev, const SatRelay& r) {
    log(ev, "sat_relay", "from=" + std::to_string(r.from.value));
    NodeRuntime& sat = nodes_.at(ev.target);
    Packet p{++packet_ids_, r.from, msc(), kPayloadClass, sc_.params.packet_size};
    if (sat.sat_queue.enqueue(p) == EnqueueResult::Dropped) return;
    sat.sat_queue.dequeue();
    count(Layer::MacSatCom, "frames_relayed");
    sched_.schedule_in(sc_.params.satellite_hop_delay, msc(), SatDeliver{r.from});
  }

  void handle(const EventT& ev, const SatDeliver& d) {
    log(ev, "sat_deliver", "from=" + std::to_string(d.from.value));
    count(Layer::MacSatCom, "frames_received");
    count(Layer::NetIp, "in_received");
    count(Layer::NetIp, "in_delivers");
    count(Layer::NetIp, "in_delivers_ttl_sum", 63);
    count(Layer::TransportUdp, "packets_to_app");
  }

  template <typename P>
  void reschedule(NodeId id, double period, P payload) {
    const SimTime next = sched_.now() + period;
    if (next.seconds <= sc_.params.duration) sched_.schedule(next, id, std::move(payload));
  }

  Scenario sc_;
  RunOptions opts_;
  RngStream rng_;
  Scheduler<Payload> sched_;
  Fnv1a64 digest_;
  RunReport report_;

  double steer_range_ = 0.0;
  std::map<NodeId, NodeRuntime> nodes_;
  std::map<NodeId, MoteState> motes_;
  std::map<NodeId, MobileRuntime> mobiles_;
  std::map<NodeId, BsState> bs_state_;
  std::map<NodeId, Point> bs_positions_;
  std::map<NodeId, DistanceVector> tables_;
  std::optional<NodeId> satellite_;
  std::optional<NodeId> msc_id_;
  MscState msc_state_;
  RequestIdSource request_ids_;
  std::uint64_t packet_ids_ = 0;
  std::map<std::uint64_t, std::shared_ptr<Frame>> in_flight_;

  CommGraph graph_;
  std::optional<SimTime> graph_time_;
};

inline RunReport run(const Scenario& s, RunOptions options = {}) { return Simulation(s, options).run(); }

// ---- report file ----

inline std::string endpoint_str(const LinkEndpoint& e) {
  return (e.kind == LinkEndpoint::Kind::Bs ? "bs:" : "sat:") + std::to_string(e.id.value);
}

// key=value ledger lines, then link, energy and digest lines. A readable
// table follows as '#' comments.
inline std::string serialize_report(const RunReport& r) {
  std::string out = render_ledger(r.ledger);
  for (const auto& l : r.links) {
    out += "link " + std::to_string(l.ms_id.value) + " " + endpoint_str(l.endpoint) + " " +
           detail::fmt(l.established_at.seconds) + " " + detail::join_ids(l.relay_path) + " " +
           detail::join_ids(l.dv_path) + "\n";
  }
  for (const auto& m : r.motes) {
    out += "energy " + std::to_string(m.id.value) + " " + detail::fmt(m.energy) + " " +
           (m.mode == MoteMode::Active ? "active" : "sleeping") + "\n";
  }
  out += "digest " + detail::hex64(r.digest) + "\n";

  out += "#\n";
  std::size_t width = 0;
  for (const auto& k : r.ledger.keys()) width = std::max(width, k.size());
  for (std::size_t i = 0; i < r.ledger.keys().size(); ++i) {
    const std::string& k = r.ledger.keys()[i];
    out += "# " + k + std::string(width - k.size() + 2, ' ') + std::to_string(r.ledger.values()[i]) + "\n";
  }
  return out;
}

struct ParsedLink {
  NodeId ms;
  std::string endpoint;
  double time = 0.0;
  std::string relay_path;
  std::string dv_path;

  bool operator==(const ParsedLink&) const = default;
};

struct ParsedReport {
  StatsLedger ledger;
  std::vector<ParsedLink> links;
  std::vector<MoteReport> motes;
  std::uint64_t digest = 0;
};

inline ParsedReport parse_report(std::string_view text) {
  std::vector<std::string> keys;
  std::vector<std::uint64_t> values;
  ParsedReport out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  bool have_digest = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string l = detail::trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto toks = detail::split_ws(l);
    if (toks[0] == "link") {
      if (toks.size() != 6) detail::parse_fail(line, "link line needs 5 fields");
      out.links.push_back(ParsedLink{NodeId{detail::to_int<std::uint32_t>(toks[1], line)}, toks[2],
                                     detail::to_double(toks[3], line), toks[4], toks[5]});
    } else if (toks[0] == "energy") {
      if (toks.size() != 4) detail::parse_fail(line, "energy line needs 3 fields");
      MoteMode mode = MoteMode::Active;
      if (toks[3] == "sleeping") mode = MoteMode::Sleeping;
      else if (toks[3] != "active") detail::parse_fail(line, "unknown mote mode '" + toks[3] + "'");
      out.motes.push_back(MoteReport{NodeId{detail::to_int<std::uint32_t>(toks[1], line)},
                                     detail::to_double(toks[2], line), mode});
    } else if (toks[0] == "digest") {
      if (toks.size() != 2) detail::parse_fail(line, "digest line needs a value");
      std::uint64_t v = 0;
      auto r = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), v, 16);
      if (r.ec != std::errc{} || r.ptr != toks[1].data() + toks[1].size()) detail::parse_fail(line, "bad digest");
      out.digest = v;
      have_digest = true;
    } else {
      auto [k, v] = detail::split_kv(l, line);
      keys.push_back(k);
      values.push_back(detail::to_int<std::uint64_t>(v, line));
    }
  }
  if (!have_digest) throw Error(Errc::ParseError, "report has no digest line");
  out.ledger = StatsLedger(std::move(keys), std::move(values));
  return out;
}

}  // namespace wsnho
