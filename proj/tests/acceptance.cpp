// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flood_harness.hpp"
#include "oracles.hpp"
#include "random_world.hpp"
#include "wsnho/cli.hpp"
#include "wsnho/wsnho.hpp"

using namespace wsnho;

namespace {

struct Check {
  bool ok = true;
  std::string note;

  void require(bool cond, const std::string& why) {
    if (!cond && ok) {
      ok = false;
      note = why;
    }
  }
};

// ---- 1 ----
Check qos_arithmetic() {
  Check c;
  const double q = qos_improvement(11, 4);
  c.require(std::abs(q - 73.33) <= 0.01, "got " + std::to_string(q));
  c.require(format_percent(q) == "73.33", "formatted " + format_percent(q));
  c.note = c.ok ? "d=11 u=4 i=13 -> " + format_percent(q) + "%" : c.note;
  return c;
}

// ---- 2 ----
Check paper_behaviour() {
  Check c;
  const Scenario s = paper_scenario();
  const RunReport r = run(s);

  // (a) loss at the halt points
  std::vector<RadioNode> at_halt;
  for (const auto& n : s.nodes) {
    Point p = n.pos;
    if (auto m = s.mobility.find(n.id); m != s.mobility.end()) p = position_at(m->second, n.pos, SimTime{1e9});
    at_halt.push_back({n.id, n.kind, p, s.profile_of(n)});
  }
  const CommGraph g = comm_graph(std::span<const RadioNode>(at_halt));
  for (const auto& [id, _] : s.mobility) c.require(detect_loss(id, g), "MS " + std::to_string(id.value) + " still covered at halt");

  // (b) satellite decisions and (c) satellite links for both MS
  std::set<NodeId> sat_decided, sat_linked;
  for (const auto& d : r.decisions) {
    if (!d.decision.steers()) sat_decided.insert(d.ms);
  }
  for (const auto& l : r.links) {
    if (l.endpoint.kind == LinkEndpoint::Kind::Satellite) sat_linked.insert(l.ms_id);
  }
  c.require(sat_decided.size() == 2, "satellite decisions for " + std::to_string(sat_decided.size()) + " MS");
  c.require(sat_linked.size() == 2, "satellite links for " + std::to_string(sat_linked.size()) + " MS");

  // (d) relay motes asleep, energy unchanged by a longer run
  std::set<NodeId> relays;
  for (const auto& l : r.links) relays.insert(l.relay_path.begin(), l.relay_path.end());
  Scenario longer = s;
  longer.params.duration *= 2;
  const RunReport r2 = run(longer);
  std::map<NodeId, MoteReport> later;
  for (const auto& m : r2.motes) later[m.id] = m;
  for (const auto& m : r.motes) {
    if (!relays.count(m.id)) continue;
    c.require(m.mode == MoteMode::Sleeping, "relay mote " + std::to_string(m.id.value) + " awake");
    c.require(later.at(m.id).energy == m.energy, "relay mote " + std::to_string(m.id.value) + " energy moved");
  }
  c.require(!relays.empty(), "no relay path recorded");
  if (c.ok) c.note = std::to_string(relays.size()) + " relay motes asleep, " + std::to_string(r.links.size()) + " links";
  return c;
}

// ---- 3 ----
Check direction_reproduction() {
  Check c;
  const char* keys[] = {"phy80211.signals_transmitted", "mac80211.broadcast_sent", "mac_satcom.frames_relayed",
                        "app_bellman_ford.triggered_updates", "app_bellman_ford.update_packets_received"};
  int seeds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Scenario s = paper_scenario();
    s.params.seed = seed;
    const RunReport wsn = run(s);
    const RunReport base = run(strip_wsn(s));
    for (const char* k : keys) {
      c.require(wsn.ledger.get(k) > base.ledger.get(k),
                std::string(k) + " seed " + std::to_string(seed) + ": " + std::to_string(wsn.ledger.get(k)) +
                    " <= " + std::to_string(base.ledger.get(k)));
    }
    ++seeds;
  }
  if (c.ok) c.note = "5 counters up with motes on " + std::to_string(seeds) + " seeds";
  return c;
}

// ---- 4 ----
// Random unit-disk fields with a static MS outside BS coverage. Both the
// full simulator and the synchronous flood must agree with BFS reachability.
Check flooding_oracle() {
  Check c;
  int reached = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    RngStream rng(seed * 7919);
    const auto w = randworld::make_flood_world(rng);
    std::vector<RadioNode> terr;
    std::map<NodeId, NodeKind> kinds;
    for (const auto& n : w.nodes) {
      if (terrestrial(n.kind)) {
        terr.push_back(n);
        kinds[n.id] = n.kind;
      }
    }
    const auto adj = oracle::brute_force_edges(terr);
    const bool expected = oracle::flood_reaches_bs(adj, kinds, w.ms, kDefaultTtl);
    const CommGraph g = comm_graph(std::span<const RadioNode>(w.nodes));
    const std::string tag = "seed " + std::to_string(seed) + ": ";

    // synchronous flood
    harness::FloodResult fr;
    try {
      fr = harness::flood(g, w.ms, kDefaultTtl);
    } catch (const Error&) {
    }
    c.require(!fr.arrivals.empty() == expected, tag + "flood harness disagrees with BFS");

    // full simulator, first discovery only
    Scenario s;
    s.params.duration = 30.0;
    s.params.seed = seed;
    for (const auto& n : w.nodes) s.nodes.push_back({n.id, n.kind, n.pos, n.profile});
    const RunReport r = run(s);
    std::vector<const Delivery*> hits;
    if (!r.emissions.empty()) {
      const auto first = r.emissions.front().request.request_id;
      for (const auto& d : r.deliveries) {
        if (d.request.request_id == first) hits.push_back(&d);
      }
    }
    c.require(!hits.empty() == expected, tag + "simulator delivery " + (hits.empty() ? "missing" : "unexpected"));
    for (const Delivery* d : hits) {
      const auto& p = d->request.path;
      c.require(!p.empty(), tag + "empty relay path");
      if (p.empty()) continue;
      c.require(std::set<NodeId>(p.begin(), p.end()).size() == p.size(), tag + "path revisits a mote");
      c.require(g.adjacent(w.ms, p.front()) && g.adjacent(p.back(), d->bs), tag + "path ends not adjacent");
      for (std::size_t i = 0; i + 1 < p.size(); ++i) c.require(g.adjacent(p[i], p[i + 1]), tag + "path hop not an edge");
    }
    reached += expected;
    ++total;
  }
  c.require(reached > 0 && reached < total, "random fields never exercised both outcomes");
  if (c.ok) c.note = std::to_string(total) + " fields, " + std::to_string(reached) + " reachable";
  return c;
}

// ---- 5 ----
Check dv_oracle() {
  Check c;
  int graphs = 0, partitioned = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    RngStream rng(seed * 104729);
    const int n = 1 + static_cast<int>(rng.below(12));
    const auto adj = randworld::random_graph(rng, n, rng.uniform(0.05, 0.5));
    std::map<NodeId, DistanceVector> tables;
    for (const auto& [id, _] : adj) tables[id] = init_table(id);
    converge(tables, adj);
    bool split = false;
    for (const auto& [src, _] : adj) {
      const auto hops = oracle::bfs_hops(adj, src);
      for (const auto& [dst, __] : adj) {
        auto h = hops.find(dst);
        const int want = h == hops.end() ? kInfinityMetric : h->second;
        split |= h == hops.end();
        c.require(tables.at(src).metric_to(dst) == want, "seed " + std::to_string(seed) + " metric mismatch");
      }
    }
    partitioned += split;
    const auto settled = tables;
    for (const auto& [id, nbrs] : adj) {
      for (NodeId nb : nbrs) {
        c.require(apply_update(tables.at(nb), periodic_update(settled.at(id)), adj.at(nb)).empty(),
                  "seed " + std::to_string(seed) + " update not idempotent");
      }
    }
    c.require(tables == settled, "seed " + std::to_string(seed) + " tables moved");
    ++graphs;
  }
  c.require(partitioned > 0, "no partitioned graph generated");
  if (c.ok) c.note = std::to_string(graphs) + " graphs, " + std::to_string(partitioned) + " partitioned";
  return c;
}

// ---- 6 ----
Check determinism() {
  Check c;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "wsnho_acceptance";
  fs::create_directories(dir);
  const std::string a = (dir / "a.txt").string(), b = (dir / "b.txt").string();
  std::ostringstream sink;
  c.require(cli::run_cli({"run", "--scenario", "paper", "--seed", "5", "--out", a}, sink, sink) == 0, "first run failed");
  c.require(cli::run_cli({"run", "--scenario", "paper", "--seed", "5", "--out", b}, sink, sink) == 0, "second run failed");
  c.require(cli::read_file(a) == cli::read_file(b), "report bytes differ");
  RunOptions o;
  o.keep_log = true;
  Scenario s = paper_scenario();
  s.params.seed = 5;
  const RunReport r1 = run(s, o), r2 = run(s, o);
  c.require(r1.digest == r2.digest && r1.dispatch_log == r2.dispatch_log, "dispatch logs differ");
  fs::remove_all(dir);
  if (c.ok) c.note = "digest " + detail::hex64(r1.digest) + " twice";
  return c;
}

// ---- 7 ----
Check queue_properties() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RngStream rng(seed);
    const std::size_t cap = 1 + static_cast<std::size_t>(rng.below(10));
    StrictPriorityQueue sp(cap);
    FifoQueue fifo(cap);
    oracle::ReferenceFifo ref{cap, {}};
    std::uint64_t peak = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
      if (rng.draw() < 0.55) {
        const int cls = static_cast<int>(rng.below(3));
        sp.enqueue(Packet{i, NodeId{1}, NodeId{2}, cls, 64});
        const bool acc = fifo.enqueue(Packet{i, NodeId{1}, NodeId{2}, kPayloadClass, 64}) == EnqueueResult::Accepted;
        c.require(acc == ref.push(i), "fifo accept differs from reference");
      } else {
        std::size_t lower_nonempty = 3;
        for (int k = 2; k >= 0; --k) {
          if (!sp.class_queue(k).empty()) lower_nonempty = static_cast<std::size_t>(k);
        }
        if (auto p = sp.dequeue()) {
          c.require(static_cast<std::size_t>(p->priority_class) == lower_nonempty, "strict priority violated");
        }
        auto got = fifo.dequeue();
        auto want = ref.pop();
        c.require(got.has_value() == want.has_value() && (!got || got->id == *want), "fifo order differs");
      }
      peak = std::max<std::uint64_t>(peak, sp.size());
      const auto& a = sp.counters();
      const auto& f = fifo.counters();
      c.require(a.queued == a.dequeued + a.dropped + sp.size(), "strict-priority conservation broken");
      c.require(f.queued == f.dequeued + f.dropped + fifo.size(), "fifo conservation broken");
    }
    c.require(sp.counters().peak_size == peak, "strict-priority peak wrong");
    c.require(fifo.counters().peak_size == ref.peak, "fifo peak wrong");
  }
  if (c.ok) c.note = "20 traces x 1000 ops";
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"qos-arithmetic", qos_arithmetic},         {"paper-scenario", paper_behaviour},
      {"direction-reproduction", direction_reproduction}, {"flooding-oracle", flooding_oracle},
      {"dv-oracle", dv_oracle},                   {"determinism", determinism},
      {"queue-properties", queue_properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.note = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu %-24s %s (%.2fs) %s\n", i + 1, criteria[i].first.c_str(), c.ok ? "PASS" : "FAIL", secs,
                c.note.c_str());
    failed += !c.ok;
  }
  std::fflush(stdout);
  return failed;
}
