#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wsnho/error.hpp"

namespace wsnho {

enum class Layer {
  Phy80211,
  Mac80211,
  MacDcf,
  MacLink,
  MacSatCom,
  NetIp,
  NetStrictPrior,
  NetFifo,
  TransportUdp,
  AppBellmanFord,
};

constexpr std::string_view layer_name(Layer l) {
  switch (l) {
    case Layer::Phy80211: return "phy80211";
    case Layer::Mac80211: return "mac80211";
    case Layer::MacDcf: return "mac_dcf";
    case Layer::MacLink: return "mac_link";
    case Layer::MacSatCom: return "mac_satcom";
    case Layer::NetIp: return "net_ip";
    case Layer::NetStrictPrior: return "net_strict_prior";
    case Layer::NetFifo: return "net_fifo";
    case Layer::TransportUdp: return "transport_udp";
    case Layer::AppBellmanFord: return "app_bellman_ford";
  }
  return "?";
}

struct CounterKey {
  Layer layer;
  std::string_view name;

  std::string str() const { return std::string(layer_name(layer)) + "." + std::string(name); }

  constexpr bool operator==(const CounterKey&) const = default;
};

enum class Direction { GoodIncreasing, BadIncreasing, Neutral };

struct RegistryEntry {
  CounterKey key;
  Direction direction;
};

// The per-layer counters compared between runs, in report order, with the
// default judgement of an increase. Unannotated counters count an increase as
// good; error and queue-occupancy counters count it as bad.
inline constexpr std::array<RegistryEntry, 28> kRegistry{{
    {{Layer::Phy80211, "signals_transmitted"}, Direction::GoodIncreasing},
    {{Layer::Phy80211, "signals_received_to_mac"}, Direction::GoodIncreasing},
    {{Layer::Phy80211, "signals_locked_on"}, Direction::GoodIncreasing},
    {{Layer::Phy80211, "signals_received_with_errors"}, Direction::BadIncreasing},
    {{Layer::Mac80211, "packets_from_network"}, Direction::GoodIncreasing},
    {{Layer::Mac80211, "broadcast_sent"}, Direction::GoodIncreasing},
    {{Layer::Mac80211, "broadcast_received_clearly"}, Direction::GoodIncreasing},
    {{Layer::MacDcf, "broadcast_signals_sent"}, Direction::GoodIncreasing},
    {{Layer::MacDcf, "broadcast_signals_received"}, Direction::GoodIncreasing},
    {{Layer::MacLink, "frames_sent"}, Direction::GoodIncreasing},
    {{Layer::MacLink, "frames_received"}, Direction::GoodIncreasing},
    {{Layer::MacLink, "link_utilization"}, Direction::GoodIncreasing},
    {{Layer::MacSatCom, "frames_sent"}, Direction::GoodIncreasing},
    {{Layer::MacSatCom, "frames_received"}, Direction::GoodIncreasing},
    {{Layer::MacSatCom, "frames_relayed"}, Direction::GoodIncreasing},
    {{Layer::NetIp, "in_received"}, Direction::GoodIncreasing},
    {{Layer::NetIp, "in_delivers"}, Direction::GoodIncreasing},
    {{Layer::NetIp, "out_requests"}, Direction::GoodIncreasing},
    {{Layer::NetIp, "in_delivers_ttl_sum"}, Direction::GoodIncreasing},
    {{Layer::NetStrictPrior, "packets_queued"}, Direction::BadIncreasing},
    {{Layer::NetStrictPrior, "packets_dequeued"}, Direction::GoodIncreasing},
    {{Layer::NetFifo, "total_packets_queued"}, Direction::BadIncreasing},
    {{Layer::NetFifo, "total_packets_dequeued"}, Direction::GoodIncreasing},
    {{Layer::NetFifo, "peak_queue_size"}, Direction::BadIncreasing},
    {{Layer::TransportUdp, "packets_from_app"}, Direction::GoodIncreasing},
    {{Layer::TransportUdp, "packets_to_app"}, Direction::GoodIncreasing},
    {{Layer::AppBellmanFord, "triggered_updates"}, Direction::GoodIncreasing},
    {{Layer::AppBellmanFord, "update_packets_received"}, Direction::GoodIncreasing},
}};

inline constexpr std::size_t kRegistrySize = kRegistry.size();

inline std::vector<std::string> registry_keys() {
  std::vector<std::string> keys;
  keys.reserve(kRegistrySize);
  for (const auto& e : kRegistry) keys.push_back(e.key.str());
  return keys;
}

// Counter values keyed by "layer.name", kept in registry order. Ledgers
// built in-process use the fixed registry; ledgers read back from report
// files keep whatever keys the file carried so mismatches can be reported.
class StatsLedger {
 public:
  StatsLedger() : keys_(registry_keys()), values_(keys_.size(), 0) {}

  StatsLedger(std::vector<std::string> keys, std::vector<std::uint64_t> values)
      : keys_(std::move(keys)), values_(std::move(values)) {
    if (keys_.size() != values_.size()) throw Error(Errc::RegistryMismatch, "key/value count differs");
  }

  void record(const CounterKey& key, std::uint64_t delta = 1) { record(key.str(), delta); }

  void record(std::string_view key, std::uint64_t delta = 1) { values_[index_of(key)] += delta; }

  // High-water-mark counters only ever rise.
  void raise_to(const CounterKey& key, std::uint64_t value) {
    auto& v = values_[index_of(key.str())];
    v = std::max(v, value);
  }

  std::uint64_t operator[](const CounterKey& key) const { return get(key.str()); }
  std::uint64_t get(std::string_view key) const { return values_[index_of(key)]; }

  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<std::uint64_t>& values() const { return values_; }

  bool operator==(const StatsLedger&) const = default;

 private:
  std::size_t index_of(std::string_view key) const {
    auto it = std::find(keys_.begin(), keys_.end(), key);
    if (it == keys_.end()) throw Error(Errc::UnknownCounter, std::string(key));
    return static_cast<std::size_t>(it - keys_.begin());
  }

  std::vector<std::string> keys_;
  std::vector<std::uint64_t> values_;
};

using DirectionMap = std::map<std::string, Direction>;

inline DirectionMap default_directions() {
  DirectionMap m;
  for (const auto& e : kRegistry) m[e.key.str()] = e.direction;
  return m;
}

inline std::optional<Direction> parse_direction(std::string_view s) {
  if (s == "good" || s == "GoodIncreasing") return Direction::GoodIncreasing;
  if (s == "bad" || s == "BadIncreasing") return Direction::BadIncreasing;
  if (s == "neutral" || s == "Neutral") return Direction::Neutral;
  return std::nullopt;
}

// Applies "layer.name=good|bad|neutral" lines over the defaults.
inline DirectionMap load_directions(std::string_view text) {
  DirectionMap m = default_directions();
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": expected key=value");
    auto strip = [](std::string t) {
      t.erase(0, t.find_first_not_of(" \t"));
      t.erase(t.find_last_not_of(" \t") + 1);
      return t;
    };
    const std::string key = strip(line.substr(0, eq));
    const auto dir = parse_direction(strip(line.substr(eq + 1)));
    if (!m.count(key)) throw Error(Errc::UnknownCounter, key);
    if (!dir) throw Error(Errc::ParseError, "line " + std::to_string(lineno) + ": unknown direction");
    m[key] = *dir;
  }
  return m;
}

enum class Verdict { Desirable, Undesirable, Insignificant };

constexpr std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Desirable: return "Desirable";
    case Verdict::Undesirable: return "Undesirable";
    case Verdict::Insignificant: return "Insignificant";
  }
  return "?";
}

struct ClassifiedCounter {
  std::string key;
  Verdict verdict;
  std::int64_t delta;
};

struct Classification {
  std::vector<ClassifiedCounter> counters;
  std::size_t desirable = 0;
  std::size_t undesirable = 0;
  std::size_t insignificant = 0;
};

// Per-counter judgement of with_wsn relative to baseline. Changes within
// epsilon are insignificant, as is any change of a Neutral counter.
inline Classification classify(const StatsLedger& baseline, const StatsLedger& with_wsn, const DirectionMap& dirs,
                               std::uint64_t epsilon = 0) {
  if (baseline.keys() != with_wsn.keys()) throw Error(Errc::RegistryMismatch, "ledgers carry different counters");
  Classification c;
  for (std::size_t i = 0; i < baseline.keys().size(); ++i) {
    const std::string& key = baseline.keys()[i];
    auto d = dirs.find(key);
    if (d == dirs.end()) throw Error(Errc::RegistryMismatch, "no direction for " + key);
    const auto delta = static_cast<std::int64_t>(with_wsn.values()[i]) - static_cast<std::int64_t>(baseline.values()[i]);
    const auto magnitude = static_cast<std::uint64_t>(delta < 0 ? -delta : delta);
    Verdict v = Verdict::Insignificant;
    if (magnitude > epsilon && d->second != Direction::Neutral) {
      const bool increased = delta > 0;
      const bool good = (d->second == Direction::GoodIncreasing) == increased;
      v = good ? Verdict::Desirable : Verdict::Undesirable;
    }
    switch (v) {
      case Verdict::Desirable: ++c.desirable; break;
      case Verdict::Undesirable: ++c.undesirable; break;
      case Verdict::Insignificant: ++c.insignificant; break;
    }
    c.counters.push_back(ClassifiedCounter{key, v, delta});
  }
  return c;
}

// Desirable share of the significant changes, in percent.
inline double qos_improvement(std::size_t desirable, std::size_t undesirable) {
  if (desirable + undesirable == 0) throw Error(Errc::NoSignificantChange, "no counter changed significantly");
  return 100.0 * static_cast<double>(desirable) / static_cast<double>(desirable + undesirable);
}

inline double qos_improvement(const Classification& c) { return qos_improvement(c.desirable, c.undesirable); }

inline std::string format_percent(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", pct);
  return buf;
}

inline std::string qos_line(const Classification& c) {
  if (c.desirable + c.undesirable == 0) return "QoS improvement: n/a (NoSignificantChange)";
  return "QoS improvement: " + format_percent(qos_improvement(c)) + "%";
}

// "layer.name=value" per counter, in ledger order.
inline std::string render_ledger(const StatsLedger& ledger) {
  std::string out;
  for (std::size_t i = 0; i < ledger.keys().size(); ++i) {
    out += ledger.keys()[i] + "=" + std::to_string(ledger.values()[i]) + "\n";
  }
  return out;
}

inline std::string render_classification(const Classification& c) {
  std::string out;
  for (const auto& cc : c.counters) {
    const std::string delta = cc.delta > 0 ? "+" + std::to_string(cc.delta) : std::to_string(cc.delta);
    out += cc.key + ": " + std::string(verdict_name(cc.verdict)) + " (" + delta + ")\n";
  }
  out += "summary: desirable=" + std::to_string(c.desirable) + " undesirable=" + std::to_string(c.undesirable) +
         " insignificant=" + std::to_string(c.insignificant) + "\n";
  out += qos_line(c) + "\n";
  return out;
}

inline std::string render_report(const StatsLedger& ledger, const std::optional<Classification>& c = std::nullopt) {
  std::string out = render_ledger(ledger);
  if (c) out += render_classification(*c);
  return out;
}

}  // namespace wsnho
