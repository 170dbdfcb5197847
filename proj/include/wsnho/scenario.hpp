#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wsnho/error.hpp"
#include "wsnho/handoff_protocol.hpp"
#include "wsnho/sim_engine.hpp"
#include "wsnho/world.hpp"

namespace wsnho {

struct NodeSpec {
  NodeId id;
  NodeKind kind = NodeKind::Mote;
  Point pos;
  std::optional<RadioProfile> profile;  // replaces the kind default when set

  bool operator==(const NodeSpec&) const = default;
};

struct ScenarioParams {
  double duration = 60.0;
  std::uint64_t seed = 1;
  int default_ttl = kDefaultTtl;
  double steering_delay = 0.5;
  double satellite_acquisition_delay = 2.0;
  double satellite_search_delay = 20.0;  // blind acquisition when no location reached the MSC
  double backhaul_delay = 0.05;
  double satellite_hop_delay = 0.125;
  std::optional<double> max_steer_range;  // unset: 1.5 x BS nominal range
  std::size_t queue_capacity = 50;
  double dv_period = 10.0;
  std::uint64_t epsilon = 0;
  double coverage_interval = 1.0;
  double app_interval = 1.0;
  double discovery_timeout = 5.0;
  double tx_time = 0.002;
  double tx_energy = 1.0;
  std::uint32_t packet_size = 64;

  bool operator==(const ScenarioParams&) const = default;
};

struct Scenario {
  ScenarioParams params;
  std::map<NodeKind, RadioProfile> profiles;
  std::vector<NodeSpec> nodes;
  std::map<NodeId, MobilityPath> mobility;

  bool operator==(const Scenario&) const = default;

  const NodeSpec* find(NodeId id) const {
    for (const auto& n : nodes) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  std::size_t count(NodeKind k) const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [k](const NodeSpec& n) { return n.kind == k; }));
  }

  RadioProfile profile_of(const NodeSpec& n) const {
    if (n.profile) return *n.profile;
    auto it = profiles.find(n.kind);
    return it == profiles.end() ? default_profile(n.kind) : it->second;
  }

  double max_steer_range() const {
    if (params.max_steer_range) return *params.max_steer_range;
    auto it = profiles.find(NodeKind::BaseStation);
    const RadioProfile bs = it == profiles.end() ? default_profile(NodeKind::BaseStation) : it->second;
    return 1.5 * range_radius(bs);
  }

  // Mote and MS radios reach 100 m and start erroring past ~85.8 m; the BS
  // reaches ~108 m.
  static RadioProfile default_profile(NodeKind k) {
    switch (k) {
      case NodeKind::BaseStation: return RadioProfile{20.0, -81.0, 2.0, 3.0, 40.0};
      case NodeKind::Satellite: return RadioProfile{30.0, -120.0, 0.0, 2.0, 40.0};
      default: return RadioProfile{0.0, -100.0, 2.0, 3.0, 40.0};
    }
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

[[noreturn]] inline void parse_fail(int line, const std::string& reason) {
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + reason);
}

inline double to_double(const std::string& s, int line) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || !std::isfinite(v)) parse_fail(line, "bad number '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& s, int line) {
  Int v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) parse_fail(line, "bad integer '" + s + "'");
  return v;
}

inline std::pair<std::string, std::string> split_kv(const std::string& tok, int line) {
  auto eq = tok.find('=');
  if (eq == std::string::npos || eq == 0) parse_fail(line, "expected key=value, got '" + tok + "'");
  return {tok.substr(0, eq), tok.substr(eq + 1)};
}

inline void apply_profile_field(RadioProfile& p, const std::string& key, const std::string& value, int line) {
  const double v = to_double(value, line);
  if (key == "tx_power") p.tx_power = v;
  else if (key == "sensitivity") p.sensitivity = v;
  else if (key == "error_margin") p.error_margin = v;
  else if (key == "path_loss_exponent") p.path_loss_exponent = v;
  else if (key == "reference_loss") p.reference_loss = v;
  else parse_fail(line, "unknown profile field '" + key + "'");
}

inline std::string profile_fields(const RadioProfile& p) {
  return "tx_power=" + fmt(p.tx_power) + " sensitivity=" + fmt(p.sensitivity) + " error_margin=" + fmt(p.error_margin) +
         " path_loss_exponent=" + fmt(p.path_loss_exponent) + " reference_loss=" + fmt(p.reference_loss);
}

inline Point parse_point(const std::string& s, int line) {
  auto comma = s.find(',');
  if (comma == std::string::npos) parse_fail(line, "expected x,y, got '" + s + "'");
  return Point{to_double(s.substr(0, comma), line), to_double(s.substr(comma + 1), line)};
}

}  // namespace detail

inline void validate(const Scenario& s) {
  auto fail = [](const std::string& why) { throw Error(Errc::ValidationError, why); };
  const auto& p = s.params;
  if (!(p.duration >= 0.0) || !std::isfinite(p.duration)) fail("duration must be a finite non-negative time");
  if (p.default_ttl < 0) fail("default_ttl must be non-negative");
  for (double d : {p.steering_delay, p.satellite_acquisition_delay, p.satellite_search_delay, p.backhaul_delay,
                   p.satellite_hop_delay, p.tx_time, p.tx_energy}) {
    if (!(d >= 0.0)) fail("delays and costs must be non-negative");
  }
  if (p.max_steer_range && !(*p.max_steer_range >= 0.0)) fail("negative max_steer_range");
  if (!(p.dv_period > 0.0) || !(p.coverage_interval > 0.0) || !(p.app_interval > 0.0) || !(p.discovery_timeout > 0.0)) {
    fail("periods must be positive");
  }
  if (p.queue_capacity == 0) fail("queue_capacity must be at least 1");

  std::set<NodeId> ids;
  std::size_t mscs = 0;
  for (const auto& n : s.nodes) {
    if (!ids.insert(n.id).second) fail("duplicate node id " + std::to_string(n.id.value));
    if (n.kind == NodeKind::Msc) ++mscs;
    if (!std::isfinite(n.pos.x) || !std::isfinite(n.pos.y)) fail("non-finite position");
    try {
      validate(s.profile_of(n));
    } catch (const Error& e) {
      fail("node " + std::to_string(n.id.value) + ": " + e.what());
    }
  }
  if (mscs > 1) fail("at most one msc is allowed");
  for (const auto& [kind, prof] : s.profiles) {
    try {
      validate(prof);
    } catch (const Error& e) {
      fail(std::string(kind_name(kind)) + " profile: " + e.what());
    }
  }
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < s.nodes.size(); ++j) {
      const auto& a = s.nodes[i];
      const auto& b = s.nodes[j];
      if (terrestrial(a.kind) && terrestrial(b.kind) && a.pos == b.pos) {
        fail("nodes " + std::to_string(a.id.value) + " and " + std::to_string(b.id.value) + " are co-located");
      }
    }
  }
  for (const auto& [id, path] : s.mobility) {
    const NodeSpec* n = s.find(id);
    if (!n) fail("mobility for unknown node " + std::to_string(id.value));
    if (n->kind != NodeKind::MobileStation) fail("mobility on non-MS node " + std::to_string(id.value));
    try {
      validate(path, n->pos);
    } catch (const Error& e) {
      fail("node " + std::to_string(id.value) + ": " + e.what());
    }
  }
}

// Line-oriented format:
//   [params]    key = value
//   [profile]   <kind> field=value ...
//   [node]      <id> <kind> <x> <y> [field=value ...]
//   [mobility]  <id> speed=<m/s> halt=<fraction> waypoints=<x>,<y>[;<x>,<y>...]
// '#' starts a comment. Unknown sections and keys are rejected.
inline Scenario load_scenario(std::string_view text) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string l = detail::trim(raw);
    if (l.empty()) continue;
    if (l.front() == '[') {
      if (l.back() != ']') detail::parse_fail(line, "unterminated section header");
      section = l.substr(1, l.size() - 2);
      if (section != "params" && section != "profile" && section != "node" && section != "mobility") {
        detail::parse_fail(line, "unknown section '" + section + "'");
      }
      continue;
    }
    if (section.empty()) detail::parse_fail(line, "content before any section header");

    if (section == "params") {
      auto eq = l.find('=');
      if (eq == std::string::npos) detail::parse_fail(line, "expected key = value");
      const std::string key = detail::trim(l.substr(0, eq));
      const std::string val = detail::trim(l.substr(eq + 1));
      auto& p = s.params;
      if (key == "duration") p.duration = detail::to_double(val, line);
      else if (key == "seed") p.seed = detail::to_int<std::uint64_t>(val, line);
      else if (key == "default_ttl") p.default_ttl = detail::to_int<int>(val, line);
      else if (key == "steering_delay") p.steering_delay = detail::to_double(val, line);
      else if (key == "satellite_acquisition_delay") p.satellite_acquisition_delay = detail::to_double(val, line);
      else if (key == "satellite_search_delay") p.satellite_search_delay = detail::to_double(val, line);
      else if (key == "backhaul_delay") p.backhaul_delay = detail::to_double(val, line);
      else if (key == "satellite_hop_delay") p.satellite_hop_delay = detail::to_double(val, line);
      else if (key == "max_steer_range") p.max_steer_range = detail::to_double(val, line);
      else if (key == "queue_capacity") p.queue_capacity = detail::to_int<std::size_t>(val, line);
      else if (key == "dv_period") p.dv_period = detail::to_double(val, line);
      else if (key == "epsilon") p.epsilon = detail::to_int<std::uint64_t>(val, line);
      else if (key == "coverage_interval") p.coverage_interval = detail::to_double(val, line);
      else if (key == "app_interval") p.app_interval = detail::to_double(val, line);
      else if (key == "discovery_timeout") p.discovery_timeout = detail::to_double(val, line);
      else if (key == "tx_time") p.tx_time = detail::to_double(val, line);
      else if (key == "tx_energy") p.tx_energy = detail::to_double(val, line);
      else if (key == "packet_size") p.packet_size = detail::to_int<std::uint32_t>(val, line);
      else detail::parse_fail(line, "unknown parameter '" + key + "'");
      continue;
    }

    const auto toks = detail::split_ws(l);
    if (section == "profile") {
      const auto kind = parse_kind(toks[0]);
      if (!kind) detail::parse_fail(line, "unknown node kind '" + toks[0] + "'");
      RadioProfile prof = Scenario::default_profile(*kind);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto [k, v] = detail::split_kv(toks[i], line);
        detail::apply_profile_field(prof, k, v, line);
      }
      s.profiles[*kind] = prof;
    } else if (section == "node") {
      if (toks.size() < 4) detail::parse_fail(line, "node line needs: id kind x y");
      NodeSpec n;
      n.id = NodeId{detail::to_int<std::uint32_t>(toks[0], line)};
      const auto kind = parse_kind(toks[1]);
      if (!kind) detail::parse_fail(line, "unknown node kind '" + toks[1] + "'");
      n.kind = *kind;
      n.pos = Point{detail::to_double(toks[2], line), detail::to_double(toks[3], line)};
      if (toks.size() > 4) {
        auto it = s.profiles.find(n.kind);
        RadioProfile prof = it == s.profiles.end() ? Scenario::default_profile(n.kind) : it->second;
        for (std::size_t i = 4; i < toks.size(); ++i) {
          auto [k, v] = detail::split_kv(toks[i], line);
          detail::apply_profile_field(prof, k, v, line);
        }
        n.profile = prof;
      }
      s.nodes.push_back(n);
    } else {
      if (toks.size() < 2) detail::parse_fail(line, "mobility line needs an id and fields");
      const NodeId id{detail::to_int<std::uint32_t>(toks[0], line)};
      MobilityPath path;
      bool have_speed = false, have_halt = false, have_wp = false;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        auto [k, v] = detail::split_kv(toks[i], line);
        if (k == "speed") {
          path.speed = detail::to_double(v, line);
          have_speed = true;
        } else if (k == "halt") {
          path.halt_fraction = detail::to_double(v, line);
          have_halt = true;
        } else if (k == "waypoints") {
          std::size_t start = 0;
          while (start <= v.size()) {
            auto semi = v.find(';', start);
            const std::string pt = v.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
            path.waypoints.push_back(detail::parse_point(pt, line));
            if (semi == std::string::npos) break;
            start = semi + 1;
          }
          have_wp = true;
        } else {
          detail::parse_fail(line, "unknown mobility field '" + k + "'");
        }
      }
      if (!have_speed || !have_halt || !have_wp) detail::parse_fail(line, "mobility needs speed, halt and waypoints");
      if (!s.mobility.emplace(id, path).second) {
        detail::parse_fail(line, "second mobility entry for node " + std::to_string(id.value));
      }
    }
  }
  validate(s);
  return s;
}

// Canonical text form; load_scenario(serialize_scenario(s)) == s.
inline std::string serialize_scenario(const Scenario& s) {
  using detail::fmt;
  const auto& p = s.params;
  std::string out = "[params]\n";
  out += "duration = " + fmt(p.duration) + "\n";
  out += "seed = " + std::to_string(p.seed) + "\n";
  out += "default_ttl = " + std::to_string(p.default_ttl) + "\n";
  out += "steering_delay = " + fmt(p.steering_delay) + "\n";
  out += "satellite_acquisition_delay = " + fmt(p.satellite_acquisition_delay) + "\n";
  out += "satellite_search_delay = " + fmt(p.satellite_search_delay) + "\n";
  out += "backhaul_delay = " + fmt(p.backhaul_delay) + "\n";
  out += "satellite_hop_delay = " + fmt(p.satellite_hop_delay) + "\n";
  if (p.max_steer_range) out += "max_steer_range = " + fmt(*p.max_steer_range) + "\n";
  out += "queue_capacity = " + std::to_string(p.queue_capacity) + "\n";
  out += "dv_period = " + fmt(p.dv_period) + "\n";
  out += "epsilon = " + std::to_string(p.epsilon) + "\n";
  out += "coverage_interval = " + fmt(p.coverage_interval) + "\n";
  out += "app_interval = " + fmt(p.app_interval) + "\n";
  out += "discovery_timeout = " + fmt(p.discovery_timeout) + "\n";
  out += "tx_time = " + fmt(p.tx_time) + "\n";
  out += "tx_energy = " + fmt(p.tx_energy) + "\n";
  out += "packet_size = " + std::to_string(p.packet_size) + "\n";

  if (!s.profiles.empty()) {
    out += "\n[profile]\n";
    for (const auto& [kind, prof] : s.profiles) {
      out += std::string(kind_name(kind)) + " " + detail::profile_fields(prof) + "\n";
    }
  }
  out += "\n[node]\n";
  for (const auto& n : s.nodes) {
    out += std::to_string(n.id.value) + " " + std::string(kind_name(n.kind)) + " " + fmt(n.pos.x) + " " + fmt(n.pos.y);
    if (n.profile) out += " " + detail::profile_fields(*n.profile);
    out += "\n";
  }
  if (!s.mobility.empty()) {
    out += "\n[mobility]\n";
    for (const auto& [id, path] : s.mobility) {
      out += std::to_string(id.value) + " speed=" + fmt(path.speed) + " halt=" + fmt(path.halt_fraction) + " waypoints=";
      for (std::size_t i = 0; i < path.waypoints.size(); ++i) {
        if (i) out += ";";
        out += fmt(path.waypoints[i].x) + "," + fmt(path.waypoints[i].y);
      }
      out += "\n";
    }
  }
  return out;
}

// Two base stations 380 m apart on the x axis, each MS starting next to its
// home BS and heading for the other one, halting halfway. Sixteen motes form
// a 4x4 grid with 80 m pitch centred between the base stations; the edge
// columns sit within error-free reach of the nearer BS. The halt points lie
// beyond 1.5x the BS range from both stations, so the final handoff needs the
// satellite. The MSC sits at the field centre and has no radio.
inline Scenario paper_scenario() {
  Scenario s;
  s.params = ScenarioParams{};
  s.profiles[NodeKind::BaseStation] = Scenario::default_profile(NodeKind::BaseStation);
  s.profiles[NodeKind::MobileStation] = Scenario::default_profile(NodeKind::MobileStation);
  s.profiles[NodeKind::Mote] = Scenario::default_profile(NodeKind::Mote);
  s.profiles[NodeKind::Satellite] = Scenario::default_profile(NodeKind::Satellite);

  const Point bs1{0.0, 0.0};
  const Point bs2{380.0, 0.0};
  s.nodes.push_back({NodeId{1}, NodeKind::BaseStation, bs1, std::nullopt});
  s.nodes.push_back({NodeId{2}, NodeKind::BaseStation, bs2, std::nullopt});
  s.nodes.push_back({NodeId{11}, NodeKind::MobileStation, Point{10.0, 10.0}, std::nullopt});
  s.nodes.push_back({NodeId{12}, NodeKind::MobileStation, Point{370.0, -10.0}, std::nullopt});

  const double xs[] = {70.0, 150.0, 230.0, 310.0};
  const double ys[] = {-120.0, -40.0, 40.0, 120.0};
  std::uint32_t mote = 101;
  for (double y : ys) {
    for (double x : xs) s.nodes.push_back({NodeId{mote++}, NodeKind::Mote, Point{x, y}, std::nullopt});
  }
  s.nodes.push_back({NodeId{200}, NodeKind::Satellite, Point{190.0, 1000.0}, std::nullopt});
  s.nodes.push_back({NodeId{300}, NodeKind::Msc, Point{190.0, 0.0}, std::nullopt});

  s.mobility[NodeId{11}] = MobilityPath{{bs2}, 10.0, 0.5};
  s.mobility[NodeId{12}] = MobilityPath{{bs1}, 10.0, 0.5};
  return s;
}

// Same scenario with every mote removed.
inline Scenario strip_wsn(Scenario s) {
  std::erase_if(s.nodes, [](const NodeSpec& n) { return n.kind == NodeKind::Mote; });
  return s;
}

}  // namespace wsnho
