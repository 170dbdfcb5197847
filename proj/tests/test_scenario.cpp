#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "wsnho/scenario.hpp"

using namespace wsnho;

namespace {

Errc load_error(const std::string& text) {
  try {
    load_scenario(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "loaded without error";
  return Errc::PastTime;
}

}  // namespace

TEST(Scenario, PaperCensus) {
  const Scenario s = paper_scenario();
  EXPECT_NO_THROW(validate(s));
  EXPECT_EQ(s.nodes.size(), 22u);
  EXPECT_EQ(s.count(NodeKind::BaseStation), 2u);
  EXPECT_EQ(s.count(NodeKind::MobileStation), 2u);
  EXPECT_EQ(s.count(NodeKind::Mote), 16u);
  EXPECT_EQ(s.count(NodeKind::Satellite), 1u);
  EXPECT_EQ(s.count(NodeKind::Msc), 1u);
}

TEST(Scenario, StripLeavesSixNodes) {
  const Scenario s = strip_wsn(paper_scenario());
  EXPECT_EQ(s.nodes.size(), 6u);
  EXPECT_EQ(s.count(NodeKind::Mote), 0u);
  EXPECT_EQ(s.params, paper_scenario().params);
}

TEST(Scenario, MobilesHaltAtRouteMidpoint) {
  const Scenario s = paper_scenario();
  for (const auto& [id, path] : s.mobility) {
    const Point start = s.find(id)->pos;
    const Point end = path.waypoints.back();
    const Point halt = position_at(path, start, SimTime{1e6});
    EXPECT_NEAR(halt.x, (start.x + end.x) / 2, 1e-9);
    EXPECT_NEAR(halt.y, (start.y + end.y) / 2, 1e-9);
  }
}

TEST(Scenario, HaltPointsNeedTheSatellite) {
  const Scenario s = paper_scenario();
  for (const auto& [id, path] : s.mobility) {
    const Point halt = position_at(path, s.find(id)->pos, SimTime{1e6});
    for (const auto& n : s.nodes) {
      if (n.kind == NodeKind::BaseStation) {
        EXPECT_GT(distance(halt, n.pos), s.max_steer_range());
      }
    }
  }
}

// Motes plus BSes form one component, and each MS starts in BS coverage.
TEST(Scenario, PaperMeshIsConnected) {
  const Scenario s = paper_scenario();
  std::vector<RadioNode> terr;
  for (const auto& n : s.nodes) {
    if (n.kind == NodeKind::Mote || n.kind == NodeKind::BaseStation) terr.push_back({n.id, n.kind, n.pos, s.profile_of(n)});
  }
  const auto adj = oracle::brute_force_edges(terr);
  EXPECT_EQ(oracle::bfs_hops(adj, NodeId{1}).size(), terr.size());
  // Every mesh link sits in the error-free band.
  for (const auto& a : terr) {
    for (NodeId b : adj.at(a.id)) {
      const auto* nb = s.find(b);
      const RadioProfile& lp = link_profile(a.profile, s.profile_of(*nb));
      EXPECT_EQ(packet_outcome(lp, received_power(lp, distance(a.pos, nb->pos))), PacketOutcome::Delivered);
    }
  }
}

TEST(Scenario, TextRoundTrip) {
  const Scenario s = paper_scenario();
  const std::string text = serialize_scenario(s);
  const Scenario back = load_scenario(text);
  EXPECT_EQ(back, s);
  EXPECT_EQ(serialize_scenario(back), text);
}

TEST(Scenario, RoundTripWithOverrides) {
  Scenario s = paper_scenario();
  s.params.max_steer_range = 123.25;
  s.params.seed = 99;
  s.nodes[4].profile = RadioProfile{3.5, -97, 1, 2.7, 41};
  EXPECT_EQ(load_scenario(serialize_scenario(s)), s);
}

TEST(Scenario, DuplicateIdRejected) {
  EXPECT_EQ(load_error("[node]\n1 bs 0 0\n1 mote 10 0\n"), Errc::ValidationError);
}

TEST(Scenario, CoLocatedRejected) {
  EXPECT_EQ(load_error("[node]\n1 bs 0 0\n2 mote 0 0\n"), Errc::ValidationError);
}

TEST(Scenario, SecondMscRejected) {
  EXPECT_EQ(load_error("[node]\n1 msc 0 0\n2 msc 5 0\n"), Errc::ValidationError);
}

TEST(Scenario, MobilityOnMoteRejected) {
  EXPECT_EQ(load_error("[node]\n1 mote 0 0\n[mobility]\n1 speed=1 halt=1 waypoints=5,5\n"), Errc::ValidationError);
}

TEST(Scenario, SyntaxErrors) {
  EXPECT_EQ(load_error("[bogus]\n"), Errc::ParseError);
  EXPECT_EQ(load_error("[params]\nwarp = 9\n"), Errc::ParseError);
  EXPECT_EQ(load_error("[node]\n1 dragon 0 0\n"), Errc::ParseError);
  EXPECT_EQ(load_error("[node]\n1 bs zero 0\n"), Errc::ParseError);
  EXPECT_EQ(load_error("1 bs 0 0\n"), Errc::ParseError);
}

TEST(Scenario, BadProfileRejected) {
  EXPECT_EQ(load_error("[profile]\nmote sensitivity=-10\n[node]\n1 mote 0 0\n"), Errc::ValidationError);
}

TEST(Scenario, EmptyTextIsEmptyScenario) {
  const Scenario s = load_scenario("# nothing here\n");
  EXPECT_TRUE(s.nodes.empty());
  EXPECT_EQ(s.params, ScenarioParams{});
}
