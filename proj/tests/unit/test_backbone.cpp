// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <algorithm>

#include "svnet/backbone.hpp"
#include "svnet/error.hpp"

using namespace svnet;

namespace {

const StabilityWeights kW{0.7, 0.3};

VehicleState car(int id, double x, double speed, VehicleClass cls = VehicleClass::Compact, double y = 1.75) {
  VehicleState v;
  v.id = id;
  v.position = {x, y};
  v.speed = v.mean_speed = speed;
  v.cls = cls;
  return v;
}

Beacon beacon(int id, double x, double speed, int eta_value, Direction dir = Direction::Forward) {
  Beacon b;
  b.id = id;
  b.location = {x, 0.0};
  b.speed = speed;
  b.eta = eta_value;
  b.direction = dir;
  return b;
}

}  // namespace

TEST_CASE("stability index") {
  CHECK(stability_index(20.0, 24.0, 1, kW) == approx(0.34));
  CHECK(stability_index(20.0, 20.0, 3, kW) == 0.0);
  CHECK(stability_index(20.0, 16.0, 2, kW) == approx(0.7 * 0.2 + 0.3 / 3));
  // a stopped vehicle divides by the standstill speed
  CHECK(stability_index(0.0, 2.0, 3, kW, 1.0) == approx(1.4));
  CHECK_THROWS_AS(stability_index(20.0, 20.0, 4, kW), DomainError);
  CHECK_THROWS_AS(stability_index(20.0, 20.0, 0, kW), DomainError);
}

TEST_CASE("stability index ignores a common speed scale") {
  for (double k : {0.5, 2.0, 7.0})
    CHECK(stability_index(20.0 * k, 26.0 * k, 2, kW) == approx(stability_index(20.0, 26.0, 2, kW)));
}

TEST_CASE("link duration and volume") {
  CHECK(link_duration(300.0, 100.0, 20.0, 30.0, 90.0) == approx(20.0));
  CHECK(link_duration(300.0, 100.0, 20.0, 20.0, 90.0) == 90.0);
  CHECK(link_duration(300.0, 290.0, 0.0, 0.01, 90.0) == 90.0);  // capped
  CHECK(link_duration(300.0, 300.0, 20.0, 25.0, 90.0) == 0.0);
  CHECK_THROWS_AS(link_duration(300.0, 301.0, 20.0, 25.0, 90.0), NoLinkError);
  CHECK(estimated_volume(20.0, 6e6) == approx(1.2e8));
  CHECK_THROWS_AS(estimated_volume(-1.0, 6e6), DomainError);
}

TEST_CASE("weights must be a convex pair") {
  CHECK_NOTHROW(StabilityWeights::from_alpha(0.3).validate());
  CHECK_THROWS_AS((StabilityWeights{0.7, 0.7}.validate()), ConfigError);
  CHECK_THROWS_AS((StabilityWeights{-0.1, 1.1}.validate()), ConfigError);
}

TEST_CASE("select_sv picks the minimum stability index ahead") {
  ProtocolParams p;
  const Beacon self = beacon(0, 0.0, 20.0, 1);
  const std::vector<Beacon> n{beacon(1, 100.0, 25.0, 1), beacon(2, 200.0, 21.0, 3), beacon(3, -50.0, 20.0, 3),
                              beacon(4, 350.0, 20.0, 3), beacon(5, 50.0, 20.0, 3, Direction::Backward)};
  CHECK(select_sv(self, n, kW, p, 1.0) == 2);
  CHECK(select_sv(self, n, kW, p, -1.0) == 3);
  CHECK(select_sv(self, n, kW, p, 1.0, {2}) == 1);
  CHECK_FALSE(select_sv(self, n, kW, p, 1.0, {1, 2}).has_value());
  p.audible = [](int a, int b) { return a + b != 2; };  // 0 cannot hear 2
  CHECK(select_sv(self, n, kW, p, 1.0) == 1);
}

TEST_CASE("select_sv breaks ties by type, then progress, then id") {
  ProtocolParams p;
  const Beacon self = beacon(0, 0.0, 20.0, 3);
  StabilityWeights speed_only{1.0, 0.0};
  std::vector<Beacon> n{beacon(7, 100.0, 20.0, 1), beacon(8, 100.0, 20.0, 3)};
  CHECK(select_sv(self, n, speed_only, p, 1.0) == 8);
  n = {beacon(7, 100.0, 20.0, 3), beacon(8, 150.0, 20.0, 3)};
  CHECK(select_sv(self, n, speed_only, p, 1.0) == 8);
  n = {beacon(9, 150.0, 20.0, 3), beacon(8, 150.0, 20.0, 3)};
  CHECK(select_sv(self, n, speed_only, p, 1.0) == 8);
}

TEST_CASE("select_sv does not depend on beacon order or speed scale") {
  ProtocolParams p;
  std::vector<Beacon> n;
  for (int i = 1; i <= 12; ++i) n.push_back(beacon(i, 20.0 * i, 15.0 + (i * 7) % 11, 1 + i % 3));
  const auto pick = select_sv(beacon(0, 0.0, 20.0, 1), n, kW, p, 1.0);
  REQUIRE(pick.has_value());
  std::reverse(n.begin(), n.end());
  CHECK(select_sv(beacon(0, 0.0, 20.0, 1), n, kW, p, 1.0) == pick);
  for (auto& b : n) b.speed *= 3.0;
  CHECK(select_sv(beacon(0, 0.0, 60.0, 1), n, kW, p, 1.0) == pick);
}

TEST_CASE("bootstrap follows a line of trucks") {
  std::vector<VehicleState> snap{car(0, 0.0, 25.0)};
  int id = 1;
  for (double x = 200.0; x <= 1000.0; x += 200.0) snap.push_back(car(id++, x, 25.0, VehicleClass::Large));
  for (double x = 100.0; x <= 1000.0; x += 200.0) snap.push_back(car(id++, x, 31.0));
  const auto r = bootstrap_backbone(snap, 0, Target{{1200.0, 1.75}}, kW, ProtocolParams{});
  CHECK(r.outcome == BootstrapOutcome::Built);
  CHECK(r.complete);
  CHECK(r.state.chain == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(r.state.heading == 1.0);
}

TEST_CASE("bootstrap outcomes") {
  const ProtocolParams p;
  std::vector<VehicleState> snap{car(0, 0.0, 25.0), car(1, 250.0, 25.0)};
  CHECK(bootstrap_backbone(snap, 0, Target{{200.0, 1.75}}, kW, p).outcome == BootstrapOutcome::Direct);

  snap[1].sv_flag = true;
  const auto attached = bootstrap_backbone(snap, 0, Target{{900.0, 1.75}}, kW, p);
  CHECK(attached.outcome == BootstrapOutcome::Attached);
  CHECK(attached.attach_to == 1);

  snap[1].position.x() = -100.0;
  snap[1].sv_flag = false;
  CHECK_THROWS_AS(bootstrap_backbone(snap, 0, Target{{900.0, 1.75}}, kW, p), BootstrapFailed);
  CHECK_THROWS_AS(bootstrap_backbone(snap, 42, std::nullopt, kW, p), DomainError);
}

TEST_CASE("bootstrap toward a destination behind heads backward") {
  std::vector<VehicleState> snap{car(0, 1000.0, 25.0), car(1, 800.0, 25.0), car(2, 1200.0, 25.0)};
  const auto r = bootstrap_backbone(snap, 0, Target{{500.0, 1.75}}, kW, ProtocolParams{});
  CHECK(r.state.heading == -1.0);
  CHECK(r.state.chain == std::vector<int>{1});
  CHECK(r.complete);
}

TEST_CASE("chain length cap") {
  std::vector<VehicleState> snap;
  for (int i = 0; i < 10; ++i) snap.push_back(car(i, 200.0 * i, 25.0));
  ProtocolParams p;
  p.max_chain_length = 3;
  const auto r = bootstrap_backbone(snap, 0, std::nullopt, kW, p);
  CHECK(r.state.chain.size() == 3);
  CHECK(r.complete);
}

TEST_CASE("requesting index bands") {
  CHECK(requesting_index(3, 10) == approx(0.3));
  CHECK(requesting_index(0, 0) == 0.0);
  CHECK_THROWS_AS(requesting_index(11, 10), DomainError);
  CHECK(maintenance_class(0.0) == 1);
  CHECK(maintenance_class(0.2) == 2);
  CHECK(maintenance_class(0.6) == 4);
  CHECK(maintenance_class(1.0) == 5);
  CHECK(beacon_period_ms(0.1) == 500);
  CHECK(beacon_period_ms(0.5) == 300);
  CHECK(beacon_period_ms(0.9) == 100);
  CHECK_THROWS_AS(maintenance_class(1.2), DomainError);
}

TEST_CASE("maintenance replaces an adjacent SV only past the hysteresis margin") {
  BackboneState st;
  st.chain = {1, 2};
  const ProtocolParams p;  // hysteresis 0.05
  SUBCASE("small gain keeps the SV") {
    const std::vector<VehicleState> snap{car(1, 0.0, 20.0, VehicleClass::Large), car(2, 200.0, 22.0, VehicleClass::Large),
                                         car(3, 150.0, 21.0, VehicleClass::Large)};
    const auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, std::nullopt);
    CHECK(r.state.chain == std::vector<int>{1, 2});
    CHECK(r.events.empty());
  }
  SUBCASE("large gain replaces it") {
    const std::vector<VehicleState> snap{car(1, 0.0, 20.0, VehicleClass::Large), car(2, 200.0, 22.0, VehicleClass::Large),
                                         car(3, 150.0, 20.0, VehicleClass::Large)};
    const auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, std::nullopt);
    CHECK(r.state.chain == std::vector<int>{1, 3});
    REQUIRE(r.events.size() == 1);
    CHECK(r.events[0].kind == ProtocolEventKind::Replace);
    CHECK(r.released == std::vector<int>{2});
  }
}

TEST_CASE("maintenance repairs or breaks a lost link") {
  BackboneState st;
  st.chain = {1, 2, 3};
  const ProtocolParams p;
  SUBCASE("repair through a candidate that reaches the next SV") {
    const std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 400.0, 20.0), car(3, 500.0, 20.0),
                                         car(4, 250.0, 20.0)};
    const auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, std::nullopt);
    CHECK(r.state.chain == std::vector<int>{1, 4, 3});
  }
  SUBCASE("break truncates the chain") {
    const std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 400.0, 20.0), car(3, 800.0, 20.0)};
    const auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, std::nullopt);
    CHECK(r.state.chain == std::vector<int>{1});
    CHECK(std::count_if(r.events.begin(), r.events.end(),
                        [](const ProtocolEvent& e) { return e.kind == ProtocolEventKind::Break; }) == 1);
    CHECK(r.released == std::vector<int>{2, 3});
  }
}

TEST_CASE("an SV that disappears expires after the beacon timeout") {
  BackboneState st;
  st.chain = {1, 2, 3};
  const ProtocolParams p;  // three periods
  std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 200.0, 20.0), car(3, 400.0, 20.0)};
  auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, std::nullopt);
  snap.erase(snap.begin() + 1);
  r = maintain(r.state, snap, {}, kW, p, 1.0, 0.5, std::nullopt);
  CHECK(r.state.contains(2));
  r = maintain(r.state, snap, {}, kW, p, 2.0, 0.5, std::nullopt);
  CHECK_FALSE(r.state.contains(2));
}

TEST_CASE("maintenance trims past the destination and grows toward it") {
  BackboneState st;
  st.chain = {1, 2, 3};
  const ProtocolParams p;
  std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 200.0, 20.0), car(3, 400.0, 20.0), car(4, 600.0, 20.0)};
  auto r = maintain(st, snap, {}, kW, p, 0.0, 0.5, Target{{450.0, 1.75}});
  CHECK(r.state.chain == std::vector<int>{1, 2});
  r = maintain(r.state, snap, {}, kW, p, 0.5, 0.5, Target{{850.0, 1.75}});
  CHECK(r.state.chain == std::vector<int>{1, 2, 3, 4});
}

TEST_CASE("requesting vehicles raise the maintenance class") {
  BackboneState st;
  st.chain = {1};
  std::vector<VehicleState> snap{car(1, 0.0, 20.0)};
  for (int i = 2; i <= 11; ++i) snap.push_back(car(i, 10.0 * i, 20.0));
  const auto r = maintain(st, snap, {2, 3, 4, 5, 6}, kW, ProtocolParams{}, 0.0, 0.5, std::nullopt);
  CHECK(r.state.maintenance_class == 3);
}

TEST_CASE("requester bridges to the chain") {
  BackboneState st;
  st.chain = {3};
  const std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 250.0, 20.0), car(3, 500.0, 20.0)};
  const auto ev = connect_requester(st, snap, 1, kW, ProtocolParams{}, 0.0);
  CHECK(ev.size() == 1);
  CHECK(st.chain == std::vector<int>{2, 3});
  CHECK(connect_requester(st, snap, 1, kW, ProtocolParams{}, 0.0).empty());
}

TEST_CASE("forwarding") {
  BackboneState st;
  st.chain = {2, 3};
  const ProtocolParams p;
  const std::vector<VehicleState> snap{car(1, 0.0, 20.0), car(2, 200.0, 20.0), car(3, 400.0, 20.0),
                                       car(9, 650.0, 20.0), car(5, 100.0, 20.0)};
  auto h = forward_next_hop(9, 1, st, snap, p);
  CHECK(h.kind == HopKind::Forward);
  CHECK(h.node == 2);  // only SV in range
  h = forward_next_hop(9, 2, st, snap, p);
  CHECK(h.node == 3);
  h = forward_next_hop(9, 3, st, snap, p);
  CHECK(h.kind == HopKind::Deliver);
  CHECK(h.node == 9);
  h = forward_next_hop(1, 3, st, snap, p);  // back upstream
  CHECK(h.node == 2);
  h = forward_next_hop(1, 2, st, snap, p);
  CHECK(h.kind == HopKind::Deliver);
  h = forward_next_hop(9, 5, st, snap, p);  // nearest SV in range
  CHECK(h.node == 2);
  CHECK(forward_next_hop(42, 1, st, snap, p).kind == HopKind::Hold);
}

TEST_CASE("path link estimates multiply duration and rate") {
  CalibrationScenario sc;
  const std::vector<VehicleState> snap{car(0, 0.0, 20.0), car(1, 100.0, 25.0), car(2, 250.0, 25.0)};
  Rng rng(1);
  const auto est = path_link_estimates(snap, 0, {1, 2}, sc, rng);
  REQUIRE(est.size() == 2);
  CHECK(est[0].link_duration == approx(40.0));
  CHECK(est[1].link_duration == approx(90.0));
  for (const auto& e : est) CHECK(e.estimated_volume == approx(e.link_duration * e.data_rate));
}
