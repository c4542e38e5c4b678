// SPDX-License-Identifier: Apache-2.0
//
// Two-tier backbone protocol: stable-vehicle (SV) election by stability
// index, chain bootstrap, beacon-period adaptation, periodic maintenance
// and next-hop forwarding.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "svnet/channel.hpp"
#include "svnet/traffic.hpp"

namespace svnet {

struct StabilityWeights {
  double alpha_w = 0.7;  // relative-speed term
  double beta_w = 0.3;   // vehicle-type term

  static StabilityWeights from_alpha(double a) { return {a, 1.0 - a}; }
  void validate() const;
};

struct ProtocolParams {
  double transmission_range = 300.0;  // D_trans, m
  double hysteresis = 0.05;           // SI margin before replacing an adjacent SV
  int expiry_periods = 3;             // missed beacon periods before a neighbor expires
  double horizon = 90.0;              // s, cap on link duration for equal speeds
  double standstill_speed = 1.0;      // m/s, replaces V_s in SI when the computing vehicle is stopped
  std::size_t max_chain_length = 0;   // 0 = until the destination is in range
  // Beacon decodable between two vehicle ids; empty means every vehicle
  // within transmission_range is heard.
  std::function<bool(int, int)> audible;

  void validate() const;
};

struct Beacon {
  int id = 0;
  Eigen::Vector2d location = Eigen::Vector2d::Zero();
  double speed = 0.0;
  Direction direction = Direction::Forward;
  int eta = 1;
  bool sv_flag = false;
  bool requesting = false;
  double timestamp = 0.0;
  int maintenance_class = 1;
};

Beacon make_beacon(const VehicleState& v, bool requesting = false, double now = 0.0, int maintenance_class = 1);

struct LinkEstimate {
  double link_duration = 0.0;     // s
  double data_rate = 0.0;         // bit/s
  double estimated_volume = 0.0;  // bits
};

double stability_index(double self_speed, double neighbor_speed, int neighbor_eta, const StabilityWeights& w,
                       double standstill_speed = 1.0);
double stability_index(const VehicleState& self, const VehicleState& neighbor, const StabilityWeights& w,
                       double standstill_speed = 1.0);

/// Time until the pair drifts out of range; capped at `horizon` for equal
/// speeds. Throws NoLinkError when distance > D_trans.
double link_duration(double transmission_range, double distance, double self_speed, double neighbor_speed,
                     double horizon);

double estimated_volume(double link_duration, double data_rate);

/// Argmin-SI neighbor among same-direction beacons ahead of `self` (along
/// `heading`) within range and not in `excluded`. Ties: larger eta, then
/// more forward progress, then smaller id.
std::optional<int> select_sv(const Beacon& self, std::span<const Beacon> neighbors, const StabilityWeights& w,
                             const ProtocolParams& params, double heading, const std::set<int>& excluded = {});

struct NeighborEntry {
  Beacon beacon;
  double last_heard = 0.0;
};

struct BackboneState {
  std::vector<int> chain;  // SV ids, ordered from the source side along `heading`
  double heading = 1.0;
  std::map<int, std::map<int, NeighborEntry>> neighbor_tables;  // per SV
  int maintenance_class = 1;

  bool contains(int id) const;
  std::optional<std::size_t> position(int id) const;
};

/// Where the chain must reach. A known vehicle id lets beacon audibility
/// decide reachability; otherwise distance alone does.
struct Target {
  Target(const Eigen::Vector2d& p, int vehicle_id = -1) : position(p), id(vehicle_id) {}  // NOLINT: implicit
  Eigen::Vector2d position;
  int id = -1;
};

enum class BootstrapOutcome { Direct, Attached, Built };

struct BootstrapResult {
  BootstrapOutcome outcome = BootstrapOutcome::Built;
  BackboneState state;
  std::optional<int> attach_to;  // existing SV for Attached
  bool complete = false;         // destination in range of the chain head (or length cap hit)
};

/// Iterated SV election from the source toward the destination over a
/// static snapshot. Without a destination the chain grows until the
/// length cap or until no candidate remains. Throws BootstrapFailed when
/// the first hop has no candidate.
BootstrapResult bootstrap_backbone(std::span<const VehicleState> snapshot, int source_id,
                                   std::optional<Target> destination, const StabilityWeights& w,
                                   const ProtocolParams& params);

/// Sets sv_flag on exactly the chain members.
void apply_sv_flags(std::vector<VehicleState>& vehicles, const BackboneState& state);

double requesting_index(int requesting, int total);
int maintenance_class(double ri);
int beacon_period_ms(double ri);

enum class ProtocolEventKind { Elect, Replace, Break, ClassChange };
const char* to_string(ProtocolEventKind k);

struct ProtocolEvent {
  double time = 0.0;
  int node = 0;
  ProtocolEventKind kind = ProtocolEventKind::Elect;
  std::string detail;
};

struct MaintainResult {
  BackboneState state;
  std::vector<ProtocolEvent> events;
  std::vector<int> released;  // former SVs, drained before their flag clears
};

/// One maintenance round at every SV. `requesting` lists vehicles with
/// pending traffic (used for the requesting index). The beacon plane is
/// loss-free: every vehicle within range of an SV is heard.
MaintainResult maintain(BackboneState state, std::span<const VehicleState> snapshot, const std::set<int>& requesting,
                        const StabilityWeights& w, const ProtocolParams& params, double now, double beacon_period,
                        std::optional<Target> destination);

/// A requester upstream of the chain with no SV in range elects SVs from
/// itself forward until the first existing SV is reachable, and the bridge
/// is prepended to the chain. Returns the ELECT events (none when already
/// connected or no bridge exists).
std::vector<ProtocolEvent> connect_requester(BackboneState& state, std::span<const VehicleState> snapshot,
                                             int requester, const StabilityWeights& w, const ProtocolParams& params,
                                             double now);

enum class HopKind { Deliver, Forward, Hold };

struct NextHop {
  HopKind kind = HopKind::Hold;
  int node = -1;
};

/// Next hop for a packet held by `current`. Destination in range:
/// deliver. Chain member: next SV toward the destination. Anyone else:
/// the nearest in-range SV (preferring SVs ahead when `prefer_ahead`).
NextHop forward_next_hop(int destination_id, int current, const BackboneState& backbone,
                         std::span<const VehicleState> snapshot, const ProtocolParams& params,
                         bool prefer_ahead = false);

// ---------------------------------------------------------------------------
// Weight calibration

struct CalibrationScenario {
  TrafficConfig traffic;
  RadioParams radio;
  FadingEnvironment fading;
  ProtocolParams protocol;
  RateTable rates = default_rate_table();
  double corridor_half_width = 3.5;   // m, same and adjacent lane
  double nv_area_width = 10.5;  // m, road width used to turn in-range counts into NV
  std::size_t chain_length = 5;
};

struct CalibrationPoint {
  double alpha_w = 0.0;
  double mean_link_duration = 0.0;  // s
  double mean_data_rate = 0.0;      // bit/s
  double objective = 0.0;           // mean LD * mean rate, bits
  std::size_t replications = 0;     // bootstraps that produced at least one link
};

struct CalibrationResult {
  std::vector<CalibrationPoint> points;
  StabilityWeights best;
};

/// Link estimates along the bootstrap path source -> SV_1 -> ... -> SV_m.
std::vector<LinkEstimate> path_link_estimates(std::span<const VehicleState> snapshot, int source_id,
                                              const std::vector<int>& chain, const CalibrationScenario& scenario,
                                              Rng& channel_rng);

/// Sweeps (a, 1-a) over `alphas`; each point averages LD and rate over the
/// first `chain_length` hops of `replications` bootstraps on shared
/// random networks, and the argmax of LD * rate wins.
CalibrationResult calibrate_weights(const CalibrationScenario& scenario, std::span<const double> alphas,
                                    std::size_t replications, std::uint64_t seed);

/// Fading environment of a link whose transmitter hears `in_range`
/// vehicles.
FadingEnvironment link_fading(const FadingEnvironment& base, std::size_t in_range, double transmission_range,
                              double road_width);

}  // namespace svnet
