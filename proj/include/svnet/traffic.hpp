// SPDX-License-Identifier: Apache-2.0
//
// Highway traffic: vehicle types, synthetic spawning and mobility, and
// trajectory-trace ingestion with the speed-stability statistics used to
// motivate stable-vehicle selection.
#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "svnet/random.hpp"

namespace svnet {

enum class VehicleClass : int { Compact = 1, MidSize = 2, Large = 3 };

inline constexpr int kEtaMax = 3;
inline constexpr std::array<VehicleClass, 3> kAllClasses{VehicleClass::Compact, VehicleClass::MidSize,
                                                          VehicleClass::Large};

constexpr int eta(VehicleClass c) { return static_cast<int>(c); }
constexpr std::size_t class_index(VehicleClass c) { return static_cast<std::size_t>(eta(c) - 1); }
const char* to_string(VehicleClass c);

enum class Direction { Forward, Backward };

constexpr double sign(Direction d) { return d == Direction::Forward ? 1.0 : -1.0; }

struct VehicleState {
  int id = 0;
  VehicleClass cls = VehicleClass::Compact;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // (along-road, lateral) [m]
  int lane = 0;
  double speed = 0.0;       // m/s
  double mean_speed = 0.0;  // m/s, drawn once at spawn
  Direction direction = Direction::Forward;
  double body_height = 1.5;     // m
  double antenna_height = 1.6;  // m, body height plus roof mounting offset
  bool sv_flag = false;

  double x() const { return position.x(); }
  double y() const { return position.y(); }
};

struct HeightModel {
  double mean = 0.0;  // m
  double std_dev = 0.0;
};

/// Body-height fits per class. Large and Compact follow the published
/// normal fits; MidSize is interpolated.
HeightModel height_model(VehicleClass c);

struct SpeedLaw {
  double mean_lo = 0.0;  // m/s, per-vehicle mean drawn uniformly in [lo, hi]
  double mean_hi = 0.0;
  double std_dev = 0.0;  // m/s, per-step noise around the vehicle's mean
};

struct TrafficConfig {
  double density = 0.05;         // vehicles per meter (gamma)
  double road_length = 3000.0;   // m
  std::array<double, 3> class_mix{0.599, 0.347, 0.054};  // Compact, MidSize, Large
  std::array<SpeedLaw, 3> speed_law{};
  std::array<HeightModel, 3> heights{};
  int lanes = 3;
  double lane_width = 3.5;        // m
  double antenna_offset = 0.1;    // m above the roof
  bool bidirectional = false;     // half the lanes carry backward traffic
  std::size_t max_vehicles = 1000;

  TrafficConfig();
  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

/// Class mixes for the PDR study (index 0..2 = Class 1..3), normalized to sum to 1.
std::array<double, 3> pdr_class_mix(int percentage_class);

std::vector<VehicleState> spawn_synthetic(const TrafficConfig& config, Rng& rng);

/// Draws one fresh vehicle (class, mean speed, heights, lane) with the
/// given id at along-road position `x`.
VehicleState spawn_vehicle(const TrafficConfig& config, Rng& rng, int id, double x);

/// Advances every vehicle by one mobility step. Speeds are resampled
/// around each vehicle's mean (truncated at 0), positions advance by
/// speed * dt; vehicles leaving the segment are despawned and a fresh
/// vehicle enters at the opposite edge with a new id from `next_id`.
void step_mobility(std::vector<VehicleState>& states, double dt, const TrafficConfig& config, Rng& rng,
                   int& next_id);

// ---------------------------------------------------------------------------
// Trace ingestion and statistics

struct TraceRecord {
  int vehicle_id = 0;
  double frame_time = 0.0;  // s
  double position_x = 0.0;  // m
  double position_y = 0.0;  // m
  double speed = 0.0;       // m/s
  VehicleClass vehicle_class = VehicleClass::Compact;
};

struct ColumnMap {
  std::string id = "Vehicle_ID";
  std::string frame = "Frame_ID";
  std::string x = "Local_X";
  std::string y = "Local_Y";
  std::string velocity = "v_Vel";
  std::string vehicle_class = "v_Class";
  char delimiter = ',';
  double frame_period = 0.1;   // s per frame unit
  double length_scale = 0.3048;  // source length unit -> m
  // source class code -> class; codes not present are skipped as malformed
  std::map<int, VehicleClass> class_codes{{1, VehicleClass::Compact},
                                          {2, VehicleClass::Compact},
                                          {3, VehicleClass::Large}};
};

/// Trace ingestion plus the statistics settings of the trace analysis.
struct TraceAnalysis {
  ColumnMap columns;
  double std_threshold = 12.0 / 3.6;  // m/s; "stable" speed standard deviation
  double window = 60.0;               // s, class-share window
  double segment_length = 640.0;      // m, study segment for linear density
};

struct TraceParseResult {
  std::vector<TraceRecord> records;
  std::size_t skipped_rows = 0;
  std::vector<std::size_t> skipped_line_numbers;  // 1-based, header is line 1
};

TraceParseResult parse_trace(std::istream& in, const ColumnMap& columns);

/// Population standard deviation of speed per vehicle; vehicles with fewer
/// than two samples are omitted.
std::map<int, double> speed_std_per_vehicle(std::span<const TraceRecord> records);

struct StabilityShares {
  double large_share = 0.0;  // fraction of Large vehicles with std below threshold
  double other_share = 0.0;  // same, all other classes
  std::size_t large_count = 0;
  std::size_t other_count = 0;
};

StabilityShares stability_shares(std::span<const TraceRecord> records, double threshold_mps);

/// Mean speed per vehicle (m/s).
std::map<int, double> mean_speed_per_vehicle(std::span<const TraceRecord> records);

struct WindowStat {
  double window_start = 0.0;                 // s
  std::optional<double> truck_fraction;      // empty for windows without samples
  std::optional<double> truck_density_per_km;
};

/// Per-window share of Large vehicles and their linear density over a
/// study segment of `segment_length` meters. Both are frame-averaged
/// counts; windows without samples are emitted as gaps.
std::vector<WindowStat> class_share_and_density(std::span<const TraceRecord> records, double window,
                                                double segment_length);

}  // namespace svnet
