// SPDX-License-Identifier: Apache-2.0
#include "svnet/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "svnet/error.hpp"
#include "svnet/units.hpp"

namespace svnet {

const char* to_string(VehicleClass c) {
  switch (c) {
    case VehicleClass::Compact:
      return "compact";
    case VehicleClass::MidSize:
      return "midsize";
    case VehicleClass::Large:
      return "large";
  }
  return "?";
}

HeightModel height_model(VehicleClass c) {
  switch (c) {
    case VehicleClass::Compact:
      return {1.5, 0.084};
    case VehicleClass::MidSize:
      return {2.0, 0.084};
    case VehicleClass::Large:
      return {3.35, 0.084};
  }
  return {};
}

TrafficConfig::TrafficConfig() {
  using units::kmh_to_mps;
  speed_law[0] = {kmh_to_mps(20.0), kmh_to_mps(40.0), kmh_to_mps(13.0)};
  speed_law[1] = speed_law[0];
  speed_law[2] = {kmh_to_mps(20.0), kmh_to_mps(30.0), kmh_to_mps(9.0)};
  for (auto c : kAllClasses) heights[class_index(c)] = height_model(c);
}

void TrafficConfig::validate() const {
  if (!(density > 0.0)) throw ConfigError("traffic density must be > 0");
  if (!(road_length > 0.0)) throw ConfigError("road_length must be > 0");
  double sum = 0.0;
  for (double f : class_mix) {
    if (f < 0.0 || f > 1.0) throw ConfigError("class fractions must lie in [0,1]");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("class fractions must sum to 1");
  for (const auto& law : speed_law) {
    if (law.mean_lo < 0.0 || law.mean_hi < law.mean_lo || law.std_dev < 0.0)
      throw ConfigError("invalid speed law");
  }
  for (const auto& h : heights) {
    if (!(h.mean > 0.0) || h.std_dev < 0.0) throw ConfigError("invalid height model");
    if (!(h.mean > antenna_offset)) throw ConfigError("body height must exceed antenna offset");
  }
  if (antenna_offset < 0.0) throw ConfigError("antenna_offset must be >= 0");
  if (lanes < 1 || !(lane_width > 0.0)) throw ConfigError("invalid lane geometry");
  if (bidirectional && lanes < 2) throw ConfigError("bidirectional traffic needs >= 2 lanes");
  if (max_vehicles == 0) throw ConfigError("max_vehicles must be >= 1");
}

std::array<double, 3> pdr_class_mix(int percentage_class) {
  // {large, mid, small} percentages per class
  std::array<double, 3> large_mid_small{};
  switch (percentage_class) {
    case 1:
      large_mid_small = {2.7, 34.7, 62.5};
      break;
    case 2:
      large_mid_small = {5.4, 34.7, 59.9};
      break;
    case 3:
      large_mid_small = {10.8, 34.7, 54.5};
      break;
    default:
      throw ConfigError("percentage class must be 1, 2 or 3");
  }
  const double total = large_mid_small[0] + large_mid_small[1] + large_mid_small[2];
  return {large_mid_small[2] / total, large_mid_small[1] / total, large_mid_small[0] / total};
}

namespace {

int draw_lane(const TrafficConfig& config, Rng& rng, Direction& dir) {
  std::uniform_int_distribution<int> lane_dist(0, config.lanes - 1);
  const int lane = lane_dist(rng);
  dir = Direction::Forward;
  if (config.bidirectional && lane >= (config.lanes + 1) / 2) dir = Direction::Backward;
  return lane;
}

double draw_speed(const SpeedLaw& law, double mean, Rng& rng) {
  if (law.std_dev <= 0.0) return mean;
  std::normal_distribution<double> n(mean, law.std_dev);
  return std::max(0.0, n(rng));
}

}  // namespace

VehicleState spawn_vehicle(const TrafficConfig& config, Rng& rng, int id, double x) {
  VehicleState v;
  v.id = id;
  std::discrete_distribution<int> cls_dist(config.class_mix.begin(), config.class_mix.end());
  v.cls = static_cast<VehicleClass>(cls_dist(rng) + 1);
  v.lane = draw_lane(config, rng, v.direction);
  v.position = {x, (v.lane + 0.5) * config.lane_width};

  const SpeedLaw& law = config.speed_law[class_index(v.cls)];
  std::uniform_real_distribution<double> mean_dist(law.mean_lo, law.mean_hi);
  v.mean_speed = law.mean_hi > law.mean_lo ? mean_dist(rng) : law.mean_lo;
  v.speed = draw_speed(law, v.mean_speed, rng);

  const HeightModel& h = config.heights[class_index(v.cls)];
  if (h.std_dev > 0.0) {
    std::normal_distribution<double> hd(h.mean, h.std_dev);
    // keep the roof above the antenna mount on extreme draws
    v.body_height = std::max(hd(rng), config.antenna_offset + 1e-3);
  } else {
    v.body_height = h.mean;
  }
  v.antenna_height = v.body_height + config.antenna_offset;
  return v;
}

std::vector<VehicleState> spawn_synthetic(const TrafficConfig& config, Rng& rng) {
  config.validate();
  std::poisson_distribution<long> count_dist(config.density * config.road_length);
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(count_dist(rng)), config.max_vehicles);
  std::uniform_real_distribution<double> pos(0.0, config.road_length);

  std::vector<VehicleState> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(spawn_vehicle(config, rng, static_cast<int>(i), pos(rng)));
  std::sort(out.begin(), out.end(), [](const VehicleState& a, const VehicleState& b) { return a.x() < b.x(); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

void step_mobility(std::vector<VehicleState>& states, double dt, const TrafficConfig& config, Rng& rng,
                   int& next_id) {
  if (!(dt > 0.0)) throw DomainError("mobility step must be > 0");
  const double L = config.road_length;
  for (auto& v : states) {
    v.speed = draw_speed(config.speed_law[class_index(v.cls)], v.mean_speed, rng);
    v.position.x() += sign(v.direction) * v.speed * dt;

    double re_entry = -1.0;
    if (v.x() >= L) re_entry = v.x() - L;
    if (v.x() < 0.0) re_entry = v.x() + L;
    if (re_entry >= 0.0) {
      // the entrant takes over the lane at the upstream edge
      VehicleState fresh = spawn_vehicle(config, rng, next_id++, 0.0);
      fresh.lane = v.lane;
      fresh.direction = v.direction;
      fresh.position = {std::clamp(re_entry, 0.0, std::nextafter(L, 0.0)), v.y()};
      v = fresh;
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

}  // namespace

TraceParseResult parse_trace(std::istream& in, const ColumnMap& columns) {
  TraceParseResult result;
  std::string line;
  std::size_t line_no = 0;

  // skip leading blank lines; an empty stream yields no records
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) return result;

  const auto header = split(line, columns.delimiter);
  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return i;
    throw TraceError("trace is missing mapped column '" + name + "'");
  };
  const std::size_t c_id = find_col(columns.id);
  const std::size_t c_frame = find_col(columns.frame);
  const std::size_t c_x = find_col(columns.x);
  const std::size_t c_y = find_col(columns.y);
  const std::size_t c_v = find_col(columns.velocity);
  const std::size_t c_cls = find_col(columns.vehicle_class);
  const std::size_t needed = std::max({c_id, c_frame, c_x, c_y, c_v, c_cls}) + 1;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, columns.delimiter);
    double id = 0, frame = 0, x = 0, y = 0, vel = 0, cls = 0;
    const bool ok = cells.size() >= needed && parse_double(cells[c_id], id) && parse_double(cells[c_frame], frame) &&
                    parse_double(cells[c_x], x) && parse_double(cells[c_y], y) && parse_double(cells[c_v], vel) &&
                    parse_double(cells[c_cls], cls);
    const auto code = columns.class_codes.find(static_cast<int>(cls));
    if (!ok || code == columns.class_codes.end() || vel < 0.0) {
      ++result.skipped_rows;
      result.skipped_line_numbers.push_back(line_no);
      continue;
    }
    TraceRecord r;
    r.vehicle_id = static_cast<int>(id);
    r.frame_time = frame * columns.frame_period;
    r.position_x = x * columns.length_scale;
    r.position_y = y * columns.length_scale;
    r.speed = vel * columns.length_scale;
    r.vehicle_class = code->second;
    result.records.push_back(r);
  }
  return result;
}

namespace {

std::map<int, std::vector<double>> speeds_by_vehicle(std::span<const TraceRecord> records) {
  std::map<int, std::vector<double>> by_vehicle;
  for (const auto& r : records) by_vehicle[r.vehicle_id].push_back(r.speed);
  // sorted samples make the sums independent of record order
  for (auto& [id, v] : by_vehicle) std::sort(v.begin(), v.end());
  return by_vehicle;
}

}  // namespace

std::map<int, double> speed_std_per_vehicle(std::span<const TraceRecord> records) {
  std::map<int, double> out;
  for (const auto& [id, v] : speeds_by_vehicle(records)) {
    if (v.size() < 2) continue;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : v) ss += (s - mean) * (s - mean);
    out[id] = std::sqrt(ss / n);
  }
  return out;
}

std::map<int, double> mean_speed_per_vehicle(std::span<const TraceRecord> records) {
  std::map<int, double> out;
  for (const auto& [id, v] : speeds_by_vehicle(records))
    out[id] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return out;
}

StabilityShares stability_shares(std::span<const TraceRecord> records, double threshold_mps) {
  std::map<int, VehicleClass> cls;
  for (const auto& r : records) cls[r.vehicle_id] = r.vehicle_class;
  StabilityShares s;
  std::size_t large_below = 0, other_below = 0;
  for (const auto& [id, sd] : speed_std_per_vehicle(records)) {
    const bool below = sd < threshold_mps;
    if (cls[id] == VehicleClass::Large) {
      ++s.large_count;
      large_below += below;
    } else {
      ++s.other_count;
      other_below += below;
    }
  }
  if (s.large_count) s.large_share = static_cast<double>(large_below) / static_cast<double>(s.large_count);
  if (s.other_count) s.other_share = static_cast<double>(other_below) / static_cast<double>(s.other_count);
  return s;
}

std::vector<WindowStat> class_share_and_density(std::span<const TraceRecord> records, double window,
                                                double segment_length) {
  if (!(window > 0.0)) throw DomainError("window must be > 0");
  if (!(segment_length > 0.0)) throw DomainError("segment length must be > 0");
  std::vector<WindowStat> out;
  if (records.empty()) return out;

  double t_min = records.front().frame_time, t_max = t_min;
  for (const auto& r : records) {
    t_min = std::min(t_min, r.frame_time);
    t_max = std::max(t_max, r.frame_time);
  }
  const double origin = std::floor(t_min / window) * window;
  const auto n_windows = static_cast<std::size_t>(std::floor((t_max - origin) / window)) + 1;

  struct FrameCount {
    std::size_t all = 0, large = 0;
  };
  std::vector<std::map<double, FrameCount>> frames(n_windows);
  for (const auto& r : records) {
    auto w = static_cast<std::size_t>(std::floor((r.frame_time - origin) / window));
    w = std::min(w, n_windows - 1);
    auto& fc = frames[w][r.frame_time];
    ++fc.all;
    fc.large += r.vehicle_class == VehicleClass::Large;
  }

  const double km = segment_length / 1000.0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    WindowStat s;
    s.window_start = origin + static_cast<double>(w) * window;
    if (!frames[w].empty()) {
      double all = 0.0, large = 0.0;
      for (const auto& [t, fc] : frames[w]) {
        all += static_cast<double>(fc.all);
        large += static_cast<double>(fc.large);
      }
      const double nf = static_cast<double>(frames[w].size());
      s.truck_fraction = large / all;
      s.truck_density_per_km = (large / nf) / km;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace svnet
