// SPDX-License-Identifier: Apache-2.0
#include "svnet/channel.hpp"

#include <algorithm>
#include <limits>

#include <spdlog/spdlog.h>

namespace svnet {

RateTable default_rate_table() {
  return {{-85, 3.0}, {-84, 4.5}, {-82, 6.0}, {-80, 9.0}, {-77, 12.0}, {-70, 18.0}, {-69, 24.0}, {-67, 27.0}};
}

double small_scale_sigma(const FadingEnvironment& env) {
  if (!(env.nv_max > 0.0)) throw DomainError("small_scale_sigma: NV_max must be > 0");
  if (env.sigma_min < 0.0 || env.sigma_max < env.sigma_min)
    throw DomainError("small_scale_sigma: need 0 <= sigma_min <= sigma_max");
  double nv = std::max(env.nv, 0.0);
  if (nv > env.nv_max) {
    spdlog::warn("NV={} exceeds NV_max={}, clamping", nv, env.nv_max);
    nv = env.nv_max;
  }
  return env.sigma_min + (env.sigma_max - env.sigma_min) / 2.0 * std::sqrt(nv / env.nv_max);
}

KnifeEdge equivalent_height(const ObstacleProfile& profile, const LinkGeometryd& geometry) {
  if (profile.obstacles.empty()) throw DomainError("equivalent_height: empty obstacle profile");
  const double d = geometry.separation();
  if (!(d > 0.0)) throw DomainError("equivalent_height: zero separation");
  const double ht = geometry.tx_antenna_h, hr = geometry.rx_antenna_h;

  // Work in coordinates relative to the LOS line; the steepest rays from
  // each end then have slopes a (Tx side) and b (Rx side) of equal sign.
  double a = -std::numeric_limits<double>::infinity();
  double b = -std::numeric_limits<double>::infinity();
  double best_excess = -std::numeric_limits<double>::infinity();
  double best_d1 = 0.0;
  for (const auto& o : profile.obstacles) {
    if (!(o.d1 > 0.0 && o.d1 < d)) throw DomainError("equivalent_height: obstacle outside (0, d)");
    const double excess = o.top_height - (ht + (hr - ht) * o.d1 / d);
    a = std::max(a, excess / o.d1);
    b = std::max(b, excess / (d - o.d1));
    if (excess > best_excess) {
      best_excess = excess;
      best_d1 = o.d1;
    }
  }
  if (profile.obstacles.size() == 1 || a == 0.0 || b == 0.0) return {best_excess, best_d1, d - best_d1};

  const double x = b * d / (a + b);
  return {a * x, x, d - x};
}

LinkGeometryd link_geometry(const VehicleState& tx, const VehicleState& rx) {
  LinkGeometryd g;
  g.tx_position = tx.position;
  g.rx_position = rx.position;
  g.tx_antenna_h = tx.antenna_height;
  g.rx_antenna_h = rx.antenna_height;
  return g;
}

LinkClassification classify_link(const VehicleState& tx, const VehicleState& rx,
                                 std::span<const VehicleState> vehicles, double corridor_half_width) {
  LinkClassification out;
  const double dx = rx.x() - tx.x();
  if (dx == 0.0) return out;
  const double d = (rx.position - tx.position).norm();
  const double lo = std::min(tx.x(), rx.x()), hi = std::max(tx.x(), rx.x());
  for (const auto& v : vehicles) {
    if (v.id == tx.id || v.id == rx.id) continue;
    if (!(v.x() > lo && v.x() < hi)) continue;
    const double t = (v.x() - tx.x()) / dx;
    const double line_y = tx.y() + t * (rx.y() - tx.y());
    if (std::abs(v.y() - line_y) > corridor_half_width) continue;
    const double line_h = tx.antenna_height + t * (rx.antenna_height - tx.antenna_height);
    if (v.body_height <= line_h) continue;
    out.profile.obstacles.push_back({t * d, v.body_height});
  }
  if (!out.profile.obstacles.empty()) {
    out.type = LinkType::OLOS;
    std::sort(out.profile.obstacles.begin(), out.profile.obstacles.end(),
              [](const Obstacle& a, const Obstacle& b) { return a.d1 < b.d1; });
  }
  return out;
}

double mean_received_power_dbm(const LinkGeometryd& geometry, const RadioParams& radio,
                               const ObstacleProfile* profile) {
  double p = watts_to_dbm(two_ray_power(geometry, radio));
  if (profile && !profile->obstacles.empty()) {
    KnifeEdge edge = equivalent_height(*profile, geometry);
    const double d = geometry.separation();
    if (d < radio.min_olos_distance) {
      const double s = radio.min_olos_distance / d;
      edge.d1 *= s;
      edge.d2 *= s;
    }
    const double v = diffraction_parameter(edge.excess_height, edge.d1, edge.d2, geometry.wavelength());
    p -= knife_edge_loss_db(v);
  }
  return p;
}

double received_power_dbm(const LinkGeometryd& geometry, const RadioParams& radio, const ObstacleProfile* profile,
                          const FadingEnvironment& env, Rng* rng) {
  double p = mean_received_power_dbm(geometry, radio, profile);
  if (rng) {
    const double sigma = small_scale_sigma(env);
    if (sigma > 0.0) p += std::normal_distribution<double>(0.0, sigma)(*rng);
  }
  return p;
}

double rate_from_power(double power_dbm, const RateTable& table) {
  double rate = 0.0;
  for (const auto& e : table)
    if (e.threshold_dbm <= power_dbm) rate = std::max(rate, e.rate_mbps);
  return rate;
}

double midway_obstacle_loss_db(double excess_height, double distance, double wavelength) {
  const double half = distance / 2.0;
  return knife_edge_loss_db(diffraction_parameter(excess_height, half, half, wavelength));
}

ObstacleLoss midway_vehicle_loss(double distance, double antenna_height, double frequency) {
  const double wavelength = units::kSpeedOfLight / frequency;
  auto loss = [&](VehicleClass c) {
    return midway_obstacle_loss_db(height_model(c).mean - antenna_height, distance, wavelength);
  };
  return {distance, loss(VehicleClass::Compact), loss(VehicleClass::Large)};
}

}  // namespace svnet
