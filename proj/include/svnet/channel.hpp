// SPDX-License-Identifier: Apache-2.0
//
// V2V radio channel: two-ray ground reflection for LOS links, knife-edge
// diffraction (single and multiple edges) for links obstructed by other
// vehicles, log-normal small-scale deviation and the DSRC
// sensitivity -> data rate table.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "svnet/error.hpp"
#include "svnet/random.hpp"
#include "svnet/traffic.hpp"
#include "svnet/units.hpp"

namespace svnet {

template <typename Scalar>
struct LinkGeometry {
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  Point tx_position = Point::Zero();  // m, road plane
  Point rx_position = Point::Zero();
  Scalar tx_antenna_h = Scalar(1.5);  // m above ground
  Scalar rx_antenna_h = Scalar(1.5);
  Scalar frequency = Scalar(5.9e9);  // Hz

  Scalar separation() const { return (rx_position - tx_position).norm(); }
  Scalar wavelength() const { return Scalar(units::kSpeedOfLight) / frequency; }
};

using LinkGeometryd = LinkGeometry<double>;

/// One obstructing vehicle: distance from the transmitter along the link
/// and absolute height of its top.
struct Obstacle {
  double d1 = 0.0;
  double top_height = 0.0;
};

/// Obstacles sorted by d1, each with 0 < d1 < d.
struct ObstacleProfile {
  std::vector<Obstacle> obstacles;
};

/// Single equivalent knife edge: excess height over the LOS line and its
/// distances to both link ends.
struct KnifeEdge {
  double excess_height = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

struct FadingEnvironment {
  double sigma_min = 2.0;  // dB
  double sigma_max = 5.3;  // dB
  double nv = 0.0;         // vehicles per unit area in range
  double nv_max = 0.04;     // roughly jam density over a lane, vehicles/m^2
};

struct RadioParams {
  double tx_power_dbm = 23.0;
  double tx_gain = 1.0;
  double rx_gain = 1.0;
  double reference_distance = 1.0;       // d0, m
  std::optional<double> reference_field;  // E0 at d0 (V/m); derived from power when empty
  double min_olos_distance = 10.0;        // m; shorter OLOS links are evaluated at this distance
};

struct RateEntry {
  double threshold_dbm;
  double rate_mbps;
};

/// Minimum-sensitivity -> rate mapping, ascending by threshold.
using RateTable = std::vector<RateEntry>;
RateTable default_rate_table();

// ---------------------------------------------------------------------------
// Scalar formula layer

/// Fresnel-Kirchhoff diffraction parameter for an edge of excess height h.
template <typename Scalar>
Scalar diffraction_parameter(Scalar h, Scalar d1, Scalar d2, Scalar wavelength) {
  if (!(d1 > Scalar(0)) || !(d2 > Scalar(0)) || !(wavelength > Scalar(0)))
    throw DomainError("diffraction_parameter: distances and wavelength must be > 0");
  using std::sqrt;
  return h * sqrt(Scalar(2) * (d1 + d2) / (wavelength * d1 * d2));
}

/// Additional attenuation (dB) of a knife edge with parameter v.
template <typename Scalar>
Scalar knife_edge_loss_db(Scalar v) {
  using std::log10;
  using std::sqrt;
  if (v <= Scalar(-0.7)) return Scalar(0);
  const Scalar u = v - Scalar(0.1);
  return Scalar(6.9) + Scalar(20) * log10(sqrt(u * u + Scalar(1)) + u);
}

/// Standard deviation (dB) of the zero-mean small-scale term. The static
/// obstruction term is fixed to zero on highways. NV above NV_max is
/// clamped with a warning.
double small_scale_sigma(const FadingEnvironment& env);

template <typename Scalar>
Scalar watts_to_dbm(Scalar watts) {
  using std::log10;
  return Scalar(10) * log10(watts / Scalar(1e-3));
}

template <typename Scalar>
Scalar dbm_to_watts(Scalar dbm) {
  using std::pow;
  return Scalar(1e-3) * pow(Scalar(10), dbm / Scalar(10));
}

/// E0 at d0 consistent with free-space propagation of the transmit power.
template <typename Scalar>
Scalar reference_field(const RadioParams& radio) {
  using std::sqrt;
  if (radio.reference_field) return Scalar(*radio.reference_field);
  const Scalar pt = dbm_to_watts(Scalar(radio.tx_power_dbm));
  return sqrt(Scalar(30) * pt * Scalar(radio.tx_gain)) / Scalar(radio.reference_distance);
}

/// Instantaneous two-ray E-field at time t (ground reflection coefficient -1).
template <typename Scalar>
Scalar two_ray_field(const LinkGeometry<Scalar>& g, const RadioParams& radio, Scalar t) {
  using std::cos;
  using std::sqrt;
  const Scalar d = g.separation();
  if (!(d > Scalar(0))) throw DomainError("two_ray_field: zero separation");
  const Scalar dh = g.tx_antenna_h - g.rx_antenna_h;
  const Scalar sh = g.tx_antenna_h + g.rx_antenna_h;
  const Scalar d_los = sqrt(d * d + dh * dh);
  const Scalar d_ref = sqrt(d * d + sh * sh);
  const Scalar e0d0 = reference_field<Scalar>(radio) * Scalar(radio.reference_distance);
  const Scalar omega = Scalar(2 * units::kPi) * g.frequency;
  const Scalar c = Scalar(units::kSpeedOfLight);
  return e0d0 / d_los * cos(omega * (t - d_los / c)) - e0d0 / d_ref * cos(omega * (t - d_ref / c));
}

/// Envelope of the two-ray field, |E0 d0 (e^{-jkd'}/d' - e^{-jkd''}/d'')|.
template <typename Scalar>
Scalar two_ray_envelope(const LinkGeometry<Scalar>& g, const RadioParams& radio) {
  using std::cos;
  using std::sqrt;
  const Scalar d = g.separation();
  if (!(d > Scalar(0))) throw DomainError("two_ray_envelope: zero separation");
  const Scalar dh = g.tx_antenna_h - g.rx_antenna_h;
  const Scalar sh = g.tx_antenna_h + g.rx_antenna_h;
  const Scalar d_los = sqrt(d * d + dh * dh);
  const Scalar d_ref = sqrt(d * d + sh * sh);
  // path difference in a cancellation-free form
  const Scalar delta = Scalar(4) * g.tx_antenna_h * g.rx_antenna_h / (d_los + d_ref);
  const Scalar phase = Scalar(2 * units::kPi) * delta / g.wavelength();
  const Scalar e0d0 = reference_field<Scalar>(radio) * Scalar(radio.reference_distance);
  const Scalar a = Scalar(1) / d_los, b = Scalar(1) / d_ref;
  const Scalar mag2 = a * a + b * b - Scalar(2) * a * b * cos(phase);
  return e0d0 * sqrt(mag2 > Scalar(0) ? mag2 : Scalar(0));
}

/// Received power in watts from the field envelope; independent of t.
template <typename Scalar>
Scalar two_ray_power(const LinkGeometry<Scalar>& g, const RadioParams& radio, Scalar /*t*/ = Scalar(0)) {
  const Scalar e = two_ray_envelope(g, radio);
  const Scalar lambda = g.wavelength();
  const Scalar pi = Scalar(units::kPi);
  return e * e * Scalar(radio.rx_gain) * lambda * lambda / (Scalar(480) * pi * pi);
}

// ---------------------------------------------------------------------------
// Link-level composition

/// Equivalent single knife edge of a multi-obstacle profile: intersection
/// of the steepest transmitter-side and receiver-side rays over the
/// obstacle tops (Bullington). A single obstacle maps to itself.
KnifeEdge equivalent_height(const ObstacleProfile& profile, const LinkGeometryd& geometry);

enum class LinkType { LOS, OLOS };

struct LinkClassification {
  LinkType type = LinkType::LOS;
  ObstacleProfile profile;
};

/// LOS/OLOS classification against every other vehicle. A vehicle is an
/// obstacle when it lies strictly between the ends along the road, within
/// `corridor_half_width` of the link line laterally, and its roof is above
/// the LOS line at its abscissa.
LinkClassification classify_link(const VehicleState& tx, const VehicleState& rx,
                                 std::span<const VehicleState> vehicles, double corridor_half_width);

LinkGeometryd link_geometry(const VehicleState& tx, const VehicleState& rx);

/// Deterministic large-scale received power in dBm (no small-scale term).
double mean_received_power_dbm(const LinkGeometryd& geometry, const RadioParams& radio,
                               const ObstacleProfile* profile);

/// Received power in dBm; with an rng a Normal(0, sigma) draw is added,
/// without one the deterministic mean is returned.
double received_power_dbm(const LinkGeometryd& geometry, const RadioParams& radio, const ObstacleProfile* profile,
                          const FadingEnvironment& env, Rng* rng);

/// Highest rate whose threshold is <= power; 0 when below every threshold.
double rate_from_power(double power_dbm, const RateTable& table = default_rate_table());

/// Knife-edge loss of a single obstacle of the given excess height placed
/// midway on a link of length d.
double midway_obstacle_loss_db(double excess_height, double distance, double wavelength);

struct ObstacleLoss {
  double distance = 0.0;  // m
  double auto_db = 0.0;   // compact body midway
  double truck_db = 0.0;  // large body midway
};

/// Added loss of a mean-height compact and large vehicle placed midway
/// between two antennas at `antenna_height`.
ObstacleLoss midway_vehicle_loss(double distance, double antenna_height = 1.5, double frequency = 5.9e9);

}  // namespace svnet
