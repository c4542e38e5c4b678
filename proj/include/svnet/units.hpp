// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace svnet::units {

inline constexpr double kFoot = 0.3048;           // m
inline constexpr double kKmh = 1000.0 / 3600.0;   // m/s per km/h
inline constexpr double kSpeedOfLight = 2.998e8;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

constexpr double kmh_to_mps(double v) { return v * kKmh; }
constexpr double mps_to_kmh(double v) { return v / kKmh; }
constexpr double us(double micros) { return micros * 1e-6; }

}  // namespace svnet::units
