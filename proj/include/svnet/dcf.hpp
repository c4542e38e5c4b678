// SPDX-License-Identifier: Apache-2.0
//
// Constant-window 802.11 DCF contention model and the bridge from PHY
// rate to a per-station packet service rate.
#pragma once

#include <cassert>
#include <cmath>

#include "svnet/error.hpp"
#include "svnet/units.hpp"

namespace svnet {

struct DcfParams {
  int cw = 32;
  double slot_time = units::us(13);
  double sifs = units::us(32);
  double difs = units::us(32);
  double rts = units::us(53);
  double cts = units::us(37);
  double ack = units::us(37);  // same control-frame format as CTS
  double error_probability = 0.0;
  double frame_bits = 800.0 * 8.0;
  double modulation_rate = 6e6;  // bit/s

  void validate() const {
    if (cw < 1) throw ConfigError("CW must be >= 1");
    if (!(slot_time > 0 && sifs > 0 && difs > 0 && rts > 0 && cts > 0 && ack > 0))
      throw ConfigError("DCF durations must be > 0");
    if (error_probability < 0.0 || error_probability > 1.0) throw ConfigError("p_e must lie in [0,1]");
    if (!(frame_bits > 0.0) || !(modulation_rate > 0.0)) throw ConfigError("frame length and rate must be > 0");
  }
};

template <typename Scalar = double>
Scalar attempt_probability(int cw) {
  if (cw < 1) throw DomainError("attempt_probability: CW must be >= 1");
  return Scalar(2) / Scalar(cw + 1);
}

/// Poisson probability of n vehicles within range s at density gamma.
template <typename Scalar = double>
Scalar vehicles_in_range_pmf(Scalar gamma, Scalar s, int n) {
  using std::exp;
  using std::lgamma;
  using std::log;
  if (!(gamma > Scalar(0)) || !(s > Scalar(0)) || n < 0) throw DomainError("vehicles_in_range_pmf: bad arguments");
  const Scalar mean = gamma * s;
  return exp(Scalar(n) * log(mean) - mean - lgamma(Scalar(n) + Scalar(1)));
}

/// Probability that at least one of n stations transmits in a slot.
template <typename Scalar>
Scalar busy_probability(Scalar tau_p, int n) {
  using std::pow;
  if (n < 0) throw DomainError("busy_probability: n must be >= 0");
  return Scalar(1) - pow(Scalar(1) - tau_p, n);
}

/// Probability that exactly one of n stations transmits and the frame
/// survives the channel.
template <typename Scalar>
Scalar success_probability(Scalar tau_p, int n, Scalar p_e) {
  using std::pow;
  if (n < 1) throw DomainError("success_probability: n must be >= 1");
  return Scalar(n) * tau_p * pow(Scalar(1) - tau_p, n - 1) * (Scalar(1) - p_e);
}

inline double collision_time(const DcfParams& p) { return p.rts + p.difs + p.slot_time; }

inline double success_time(const DcfParams& p) {
  return p.rts + 3.0 * p.sifs + 4.0 * p.slot_time + p.cts + p.ack + p.difs + p.frame_bits / p.modulation_rate;
}

/// Mean slot length (s) with n contending stations.
inline double mean_slot_time(const DcfParams& p, int n) {
  if (n < 1) throw DomainError("mean_slot_time: n must be >= 1");
  const double tau = attempt_probability(p.cw);
  const double busy = busy_probability(tau, n);
  const double succ = success_probability(tau, n, p.error_probability);
  assert(succ <= busy + 1e-15);
  return (1.0 - busy) * p.slot_time + (busy - succ) * collision_time(p) + succ * success_time(p);
}

/// Saturated per-station service rate (packets/s): the tagged station's
/// share of successful slots, one frame each, with the frame sent at
/// `phy_rate_bps`.
inline double service_rate(DcfParams p, int n, double phy_rate_bps) {
  if (!(phy_rate_bps > 0.0)) throw DomainError("service_rate: PHY rate must be > 0");
  p.modulation_rate = phy_rate_bps;
  const double t = mean_slot_time(p, n);
  assert(t > 0.0);
  const double succ = success_probability(attempt_probability(p.cw), n, p.error_probability);
  return succ / static_cast<double>(n) / t;
}

}  // namespace svnet
