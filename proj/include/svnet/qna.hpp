// SPDX-License-Identifier: Apache-2.0
//
// Queueing network analyzer for a feed-forward chain of G/G/1 stations.
// Each stream is described by its rate and squared coefficient of
// variation (SCV); superposition uses the convex-combination/asymptotic
// weight, splitting the thinning relation, and waits the
// Kraemer-Langenbach-Belz corrected G/G/1 formula.
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "svnet/error.hpp"

namespace svnet::qna {

struct ExternalSource {
  double rate = 0.0;  // packets/s
  double scv = 1.0;
};

struct Stream {
  double rate = 0.0;
  double scv = 1.0;
};

// ---------------------------------------------------------------------------
// Formula layer

template <typename Scalar = double>
Scalar external_arrival(std::span<const ExternalSource> sources) {
  Scalar total(0);
  for (const auto& s : sources) total += Scalar(s.rate);
  return total;
}

/// Convex-combination weight alpha_j from the station utilization and the
/// proportions p_{k,j} of every input stream.
template <typename Scalar = double>
Scalar asymptotic_weight(Scalar rho, std::span<const Scalar> proportions) {
  Scalar sum_p(0), sum_p2(0);
  for (Scalar p : proportions) {
    sum_p += p;
    sum_p2 += p * p;
  }
  using std::abs;
  if (abs(sum_p - Scalar(1)) > Scalar(1e-9)) throw DomainError("asymptotic_weight: proportions must sum to 1");
  if (rho < Scalar(0) || rho >= Scalar(1)) throw DomainError("asymptotic_weight: rho must lie in [0,1)");
  const Scalar v = Scalar(1) / sum_p2;
  const Scalar one_minus_rho = Scalar(1) - rho;
  return Scalar(1) / (Scalar(1) + Scalar(4) * one_minus_rho * one_minus_rho * (v - Scalar(1)));
}

/// SCV of the superposed external stream. An empty superposition is a
/// zero-rate stream carrying SCV 1.
template <typename Scalar = double>
Scalar superpose_external(std::span<const ExternalSource> sources, Scalar alpha) {
  const Scalar total = external_arrival<Scalar>(sources);
  if (!(total > Scalar(0))) return Scalar(1);
  Scalar mix(0);
  for (const auto& s : sources) mix += Scalar(s.rate) / total * Scalar(s.scv);
  return alpha * mix + Scalar(1) - alpha;
}

/// Stream leaving the upstream station towards the next one with
/// probability q. The upstream arrival SCV stands in for its departure SCV.
template <typename Scalar = double>
std::pair<Scalar, Scalar> split_departure(Scalar upstream_rate, Scalar upstream_arrival_scv, Scalar generation_rate,
                                          Scalar q) {
  if (q < Scalar(0) || q > Scalar(1)) throw DomainError("split_departure: q must lie in [0,1]");
  return {(upstream_rate + generation_rate) * q, upstream_arrival_scv * q + Scalar(1) - q};
}

/// Merge of the external aggregate with the internal stream.
template <typename Scalar = double>
std::pair<Scalar, Scalar> merge_arrivals(Stream external, Stream internal, Scalar alpha) {
  const Scalar total = Scalar(external.rate) + Scalar(internal.rate);
  if (!(total > Scalar(0))) return {Scalar(0), Scalar(1)};
  const Scalar p0 = Scalar(external.rate) / total;
  const Scalar p1 = Scalar(internal.rate) / total;
  return {total, alpha * (p0 * Scalar(external.scv) + p1 * Scalar(internal.scv)) + Scalar(1) - alpha};
}

/// Station service rate from per-hop rates and splits (index 0 is the
/// next station on the chain) and the station SCV implied by the next-hop
/// SCV through the thinning relation.
template <typename Scalar = double>
std::pair<Scalar, Scalar> service_process(std::span<const Scalar> hop_rates, std::span<const Scalar> splits,
                                          Scalar next_hop_scv) {
  if (hop_rates.size() != splits.size() || hop_rates.empty())
    throw DomainError("service_process: rates and splits must be non-empty and aligned");
  Scalar rate(0), sum_q(0);
  for (std::size_t k = 0; k < hop_rates.size(); ++k) {
    if (splits[k] < Scalar(0)) throw DomainError("service_process: negative split");
    rate += splits[k] * hop_rates[k];
    sum_q += splits[k];
  }
  using std::abs;
  if (abs(sum_q - Scalar(1)) > Scalar(1e-9)) throw DomainError("service_process: splits must sum to 1");
  const Scalar q = splits[0];
  if (q == Scalar(0)) {
    if (next_hop_scv != Scalar(1))
      throw InconsistencyError("service_process: next-hop SCV != 1 with zero next-hop split");
    return {rate, Scalar(1)};
  }
  const Scalar scv = (next_hop_scv - Scalar(1)) / q + Scalar(1);
  if (scv < Scalar(0))
    throw InconsistencyError("service_process: next-hop SCV below 1 - q implies a negative station SCV");
  return {rate, scv};
}

/// Next-hop SCV of a station with SCV c2s thinned by split q (inverse of
/// the relation used in service_process).
template <typename Scalar = double>
Scalar thinned_service_scv(Scalar station_scv, Scalar q) {
  return q * station_scv + (Scalar(1) - q);
}

/// Utilization including the station's own generated traffic; throws
/// OverloadError (station index `station`) when rho >= 1.
template <typename Scalar = double>
Scalar utilization(Scalar lambda, Scalar generation_rate, Scalar service_rate, std::size_t station = 0) {
  if (!(service_rate > Scalar(0))) throw DomainError("utilization: service rate must be > 0");
  const Scalar rho = (lambda + generation_rate) / service_rate;
  if (rho >= Scalar(1)) throw OverloadError(station, static_cast<double>(rho));
  return rho;
}

/// KLB correction factor g in (0, 1].
template <typename Scalar = double>
Scalar klb_factor(Scalar rho, Scalar ca2, Scalar cs2) {
  using std::exp;
  if (ca2 >= Scalar(1)) return Scalar(1);
  const Scalar one_minus_ca2 = Scalar(1) - ca2;
  return exp(-(Scalar(2) * (Scalar(1) - rho) / (Scalar(3) * rho)) * (one_minus_ca2 * one_minus_ca2 / (cs2 + ca2)));
}

/// Mean G/G/1 waiting time; 0 at rho = 0 by continuity.
template <typename Scalar = double>
Scalar waiting_time(Scalar rho, Scalar service_rate, Scalar ca2, Scalar cs2) {
  if (rho == Scalar(0)) return Scalar(0);
  if (rho < Scalar(0) || rho >= Scalar(1)) throw DomainError("waiting_time: rho must lie in [0,1)");
  if (!(service_rate > Scalar(0))) throw DomainError("waiting_time: service rate must be > 0");
  const Scalar g = klb_factor(rho, ca2, cs2);
  return rho * (ca2 + cs2) * g / (Scalar(2) * service_rate * (Scalar(1) - rho));
}

/// M/M/1 mean wait rho / (tau (1 - rho)).
template <typename Scalar = double>
Scalar mm1_waiting_time(Scalar rho, Scalar service_rate) {
  return rho / (service_rate * (Scalar(1) - rho));
}

// ---------------------------------------------------------------------------
// Chain model

struct Hop {
  double rate = 0.0;   // tau_{j,k}, packets/s
  double split = 1.0;  // q_{j,k}
};

struct Station {
  std::vector<ExternalSource> external;
  double generation_rate = 0.0;  // delta_gen
  std::vector<Hop> hops;         // hops[0] leads to the next station
  double next_hop_scv = 1.0;     // c2_{s,j,j+1}
  std::optional<double> service_scv;  // overrides the value derived from next_hop_scv
  std::optional<double> arrival_scv;  // pins c2_{a,j} (variance sweeps)
};

struct ChainModel {
  std::vector<Station> stations;
};

/// Per-station results, one entry per station in chain order.
struct ChainSolution {
  Eigen::VectorXd external_rate;  // lambda_{0,j}
  Eigen::VectorXd internal_rate;  // lambda_{j-1,j}
  Eigen::VectorXd lambda;         // lambda_j
  Eigen::VectorXd arrival_scv;    // c2_{a,j}
  Eigen::VectorXd service_rate;   // tau_j
  Eigen::VectorXd service_scv;    // c2_{s,j}
  Eigen::VectorXd rho;
  Eigen::VectorXd alpha;
  Eigen::VectorXd wait;           // E[WT_j], s

  Eigen::Index size() const { return lambda.size(); }
};

/// Two-pass sweep: rates and utilizations downstream first, then SCVs and
/// waits using those utilizations. Throws OverloadError naming the first
/// overloaded station.
ChainSolution solve_chain(const ChainModel& chain);

/// End-to-end delay from node i to node j along the chain: the packet
/// waits at, and is transmitted from, stations i..j-1. hop_rates[k] is the
/// transfer rate from station k to k+1.
double chain_delay(const ChainSolution& solution, std::size_t i, std::size_t j, std::span<const double> hop_rates);

/// Expected delay of a packet entering at station `entry` that leaves the
/// chain at each station with probability 1 - q_{j,j+1}; per-station cost
/// is its wait plus its mean service time.
double expected_path_delay(const ChainModel& chain, const ChainSolution& solution, std::size_t entry = 0);

/// Chain aggregate throughput, sum_j min(lambda_{0,j} + delta_j, tau_j).
double chain_throughput(const ChainModel& chain, const ChainSolution& solution);

/// Same as chain_throughput but valid for overloaded chains (no solve).
double chain_throughput(const ChainModel& chain);

/// Expected path delay from station 0 with every station's arrival and
/// service SCV pinned to each grid pair; rows follow `arrival_scvs`,
/// columns `service_scvs`.
Eigen::MatrixXd variability_surface(const ChainModel& chain, std::span<const double> arrival_scvs,
                                    std::span<const double> service_scvs);

}  // namespace svnet::qna
