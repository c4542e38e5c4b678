// SPDX-License-Identifier: Apache-2.0
//
// Discrete-event packet simulator over the two-tier backbone, plus the
// static per-link PDR experiment and paired scheme comparison.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "svnet/backbone.hpp"
#include "svnet/channel.hpp"
#include "svnet/dcf.hpp"
#include "svnet/qna.hpp"
#include "svnet/traffic.hpp"

namespace svnet {

enum class Scheme { TwoTier, Baseline };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct RunConfig {
  TrafficConfig traffic;
  RadioParams radio;
  FadingEnvironment fading;
  RateTable rates = default_rate_table();
  DcfParams mac;
  ProtocolParams protocol;
  StabilityWeights weights;
  Scheme scheme = Scheme::TwoTier;

  double duration = 90.0;            // s
  double warmup = 10.0;              // s excluded from delay/throughput statistics
  double mobility_step = 1.0;        // s
  int retry_limit = 7;               // failed attempts before a frame is dropped
  double beacon_speed_smoothing = 0.2;  // EWMA weight per mobility step for advertised speed (1 = raw)
  double corridor_half_width = 3.5;  // m, obstacle corridor (same and adjacent lane)
  double pgr = 20.0;                 // packets/s per source
  double arrival_scv = 0.2;          // source interarrival SCV (1 = Poisson)
  double service_scv = 0.2;          // per-hop service-time SCV
  double generation_rate = 0.0;      // packets/s generated by every SV
  double packet_bits = 6400.0;
  double source_zone_lo = 0.15;      // main source drawn from [lo, hi] * road length
  double source_zone_hi = 0.25;
  double destination_offset = 900.0;  // m ahead of the main source
  double extra_source_fraction = 0.02;  // chance a vehicle between source and destination also sends
  std::uint64_t seed = 1;
  TraceAnalysis trace;  // used by trace analysis only

  StabilityWeights effective_weights() const;
  void validate() const;
};

struct StationStats {
  std::size_t index = 0;           // 0 = main source, j = j-th SV
  double arrival_rate = 0.0;       // packets/s entering the queue
  double internal_rate = 0.0;      // from station index-1
  std::vector<double> external_rates;  // per external sender, packets/s
  double service_rate = 0.0;       // 1 / mean service time
  double service_scv = 0.0;        // of sampled service times
  double forward_fraction = 0.0;   // served packets passed to station index+1
  std::size_t served = 0;
  double rho = 0.0;                // arrival_rate / service_rate
  double mean_wait = 0.0;          // s queued before reaching the head
};

struct SimReport {
  std::size_t vehicles = 0;
  std::size_t sources = 0;
  std::size_t sent = 0;
  std::size_t delivered = 0;
  std::size_t dropped = 0;
  std::size_t in_flight = 0;
  double pdr = 1.0;
  bool pdr_zero_denominator = false;
  double mean_e2ed = 0.0;          // s, main flow, created after warm-up
  std::vector<double> e2ed_samples;
  double delivered_bits = 0.0;
  double throughput_pps = 0.0;     // deliveries inside the measurement window
  double throughput_bps = 0.0;
  std::size_t churn = 0;           // ELECT/REPLACE/BREAK events after bootstrap
  std::size_t holds_no_route = 0;  // send attempts deferred: no next hop in range
  std::size_t failed_attempts = 0; // transmissions below sensitivity on every candidate hop
  double route_outage = 0.0;       // node-seconds queues spent with no next hop, after warm-up
  std::size_t initial_chain_length = 0;
  bool bootstrapped = false;
  std::vector<StationStats> stations;
  std::vector<StationStats> edge_stations;  // off-chain sources; index = vehicle id
  std::optional<double> qna_e2ed;        // analyzer prediction from this run's station inputs
  std::optional<double> qna_throughput;
  std::optional<std::size_t> qna_overloaded_station;
};

/// One run. Protocol events are written as `time,node,event,detail` lines
/// when `protocol_log` is given.
SimReport run(const RunConfig& config, std::ostream* protocol_log = nullptr);

/// True when stalled queues (no next hop) add up to at most
/// `max_outage_fraction` of the measurement window. The analytic chain
/// assumes a connected backbone, so sim/analysis comparisons use these runs.
bool backbone_connected(const SimReport& report, const RunConfig& config, double max_outage_fraction = 0.02);

/// QNA chain assembled from a run's per-station statistics.
qna::ChainModel chain_model_from(const SimReport& report, const RunConfig& config);

struct SchemeComparison {
  SimReport two_tier;
  SimReport baseline;
};

/// Both schemes on the same seed, hence the same vehicles and flows.
SchemeComparison compare_schemes(RunConfig config);

struct PdrConfig {
  TrafficConfig traffic;
  RadioParams radio;
  FadingEnvironment fading;
  ProtocolParams protocol;
  StabilityWeights weights;
  RateTable rates = default_rate_table();
  double corridor_half_width = 3.5;
  std::size_t chain_length = 5;
  std::size_t replications = 300;
  std::size_t epochs_per_link = 50;  // shadowing draws per link
  std::uint64_t seed = 7;
};

struct PdrCurve {
  int vehicle_class = 1;                 // class-mix index 1..3
  std::vector<double> rate_mbps;
  std::vector<double> pdr;               // same order as rate_mbps
  std::size_t links = 0;
};

/// Per-link PDR along bootstrap paths for each class mix, comparing every
/// shadowing draw against each rate's sensitivity threshold.
std::vector<PdrCurve> measure_pdr(const PdrConfig& config, std::span<const int> class_mixes = {});

}  // namespace svnet
