// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: sweep x replication expansion, parallel
// execution with per-run failure capture, and per-point aggregation for
// sim-vs-analysis and scheme-vs-scheme comparisons.
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "svnet/sim.hpp"

namespace svnet {

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

using Assignment = std::vector<std::pair<std::string, std::string>>;  // key -> value, axis order

struct ExperimentSpec {
  RunConfig base;
  std::vector<SweepAxis> axes;  // cartesian product, first axis slowest
  std::size_t replications = 1;
  std::uint64_t seed_base = 1;
  std::vector<std::uint64_t> seeds;  // explicit replication seeds; overrides seed_base

  /// Replication count >= 1, axes name distinct config keys other than
  /// the seed, and no seed repeats.
  void validate() const;
  std::vector<std::uint64_t> replication_seeds() const;
  std::vector<Assignment> points() const;
};

struct RunJob {
  std::size_t point = 0;
  std::size_t replication = 0;
  Assignment assignment;
  RunConfig config;
};

/// Points x replications jobs; every point reuses the same seed list, so
/// runs at different points are paired by replication.
std::vector<RunJob> expand(const ExperimentSpec& spec);

struct RunOutcome {
  RunJob job;
  std::optional<SimReport> report;
  std::string error;  // set when the run threw
};

/// Runs every job on up to `threads` workers (0 = hardware concurrency).
/// A failing run is captured in its outcome; the others continue. Output
/// order matches `jobs`.
std::vector<RunOutcome> execute(const std::vector<RunJob>& jobs, std::size_t threads = 0);

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std_dev = std::numeric_limits<double>::quiet_NaN();  // sample standard deviation
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& values);

/// Relative error (a - b) / b; NaN when b is zero or either side is NaN.
double relative_error(double a, double b);

struct PointSummary {
  std::size_t point = 0;
  Assignment assignment;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::size_t used = 0;  // runs entering the sim-vs-analysis statistics
  Stat e2ed, throughput, pdr;
  Stat qna_e2ed, qna_throughput;
  double e2ed_rel_error = std::numeric_limits<double>::quiet_NaN();
  double throughput_rel_error = std::numeric_limits<double>::quiet_NaN();
};

struct AggregateOptions {
  // A run enters the comparison only with a connected backbone and a
  // solvable analytic chain.
  double max_outage_fraction = 0.02;
  // Keep a replication only when it qualifies at every point.
  bool paired = true;
};

/// One summary per point. E2ED, throughput and their analytic
/// counterparts average the qualifying runs; PDR averages every run
/// with a report.
std::vector<PointSummary> aggregate(const std::vector<RunOutcome>& outcomes, const AggregateOptions& options = {});

/// Replications kept by `aggregate` (ascending).
std::vector<std::size_t> qualifying_replications(const std::vector<RunOutcome>& outcomes,
                                                 const AggregateOptions& options = {});

/// One-sided sign test: probability of at least `wins` successes out of
/// `trials` fair coin flips.
double sign_test_p(std::size_t wins, std::size_t trials);

struct PairedComparison {
  std::size_t wins = 0;    // first > second
  std::size_t losses = 0;  // first < second
  std::size_t ties = 0;
  double mean_first = std::numeric_limits<double>::quiet_NaN();
  double mean_second = std::numeric_limits<double>::quiet_NaN();
  double p_value = 1.0;  // sign test over non-tied pairs
};

PairedComparison compare_paired(const std::vector<double>& first, const std::vector<double>& second);

}  // namespace svnet
