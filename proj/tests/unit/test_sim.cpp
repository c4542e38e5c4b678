// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <numeric>
#include <sstream>

#include "svnet/sim.hpp"

using namespace svnet;

namespace {

RunConfig short_run(std::uint64_t seed, double density = 1.0 / 60.0, double pgr = 10.0) {
  RunConfig c;
  c.traffic.density = density;
  c.duration = 40.0;
  c.warmup = 5.0;
  c.pgr = pgr;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("no traffic means a vacuous delivery ratio") {
  const auto r = run(short_run(1, 1.0 / 60.0, 0.0));
  CHECK(r.sent == 0);
  CHECK(r.pdr == 1.0);
  CHECK(r.pdr_zero_denominator);
  CHECK(r.throughput_pps == 0.0);
}

TEST_CASE("runs are reproducible per seed") {
  const auto a = run(short_run(5)), b = run(short_run(5)), c = run(short_run(6));
  CHECK(a.sent == b.sent);
  CHECK(a.delivered == b.delivered);
  CHECK(a.e2ed_samples == b.e2ed_samples);
  CHECK(a.churn == b.churn);
  CHECK((a.sent != c.sent || a.e2ed_samples != c.e2ed_samples));
}

TEST_CASE("every packet is delivered, dropped or still queued") {
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    for (double density : {1.0 / 60.0, 0.05}) {
      const auto r = run(short_run(seed, density, 20.0));
      CAPTURE(seed);
      CHECK(r.sent == r.delivered + r.dropped + r.in_flight);
      CHECK(r.pdr >= 0.0);
      CHECK(r.pdr <= 1.0);
      for (double d : r.e2ed_samples) CHECK(d > 0.0);
      if (!r.e2ed_samples.empty()) {
        const double mean = std::accumulate(r.e2ed_samples.begin(), r.e2ed_samples.end(), 0.0) /
                            static_cast<double>(r.e2ed_samples.size());
        CHECK(r.mean_e2ed == approx(mean));
      }
      CHECK(r.throughput_bps == approx(r.throughput_pps * 6400.0));
    }
  }
}

TEST_CASE("the source station sees the configured packet rate") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto cfg = short_run(seed, 1.0 / 60.0, 20.0);
    cfg.duration = 90.0;
    cfg.warmup = 10.0;
    const auto r = run(cfg);
    if (r.stations.empty() || r.stations[0].external_rates.empty()) continue;
    ++checked;
    CHECK(r.stations[0].external_rates[0] == approx(20.0).epsilon(0.1));
    for (const auto& s : r.stations) {
      CHECK(s.forward_fraction >= 0.0);
      CHECK(s.forward_fraction <= 1.0);
      CHECK(s.service_rate > 0.0);
    }
  }
  CHECK(checked >= 4);
}

TEST_CASE("analytic chain mirrors the measured stations") {
  const auto cfg = short_run(3, 1.0 / 60.0, 20.0);
  const auto r = run(cfg);
  REQUIRE_FALSE(r.stations.empty());
  const auto m = chain_model_from(r, cfg);
  REQUIRE(m.stations.size() == r.stations.size());
  for (std::size_t j = 0; j < m.stations.size(); ++j) {
    CHECK(m.stations[j].hops[0].rate == approx(r.stations[j].service_rate));
    CHECK(m.stations[j].hops[0].split == approx(r.stations[j].forward_fraction));
    CHECK(*m.stations[j].service_scv == approx(r.stations[j].service_scv));
  }
  CHECK(r.qna_throughput.has_value());
}

TEST_CASE("outage filter follows the measurement window") {
  RunConfig cfg;
  SimReport r;
  r.bootstrapped = true;
  r.route_outage = 1.6;  // 2% of 80 s
  CHECK(backbone_connected(r, cfg, 0.02));
  r.route_outage = 1.7;
  CHECK_FALSE(backbone_connected(r, cfg, 0.02));
  r.route_outage = 0.0;
  r.bootstrapped = false;
  CHECK_FALSE(backbone_connected(r, cfg, 0.02));
}

TEST_CASE("scheme comparison shares vehicles and flows") {
  const auto c = compare_schemes(short_run(4, 0.05, 20.0));
  CHECK(c.two_tier.vehicles == c.baseline.vehicles);
  CHECK(c.two_tier.sources == c.baseline.sources);
  RunConfig base;
  base.scheme = Scheme::Baseline;
  CHECK(base.effective_weights().alpha_w == 1.0);
  CHECK(base.effective_weights().beta_w == 0.0);
}

TEST_CASE("protocol log lines have four fields") {
  std::ostringstream log;
  run(short_run(2, 0.05, 10.0), &log);
  std::istringstream in(log.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    CHECK(std::count(line.begin(), line.end(), ',') >= 3);
  }
  CHECK(lines > 0);
}

TEST_CASE("invalid run configurations are rejected") {
  RunConfig c;
  c.warmup = c.duration;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.pgr = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RunConfig{};
  c.source_zone_lo = 0.5;
  c.source_zone_hi = 0.4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(parse_scheme("scrp"), ConfigError);
}

TEST_CASE("per-link delivery ratio falls with the data rate") {
  PdrConfig cfg;
  cfg.replications = 40;
  const auto curves = measure_pdr(cfg);
  REQUIRE(curves.size() == 3);
  for (const auto& c : curves) {
    CHECK(c.links > 0);
    for (std::size_t k = 1; k < c.pdr.size(); ++k) CHECK(c.pdr[k] <= c.pdr[k - 1]);
  }
}
