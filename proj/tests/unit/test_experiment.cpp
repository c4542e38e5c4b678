// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <set>

#include "svnet/error.hpp"
#include "svnet/experiment.hpp"

using namespace svnet;

namespace {

RunOutcome outcome(std::size_t point, std::size_t rep, double e2ed, double qna, bool connected = true) {
  RunOutcome o;
  o.job.point = point;
  o.job.replication = rep;
  SimReport r;
  r.bootstrapped = connected;
  r.mean_e2ed = e2ed;
  r.throughput_pps = 20.0;
  r.qna_e2ed = qna;
  r.qna_throughput = 20.0;
  o.report = r;
  return o;
}

}  // namespace

TEST_CASE("a sweep expands into paired replications") {
  ExperimentSpec spec;
  spec.axes = {{"sim.pgr", {"5", "10", "15", "20", "25", "30"}}};
  spec.replications = 10;
  spec.seed_base = 100;
  const auto jobs = expand(spec);
  REQUIRE(jobs.size() == 60);
  std::set<std::uint64_t> seeds_at_first;
  for (const auto& j : jobs) {
    CHECK(j.config.seed == 100 + j.replication);
    CHECK(j.config.pgr == approx(5.0 * (j.point + 1)));
    if (j.point == 0) seeds_at_first.insert(j.config.seed);
  }
  CHECK(seeds_at_first.size() == 10);
}

TEST_CASE("cartesian order puts the first axis slowest") {
  ExperimentSpec spec;
  spec.axes = {{"traffic.density", {"1/60", "0.05"}}, {"sim.pgr", {"5", "10", "15"}}};
  const auto pts = spec.points();
  REQUIRE(pts.size() == 6);
  CHECK(pts[0][0].second == "1/60");
  CHECK(pts[2][0].second == "1/60");
  CHECK(pts[3][0].second == "0.05");
  CHECK(pts[1][1].second == "10");
}

TEST_CASE("invalid experiments are rejected") {
  ExperimentSpec spec;
  spec.seeds = {3, 3};
  spec.replications = 2;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.axes = {{"sim.seed", {"1", "2"}}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.axes = {{"sim.pgr", {"1"}}, {"sim.pgr", {"2"}}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.axes = {{"sim.warp", {"1"}}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.axes = {{"sim.pgr", {}}};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = ExperimentSpec{};
  spec.replications = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("a failing run does not stop the others") {
  ExperimentSpec spec;
  spec.base.duration = 20.0;
  spec.base.warmup = 2.0;
  spec.replications = 2;
  auto jobs = expand(spec);
  jobs[0].config.traffic.density = -1.0;  // fails validation inside run
  const auto out = execute(jobs, 2);
  REQUIRE(out.size() == 2);
  CHECK_FALSE(out[0].report.has_value());
  CHECK_FALSE(out[0].error.empty());
  CHECK(out[1].report.has_value());
}

TEST_CASE("summary statistics") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std_dev == approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.n == 4);
  CHECK(std::isnan(summarize({}).mean));
  CHECK(relative_error(1.1, 1.0) == approx(0.1));
  CHECK(std::isnan(relative_error(1.0, 0.0)));
}

TEST_CASE("aggregation keeps replications that qualify at every point") {
  std::vector<RunOutcome> o{outcome(0, 0, 1.0, 1.0), outcome(1, 0, 2.0, 2.0),
                            outcome(0, 1, 3.0, 1.0), outcome(1, 1, 9.0, 2.0, false),
                            outcome(0, 2, 1.2, 1.0), outcome(1, 2, 2.4, 2.0)};
  o.push_back(RunOutcome{});  // failed run, point 0 replication 0
  const auto kept = qualifying_replications(o);
  CHECK(kept == std::vector<std::size_t>{0, 2});
  const auto agg = aggregate(o);
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].used == 2);
  CHECK(agg[0].failed == 1);
  CHECK(agg[0].e2ed.mean == approx(1.1));
  CHECK(agg[0].e2ed_rel_error == approx(0.1));
  CHECK(agg[1].e2ed.mean == approx(2.2));

  const auto unpaired = aggregate(o, {0.02, false});
  CHECK(unpaired[0].used == 3);
  CHECK(unpaired[1].used == 2);
}

TEST_CASE("sign test") {
  CHECK(sign_test_p(5, 5) == approx(1.0 / 32.0));
  CHECK(sign_test_p(0, 7) == approx(1.0));
  CHECK(sign_test_p(20, 30) == approx(0.049369).epsilon(1e-4));
  CHECK(sign_test_p(0, 0) == 1.0);
  CHECK_THROWS_AS(sign_test_p(3, 2), DomainError);

  const auto c = compare_paired({2, 3, 4, 5, 1}, {1, 1, 4, 2, 2});
  CHECK(c.wins == 3);
  CHECK(c.losses == 1);
  CHECK(c.ties == 1);
  CHECK(c.p_value == approx(5.0 / 16.0));
  CHECK_THROWS_AS(compare_paired({1}, {1, 2}), DomainError);
}
