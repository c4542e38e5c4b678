// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <random>

#include "svnet/qna.hpp"
#include "svnet/random.hpp"

using namespace svnet;
using namespace svnet::qna;

namespace {

// Tandem of M/M/1 stations fed by one Poisson source; the last station
// sends everything off the chain.
ChainModel tandem(double lambda, const std::vector<double>& taus) {
  ChainModel m;
  for (std::size_t j = 0; j < taus.size(); ++j) {
    Station s;
    if (j == 0) s.external.push_back({lambda, 1.0});
    if (j + 1 < taus.size())
      s.hops = {{taus[j], 1.0}};
    else
      s.hops = {{taus[j], 0.0}, {taus[j], 1.0}};
    s.next_hop_scv = 1.0;
    m.stations.push_back(s);
  }
  return m;
}

// Lindley recursion over `n` customers.
double lindley_mean_wait(double lambda, double ca2, double tau, double cs2, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  double w = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum += w;
    const double s = sample_gamma_mean_scv(rng, 1.0 / tau, cs2);
    const double a = sample_gamma_mean_scv(rng, 1.0 / lambda, ca2);
    w = std::max(0.0, w + s - a);
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("asymptotic weight") {
  const std::vector<double> one{1.0}, halves{0.5, 0.5};
  CHECK(asymptotic_weight<double>(0.5, one) == approx(1.0));
  CHECK(asymptotic_weight<double>(0.5, halves) == approx(0.5));
  CHECK(asymptotic_weight<double>(0.0, halves) == approx(0.2));
  const std::vector<double> bad{0.5, 0.4};
  CHECK_THROWS_AS(asymptotic_weight<double>(0.5, bad), DomainError);
  CHECK_THROWS_AS(asymptotic_weight<double>(1.0, one), DomainError);
}

TEST_CASE("superposition and merge") {
  const std::vector<ExternalSource> src{{10.0, 0.2}, {30.0, 1.0}};
  CHECK(external_arrival<double>(src) == approx(40.0));
  CHECK(superpose_external<double>(src, 0.5) == approx(0.9));
  CHECK(superpose_external<double>(std::span<const ExternalSource>{}, 0.5) == 1.0);
  const auto [rate, scv] = merge_arrivals<double>({10.0, 0.2}, {10.0, 0.6}, 0.5);
  CHECK(rate == approx(20.0));
  CHECK(scv == approx(0.7));
}

TEST_CASE("splitting thins the departure stream") {
  const auto [rate, scv] = split_departure<double>(5.0, 0.6, 1.0, 0.5);
  CHECK(rate == approx(3.0));
  CHECK(scv == approx(0.8));
  CHECK_THROWS_AS(split_departure<double>(5.0, 0.6, 1.0, 1.5), DomainError);
}

TEST_CASE("station service process and its inverse") {
  const std::vector<double> rates{300.0, 100.0}, splits{0.5, 0.5};
  const auto [tau, cs2] = service_process<double>(rates, splits, 0.9);
  CHECK(tau == approx(200.0));
  CHECK(cs2 == approx(0.8));
  CHECK(thinned_service_scv(cs2, 0.5) == approx(0.9));
  CHECK_THROWS_AS(service_process<double>(rates, splits, 0.2), InconsistencyError);
  const std::vector<double> exit_only{0.0, 1.0};
  CHECK_THROWS_AS(service_process<double>(rates, exit_only, 0.5), InconsistencyError);
  CHECK(service_process<double>(rates, exit_only, 1.0).second == 1.0);
}

TEST_CASE("utilization and overload") {
  CHECK(utilization(6.0, 1.0, 10.0) == approx(0.7));
  try {
    utilization(9.0, 2.0, 10.0, 4);
    FAIL("expected overload");
  } catch (const OverloadError& e) {
    CHECK(e.station() == 4);
    CHECK(e.rho() == approx(1.1));
  }
}

TEST_CASE("G/G/1 wait at a hand-evaluated point") {
  CHECK(klb_factor(0.5, 0.2, 0.2) == approx(0.3442).epsilon(1e-3));
  CHECK(std::abs(waiting_time(0.5, 10.0, 0.2, 0.2) - 6.88e-3) < 1e-5);
  CHECK(klb_factor(0.5, 1.0, 0.2) == 1.0);
  CHECK(waiting_time(0.0, 10.0, 0.2, 0.2) == 0.0);
}

TEST_CASE("G/G/1 reduces to M/M/1 at unit SCVs") {
  for (double rho = 0.05; rho < 1.0; rho += 0.05)
    for (double tau : {1.0, 10.0, 350.0}) CHECK(waiting_time(rho, tau, 1.0, 1.0) == mm1_waiting_time(rho, tau));
}

TEST_CASE("G/G/1 wait grows with load and variability") {
  double prev = 0.0;
  for (double rho = 0.1; rho < 0.95; rho += 0.1) {
    const double w = waiting_time(rho, 10.0, 0.4, 0.4);
    CHECK(w > prev);
    prev = w;
  }
  CHECK(waiting_time(0.5, 10.0, 0.6, 0.2) > waiting_time(0.5, 10.0, 0.4, 0.2));
  CHECK(waiting_time(0.5, 10.0, 0.2, 0.6) > waiting_time(0.5, 10.0, 0.2, 0.4));
}

TEST_CASE("M/G/1 waits match Pollaczek-Khinchine") {
  for (double cs2 : {0.0, 0.5, 2.0}) {
    const double rho = 0.6, tau = 5.0;
    CHECK(waiting_time(rho, tau, 1.0, cs2) == approx((1 + cs2) / 2 * rho / (tau * (1 - rho))));
  }
}

TEST_CASE("tandem of M/M/1 stations has the product-form delay") {
  const double lambda = 5.0;
  const std::vector<double> taus{10.0, 20.0, 8.0};
  const auto m = tandem(lambda, taus);
  const auto sol = solve_chain(m);
  double expected = 0.0;
  for (double t : taus) expected += 1.0 / (t - lambda);
  CHECK(expected_path_delay(m, sol) == approx(expected).epsilon(1e-12));
  CHECK(chain_delay(sol, 0, 3, taus) == approx(expected).epsilon(1e-12));
  CHECK(chain_delay(sol, 1, 1, taus) == 0.0);
  for (Eigen::Index j = 0; j < sol.size(); ++j) {
    CHECK(sol.lambda(j) == approx(lambda));
    CHECK(sol.arrival_scv(j) == approx(1.0));
  }
  CHECK(chain_throughput(m, sol) == approx(lambda));
  CHECK(chain_throughput(m) == approx(lambda));
  CHECK_THROWS_AS(chain_delay(sol, 0, 4, taus), DomainError);
}

TEST_CASE("two-station chain with generation and side traffic") {
  ChainModel m;
  Station a;
  a.external = {{4.0, 0.2}};
  a.generation_rate = 1.0;
  a.hops = {{10.0, 1.0}};
  a.next_hop_scv = 0.2;
  Station b;
  b.external = {{5.0, 1.0}};
  b.hops = {{20.0, 0.0}, {20.0, 1.0}};
  m.stations = {a, b};
  const auto sol = solve_chain(m);
  CHECK(sol.internal_rate(1) == approx(5.0));
  CHECK(sol.lambda(1) == approx(10.0));
  CHECK(sol.rho(0) == approx(0.5));
  CHECK(sol.rho(1) == approx(0.5));
  CHECK(sol.alpha(1) == approx(0.5));
  // internal stream SCV equals the upstream arrival SCV (split 1), external is Poisson
  CHECK(sol.arrival_scv(1) == approx(0.5 * (0.5 * sol.arrival_scv(0) + 0.5 * 1.0) + 0.5));
  CHECK(chain_throughput(m, sol) == approx(5.0 + 5.0));
}

TEST_CASE("overload names the first saturated station") {
  auto m = tandem(9.0, {20.0, 8.0, 5.0});
  try {
    solve_chain(m);
    FAIL("expected overload");
  } catch (const OverloadError& e) {
    CHECK(e.station() == 1);
  }
  CHECK(chain_throughput(m) == approx(9.0));
}

TEST_CASE("single station against a Lindley simulation") {
  const double tau = 10.0, lambda = 5.0;
  // Poisson arrivals: the formula is exact
  const double mg1 = lindley_mean_wait(lambda, 1.0, tau, 0.5, 1'000'000, 22);
  CHECK(mg1 == approx(waiting_time(0.5, tau, 1.0, 0.5)).epsilon(0.03));
  // smooth arrivals: the corrected value sits between the simulation and
  // the uncorrected heavy-traffic value
  const double sim = lindley_mean_wait(lambda, 0.2, tau, 0.2, 1'000'000, 21);
  const double corrected = waiting_time(0.5, tau, 0.2, 0.2);
  const double uncorrected = corrected / klb_factor(0.5, 0.2, 0.2);
  CHECK(corrected < sim);
  CHECK(sim < uncorrected);
}

TEST_CASE("variability surface is monotone with its maximum at the top corner") {
  auto m = tandem(20.0, {286.0, 352.0, 325.0, 391.0, 456.0});
  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
  const auto s = variability_surface(m, grid, grid);
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      if (i) CHECK(s(i, j) >= s(i - 1, j));
      if (j) CHECK(s(i, j) >= s(i, j - 1));
    }
  Eigen::Index r, c;
  s.maxCoeff(&r, &c);
  CHECK(r == 4);
  CHECK(c == 4);
}
