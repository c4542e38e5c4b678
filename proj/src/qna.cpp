// SPDX-License-Identifier: Apache-2.0
#include "svnet/qna.hpp"

#include <algorithm>

namespace svnet::qna {

namespace {

std::pair<double, double> station_service(const Station& s) {
  if (s.hops.empty()) throw DomainError("station has no outgoing hops");
  std::vector<double> rates, splits;
  for (const auto& h : s.hops) {
    rates.push_back(h.rate);
    splits.push_back(h.split);
  }
  if (s.service_scv) {
    // rate still follows the split-weighted hop rates
    double rate = 0.0;
    for (std::size_t k = 0; k < rates.size(); ++k) rate += rates[k] * splits[k];
    return {rate, *s.service_scv};
  }
  return service_process<double>(rates, splits, s.next_hop_scv);
}

}  // namespace

ChainSolution solve_chain(const ChainModel& chain) {
  const auto m = static_cast<Eigen::Index>(chain.stations.size());
  ChainSolution sol;
  for (Eigen::VectorXd* v : {&sol.external_rate, &sol.internal_rate, &sol.lambda, &sol.arrival_scv,
                             &sol.service_rate, &sol.service_scv, &sol.rho, &sol.alpha, &sol.wait})
    v->setZero(m);

  // pass 1: rates and utilizations (independent of any SCV)
  for (Eigen::Index j = 0; j < m; ++j) {
    const Station& s = chain.stations[static_cast<std::size_t>(j)];
    sol.external_rate(j) = external_arrival(std::span<const ExternalSource>(s.external));
    if (j > 0) {
      const Station& up = chain.stations[static_cast<std::size_t>(j - 1)];
      sol.internal_rate(j) = (sol.lambda(j - 1) + up.generation_rate) * up.hops.front().split;
    }
    sol.lambda(j) = sol.external_rate(j) + sol.internal_rate(j);
    const auto [tau, cs2] = station_service(s);
    sol.service_rate(j) = tau;
    sol.service_scv(j) = cs2;
    sol.rho(j) = utilization(sol.lambda(j), s.generation_rate, tau, static_cast<std::size_t>(j));
  }

  // pass 2: variability and waits
  for (Eigen::Index j = 0; j < m; ++j) {
    const Station& s = chain.stations[static_cast<std::size_t>(j)];
    const double lambda = sol.lambda(j);

    double internal_scv = 1.0;
    if (j > 0) {
      const Station& up = chain.stations[static_cast<std::size_t>(j - 1)];
      internal_scv = split_departure(sol.lambda(j - 1), sol.arrival_scv(j - 1), up.generation_rate,
                                     up.hops.front().split)
                         .second;
    }

    double alpha = 1.0, ca2 = 1.0;
    if (lambda > 0.0) {
      std::vector<double> proportions;
      for (const auto& src : s.external) proportions.push_back(src.rate / lambda);
      if (sol.internal_rate(j) > 0.0) proportions.push_back(sol.internal_rate(j) / lambda);
      alpha = asymptotic_weight<double>(sol.rho(j), proportions);
      const double c0 = superpose_external(std::span<const ExternalSource>(s.external), alpha);
      ca2 = merge_arrivals<double>({sol.external_rate(j), c0}, {sol.internal_rate(j), internal_scv}, alpha).second;
    }
    if (s.arrival_scv) ca2 = *s.arrival_scv;

    sol.alpha(j) = alpha;
    sol.arrival_scv(j) = ca2;
    sol.wait(j) = waiting_time(sol.rho(j), sol.service_rate(j), ca2, sol.service_scv(j));
  }
  return sol;
}

double chain_delay(const ChainSolution& solution, std::size_t i, std::size_t j, std::span<const double> hop_rates) {
  if (i > j) throw DomainError("chain_delay: need i <= j");
  if (j > static_cast<std::size_t>(solution.size()) || j > hop_rates.size())
    throw DomainError("chain_delay: path runs past the chain");
  double total = 0.0;
  for (std::size_t k = i; k < j; ++k) {
    if (!(hop_rates[k] > 0.0)) throw DomainError("chain_delay: hop rates must be > 0");
    total += 1.0 / hop_rates[k] + solution.wait(static_cast<Eigen::Index>(k));
  }
  return total;
}

double expected_path_delay(const ChainModel& chain, const ChainSolution& solution, std::size_t entry) {
  double visit = 1.0, total = 0.0;
  for (std::size_t j = entry; j < chain.stations.size() && visit > 0.0; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    total += visit * (1.0 / solution.service_rate(jj) + solution.wait(jj));
    visit *= chain.stations[j].hops.front().split;
  }
  return total;
}

double chain_throughput(const ChainModel& chain, const ChainSolution& solution) {
  double total = 0.0;
  for (std::size_t j = 0; j < chain.stations.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    total += std::min(solution.external_rate(jj) + chain.stations[j].generation_rate, solution.service_rate(jj));
  }
  return total;
}

double chain_throughput(const ChainModel& chain) {
  double total = 0.0;
  for (const auto& s : chain.stations) {
    const double load = external_arrival(std::span<const ExternalSource>(s.external)) + s.generation_rate;
    total += std::min(load, station_service(s).first);
  }
  return total;
}

Eigen::MatrixXd variability_surface(const ChainModel& chain, std::span<const double> arrival_scvs,
                                    std::span<const double> service_scvs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(arrival_scvs.size()), static_cast<Eigen::Index>(service_scvs.size()));
  ChainModel pinned = chain;
  for (std::size_t a = 0; a < arrival_scvs.size(); ++a) {
    for (std::size_t s = 0; s < service_scvs.size(); ++s) {
      for (auto& st : pinned.stations) {
        st.arrival_scv = arrival_scvs[a];
        st.service_scv = service_scvs[s];
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(s)) =
          expected_path_delay(pinned, solve_chain(pinned), 0);
    }
  }
  return out;
}

}  // namespace svnet::qna
