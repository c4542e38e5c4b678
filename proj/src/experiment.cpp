// SPDX-License-Identifier: Apache-2.0
#include "svnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "svnet/config.hpp"
#include "svnet/error.hpp"

namespace svnet {

void ExperimentSpec::validate() const {
  if (replications < 1) throw ConfigError("replication count must be >= 1");
  if (!seeds.empty() && seeds.size() != replications)
    throw ConfigError(fmt::format("{} seeds given for {} replications", seeds.size(), replications));
  std::set<std::uint64_t> seen;
  for (auto s : replication_seeds())
    if (!seen.insert(s).second) throw ConfigError(fmt::format("duplicate seed {} across replications", s));
  std::set<std::string> keys;
  for (const auto& a : axes) {
    if (!is_config_key(a.key)) throw ConfigError(fmt::format("sweep axis '{}' is not a config key", a.key));
    if (a.key == "sim.seed") throw ConfigError("seeds come from the seed base and replication count, not a sweep");
    if (!keys.insert(a.key).second) throw ConfigError(fmt::format("sweep axis '{}' given twice", a.key));
    if (a.values.empty()) throw ConfigError(fmt::format("sweep axis '{}' has no values", a.key));
  }
}

std::vector<std::uint64_t> ExperimentSpec::replication_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (std::size_t r = 0; r < replications; ++r) out.push_back(seed_base + r);
  return out;
}

std::vector<Assignment> ExperimentSpec::points() const {
  std::vector<Assignment> out{{}};
  for (const auto& axis : axes) {
    std::vector<Assignment> next;
    for (const auto& prefix : out)
      for (const auto& v : axis.values) {
        auto a = prefix;
        a.emplace_back(axis.key, v);
        next.push_back(std::move(a));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<RunJob> expand(const ExperimentSpec& spec) {
  spec.validate();
  const auto seeds = spec.replication_seeds();
  const auto pts = spec.points();
  std::vector<RunJob> jobs;
  jobs.reserve(pts.size() * seeds.size());
  for (std::size_t p = 0; p < pts.size(); ++p) {
    RunConfig cfg = spec.base;
    for (const auto& [k, v] : pts[p]) set_config_value(cfg, k, v);
    cfg.validate();
    for (std::size_t r = 0; r < seeds.size(); ++r) {
      RunJob job{p, r, pts[p], cfg};
      job.config.seed = seeds[r];
      jobs.push_back(std::move(job));
    }
  }
  return jobs;
}

std::vector<RunOutcome> execute(const std::vector<RunJob>& jobs, std::size_t threads) {
  std::vector<RunOutcome> out(jobs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs.size(), 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      out[i].job = jobs[i];
      try {
        out[i].report = run(jobs[i].config);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

Stat summarize(const std::vector<double>& values) {
  Stat s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(sq / static_cast<double>(s.n - 1));
  } else {
    s.std_dev = 0.0;
  }
  return s;
}

double relative_error(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || b == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (a - b) / b;
}

namespace {

bool qualifies(const RunOutcome& o, const AggregateOptions& opt) {
  return o.report && o.report->qna_e2ed && o.report->qna_throughput &&
         backbone_connected(*o.report, o.job.config, opt.max_outage_fraction);
}

std::size_t point_count(const std::vector<RunOutcome>& outcomes) {
  std::size_t n = 0;
  for (const auto& o : outcomes) n = std::max(n, o.job.point + 1);
  return n;
}

}  // namespace

std::vector<std::size_t> qualifying_replications(const std::vector<RunOutcome>& outcomes,
                                                 const AggregateOptions& options) {
  std::map<std::size_t, std::size_t> hits;  // replication -> qualifying points
  for (const auto& o : outcomes)
    if (qualifies(o, options)) ++hits[o.job.replication];
  const std::size_t points = point_count(outcomes);
  std::vector<std::size_t> out;
  for (const auto& [rep, n] : hits)
    if (!options.paired || n == points) out.push_back(rep);
  return out;
}

std::vector<PointSummary> aggregate(const std::vector<RunOutcome>& outcomes, const AggregateOptions& options) {
  const std::size_t points = point_count(outcomes);
  const auto keep = qualifying_replications(outcomes, options);
  const std::set<std::size_t> kept(keep.begin(), keep.end());

  std::vector<PointSummary> out(points);
  std::vector<std::vector<double>> e2ed(points), thr(points), pdr(points), qe(points), qt(points);
  for (const auto& o : outcomes) {
    auto& s = out[o.job.point];
    s.point = o.job.point;
    s.assignment = o.job.assignment;
    ++s.runs;
    if (!o.report) {
      ++s.failed;
      continue;
    }
    pdr[s.point].push_back(o.report->pdr);
    if (!kept.count(o.job.replication) || !qualifies(o, options)) continue;
    ++s.used;
    e2ed[s.point].push_back(o.report->mean_e2ed);
    thr[s.point].push_back(o.report->throughput_pps);
    qe[s.point].push_back(*o.report->qna_e2ed);
    qt[s.point].push_back(*o.report->qna_throughput);
  }
  for (std::size_t p = 0; p < points; ++p) {
    auto& s = out[p];
    s.e2ed = summarize(e2ed[p]);
    s.throughput = summarize(thr[p]);
    s.pdr = summarize(pdr[p]);
    s.qna_e2ed = summarize(qe[p]);
    s.qna_throughput = summarize(qt[p]);
    s.e2ed_rel_error = relative_error(s.e2ed.mean, s.qna_e2ed.mean);
    s.throughput_rel_error = relative_error(s.throughput.mean, s.qna_throughput.mean);
  }
  return out;
}

double sign_test_p(std::size_t wins, std::size_t trials) {
  if (wins > trials) throw DomainError("sign_test_p: wins > trials");
  if (trials == 0) return 1.0;
  // sum_{k >= wins} C(n,k) / 2^n in log space
  double p = 0.0;
  const double n = static_cast<double>(trials);
  for (std::size_t k = wins; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    p += std::exp(std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1) - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

PairedComparison compare_paired(const std::vector<double>& first, const std::vector<double>& second) {
  if (first.size() != second.size()) throw DomainError("compare_paired: samples must be paired");
  PairedComparison c;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] > second[i])
      ++c.wins;
    else if (first[i] < second[i])
      ++c.losses;
    else
      ++c.ties;
  }
  c.mean_first = summarize(first).mean;
  c.mean_second = summarize(second).mean;
  c.p_value = sign_test_p(c.wins, c.wins + c.losses);
  return c;
}

}  // namespace svnet
