// SPDX-License-Identifier: Apache-2.0
//
// svnet: command-line front end for trace analysis, channel sweeps,
// packet simulation, queueing analysis and their comparison.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "svnet/backbone.hpp"
#include "svnet/chain_file.hpp"
#include "svnet/config.hpp"
#include "svnet/error.hpp"
#include "svnet/experiment.hpp"
#include "svnet/report.hpp"
#include "svnet/sim.hpp"

namespace fs = std::filesystem;
using namespace svnet;

namespace {

enum Exit { kOk = 0, kUsage = 1, kOverload = 2, kPartial = 3 };

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::vector<std::string> sweeps;
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> scheme;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, Common& c, bool experiment) {
  cmd->add_option("--config", c.config, "INI config file (defaults apply without one)")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "seed (base seed for replications)");
  cmd->add_option("--reps", c.reps, "replications")->check(CLI::PositiveNumber);
  if (!experiment) return;
  cmd->add_option("--sweep", c.sweeps, "sweep axis key=v1,v2,... (repeatable; cartesian product)");
  cmd->add_option("--seeds", c.seeds, "explicit replication seeds (overrides --seed)")->delimiter(',');
  cmd->add_option("--scheme", c.scheme, "SV selection scheme")->check(CLI::IsMember({"two-tier", "baseline"}));
  cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
}

RunConfig base_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config_file(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.scheme) cfg.scheme = parse_scheme(*c.scheme);
  cfg.validate();
  return cfg;
}

ExperimentSpec experiment_spec(const Common& c) {
  ExperimentSpec spec;
  spec.base = base_config(c);
  spec.replications = c.reps.value_or(c.seeds.empty() ? 1 : c.seeds.size());
  spec.seed_base = spec.base.seed;
  spec.seeds = c.seeds;
  for (const auto& s : c.sweeps) {
    auto [key, values] = parse_sweep(s);
    spec.axes.push_back({key, values});
  }
  spec.validate();
  return spec;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw ConfigError(fmt::format("cannot write {}", (dir / name).string()));
  return f;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) { out << csv_row(fields) << '\n'; }

std::string num(double v) { return csv_number(v); }

std::vector<std::string> axis_keys(const ExperimentSpec& spec) {
  std::vector<std::string> keys;
  for (const auto& a : spec.axes) keys.push_back(a.key);
  return keys;
}

std::vector<std::string> axis_values(const Assignment& a) {
  std::vector<std::string> v;
  for (const auto& [k, val] : a) v.push_back(val);
  return v;
}

template <class... Vs>
std::vector<std::string> cat(Vs&&... parts) {
  std::vector<std::string> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

std::size_t report_failures(const std::vector<RunOutcome>& outcomes) {
  std::size_t failed = 0;
  for (const auto& o : outcomes) {
    if (o.report) continue;
    ++failed;
    spdlog::error("run point={} seed={} failed: {}", o.job.point, o.job.config.seed, o.error);
  }
  return failed;
}

void write_runs(const fs::path& dir, const ExperimentSpec& spec, const std::vector<RunOutcome>& outcomes,
                bool with_scheme) {
  auto report = open_out(dir, "report.csv");
  auto samples = open_out(dir, "e2ed_samples.csv");
  auto stations = open_out(dir, "stations.csv");
  const std::vector<std::string> id_cols{"point", "replication", "seed"};
  const std::vector<std::string> scheme_col = with_scheme ? std::vector<std::string>{"scheme"} : std::vector<std::string>{};
  write_row(report, cat(id_cols, scheme_col, axis_keys(spec), std::vector<std::string>{"status"}, report_columns()));
  write_row(samples, cat(id_cols, scheme_col, std::vector<std::string>{"e2ed_s"}));
  write_row(stations, cat(id_cols, scheme_col,
                          std::vector<std::string>{"station", "arrival_rate_pps", "internal_rate_pps",
                                                   "external_rate_pps", "service_rate_pps", "service_scv",
                                                   "forward_fraction", "rho", "mean_wait_s"}));
  for (const auto& o : outcomes) {
    const std::vector<std::string> id{std::to_string(o.job.point), std::to_string(o.job.replication),
                                      std::to_string(o.job.config.seed)};
    const std::vector<std::string> sc =
        with_scheme ? std::vector<std::string>{to_string(o.job.config.scheme)} : std::vector<std::string>{};
    if (!o.report) {
      std::vector<std::string> blanks(report_columns().size());
      write_row(report, cat(id, sc, axis_values(o.job.assignment), std::vector<std::string>{"error: " + o.error}, blanks));
      continue;
    }
    const auto& r = *o.report;
    write_row(report, cat(id, sc, axis_values(o.job.assignment), std::vector<std::string>{"ok"}, report_values(r)));
    for (double d : r.e2ed_samples) write_row(samples, cat(id, sc, std::vector<std::string>{num(d)}));
    for (const auto& s : r.stations) {
      double ext = 0.0;
      for (double e : s.external_rates) ext += e;
      write_row(stations, cat(id, sc,
                              std::vector<std::string>{std::to_string(s.index), num(s.arrival_rate),
                                                       num(s.internal_rate), num(ext), num(s.service_rate),
                                                       num(s.service_scv), num(s.forward_fraction), num(s.rho),
                                                       num(s.mean_wait)}));
    }
  }
}

// numeric x values of a single-axis sweep, else point indices
std::vector<double> x_axis(const std::vector<PointSummary>& pts, std::string& label) {
  std::vector<double> x;
  bool numeric = !pts.empty() && pts.front().assignment.size() == 1;
  for (const auto& p : pts) {
    if (numeric) {
      try {
        std::size_t used = 0;
        x.push_back(std::stod(p.assignment.front().second, &used));
        numeric = used == p.assignment.front().second.size();
      } catch (const std::exception&) {
        numeric = false;
      }
    }
  }
  if (numeric) {
    label = pts.front().assignment.front().first;
    return x;
  }
  label = "point";
  x.clear();
  for (const auto& p : pts) x.push_back(static_cast<double>(p.point));
  return x;
}

void write_aggregate(const fs::path& dir, const ExperimentSpec& spec, const std::vector<PointSummary>& pts) {
  auto out = open_out(dir, "aggregate.csv");
  write_row(out, cat(std::vector<std::string>{"point"}, axis_keys(spec),
                     std::vector<std::string>{"runs", "failed", "used", "e2ed_mean_s", "e2ed_std_s",
                                              "throughput_mean_pps", "throughput_std_pps", "pdr_mean", "pdr_std",
                                              "qna_e2ed_mean_s", "qna_throughput_mean_pps", "e2ed_rel_error",
                                              "throughput_rel_error"}));
  for (const auto& p : pts)
    write_row(out, cat(std::vector<std::string>{std::to_string(p.point)}, axis_values(p.assignment),
                       std::vector<std::string>{std::to_string(p.runs), std::to_string(p.failed),
                                                std::to_string(p.used), num(p.e2ed.mean), num(p.e2ed.std_dev),
                                                num(p.throughput.mean), num(p.throughput.std_dev), num(p.pdr.mean),
                                                num(p.pdr.std_dev), num(p.qna_e2ed.mean),
                                                num(p.qna_throughput.mean), num(p.e2ed_rel_error),
                                                num(p.throughput_rel_error)}));
  std::string label;
  const auto x = x_axis(pts, label);
  Series sim{"simulation", x, {}}, qna{"analysis", x, {}};
  for (const auto& p : pts) {
    sim.y.push_back(p.e2ed.mean);
    qna.y.push_back(p.qna_e2ed.mean);
  }
  const std::vector<Series> series{sim, qna};
  auto svg = open_out(dir, "e2ed.svg");
  write_svg_lines(svg, "Mean end-to-end delay", label, "E2ED (s)", series);
}

int cmd_run_sim(const Common& c, double max_outage) {
  const auto spec = experiment_spec(c);
  const auto jobs = expand(spec);
  spdlog::info("{} runs ({} points x {} replications)", jobs.size(), spec.points().size(), spec.replications);
  const auto outcomes = execute(jobs, c.threads);
  const std::size_t failed = report_failures(outcomes);
  write_runs(c.out, spec, outcomes, false);
  AggregateOptions opt;
  opt.max_outage_fraction = max_outage;
  write_aggregate(c.out, spec, aggregate(outcomes, opt));
  if (failed) {
    spdlog::warn("{} of {} runs failed", failed, outcomes.size());
    return kPartial;
  }
  return kOk;
}

int cmd_compare(const Common& c, double max_outage, bool unpaired) {
  auto spec = experiment_spec(c);
  if (c.scheme) throw ConfigError("compare runs both schemes; drop --scheme");
  spec.base.scheme = Scheme::TwoTier;
  const auto tt_jobs = expand(spec);
  auto bl_spec = spec;
  bl_spec.base.scheme = Scheme::Baseline;
  const auto bl_jobs = expand(bl_spec);
  spdlog::info("{} runs per scheme", tt_jobs.size());

  auto all_jobs = tt_jobs;
  all_jobs.insert(all_jobs.end(), bl_jobs.begin(), bl_jobs.end());
  auto outcomes = execute(all_jobs, c.threads);
  const std::size_t failed = report_failures(outcomes);
  const std::vector<RunOutcome> tt(outcomes.begin(), outcomes.begin() + static_cast<std::ptrdiff_t>(tt_jobs.size()));
  const std::vector<RunOutcome> bl(outcomes.begin() + static_cast<std::ptrdiff_t>(tt_jobs.size()), outcomes.end());
  write_runs(c.out, spec, outcomes, true);

  AggregateOptions opt;
  opt.max_outage_fraction = max_outage;
  opt.paired = !unpaired;
  const auto pts = aggregate(tt, opt);
  write_aggregate(c.out, spec, pts);

  auto out = open_out(c.out, "compare.csv");
  write_row(out, cat(std::vector<std::string>{"point"}, axis_keys(spec),
                     std::vector<std::string>{"used", "sim_e2ed_s", "qna_e2ed_s", "e2ed_rel_error",
                                              "sim_throughput_pps", "qna_throughput_pps", "throughput_rel_error",
                                              "pairs", "two_tier_throughput_pps", "baseline_throughput_pps",
                                              "scheme_gap_rel", "wins", "losses", "sign_test_p"}));
  std::string label;
  const auto x = x_axis(pts, label);
  Series s_tt{"two-tier", x, {}}, s_bl{"baseline", x, {}}, s_q{"analysis", x, {}};
  for (std::size_t p = 0; p < pts.size(); ++p) {
    std::vector<double> a, b;
    for (std::size_t i = 0; i < tt.size(); ++i) {
      if (tt[i].job.point != p || !tt[i].report || !bl[i].report) continue;
      if (!tt[i].report->bootstrapped || !bl[i].report->bootstrapped) continue;
      a.push_back(tt[i].report->throughput_pps);
      b.push_back(bl[i].report->throughput_pps);
    }
    const auto cmp = compare_paired(a, b);
    const auto& s = pts[p];
    write_row(out, cat(std::vector<std::string>{std::to_string(p)}, axis_values(s.assignment),
                       std::vector<std::string>{std::to_string(s.used), num(s.e2ed.mean), num(s.qna_e2ed.mean),
                                                num(s.e2ed_rel_error), num(s.throughput.mean),
                                                num(s.qna_throughput.mean), num(s.throughput_rel_error),
                                                std::to_string(a.size()), num(cmp.mean_first), num(cmp.mean_second),
                                                num(relative_error(cmp.mean_first, cmp.mean_second)),
                                                std::to_string(cmp.wins), std::to_string(cmp.losses),
                                                num(cmp.p_value)}));
    s_tt.y.push_back(cmp.mean_first);
    s_bl.y.push_back(cmp.mean_second);
    s_q.y.push_back(s.qna_throughput.mean);
  }
  const std::vector<Series> series{s_tt, s_bl, s_q};
  auto svg = open_out(c.out, "throughput.svg");
  write_svg_lines(svg, "Throughput", label, "throughput (packets/s)", series);
  if (failed) {
    spdlog::warn("{} of {} runs failed", failed, outcomes.size());
    return kPartial;
  }
  return kOk;
}

int cmd_run_qna(const std::string& chain_path, const std::string& out_dir) {
  const auto file = read_chain_file(chain_path);
  const auto& model = file.model;
  const auto sol = qna::solve_chain(model);
  auto out = open_out(out_dir, "qna.csv");
  write_row(out, {"station", "lambda", "ca2", "rho", "wt_s"});
  for (Eigen::Index j = 0; j < sol.size(); ++j)
    write_row(out, {std::to_string(j), num(sol.lambda(j)), num(sol.arrival_scv(j)), num(sol.rho(j)), num(sol.wait(j))});
  write_row(out, {"e2ed_s", "throughput_pps"});
  const double e2ed = qna::expected_path_delay(model, sol, 0);
  const double thr = qna::chain_throughput(model, sol);
  write_row(out, {num(e2ed), num(thr)});
  fmt::print("e2ed_s={} throughput_pps={}\n", e2ed, thr);

  const auto& grid = file.scv_grid;
  const Eigen::MatrixXd surface = qna::variability_surface(model, grid, grid);
  auto surf = open_out(out_dir, "surface.csv");
  write_row(surf, {"ca2", "cs2", "e2ed_s"});
  std::vector<Series> series;
  for (std::size_t s = 0; s < grid.size(); ++s) series.push_back({fmt::format("cs2={}", grid[s]), grid, {}});
  for (std::size_t a = 0; a < grid.size(); ++a)
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const double v = surface(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(s));
      write_row(surf, {num(grid[a]), num(grid[s]), num(v)});
      series[s].y.push_back(v);
    }
  auto svg = open_out(out_dir, "surface.svg");
  write_svg_lines(svg, "Chain delay vs variability", "arrival SCV", "E2ED (s)", series);
  return kOk;
}

int cmd_attenuation(const std::string& out_dir, double from, double to, double step, double antenna) {
  if (!(step > 0.0) || !(from > 0.0) || to < from) throw ConfigError("need 0 < from <= to and step > 0");
  auto out = open_out(out_dir, "attenuation.csv");
  write_row(out, {"distance_m", "loss_db_auto", "loss_db_truck"});
  Series a{"auto", {}, {}}, t{"truck", {}, {}};
  for (double d = from; d <= to + 1e-9; d += step) {
    const auto l = midway_vehicle_loss(d, antenna);
    write_row(out, {num(d), num(l.auto_db), num(l.truck_db)});
    a.x.push_back(d);
    a.y.push_back(l.auto_db);
    t.x.push_back(d);
    t.y.push_back(l.truck_db);
  }
  const std::vector<Series> series{a, t};
  auto svg = open_out(out_dir, "attenuation.svg");
  write_svg_lines(svg, "Added loss of a midway vehicle", "distance (m)", "loss (dB)", series);
  return kOk;
}

int cmd_calibrate(const Common& c) {
  const RunConfig cfg = base_config(c);
  CalibrationScenario sc;
  sc.traffic = cfg.traffic;
  sc.radio = cfg.radio;
  sc.fading = cfg.fading;
  sc.protocol = cfg.protocol;
  sc.rates = cfg.rates;
  sc.corridor_half_width = cfg.corridor_half_width;
  const std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const auto res = calibrate_weights(sc, alphas, c.reps.value_or(200), cfg.seed);
  auto out = open_out(c.out, "calibration.csv");
  write_row(out, {"alpha_w", "beta_w", "mean_link_duration_s", "mean_data_rate_bps", "objective_bits", "replications"});
  Series ld{"link duration (s)", {}, {}}, rate{"data rate (Mbit/s)", {}, {}};
  for (const auto& p : res.points) {
    write_row(out, {num(p.alpha_w), num(1.0 - p.alpha_w), num(p.mean_link_duration), num(p.mean_data_rate),
                    num(p.objective), std::to_string(p.replications)});
    ld.x.push_back(p.alpha_w);
    ld.y.push_back(p.mean_link_duration);
    rate.x.push_back(p.alpha_w);
    rate.y.push_back(p.mean_data_rate / 1e6);
  }
  const std::vector<Series> series{ld, rate};
  auto svg = open_out(c.out, "calibration.svg");
  write_svg_lines(svg, "Stability weight sweep", "alpha_w", "value", series);
  fmt::print("best alpha_w={} beta_w={}\n", res.best.alpha_w, res.best.beta_w);
  return kOk;
}

int cmd_pdr(const Common& c) {
  const RunConfig cfg = base_config(c);
  PdrConfig pc;
  pc.traffic = cfg.traffic;
  pc.radio = cfg.radio;
  pc.fading = cfg.fading;
  pc.protocol = cfg.protocol;
  pc.weights = cfg.effective_weights();
  pc.rates = cfg.rates;
  pc.corridor_half_width = cfg.corridor_half_width;
  pc.seed = cfg.seed;
  if (c.reps) pc.replications = *c.reps;
  const auto curves = measure_pdr(pc);
  auto out = open_out(c.out, "pdr.csv");
  write_row(out, {"class_mix", "rate_mbps", "pdr", "loss", "links"});
  std::vector<Series> series;
  for (const auto& cv : curves) {
    Series s{fmt::format("class {}", cv.vehicle_class), cv.rate_mbps, cv.pdr};
    for (std::size_t i = 0; i < cv.rate_mbps.size(); ++i)
      write_row(out, {std::to_string(cv.vehicle_class), num(cv.rate_mbps[i]), num(cv.pdr[i]), num(1.0 - cv.pdr[i]),
                      std::to_string(cv.links)});
    series.push_back(std::move(s));
  }
  auto svg = open_out(c.out, "pdr.svg");
  write_svg_lines(svg, "Packet delivery ratio", "rate (Mbit/s)", "PDR", series);
  return kOk;
}

int cmd_analyze_trace(const Common& c, const std::string& trace_path) {
  const RunConfig cfg = base_config(c);
  std::ifstream in(trace_path);
  if (!in) throw ConfigError(fmt::format("cannot open trace '{}'", trace_path));
  const auto parsed = parse_trace(in, cfg.trace.columns);
  if (parsed.skipped_rows) {
    std::string lines;
    for (std::size_t i = 0; i < std::min<std::size_t>(parsed.skipped_line_numbers.size(), 10); ++i)
      lines += fmt::format("{}{}", i ? "," : "", parsed.skipped_line_numbers[i]);
    spdlog::warn("skipped {} malformed rows (lines {}{})", parsed.skipped_rows, lines,
                 parsed.skipped_rows > 10 ? ",..." : "");
  }
  const auto& recs = parsed.records;
  if (recs.empty()) spdlog::warn("trace has no usable records");

  std::map<int, VehicleClass> cls;
  for (const auto& r : recs) cls[r.vehicle_id] = r.vehicle_class;
  const auto stds = speed_std_per_vehicle(recs);
  const auto means = mean_speed_per_vehicle(recs);

  auto s_out = open_out(c.out, "speed_std.csv");
  write_row(s_out, {"vehicle_id", "class", "speed_std_mps"});
  std::vector<double> std_large, std_other;
  for (const auto& [id, sd] : stds) {
    write_row(s_out, {std::to_string(id), to_string(cls.at(id)), num(sd)});
    (cls.at(id) == VehicleClass::Large ? std_large : std_other).push_back(units::mps_to_kmh(sd));
  }
  auto m_out = open_out(c.out, "mean_speed.csv");
  write_row(m_out, {"vehicle_id", "class", "mean_speed_mps"});
  std::vector<double> mean_kmh;
  for (const auto& [id, m] : means) {
    write_row(m_out, {std::to_string(id), to_string(cls.at(id)), num(m)});
    mean_kmh.push_back(units::mps_to_kmh(m));
  }
  auto w_out = open_out(c.out, "class_share.csv");
  write_row(w_out, {"window_start_s", "truck_fraction", "truck_density_per_km"});
  Series share{"truck fraction", {}, {}}, dens{"trucks per km", {}, {}};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& w : class_share_and_density(recs, cfg.trace.window, cfg.trace.segment_length)) {
    write_row(w_out, {num(w.window_start), w.truck_fraction ? num(*w.truck_fraction) : "",
                      w.truck_density_per_km ? num(*w.truck_density_per_km) : ""});
    share.x.push_back(w.window_start);
    share.y.push_back(w.truck_fraction.value_or(nan));
    dens.x.push_back(w.window_start);
    dens.y.push_back(w.truck_density_per_km.value_or(nan));
  }
  const auto shares = stability_shares(recs, cfg.trace.std_threshold);
  auto st_out = open_out(c.out, "stability.csv");
  write_row(st_out, {"group", "vehicles", "share_std_below_threshold", "threshold_kmh"});
  const std::string thr = num(units::mps_to_kmh(cfg.trace.std_threshold));
  write_row(st_out, {"large", std::to_string(shares.large_count), num(shares.large_share), thr});
  write_row(st_out, {"other", std::to_string(shares.other_count), num(shares.other_share), thr});
  fmt::print("large below threshold: {:.1f}% of {}; other: {:.1f}% of {}\n", 100 * shares.large_share,
             shares.large_count, 100 * shares.other_share, shares.other_count);

  auto h1 = open_out(c.out, "speed_std_large.svg");
  write_svg_histogram(h1, "Speed standard deviation, trucks", "std (km/h)", std_large);
  auto h2 = open_out(c.out, "speed_std_other.svg");
  write_svg_histogram(h2, "Speed standard deviation, autos", "std (km/h)", std_other);
  auto h3 = open_out(c.out, "mean_speed.svg");
  write_svg_histogram(h3, "Average speed", "speed (km/h)", mean_kmh);
  const std::vector<Series> s1{share}, s2{dens};
  auto p1 = open_out(c.out, "truck_fraction.svg");
  write_svg_lines(p1, "Truck share", "window start (s)", "fraction", s1);
  auto p2 = open_out(c.out, "truck_density.svg");
  write_svg_lines(p2, "Truck density", "window start (s)", "trucks per km", s2);
  return kOk;
}

int cmd_keys(const Common& c) {
  const RunConfig cfg = base_config(c);
  for (const auto& k : config_keys()) fmt::print("{} = {}\n", k, get_config_value(cfg, k));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("svnet"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Two-tier vehicular backbone: simulation and queueing analysis"};
  app.require_subcommand(1);
  Common common;
  double max_outage = 0.02;
  bool unpaired = false;

  auto* run_sim = app.add_subcommand("run-sim", "packet simulation over a sweep x replications");
  add_common(run_sim, common, true);
  run_sim->add_option("--max-outage", max_outage, "route outage fraction allowed in the analytic comparison")
      ->capture_default_str();

  auto* compare = app.add_subcommand("compare", "simulation vs analysis and two-tier vs baseline");
  add_common(compare, common, true);
  compare->add_option("--max-outage", max_outage, "route outage fraction allowed in the analytic comparison")
      ->capture_default_str();
  compare->add_flag("--unpaired", unpaired, "keep replications connected at only some sweep points");

  std::string chain_path;
  auto* run_qna = app.add_subcommand("run-qna", "queueing analysis of a chain file");
  run_qna->add_option("chain", chain_path, "JSON chain description")->required()->check(CLI::ExistingFile);
  run_qna->add_option("--out", common.out, "output directory")->capture_default_str();

  std::string trace_path;
  auto* trace = app.add_subcommand("analyze-trace", "speed-stability and truck-share statistics of a trace");
  add_common(trace, common, false);
  trace->add_option("trace", trace_path, "trajectory trace (delimited text with header)")->required();

  double from = 10, to = 300, step = 10, antenna = 1.5;
  auto* atten = app.add_subcommand("attenuation", "added loss of a midway auto or truck vs distance");
  atten->add_option("--out", common.out, "output directory")->capture_default_str();
  atten->add_option("--from", from, "first distance (m)")->capture_default_str();
  atten->add_option("--to", to, "last distance (m)")->capture_default_str();
  atten->add_option("--step", step, "distance step (m)")->capture_default_str();
  atten->add_option("--antenna", antenna, "antenna height of both ends (m)")->capture_default_str();

  auto* calib = app.add_subcommand("calibrate", "stability-weight sweep");
  add_common(calib, common, false);
  auto* pdr = app.add_subcommand("pdr", "per-link PDR vs rate for the three class mixes");
  add_common(pdr, common, false);
  auto* keys = app.add_subcommand("keys", "list config keys with their effective values");
  keys->add_option("--config", common.config, "INI config file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run_sim) return cmd_run_sim(common, max_outage);
    if (*compare) return cmd_compare(common, max_outage, unpaired);
    if (*run_qna) return cmd_run_qna(chain_path, common.out);
    if (*trace) return cmd_analyze_trace(common, trace_path);
    if (*atten) return cmd_attenuation(common.out, from, to, step, antenna);
    if (*calib) return cmd_calibrate(common);
    if (*pdr) return cmd_pdr(common);
    if (*keys) return cmd_keys(common);
  } catch (const OverloadError& e) {
    spdlog::error("analysis infeasible: {}", e.what());
    return kOverload;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const TraceError& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  return kUsage;
}
