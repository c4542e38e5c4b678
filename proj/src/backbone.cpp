// SPDX-License-Identifier: Apache-2.0
#include "svnet/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "svnet/error.hpp"

namespace svnet {

namespace {

using VehicleIndex = std::unordered_map<int, const VehicleState*>;

VehicleIndex index_of(std::span<const VehicleState> snapshot) {
  VehicleIndex idx;
  idx.reserve(snapshot.size());
  for (const auto& v : snapshot) idx.emplace(v.id, &v);
  return idx;
}

const VehicleState* find(const VehicleIndex& idx, int id) {
  auto it = idx.find(id);
  return it == idx.end() ? nullptr : it->second;
}

double distance(const VehicleState& a, const VehicleState& b) { return (a.position - b.position).norm(); }

bool linked(const ProtocolParams& p, const VehicleState& a, const VehicleState& b) {
  return distance(a, b) <= p.transmission_range && (!p.audible || p.audible(a.id, b.id));
}

bool reaches(const ProtocolParams& p, const VehicleState& v, const Target& t) {
  if ((t.position - v.position).norm() > p.transmission_range) return false;
  return t.id < 0 || !p.audible || v.id == t.id || p.audible(v.id, t.id);
}

std::vector<Beacon> beacons_in_range(const VehicleState& self, std::span<const VehicleState> snapshot, double range,
                                     double now) {
  std::vector<Beacon> out;
  for (const auto& v : snapshot)
    if (v.id != self.id && distance(self, v) <= range) out.push_back(make_beacon(v, false, now));
  return out;
}

}  // namespace

void StabilityWeights::validate() const {
  if (alpha_w < 0.0 || alpha_w > 1.0 || beta_w < 0.0 || beta_w > 1.0)
    throw ConfigError("stability weights must lie in [0,1]");
  if (std::abs(alpha_w + beta_w - 1.0) > 1e-9) throw ConfigError("stability weights must sum to 1");
}

void ProtocolParams::validate() const {
  if (!(transmission_range > 0.0)) throw ConfigError("transmission range must be > 0");
  if (hysteresis < 0.0) throw ConfigError("hysteresis must be >= 0");
  if (expiry_periods < 1) throw ConfigError("beacon expiry must be >= 1 period");
  if (!(horizon > 0.0)) throw ConfigError("link-duration horizon must be > 0");
  if (!(standstill_speed > 0.0)) throw ConfigError("standstill speed must be > 0");
}

Beacon make_beacon(const VehicleState& v, bool requesting, double now, int maintenance_class) {
  Beacon b;
  b.id = v.id;
  b.location = v.position;
  b.speed = v.speed;
  b.direction = v.direction;
  b.eta = eta(v.cls);
  b.sv_flag = v.sv_flag;
  b.requesting = requesting;
  b.timestamp = now;
  b.maintenance_class = maintenance_class;
  return b;
}

double stability_index(double self_speed, double neighbor_speed, int neighbor_eta, const StabilityWeights& w,
                       double standstill_speed) {
  if (neighbor_eta < 1 || neighbor_eta > kEtaMax) throw DomainError("stability_index: eta out of range");
  const double denom = self_speed > 0.0 ? self_speed : standstill_speed;
  return w.alpha_w * std::abs(self_speed - neighbor_speed) / denom +
         w.beta_w * static_cast<double>(kEtaMax - neighbor_eta) / kEtaMax;
}

double stability_index(const VehicleState& self, const VehicleState& neighbor, const StabilityWeights& w,
                       double standstill_speed) {
  return stability_index(self.speed, neighbor.speed, eta(neighbor.cls), w, standstill_speed);
}

double link_duration(double transmission_range, double distance, double self_speed, double neighbor_speed,
                     double horizon) {
  if (distance < 0.0) throw DomainError("link_duration: negative distance");
  if (distance > transmission_range) throw NoLinkError("link_duration: distance beyond transmission range");
  const double dv = std::abs(self_speed - neighbor_speed);
  if (dv == 0.0) return horizon;
  return std::min((transmission_range - distance) / dv, horizon);
}

double estimated_volume(double link_duration, double data_rate) {
  if (link_duration < 0.0 || data_rate < 0.0) throw DomainError("estimated_volume: negative input");
  return link_duration * data_rate;
}

std::optional<int> select_sv(const Beacon& self, std::span<const Beacon> neighbors, const StabilityWeights& w,
                             const ProtocolParams& params, double heading, const std::set<int>& excluded) {
  // (SI, -eta, -progress, id): lexicographic minimum, independent of input order
  using Key = std::tuple<double, int, double, int>;
  std::optional<Key> best;
  for (const auto& n : neighbors) {
    if (n.id == self.id || excluded.count(n.id) || n.direction != self.direction) continue;
    const double progress = heading * (n.location.x() - self.location.x());
    if (!(progress > 0.0)) continue;
    if ((n.location - self.location).norm() > params.transmission_range) continue;
    if (params.audible && !params.audible(self.id, n.id)) continue;
    const Key k{stability_index(self.speed, n.speed, n.eta, w, params.standstill_speed), -n.eta, -progress, n.id};
    if (!best || k < *best) best = k;
  }
  if (!best) return std::nullopt;
  return std::get<3>(*best);
}

bool BackboneState::contains(int id) const { return std::find(chain.begin(), chain.end(), id) != chain.end(); }

std::optional<std::size_t> BackboneState::position(int id) const {
  auto it = std::find(chain.begin(), chain.end(), id);
  if (it == chain.end()) return std::nullopt;
  return static_cast<std::size_t>(it - chain.begin());
}

BootstrapResult bootstrap_backbone(std::span<const VehicleState> snapshot, int source_id,
                                   std::optional<Target> destination, const StabilityWeights& w,
                                   const ProtocolParams& params) {
  const auto idx = index_of(snapshot);
  const VehicleState* src = find(idx, source_id);
  if (!src) throw DomainError("bootstrap_backbone: unknown source " + std::to_string(source_id));

  BootstrapResult out;
  if (destination) {
    const double dx = destination->position.x() - src->x();
    out.state.heading = dx < 0.0 ? -1.0 : 1.0;
    if (reaches(params, *src, *destination)) {
      out.outcome = BootstrapOutcome::Direct;
      out.complete = true;
      return out;
    }
  } else {
    out.state.heading = sign(src->direction);
  }

  const VehicleState* nearest_sv = nullptr;
  for (const auto& v : snapshot) {
    if (!v.sv_flag || v.id == src->id || !linked(params, *src, v)) continue;
    if (!nearest_sv || distance(*src, v) < distance(*src, *nearest_sv)) nearest_sv = &v;
  }
  if (nearest_sv) {
    out.outcome = BootstrapOutcome::Attached;
    out.attach_to = nearest_sv->id;
    return out;
  }

  std::vector<Beacon> all;
  all.reserve(snapshot.size());
  for (const auto& v : snapshot) all.push_back(make_beacon(v));

  std::set<int> excluded{src->id};
  const VehicleState* current = src;
  for (;;) {
    const auto pick = select_sv(make_beacon(*current), all, w, params, out.state.heading, excluded);
    if (!pick) {
      if (out.state.chain.empty())
        throw BootstrapFailed("no SV candidate in range of vehicle " + std::to_string(src->id));
      break;
    }
    out.state.chain.push_back(*pick);
    excluded.insert(*pick);
    current = find(idx, *pick);
    if (destination && reaches(params, *current, *destination)) {
      out.complete = true;
      break;
    }
    if (params.max_chain_length && out.state.chain.size() >= params.max_chain_length) {
      out.complete = !destination;
      break;
    }
  }
  return out;
}

void apply_sv_flags(std::vector<VehicleState>& vehicles, const BackboneState& state) {
  const std::set<int> members(state.chain.begin(), state.chain.end());
  for (auto& v : vehicles) v.sv_flag = members.count(v.id) > 0;
}

double requesting_index(int requesting, int total) {
  if (total <= 0) return 0.0;
  if (requesting < 0 || requesting > total) throw DomainError("requesting_index: need 0 <= phi <= Phi");
  return static_cast<double>(requesting) / total;
}

int maintenance_class(double ri) {
  if (ri < 0.0 || ri > 1.0) throw DomainError("maintenance_class: RI outside [0,1]");
  // band edges compared directly; floor(ri / 0.2) misplaces 0.6
  if (ri < 0.2) return 1;
  if (ri < 0.4) return 2;
  if (ri < 0.6) return 3;
  if (ri < 0.8) return 4;
  return 5;
}

int beacon_period_ms(double ri) { return 600 - 100 * maintenance_class(ri); }

const char* to_string(ProtocolEventKind k) {
  switch (k) {
    case ProtocolEventKind::Elect: return "ELECT";
    case ProtocolEventKind::Replace: return "REPLACE";
    case ProtocolEventKind::Break: return "BREAK";
    case ProtocolEventKind::ClassChange: return "CLASS_CHANGE";
  }
  return "?";
}

MaintainResult maintain(BackboneState state, std::span<const VehicleState> snapshot, const std::set<int>& requesting,
                        const StabilityWeights& w, const ProtocolParams& params, double now, double beacon_period,
                        std::optional<Target> destination) {
  const auto idx = index_of(snapshot);
  const double range = params.transmission_range;
  const double expiry = params.expiry_periods * beacon_period + 1e-9;
  MaintainResult out;
  auto& chain = state.chain;

  auto refresh = [&](int sv) {
    auto& table = state.neighbor_tables[sv];
    if (const VehicleState* self = find(idx, sv)) {
      for (const auto& v : snapshot)
        if (v.id != sv && linked(params, *self, v))
          table[v.id] = {make_beacon(v, requesting.count(v.id) > 0, now, state.maintenance_class), now};
    }
    std::erase_if(table, [&](const auto& kv) { return now - kv.second.last_heard > expiry; });
  };
  for (int sv : chain) refresh(sv);

  // An SV that left the snapshot is dropped once every chain neighbor's
  // entry for it has expired.
  auto heard_by_chain = [&](std::size_t pos) {
    for (std::size_t k : {pos - 1, pos + 1}) {
      if (k >= chain.size()) continue;
      const auto& table = state.neighbor_tables[chain[k]];
      if (table.count(chain[pos])) return true;
    }
    return false;
  };
  for (std::size_t pos = 0; pos < chain.size();) {
    if (!find(idx, chain[pos]) && (chain.size() == 1 || !heard_by_chain(pos))) {
      out.events.push_back({now, chain[pos], ProtocolEventKind::Break, "expired"});
      out.released.push_back(chain[pos]);
      chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(pos));
    } else {
      ++pos;
    }
  }

  auto fresh_neighbors = [&](int sv) {
    std::vector<Beacon> out_beacons;
    for (const auto& [id, e] : state.neighbor_tables[sv])
      if (e.last_heard == now) out_beacons.push_back(e.beacon);
    return out_beacons;
  };

  for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
    const VehicleState* cur = find(idx, chain[j]);
    const VehicleState* next = find(idx, chain[j + 1]);
    if (!cur || !next) continue;  // absent members are waiting to expire

    const bool lost = !linked(params, *cur, *next);
    std::set<int> excluded(chain.begin(), chain.end());
    auto candidates = fresh_neighbors(cur->id);
    if (j + 2 < chain.size()) {
      if (const VehicleState* after = find(idx, chain[j + 2])) {
        std::erase_if(candidates, [&](const Beacon& b) {
          const VehicleState* v = find(idx, b.id);
          return !v || !linked(params, *v, *after);
        });
      }
    }
    const Beacon self = make_beacon(*cur, false, now);
    const auto best = select_sv(self, candidates, w, params, state.heading, excluded);

    if (lost) {
      if (best) {
        out.events.push_back({now, cur->id, ProtocolEventKind::Replace, fmt::format("{}->{}", next->id, *best)});
        out.released.push_back(next->id);
        chain[j + 1] = *best;
        continue;
      }
      const VehicleState* after = j + 2 < chain.size() ? find(idx, chain[j + 2]) : nullptr;
      if (after && linked(params, *cur, *after)) {
        out.events.push_back({now, cur->id, ProtocolEventKind::Replace, fmt::format("{}->skip", next->id)});
        out.released.push_back(next->id);
        chain.erase(chain.begin() + static_cast<std::ptrdiff_t>(j + 1));
        continue;
      }
      out.events.push_back({now, cur->id, ProtocolEventKind::Break, fmt::format("lost {}", next->id)});
      for (std::size_t k = j + 1; k < chain.size(); ++k) out.released.push_back(chain[k]);
      chain.resize(j + 1);
      break;
    }

    if (best) {
      const auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Beacon& b) { return b.id == *best; });
      const double si_best = stability_index(cur->speed, it->speed, it->eta, w, params.standstill_speed);
      const double si_next = stability_index(*cur, *next, w, params.standstill_speed);
      if (si_best < si_next - params.hysteresis) {
        out.events.push_back({now, cur->id, ProtocolEventKind::Replace, fmt::format("{}->{}", next->id, *best)});
        out.released.push_back(next->id);
        chain[j + 1] = *best;
      }
    }
  }

  // The chain ends at the first SV that reaches the destination.
  if (destination) {
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const VehicleState* v = find(idx, chain[k]);
      if (!v || !reaches(params, *v, *destination)) continue;
      for (std::size_t t = k + 1; t < chain.size(); ++t) out.released.push_back(chain[t]);
      if (k + 1 < chain.size())
        out.events.push_back({now, v->id, ProtocolEventKind::Break, fmt::format("trim {}", chain.size() - k - 1)});
      chain.resize(k + 1);
      break;
    }
  }

  // Grow the head toward the destination.
  while (destination && !chain.empty()) {
    if (params.max_chain_length && chain.size() >= params.max_chain_length) break;
    const VehicleState* head = find(idx, chain.back());
    if (!head || reaches(params, *head, *destination)) break;
    if (state.heading * (destination->position.x() - head->x()) < 0.0) break;  // already past it
    const std::set<int> excluded(chain.begin(), chain.end());
    const auto neighbors = beacons_in_range(*head, snapshot, range, now);
    const auto pick = select_sv(make_beacon(*head, false, now), neighbors, w, params, state.heading, excluded);
    if (!pick) break;
    out.events.push_back({now, head->id, ProtocolEventKind::Elect, fmt::format("{}", *pick)});
    chain.push_back(*pick);
    refresh(*pick);
  }

  // Released vehicles that were re-elected are members again.
  std::erase_if(out.released, [&](int id) { return state.contains(id); });
  std::erase_if(state.neighbor_tables, [&](const auto& kv) { return !state.contains(kv.first); });
  for (int sv : chain)
    if (!state.neighbor_tables.count(sv)) refresh(sv);

  int cls = 1;
  for (int sv : chain) {
    const VehicleState* self = find(idx, sv);
    if (!self) continue;
    int total = 0, req = 0;
    for (const auto& v : snapshot) {
      if (v.id == sv || distance(*self, v) > range) continue;
      ++total;
      req += requesting.count(v.id) ? 1 : 0;
    }
    cls = std::max(cls, maintenance_class(requesting_index(req, total)));
  }
  if (!chain.empty() && cls != state.maintenance_class) {
    out.events.push_back({now, chain.front(), ProtocolEventKind::ClassChange,
                          fmt::format("{}->{}", state.maintenance_class, cls)});
    state.maintenance_class = cls;
  }

  out.state = std::move(state);
  return out;
}

std::vector<ProtocolEvent> connect_requester(BackboneState& state, std::span<const VehicleState> snapshot,
                                             int requester, const StabilityWeights& w, const ProtocolParams& params,
                                             double now) {
  std::vector<ProtocolEvent> events;
  if (state.chain.empty()) return events;
  const auto idx = index_of(snapshot);
  const VehicleState* self = find(idx, requester);
  const VehicleState* front = find(idx, state.chain.front());
  if (!self || !front) return events;
  for (int sv : state.chain)
    if (const VehicleState* v = find(idx, sv); v && linked(params, *self, *v)) return events;
  // only a requester upstream of the chain can bridge to its first SV
  if (state.heading * (front->x() - self->x()) <= 0.0) return events;

  std::vector<Beacon> all;
  all.reserve(snapshot.size());
  for (const auto& v : snapshot) all.push_back(make_beacon(v, false, now));
  std::set<int> excluded(state.chain.begin(), state.chain.end());
  excluded.insert(requester);
  std::vector<int> bridge;
  const VehicleState* current = self;
  while (!linked(params, *current, *front)) {
    const auto pick = select_sv(make_beacon(*current, false, now), all, w, params, state.heading, excluded);
    if (!pick) return {};  // no bridge; the requester keeps waiting
    bridge.push_back(*pick);
    excluded.insert(*pick);
    current = find(idx, *pick);
  }
  for (int sv : bridge) events.push_back({now, requester, ProtocolEventKind::Elect, fmt::format("{}", sv)});
  state.chain.insert(state.chain.begin(), bridge.begin(), bridge.end());
  return events;
}

NextHop forward_next_hop(int destination_id, int current, const BackboneState& backbone,
                         std::span<const VehicleState> snapshot, const ProtocolParams& params, bool prefer_ahead) {
  const auto idx = index_of(snapshot);
  const VehicleState* cur = find(idx, current);
  const VehicleState* dst = find(idx, destination_id);
  if (!cur || !dst) return {};
  if (linked(params, *cur, *dst)) return {HopKind::Deliver, dst->id};

  const double dx = dst->x() - cur->x();
  const double dir = dx == 0.0 ? backbone.heading : (dx > 0.0 ? 1.0 : -1.0);

  if (const auto pos = backbone.position(current)) {
    const bool downstream = dir == backbone.heading;
    if (!downstream && *pos == 0) return {};
    const std::size_t k = downstream ? *pos + 1 : *pos - 1;
    if (k >= backbone.chain.size()) return {};
    const VehicleState* nxt = find(idx, backbone.chain[k]);
    if (!nxt || !linked(params, *cur, *nxt)) return {};
    return {HopKind::Forward, nxt->id};
  }

  const VehicleState* best = nullptr;
  bool best_ahead = false;
  for (int sv : backbone.chain) {
    const VehicleState* v = find(idx, sv);
    if (!v || !linked(params, *cur, *v)) continue;
    const bool ahead = dir * (v->x() - cur->x()) > 0.0;
    const bool better = !best || (prefer_ahead && ahead != best_ahead ? ahead
                                                                      : distance(*cur, *v) < distance(*cur, *best));
    if (better) {
      best = v;
      best_ahead = ahead;
    }
  }
  if (!best) return {};
  return {HopKind::Forward, best->id};
}

// ---------------------------------------------------------------------------

FadingEnvironment link_fading(const FadingEnvironment& base, std::size_t in_range, double transmission_range,
                              double road_width) {
  FadingEnvironment env = base;
  const double area = 2.0 * transmission_range * road_width;
  env.nv = area > 0.0 ? static_cast<double>(in_range) / area : 0.0;
  env.nv = std::min(env.nv, env.nv_max);
  return env;
}

std::vector<LinkEstimate> path_link_estimates(std::span<const VehicleState> snapshot, int source_id,
                                              const std::vector<int>& chain, const CalibrationScenario& scenario,
                                              Rng& channel_rng) {
  const auto idx = index_of(snapshot);
  const double range = scenario.protocol.transmission_range;
  std::vector<LinkEstimate> out;
  const VehicleState* tx = find(idx, source_id);
  for (int id : chain) {
    const VehicleState* rx = find(idx, id);
    if (!tx || !rx) break;
    const double d = distance(*tx, *rx);
    if (d > range) break;
    LinkEstimate e;
    e.link_duration = link_duration(range, d, tx->speed, rx->speed, scenario.protocol.horizon);

    std::size_t in_range = 0;
    for (const auto& v : snapshot)
      if (v.id != tx->id && distance(*tx, v) <= range) ++in_range;
    const auto cls = classify_link(*tx, *rx, snapshot, scenario.corridor_half_width);
    const auto env = link_fading(scenario.fading, in_range, range, scenario.nv_area_width);
    const double p = received_power_dbm(link_geometry(*tx, *rx), scenario.radio,
                                        cls.type == LinkType::OLOS ? &cls.profile : nullptr, env, &channel_rng);
    e.data_rate = rate_from_power(p, scenario.rates) * 1e6;
    e.estimated_volume = estimated_volume(e.link_duration, e.data_rate);
    out.push_back(e);
    tx = rx;
  }
  return out;
}

CalibrationResult calibrate_weights(const CalibrationScenario& scenario, std::span<const double> alphas,
                                    std::size_t replications, std::uint64_t seed) {
  if (alphas.empty()) throw ConfigError("calibrate_weights: empty weight grid");
  CalibrationResult result;
  result.points.resize(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    result.points[a].alpha_w = alphas[a];
    StabilityWeights::from_alpha(alphas[a]).validate();
  }
  std::vector<double> sum_ld(alphas.size(), 0.0), sum_rate(alphas.size(), 0.0);

  ProtocolParams protocol = scenario.protocol;
  protocol.max_chain_length = scenario.chain_length;
  const double length = scenario.traffic.road_length;

  for (std::size_t r = 0; r < replications; ++r) {
    Rng traffic_rng = make_stream(seed, 3 * r);
    const auto vehicles = spawn_synthetic(scenario.traffic, traffic_rng);
    std::vector<int> sources;
    for (const auto& v : vehicles)
      if (v.direction == Direction::Forward && v.x() >= 0.1 * length && v.x() <= 0.3 * length) sources.push_back(v.id);
    if (sources.empty()) continue;
    Rng pick_rng = make_stream(seed, 3 * r + 1);
    const int source =
        sources[std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(pick_rng)];

    for (std::size_t a = 0; a < alphas.size(); ++a) {
      std::vector<int> chain;
      try {
        chain = bootstrap_backbone(vehicles, source, std::nullopt, StabilityWeights::from_alpha(alphas[a]), protocol)
                    .state.chain;
      } catch (const BootstrapFailed&) {
        continue;
      }
      // common channel draws across the grid
      Rng channel_rng = make_stream(seed, 3 * r + 2);
      const auto links = path_link_estimates(vehicles, source, chain, scenario, channel_rng);
      if (links.empty()) continue;
      double ld = 0.0, rate = 0.0;
      for (const auto& l : links) {
        ld += l.link_duration;
        rate += l.data_rate;
      }
      sum_ld[a] += ld / static_cast<double>(links.size());
      sum_rate[a] += rate / static_cast<double>(links.size());
      ++result.points[a].replications;
    }
  }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    auto& p = result.points[a];
    if (p.replications) {
      p.mean_link_duration = sum_ld[a] / static_cast<double>(p.replications);
      p.mean_data_rate = sum_rate[a] / static_cast<double>(p.replications);
    }
    p.objective = p.mean_link_duration * p.mean_data_rate;
    if (p.objective > best) {
      best = p.objective;
      result.best = StabilityWeights::from_alpha(p.alpha_w);
    }
  }
  return result;
}

}  // namespace svnet
