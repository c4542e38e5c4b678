// SPDX-License-Identifier: Apache-2.0
#include "svnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

#include <fmt/format.h>

#include "svnet/error.hpp"

namespace svnet {

const char* to_string(Scheme s) { return s == Scheme::TwoTier ? "two-tier" : "baseline"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "two-tier") return Scheme::TwoTier;
  if (s == "baseline") return Scheme::Baseline;
  throw ConfigError("unknown scheme '" + s + "' (expected two-tier or baseline)");
}

StabilityWeights RunConfig::effective_weights() const {
  return scheme == Scheme::Baseline ? StabilityWeights{1.0, 0.0} : weights;
}

void RunConfig::validate() const {
  traffic.validate();
  mac.validate();
  protocol.validate();
  weights.validate();
  if (!(duration > 0.0)) throw ConfigError("duration must be > 0");
  if (warmup < 0.0 || warmup >= duration) throw ConfigError("warm-up must lie in [0, duration)");
  if (!(mobility_step > 0.0)) throw ConfigError("mobility step must be > 0");
  if (retry_limit < 1) throw ConfigError("retry limit must be >= 1");
  if (pgr < 0.0 || generation_rate < 0.0) throw ConfigError("generation rates must be >= 0");
  if (arrival_scv < 0.0 || service_scv < 0.0) throw ConfigError("SCVs must be >= 0");
  if (!(packet_bits > 0.0)) throw ConfigError("packet size must be > 0");
  if (!(source_zone_lo >= 0.0 && source_zone_lo < source_zone_hi && source_zone_hi <= 1.0))
    throw ConfigError("source zone must satisfy 0 <= lo < hi <= 1");
  if (!(destination_offset > 0.0)) throw ConfigError("destination offset must be > 0");
  if (extra_source_fraction < 0.0 || extra_source_fraction > 1.0)
    throw ConfigError("extra source fraction must lie in [0,1]");
  if (corridor_half_width < 0.0) throw ConfigError("corridor half-width must be >= 0");
  if (!(beacon_speed_smoothing > 0.0 && beacon_speed_smoothing <= 1.0))
    throw ConfigError("beacon speed smoothing must lie in (0,1]");
}

namespace {

constexpr std::size_t kMaxHops = 64;
constexpr std::size_t kSvGenPositions = 16;
constexpr double kMinSeparation = 1.0;  // m

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Standard normal that depends only on the key (Box-Muller on two hashed
/// uniforms), so shadowing does not depend on event order.
double keyed_normal(std::uint64_t key) {
  const double u1 = (static_cast<double>(mix64(key) >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = static_cast<double>(mix64(key ^ 0xA5A5A5A5A5A5A5A5ULL) >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * units::kPi * u2);
}

/// Counter-mode bit source: draws depend only on the starting key, so a
/// node's k-th service time is the same across sweep points.
struct KeyedBits {
  using result_type = std::uint64_t;
  std::uint64_t state;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return mix64(state++); }
};

enum class EventKind { MobilityTick, BeaconTick, PacketGen, SvGen, TxStart, TxEnd, MeasureTick };

struct Event {
  double time;
  std::uint64_t seq;
  EventKind kind;
  int arg;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
  }
};

struct Packet {
  double created = 0.0;
  int origin = 0;
  bool main_flow = false;
  std::size_t hops = 0;
  int last_sender = -1;  // -1 = generated locally
  double enqueued = 0.0;
};

struct Node {
  std::deque<std::size_t> queue;
  bool busy = false;
  int target = -1;
  bool deliver = false;
  int station = -1;  // station at service start, -1 = not a chain station
  double head_since = 0.0;  // head packet eligible for service since; blocked time counts as service
  double service_time = 0.0;
  bool failed = false;        // attempt in progress is below sensitivity on every candidate
  int retries = 0;            // failed attempts on the head packet
  std::uint64_t attempts = 0; // keys the per-attempt fading draw
  double stalled_since = -1.0;  // queue waiting with no next hop, -1 = not stalled
};

struct StationAccum {
  std::size_t arrivals = 0;
  std::size_t internal = 0;
  std::map<int, std::size_t> external;  // sender id (-1 = own generation) -> count
  std::size_t generated = 0;            // SV-generated packets
  std::size_t served = 0;
  std::size_t forwarded = 0;
  double service_sum = 0.0;
  double service_sq = 0.0;
  double wait_sum = 0.0;  // queueing before the packet reaches the head
};

/// Off-chain sources as single G/G/1 stations; only traffic that never
/// enters the chain adds to the chain's own throughput.
double edge_throughput(const SimReport& r) {
  double total = 0.0;
  for (const auto& e : r.edge_stations) {
    const double load = e.external_rates.empty() ? 0.0 : e.external_rates.front();
    total += std::min(load, e.service_rate) * (1.0 - std::clamp(e.forward_fraction, 0.0, 1.0));
  }
  return total;
}

class Simulation {
 public:
  Simulation(const RunConfig& cfg, std::ostream* log)
      : cfg_(cfg),
        protocol_(cfg.protocol),
        weights_(cfg.effective_weights()),
        log_(log),
        mobility_rng_(make_stream(cfg.seed, 1)) {}

  SimReport run();

 private:
  void schedule(double t, EventKind k, int arg = 0) { events_.push({t, seq_++, k, arg}); }
  bool measuring(double t) const { return t >= cfg_.warmup && t <= cfg_.duration; }

  const VehicleState* vehicle(int id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &vehicles_[it->second];
  }
  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < vehicles_.size(); ++i) index_[vehicles_[i].id] = i;
  }

  int station_of(int id) const {
    if (id == main_source_) return 0;
    if (auto p = backbone_.position(id)) return static_cast<int>(*p) + 1;
    return -1;
  }

  void setup();
  bool try_bootstrap();
  void smooth_speeds();
  std::vector<VehicleState> beacon_view() const;
  void log_event(const ProtocolEvent& e) {
    if (log_) *log_ << fmt::format("{:.3f},{},{},{}\n", e.time, e.node, to_string(e.kind), e.detail);
  }

  void enqueue(int node, std::size_t pkt, double now);
  void try_send(int u, double now);
  void kick_all(double now);
  const std::pair<double, std::size_t>& mean_link(int u, int v);  // mean dBm, in-range count at u
  double link_rate_mbps(int u, int v, std::uint64_t attempt);
  void record_service(int u, Node& node, int target, bool deliver, double now);
  void close_stall(Node& node, double now) {
    if (node.stalled_since < 0.0) return;
    route_outage_ += std::max(0.0, now - std::max(node.stalled_since, cfg_.warmup));
    node.stalled_since = -1.0;
  }
  int contenders(int u) const;
  std::vector<int> fallback_hops(int u, int primary) const;
  void connect_sources(double now);

  void on_mobility(double now);
  void on_beacon(double now);
  void run_maintenance(double now);
  void on_packet_gen(int src_index, double now);
  void on_sv_gen(int position, double now);
  void on_tx_end(int u, double now);

  SimReport finish();

  RunConfig cfg_;
  ProtocolParams protocol_;  // cfg_.protocol plus beacon audibility from the mean channel
  StabilityWeights weights_;
  std::ostream* log_;
  Rng mobility_rng_;

  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;

  std::vector<VehicleState> vehicles_;
  std::unordered_map<int, std::size_t> index_;
  std::unordered_map<int, double> advertised_speed_;  // smoothed speed carried in beacons
  int next_id_ = 0;

  int main_source_ = -1;
  int destination_ = -1;
  std::vector<int> sources_;  // [0] = main source
  std::vector<Rng> source_rngs_;
  std::set<int> source_set_;
  std::vector<Rng> svgen_rngs_;

  BackboneState backbone_;
  bool bootstrapped_ = false;
  bool direct_ = false;
  std::set<int> draining_;
  double beacon_period_ = 0.5;
  double last_maintenance_ = -1.0;

  std::map<std::pair<int, int>, std::pair<double, std::size_t>> power_cache_;

  std::vector<Packet> packets_;
  std::unordered_map<int, Node> nodes_;

  std::size_t holds_no_route_ = 0, failed_attempts_ = 0;
  std::size_t delivered_ = 0, dropped_ = 0, window_deliveries_ = 0, churn_ = 0, initial_chain_ = 0;
  double delivered_bits_ = 0.0;
  double route_outage_ = 0.0;  // node-seconds of stalled queues inside the window
  std::vector<double> e2ed_;
  std::vector<StationAccum> stations_;
  std::map<int, StationAccum> edges_;  // off-chain sources, keyed by vehicle id
};

void Simulation::setup() {
  cfg_.validate();
  protocol_.audible = [this](int a, int b) {
    return vehicle(a) && vehicle(b) && mean_link(a, b).first >= cfg_.rates.front().threshold_dbm;
  };
  Rng traffic_rng = make_stream(cfg_.seed, 0);
  vehicles_ = spawn_synthetic(cfg_.traffic, traffic_rng);
  next_id_ = static_cast<int>(vehicles_.size());
  reindex();
  smooth_speeds();

  const double L = cfg_.traffic.road_length;
  std::vector<int> candidates;
  for (const auto& v : vehicles_)
    if (v.direction == Direction::Forward && v.x() >= cfg_.source_zone_lo * L && v.x() <= cfg_.source_zone_hi * L)
      candidates.push_back(v.id);
  if (candidates.empty()) {  // sparse draw: nearest forward vehicle to the zone centre
    const double mid = 0.5 * (cfg_.source_zone_lo + cfg_.source_zone_hi) * L;
    const VehicleState* best = nullptr;
    for (const auto& v : vehicles_)
      if (v.direction == Direction::Forward && (!best || std::abs(v.x() - mid) < std::abs(best->x() - mid))) best = &v;
    if (!best) throw ConfigError("no forward-direction vehicle to act as source");
    candidates.push_back(best->id);
  }
  Rng flow_rng = make_stream(cfg_.seed, 2);
  main_source_ = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(flow_rng)];
  const VehicleState& src = *vehicle(main_source_);

  const double target_x = src.x() + cfg_.destination_offset;
  const VehicleState* dst = nullptr;
  for (const auto& v : vehicles_) {
    if (v.id == main_source_ || v.direction != Direction::Forward) continue;
    if (!dst || std::abs(v.x() - target_x) < std::abs(dst->x() - target_x)) dst = &v;
  }
  if (!dst) throw ConfigError("no destination vehicle available");
  destination_ = dst->id;

  sources_.push_back(main_source_);
  std::bernoulli_distribution extra(cfg_.extra_source_fraction);
  for (const auto& v : vehicles_) {
    if (v.id == main_source_ || v.id == destination_ || v.direction != Direction::Forward) continue;
    if (v.x() <= src.x() || v.x() >= dst->x()) continue;
    if (extra(flow_rng)) sources_.push_back(v.id);
  }
  source_set_.insert(sources_.begin(), sources_.end());
  for (std::size_t k = 0; k < sources_.size(); ++k) source_rngs_.push_back(make_stream(cfg_.seed, 100 + k));
  for (std::size_t k = 0; k < kSvGenPositions; ++k) svgen_rngs_.push_back(make_stream(cfg_.seed, 1000 + k));

  stations_.resize(kSvGenPositions + 2);
  try_bootstrap();
  initial_chain_ = backbone_.chain.size();

  for (double t = cfg_.mobility_step; t <= cfg_.duration; t += cfg_.mobility_step) schedule(t, EventKind::MobilityTick);
  schedule(beacon_period_, EventKind::BeaconTick);
  schedule(cfg_.warmup, EventKind::MeasureTick);
  if (cfg_.pgr > 0.0) {
    for (std::size_t k = 0; k < sources_.size(); ++k)
      schedule(sample_gamma_mean_scv(source_rngs_[k], 1.0 / cfg_.pgr, cfg_.arrival_scv), EventKind::PacketGen,
               static_cast<int>(k));
  }
  if (cfg_.generation_rate > 0.0) {
    for (std::size_t p = 0; p < kSvGenPositions; ++p)
      schedule(sample_gamma_mean_scv(svgen_rngs_[p], 1.0 / cfg_.generation_rate, 1.0), EventKind::SvGen,
               static_cast<int>(p));
  }
}

void Simulation::smooth_speeds() {
  std::unordered_map<int, double> next;
  for (const auto& v : vehicles_) {
    auto it = advertised_speed_.find(v.id);
    next[v.id] = it == advertised_speed_.end() ? v.speed
                                               : it->second + cfg_.beacon_speed_smoothing * (v.speed - it->second);
  }
  advertised_speed_ = std::move(next);
}

std::vector<VehicleState> Simulation::beacon_view() const {
  std::vector<VehicleState> view = vehicles_;
  for (auto& v : view) v.speed = advertised_speed_.at(v.id);
  return view;
}

bool Simulation::try_bootstrap() {
  const VehicleState* dst = vehicle(destination_);
  if (!vehicle(main_source_) || !dst) return false;
  try {
    auto res = bootstrap_backbone(beacon_view(), main_source_, Target(dst->position, destination_), weights_,
                                  protocol_);
    direct_ = res.outcome == BootstrapOutcome::Direct;
    backbone_ = std::move(res.state);
    bootstrapped_ = true;
    for (int sv : backbone_.chain) log_event({0.0, sv, ProtocolEventKind::Elect, "bootstrap"});
    apply_sv_flags(vehicles_, backbone_);
    return true;
  } catch (const BootstrapFailed&) {
    return false;
  }
}

void Simulation::enqueue(int node, std::size_t pkt, double now) {
  Packet& p = packets_[pkt];
  Node& n = nodes_[node];
  p.enqueued = now;
  if (n.queue.empty() && !n.busy) n.head_since = now;
  n.queue.push_back(pkt);
  if (!measuring(now)) return;
  const int s = station_of(node);
  if (s < 0 && p.last_sender < 0 && source_set_.count(node)) {
    auto& e = edges_[node];
    ++e.arrivals;
    ++e.external[node];
    return;
  }
  if (s < 0 || static_cast<std::size_t>(s) >= stations_.size()) return;
  auto& st = stations_[static_cast<std::size_t>(s)];
  ++st.arrivals;
  const int from = p.last_sender >= 0 ? station_of(p.last_sender) : -1;
  const bool fresh = p.last_sender == p.origin && from < 0;  // first hop out of a non-chain source
  if ((from >= 0 && from < s) || (p.last_sender >= 0 && !fresh)) {  // relayed, possibly past a skipped SV
    ++st.internal;
  } else if (p.last_sender < 0 && s > 0 && source_set_.count(node) == 0) {
    ++st.generated;
  } else {
    ++st.external[p.last_sender < 0 ? node : p.last_sender];
  }
}

int Simulation::contenders(int u) const {
  const VehicleState* self = vehicle(u);
  int n = 1;
  auto near = [&](int id) {
    const VehicleState* v = vehicle(id);
    return v && id != u && (v->position - self->position).norm() <= cfg_.protocol.transmission_range;
  };
  std::set<int> counted;
  for (int id : backbone_.chain)
    if (near(id) && counted.insert(id).second) ++n;
  for (int id : sources_)
    if (near(id) && counted.insert(id).second) ++n;
  for (int id : draining_)
    if (near(id) && counted.insert(id).second) ++n;
  return n;
}

std::vector<int> Simulation::fallback_hops(int u, int primary) const {
  const VehicleState* self = vehicle(u);
  const double range = cfg_.protocol.transmission_range;
  auto reachable = [&](int id) {
    const VehicleState* v = vehicle(id);
    return v && id != u && id != primary && (v->position - self->position).norm() <= range;
  };
  std::vector<int> out;
  if (reachable(destination_)) out.push_back(destination_);
  const auto pos = backbone_.position(u);
  for (std::size_t p = pos ? *pos + 1 : 0; p < backbone_.chain.size(); ++p) {
    const int id = backbone_.chain[p];
    if (!reachable(id)) continue;
    if (!pos && backbone_.heading * (vehicle(id)->x() - self->x()) <= 0.0) continue;
    out.push_back(id);
  }
  return out;
}

const std::pair<double, std::size_t>& Simulation::mean_link(int u, int v) {
  const VehicleState* tx = vehicle(u);
  const VehicleState* rx = vehicle(v);
  auto it = power_cache_.find({u, v});
  if (it == power_cache_.end()) {
    const auto cls = classify_link(*tx, *rx, vehicles_, cfg_.corridor_half_width);
    auto geometry = link_geometry(*tx, *rx);
    if ((geometry.rx_position - geometry.tx_position).norm() < kMinSeparation)  // overlapping vehicles
      geometry.rx_position = geometry.tx_position + Eigen::Vector2d(kMinSeparation, 0.0);
    const double p = mean_received_power_dbm(geometry, cfg_.radio,
                                             cls.type == LinkType::OLOS ? &cls.profile : nullptr);
    std::size_t in_range = 0;
    for (const auto& w : vehicles_)
      if (w.id != u && (w.position - tx->position).norm() <= cfg_.protocol.transmission_range) ++in_range;
    it = power_cache_.emplace(std::make_pair(u, v), std::make_pair(p, in_range)).first;
  }
  return it->second;
}

double Simulation::link_rate_mbps(int u, int v, std::uint64_t attempt) {
  const auto [mean, in_range] = mean_link(u, v);
  const double road_width = cfg_.traffic.lanes * cfg_.traffic.lane_width;
  const auto env = link_fading(cfg_.fading, in_range, cfg_.protocol.transmission_range, road_width);
  const std::uint64_t k = mix64(mix64(mix64(cfg_.seed ^ 0x5ADE5ADEULL) ^ static_cast<std::uint64_t>(u)) ^
                                static_cast<std::uint64_t>(v)) ^
                          attempt;
  const double power = mean + small_scale_sigma(env) * keyed_normal(k);
  return rate_from_power(power, cfg_.rates);
}

void Simulation::try_send(int u, double now) {
  auto nit = nodes_.find(u);
  if (nit == nodes_.end()) return;
  Node& node = nit->second;
  if (node.busy || node.queue.empty() || !vehicle(u)) return;
  if (!vehicle(destination_)) return;
  if (!bootstrapped_ && !direct_) return;

  auto hop = forward_next_hop(destination_, u, backbone_, vehicles_, protocol_, draining_.count(u) > 0);
  if (hop.kind == HopKind::Hold) {  // resumes on the next topology change
    ++holds_no_route_;
    if (node.stalled_since < 0.0) node.stalled_since = now;
    return;
  }
  close_stall(node, now);

  // fresh fading per attempt; primary first, then anything reachable further along
  const std::uint64_t attempt = node.attempts++;
  double rate = link_rate_mbps(u, hop.node, attempt);
  if (!(rate > 0.0)) {
    for (int alt : fallback_hops(u, hop.node)) {
      if (const double r = link_rate_mbps(u, alt, attempt); r > 0.0) {
        hop = {alt == destination_ ? HopKind::Deliver : HopKind::Forward, alt};
        rate = r;
        break;
      }
    }
  }
  node.failed = !(rate > 0.0);
  DcfParams mac = cfg_.mac;
  mac.frame_bits = cfg_.packet_bits;
  // a lost frame still occupies the medium for a base-rate exchange before the retry
  const double phy = node.failed ? cfg_.rates.front().rate_mbps : rate;
  const double tau = service_rate(mac, contenders(u), phy * 1e6);
  KeyedBits bits{mix64(mix64(cfg_.seed ^ 0x5E4F1CEULL) ^ static_cast<std::uint64_t>(u)) ^ (attempt << 20)};
  const double s = sample_gamma_mean_scv(bits, 1.0 / tau, cfg_.service_scv);

  node.busy = true;
  if (node.failed) {
    ++failed_attempts_;
  } else {
    node.service_time = (now - node.head_since) + s;
    record_service(u, node, hop.node, hop.kind == HopKind::Deliver, now);
  }
  schedule(now + s, EventKind::TxEnd, u);
}

void Simulation::record_service(int u, Node& node, int target, bool deliver, double now) {
  node.target = target;
  node.deliver = deliver;
  node.station = station_of(u);
  if (!measuring(now)) return;
  StationAccum* acc = nullptr;
  if (node.station >= 0 && static_cast<std::size_t>(node.station) < stations_.size())
    acc = &stations_[static_cast<std::size_t>(node.station)];
  else if (node.station < 0 && source_set_.count(u) && packets_[node.queue.front()].origin == u)
    acc = &edges_[u];
  if (!acc) return;
  auto& st = *acc;
  ++st.served;
  st.service_sum += node.service_time;
  st.service_sq += node.service_time * node.service_time;
  st.wait_sum += node.head_since - packets_[node.queue.front()].enqueued;
  if (!deliver && target >= 0 && station_of(target) > node.station) ++st.forwarded;  // edges: into the chain
}

void Simulation::kick_all(double now) {
  std::vector<int> ids;
  for (const auto& [id, n] : nodes_)
    if (!n.busy && !n.queue.empty()) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (int id : ids) try_send(id, now);
}

void Simulation::on_tx_end(int u, double now) {
  Node& node = nodes_[u];
  if (node.failed) {
    node.busy = false;
    if (++node.retries <= cfg_.retry_limit) {
      try_send(u, now);
      return;
    }
    // retry limit: the frame leaves the station undelivered
    node.service_time = now - node.head_since;
    record_service(u, node, -1, false, now);
    node.queue.pop_front();
    ++dropped_;
    node.retries = 0;
    if (node.queue.empty()) draining_.erase(u);
    node.head_since = now;
    try_send(u, now);
    return;
  }
  node.retries = 0;
  const std::size_t pkt = node.queue.front();
  node.queue.pop_front();
  node.busy = false;
  Packet& p = packets_[pkt];
  ++p.hops;
  const int target = node.target;
  if (node.deliver) {
    ++delivered_;
    delivered_bits_ += cfg_.packet_bits;
    if (measuring(now)) ++window_deliveries_;
    if (p.main_flow && p.created >= cfg_.warmup) e2ed_.push_back(now - p.created);
  } else if (!vehicle(target) || p.hops >= kMaxHops) {
    ++dropped_;
  } else {
    p.last_sender = u;
    enqueue(target, pkt, now);
    try_send(target, now);
  }
  if (node.queue.empty()) draining_.erase(u);
  node.head_since = now;
  try_send(u, now);
}

void Simulation::on_packet_gen(int k, double now) {
  const int src = sources_[static_cast<std::size_t>(k)];
  if (!vehicle(src)) return;  // left the road; the flow ends
  packets_.push_back({now, src, k == 0, 0, -1});
  enqueue(src, packets_.size() - 1, now);
  try_send(src, now);
  const double next = now + sample_gamma_mean_scv(source_rngs_[static_cast<std::size_t>(k)], 1.0 / cfg_.pgr,
                                                  cfg_.arrival_scv);
  if (next <= cfg_.duration) schedule(next, EventKind::PacketGen, k);
}

void Simulation::on_sv_gen(int position, double now) {
  const auto p = static_cast<std::size_t>(position);
  if (p < backbone_.chain.size() && vehicle(backbone_.chain[p])) {
    const int sv = backbone_.chain[p];
    packets_.push_back({now, sv, false, 0, -1});
    enqueue(sv, packets_.size() - 1, now);
    try_send(sv, now);
  }
  const double next = now + sample_gamma_mean_scv(svgen_rngs_[p], 1.0 / cfg_.generation_rate, 1.0);
  if (next <= cfg_.duration) schedule(next, EventKind::SvGen, position);
}

void Simulation::on_mobility(double now) {
  step_mobility(vehicles_, cfg_.mobility_step, cfg_.traffic, mobility_rng_, next_id_);
  reindex();
  smooth_speeds();
  power_cache_.clear();
  // despawned holders lose their queued packets (an in-service frame completes)
  for (auto& [id, n] : nodes_) {
    if (vehicle(id)) continue;
    close_stall(n, now);
    const std::size_t keep = n.busy ? 1 : 0;
    while (n.queue.size() > keep) {
      n.queue.pop_back();
      ++dropped_;
    }
  }
  apply_sv_flags(vehicles_, backbone_);
  kick_all(now);
}

void Simulation::on_beacon(double now) {
  run_maintenance(now);
  beacon_period_ = (600.0 - 100.0 * backbone_.maintenance_class) / 1000.0;
  kick_all(now);
  if (now + beacon_period_ <= cfg_.duration) schedule(now + beacon_period_, EventKind::BeaconTick);
}

void Simulation::run_maintenance(double now) {
  last_maintenance_ = now;
  if (!bootstrapped_ || (backbone_.chain.empty() && !direct_)) {
    if (try_bootstrap()) churn_ += backbone_.chain.size();
  } else if (!backbone_.chain.empty()) {
    std::set<int> requesting;  // vehicles with an active flow
    for (int id : sources_)
      if (vehicle(id)) requesting.insert(id);
    const VehicleState* dst = vehicle(destination_);
    ProtocolParams params = protocol_;
    params.max_chain_length = 0;
    auto res = maintain(std::move(backbone_), beacon_view(), requesting, weights_, params, now, beacon_period_,
                        dst ? std::optional<Target>(Target(dst->position, destination_)) : std::nullopt);
    backbone_ = std::move(res.state);
    for (const auto& e : res.events) {
      log_event(e);
      if (e.kind != ProtocolEventKind::ClassChange) ++churn_;
    }
    for (int id : res.released)
      if (nodes_.count(id) && !nodes_[id].queue.empty()) draining_.insert(id);
    connect_sources(now);
    apply_sv_flags(vehicles_, backbone_);
    if (backbone_.chain.empty() && dst) {
      const VehicleState* src = vehicle(main_source_);
      direct_ = src && (src->position - dst->position).norm() <= cfg_.protocol.transmission_range &&
                protocol_.audible(main_source_, destination_);
      if (!direct_) bootstrapped_ = false;
    }
  }
}

void Simulation::connect_sources(double now) {
  if (backbone_.chain.empty()) return;
  const auto view = beacon_view();
  for (int id : sources_) {
    if (!vehicle(id)) continue;
    const VehicleState* dst = vehicle(destination_);
    if (dst && (dst->position - vehicle(id)->position).norm() <= cfg_.protocol.transmission_range) continue;
    for (const auto& e : connect_requester(backbone_, view, id, weights_, protocol_, now)) {
      log_event(e);
      ++churn_;
    }
  }
}

SimReport Simulation::run() {
  setup();
  while (!events_.empty()) {
    const Event e = events_.top();
    if (e.time > cfg_.duration) break;
    events_.pop();
    switch (e.kind) {
      case EventKind::MobilityTick: on_mobility(e.time); break;
      case EventKind::BeaconTick: on_beacon(e.time); break;
      case EventKind::PacketGen: on_packet_gen(e.arg, e.time); break;
      case EventKind::SvGen: on_sv_gen(e.arg, e.time); break;
      case EventKind::TxEnd: on_tx_end(e.arg, e.time); break;
      case EventKind::TxStart:
      case EventKind::MeasureTick: break;  // window bounds are checked per event
    }
  }
  return finish();
}

SimReport Simulation::finish() {
  for (auto& [id, n] : nodes_) close_stall(n, cfg_.duration);
  SimReport r;
  r.route_outage = route_outage_;
  r.vehicles = vehicles_.size();
  r.sources = sources_.size();
  r.sent = packets_.size();
  r.delivered = delivered_;
  r.dropped = dropped_;
  for (const auto& [id, n] : nodes_) r.in_flight += n.queue.size();
  r.pdr_zero_denominator = r.sent == 0;
  r.pdr = r.sent ? static_cast<double>(r.delivered) / static_cast<double>(r.sent) : 1.0;
  r.e2ed_samples = e2ed_;
  if (!e2ed_.empty()) {
    double sum = 0.0;
    for (double d : e2ed_) sum += d;
    r.mean_e2ed = sum / static_cast<double>(e2ed_.size());
  }
  const double window = cfg_.duration - cfg_.warmup;
  r.delivered_bits = delivered_bits_;
  r.throughput_pps = static_cast<double>(window_deliveries_) / window;
  r.throughput_bps = r.throughput_pps * cfg_.packet_bits;
  r.churn = churn_;
  r.holds_no_route = holds_no_route_;
  r.failed_attempts = failed_attempts_;
  r.initial_chain_length = initial_chain_;
  r.bootstrapped = bootstrapped_ || direct_;

  auto stats_of = [&](const StationAccum& a, std::size_t j) {
    StationStats s;
    s.index = j;
    s.arrival_rate = static_cast<double>(a.arrivals) / window;
    s.internal_rate = static_cast<double>(a.internal) / window;
    for (const auto& [sender, count] : a.external) s.external_rates.push_back(static_cast<double>(count) / window);
    const double n = static_cast<double>(a.served);
    const double mean = a.service_sum / n;
    s.service_rate = 1.0 / mean;
    s.service_scv = a.served > 1 ? std::max(0.0, (a.service_sq / n - mean * mean) / (mean * mean)) : cfg_.service_scv;
    s.forward_fraction = static_cast<double>(a.forwarded) / n;
    s.served = a.served;
    s.mean_wait = a.wait_sum / n;
    s.rho = s.arrival_rate / s.service_rate;
    return s;
  };
  for (std::size_t j = 0; j < stations_.size() && stations_[j].served > 0; ++j)
    r.stations.push_back(stats_of(stations_[j], j));
  for (const auto& [id, a] : edges_)
    if (a.served > 0) r.edge_stations.push_back(stats_of(a, static_cast<std::size_t>(id)));

  if (!r.stations.empty()) {
    const auto model = chain_model_from(r, cfg_);
    try {
      const auto sol = qna::solve_chain(model);
      r.qna_e2ed = qna::expected_path_delay(model, sol, 0);
      r.qna_throughput = qna::chain_throughput(model, sol) + edge_throughput(r);
    } catch (const OverloadError& e) {
      r.qna_overloaded_station = e.station();
      r.qna_throughput = qna::chain_throughput(model) + edge_throughput(r);
    } catch (const InconsistencyError&) {
    } catch (const DomainError&) {
    }
  }
  return r;
}

}  // namespace

SimReport run(const RunConfig& config, std::ostream* protocol_log) { return Simulation(config, protocol_log).run(); }

bool backbone_connected(const SimReport& report, const RunConfig& config, double max_outage_fraction) {
  return report.bootstrapped && report.route_outage <= max_outage_fraction * (config.duration - config.warmup);
}

qna::ChainModel chain_model_from(const SimReport& report, const RunConfig& config) {
  qna::ChainModel model;
  for (const auto& s : report.stations) {
    qna::Station st;
    for (double rate : s.external_rates) st.external.push_back({rate, config.arrival_scv});
    st.generation_rate = s.index > 0 ? config.generation_rate : 0.0;
    const double q = std::clamp(s.forward_fraction, 0.0, 1.0);
    st.hops = {{s.service_rate, q}, {s.service_rate, 1.0 - q}};
    st.service_scv = s.service_scv;
    model.stations.push_back(std::move(st));
  }
  return model;
}

SchemeComparison compare_schemes(RunConfig config) {
  SchemeComparison out;
  config.scheme = Scheme::TwoTier;
  out.two_tier = run(config);
  config.scheme = Scheme::Baseline;
  out.baseline = run(config);
  return out;
}

std::vector<PdrCurve> measure_pdr(const PdrConfig& config, std::span<const int> class_mixes) {
  static constexpr int kAll[] = {1, 2, 3};
  if (class_mixes.empty()) class_mixes = kAll;
  ProtocolParams protocol = config.protocol;
  protocol.max_chain_length = config.chain_length;
  const double range = protocol.transmission_range;
  const double road_width = config.traffic.lanes * config.traffic.lane_width;

  std::vector<PdrCurve> curves;
  for (int cls : class_mixes) {
    TrafficConfig traffic = config.traffic;
    traffic.class_mix = pdr_class_mix(cls);
    PdrCurve curve;
    curve.vehicle_class = cls;
    for (const auto& e : config.rates) curve.rate_mbps.push_back(e.rate_mbps);
    std::vector<std::size_t> ok(config.rates.size(), 0);
    std::size_t draws = 0;

    for (std::size_t r = 0; r < config.replications; ++r) {
      Rng traffic_rng = make_stream(config.seed, 3 * r);
      const auto vehicles = spawn_synthetic(traffic, traffic_rng);
      std::vector<int> sources;
      for (const auto& v : vehicles)
        if (v.direction == Direction::Forward && v.x() >= 0.1 * traffic.road_length &&
            v.x() <= 0.3 * traffic.road_length)
          sources.push_back(v.id);
      if (sources.empty()) continue;
      Rng pick_rng = make_stream(config.seed, 3 * r + 1);
      const int source = sources[std::uniform_int_distribution<std::size_t>(0, sources.size() - 1)(pick_rng)];
      std::vector<int> chain;
      try {
        chain = bootstrap_backbone(vehicles, source, std::nullopt, config.weights, protocol).state.chain;
      } catch (const BootstrapFailed&) {
        continue;
      }
      Rng channel_rng = make_stream(config.seed, 3 * r + 2);
      std::unordered_map<int, const VehicleState*> idx;
      for (const auto& v : vehicles) idx[v.id] = &v;
      const VehicleState* tx = idx.at(source);
      for (int id : chain) {
        const VehicleState* rx = idx.at(id);
        const auto cls_link = classify_link(*tx, *rx, vehicles, config.corridor_half_width);
        const double mean = mean_received_power_dbm(link_geometry(*tx, *rx), config.radio,
                                                    cls_link.type == LinkType::OLOS ? &cls_link.profile : nullptr);
        std::size_t in_range = 0;
        for (const auto& v : vehicles)
          if (v.id != tx->id && (v.position - tx->position).norm() <= range) ++in_range;
        const double sigma = small_scale_sigma(link_fading(config.fading, in_range, range, road_width));
        std::normal_distribution<double> shadow(0.0, sigma);
        for (std::size_t k = 0; k < config.epochs_per_link; ++k) {
          const double p = mean + (sigma > 0.0 ? shadow(channel_rng) : 0.0);
          for (std::size_t i = 0; i < config.rates.size(); ++i)
            if (p >= config.rates[i].threshold_dbm) ++ok[i];
          ++draws;
        }
        ++curve.links;
        tx = rx;
      }
    }
    for (std::size_t i = 0; i < ok.size(); ++i)
      curve.pdr.push_back(draws ? static_cast<double>(ok[i]) / static_cast<double>(draws) : 1.0);
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace svnet
