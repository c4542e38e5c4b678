// SPDX-License-Identifier: Apache-2.0
#include "svnet/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "svnet/error.hpp"
#include "svnet/units.hpp"

namespace svnet {

namespace {

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Accepts plain numbers and ratios such as 1/60.
double parse_number(const std::string& key, const std::string& raw) {
  const std::string s = trimmed(raw);
  auto one = [&](std::string_view part) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw ConfigError(fmt::format("{}: '{}' is not a number", key, raw));
    return v;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  const double den = one(trimmed(s.substr(slash + 1)));
  if (den == 0.0) throw ConfigError(fmt::format("{}: zero denominator in '{}'", key, raw));
  return one(trimmed(s.substr(0, slash))) / den;
}

long parse_integer(const std::string& key, const std::string& raw) {
  const std::string s = trimmed(raw);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError(fmt::format("{}: '{}' is not an integer", key, raw));
  return v;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  std::string s = trimmed(raw);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, raw));
}

std::string show(double v) { return fmt::format("{}", v); }

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Registry = std::map<std::string, Field>;

template <class Proj>
Field number(Proj proj) {
  return {[proj](RunConfig& c, const std::string& k, const std::string& v) { proj(c) = parse_number(k, v); },
          [proj](const RunConfig& c) { return show(proj(c)); }};
}

// value stored in seconds, written in microseconds
template <class Proj>
Field micros(Proj proj) {
  return {[proj](RunConfig& c, const std::string& k, const std::string& v) { proj(c) = parse_number(k, v) * 1e-6; },
          [proj](const RunConfig& c) { return show(proj(c) * 1e6); }};
}

template <class T, class Proj>
Field integer(Proj proj) {
  return {[proj](RunConfig& c, const std::string& k, const std::string& v) {
            const long n = parse_integer(k, v);
            if constexpr (std::is_unsigned_v<T>) {
              if (n < 0) throw ConfigError(fmt::format("{}: must be >= 0", k));
            }
            proj(c) = static_cast<T>(n);
          },
          [proj](const RunConfig& c) { return fmt::format("{}", proj(c)); }};
}

template <class Proj>
Field text(Proj proj) {
  return {[proj](RunConfig& c, const std::string&, const std::string& v) { proj(c) = trimmed(v); },
          [proj](const RunConfig& c) { return std::string(proj(c)); }};
}

template <class Proj>
Field boolean(Proj proj) {
  return {[proj](RunConfig& c, const std::string& k, const std::string& v) { proj(c) = parse_bool(k, v); },
          [proj](const RunConfig& c) { return std::string(proj(c) ? "true" : "false"); }};
}

const Registry& registry() {
  static const Registry r = [] {
    Registry m;
    // [traffic]
    m["traffic.density"] = number([](auto& c) -> auto& { return c.traffic.density; });
    m["traffic.road_length"] = number([](auto& c) -> auto& { return c.traffic.road_length; });
    m["traffic.lanes"] = integer<int>([](auto& c) -> auto& { return c.traffic.lanes; });
    m["traffic.lane_width"] = number([](auto& c) -> auto& { return c.traffic.lane_width; });
    m["traffic.antenna_offset"] = number([](auto& c) -> auto& { return c.traffic.antenna_offset; });
    m["traffic.bidirectional"] = boolean([](auto& c) -> auto& { return c.traffic.bidirectional; });
    m["traffic.max_vehicles"] =
        integer<std::size_t>([](auto& c) -> auto& { return c.traffic.max_vehicles; });
    m["traffic.mix_compact"] = number([](auto& c) -> auto& { return c.traffic.class_mix[0]; });
    m["traffic.mix_midsize"] = number([](auto& c) -> auto& { return c.traffic.class_mix[1]; });
    m["traffic.mix_large"] = number([](auto& c) -> auto& { return c.traffic.class_mix[2]; });
    m["traffic.trace_id"] = text([](auto& c) -> auto& { return c.trace.columns.id; });
    m["traffic.trace_frame"] = text([](auto& c) -> auto& { return c.trace.columns.frame; });
    m["traffic.trace_x"] = text([](auto& c) -> auto& { return c.trace.columns.x; });
    m["traffic.trace_y"] = text([](auto& c) -> auto& { return c.trace.columns.y; });
    m["traffic.trace_velocity"] = text([](auto& c) -> auto& { return c.trace.columns.velocity; });
    m["traffic.trace_class"] = text([](auto& c) -> auto& { return c.trace.columns.vehicle_class; });
    m["traffic.trace_delimiter"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          const std::string d = v == "\\t" || v == "tab" ? "\t" : v;
          if (d.size() != 1) throw ConfigError(fmt::format("{}: delimiter must be one character", k));
          c.trace.columns.delimiter = d[0];
        },
        [](const RunConfig& c) {
          return c.trace.columns.delimiter == '\t' ? std::string("tab") : std::string(1, c.trace.columns.delimiter);
        }};
    m["traffic.trace_frame_period"] = number([](auto& c) -> auto& { return c.trace.columns.frame_period; });
    m["traffic.trace_length_scale"] = number([](auto& c) -> auto& { return c.trace.columns.length_scale; });
    // code:class pairs, e.g. 1:compact,2:compact,3:large
    m["traffic.trace_class_codes"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          std::map<int, VehicleClass> codes;
          std::stringstream ss(v);
          for (std::string item; std::getline(ss, item, ',');) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError(fmt::format("{}: '{}' is not code:class", k, item));
            const std::string name = trimmed(item.substr(colon + 1));
            VehicleClass cls;
            if (name == "compact") cls = VehicleClass::Compact;
            else if (name == "midsize") cls = VehicleClass::MidSize;
            else if (name == "large") cls = VehicleClass::Large;
            else throw ConfigError(fmt::format("{}: unknown class '{}'", k, name));
            codes[static_cast<int>(parse_integer(k, item.substr(0, colon)))] = cls;
          }
          if (codes.empty()) throw ConfigError(fmt::format("{}: no class codes", k));
          c.trace.columns.class_codes = codes;
        },
        [](const RunConfig& c) {
          std::string out;
          for (const auto& [code, cls] : c.trace.columns.class_codes)
            out += fmt::format("{}{}:{}", out.empty() ? "" : ",", code, to_string(cls));
          return out;
        }};
    m["traffic.trace_std_threshold_kmh"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.trace.std_threshold = units::kmh_to_mps(parse_number(k, v));
        },
        [](const RunConfig& c) { return show(units::mps_to_kmh(c.trace.std_threshold)); }};
    m["traffic.trace_window_s"] = number([](auto& c) -> auto& { return c.trace.window; });
    m["traffic.trace_segment_m"] = number([](auto& c) -> auto& { return c.trace.segment_length; });
    // [radio]
    m["radio.tx_power_dbm"] = number([](auto& c) -> auto& { return c.radio.tx_power_dbm; });
    m["radio.tx_gain"] = number([](auto& c) -> auto& { return c.radio.tx_gain; });
    m["radio.rx_gain"] = number([](auto& c) -> auto& { return c.radio.rx_gain; });
    m["radio.reference_distance"] = number([](auto& c) -> auto& { return c.radio.reference_distance; });
    m["radio.min_olos_distance"] = number([](auto& c) -> auto& { return c.radio.min_olos_distance; });
    m["radio.sigma_min_db"] = number([](auto& c) -> auto& { return c.fading.sigma_min; });
    m["radio.sigma_max_db"] = number([](auto& c) -> auto& { return c.fading.sigma_max; });
    m["radio.nv_max"] = number([](auto& c) -> auto& { return c.fading.nv_max; });
    m["radio.corridor_half_width"] = number([](auto& c) -> auto& { return c.corridor_half_width; });
    // [mac]
    m["mac.cw"] = integer<int>([](auto& c) -> auto& { return c.mac.cw; });
    m["mac.slot_us"] = micros([](auto& c) -> auto& { return c.mac.slot_time; });
    m["mac.sifs_us"] = micros([](auto& c) -> auto& { return c.mac.sifs; });
    m["mac.difs_us"] = micros([](auto& c) -> auto& { return c.mac.difs; });
    m["mac.rts_us"] = micros([](auto& c) -> auto& { return c.mac.rts; });
    m["mac.cts_us"] = micros([](auto& c) -> auto& { return c.mac.cts; });
    m["mac.ack_us"] = micros([](auto& c) -> auto& { return c.mac.ack; });
    m["mac.error_probability"] = number([](auto& c) -> auto& { return c.mac.error_probability; });
    // [protocol]
    m["protocol.transmission_range"] =
        number([](auto& c) -> auto& { return c.protocol.transmission_range; });
    m["protocol.hysteresis"] = number([](auto& c) -> auto& { return c.protocol.hysteresis; });
    m["protocol.expiry_periods"] = integer<int>([](auto& c) -> auto& { return c.protocol.expiry_periods; });
    m["protocol.horizon"] = number([](auto& c) -> auto& { return c.protocol.horizon; });
    m["protocol.standstill_speed"] = number([](auto& c) -> auto& { return c.protocol.standstill_speed; });
    m["protocol.max_chain_length"] =
        integer<std::size_t>([](auto& c) -> auto& { return c.protocol.max_chain_length; });
    // beta_w follows as 1 - alpha_w
    m["protocol.alpha_w"] = {
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.weights = StabilityWeights::from_alpha(parse_number(k, v));
        },
        [](const RunConfig& c) { return show(c.weights.alpha_w); }};
    m["protocol.scheme"] = {[](RunConfig& c, const std::string&, const std::string& v) {
                              c.scheme = parse_scheme(trimmed(v));
                            },
                            [](const RunConfig& c) { return std::string(to_string(c.scheme)); }};
    // [qna]
    m["qna.arrival_scv"] = number([](auto& c) -> auto& { return c.arrival_scv; });
    m["qna.service_scv"] = number([](auto& c) -> auto& { return c.service_scv; });
    // [sim]
    m["sim.duration"] = number([](auto& c) -> auto& { return c.duration; });
    m["sim.warmup"] = number([](auto& c) -> auto& { return c.warmup; });
    m["sim.mobility_step"] = number([](auto& c) -> auto& { return c.mobility_step; });
    m["sim.retry_limit"] = integer<int>([](auto& c) -> auto& { return c.retry_limit; });
    m["sim.beacon_speed_smoothing"] = number([](auto& c) -> auto& { return c.beacon_speed_smoothing; });
    m["sim.pgr"] = number([](auto& c) -> auto& { return c.pgr; });
    m["sim.generation_rate"] = number([](auto& c) -> auto& { return c.generation_rate; });
    m["sim.packet_bits"] = number([](auto& c) -> auto& { return c.packet_bits; });
    m["sim.source_zone_lo"] = number([](auto& c) -> auto& { return c.source_zone_lo; });
    m["sim.source_zone_hi"] = number([](auto& c) -> auto& { return c.source_zone_hi; });
    m["sim.destination_offset"] = number([](auto& c) -> auto& { return c.destination_offset; });
    m["sim.extra_source_fraction"] = number([](auto& c) -> auto& { return c.extra_source_fraction; });
    m["sim.seed"] = integer<std::uint64_t>([](auto& c) -> auto& { return c.seed; });
    return m;
  }();
  return r;
}

const Field& field(const std::string& key) {
  const auto& r = registry();
  auto it = r.find(key);
  if (it == r.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
  return it->second;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, f] : registry()) keys.push_back(k);
  return keys;
}

bool is_config_key(const std::string& key) { return registry().count(key) > 0; }

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, key, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return field(key).get(config); }

RunConfig load_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(fmt::format("key '{}' outside any section", section));
    for (const auto& [key, value] : body) set_config_value(config, section + "." + key, value.data());
  }
  config.validate();
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  return load_config(in);
}

std::pair<std::string, std::vector<std::string>> parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("sweep '{}' must look like key=v1,v2,...", spec));
  std::string key = trimmed(spec.substr(0, eq));
  if (!is_config_key(key)) throw ConfigError(fmt::format("sweep axis '{}' is not a config key", key));
  std::vector<std::string> values;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    item = trimmed(item);
    if (item.empty()) throw ConfigError(fmt::format("sweep '{}' has an empty value", spec));
    values.push_back(item);
  }
  if (values.empty()) throw ConfigError(fmt::format("sweep '{}' has no values", spec));
  // parse once now so a bad value fails before any run starts
  RunConfig probe;
  for (const auto& v : values) set_config_value(probe, key, v);
  return {key, values};
}

}  // namespace svnet
