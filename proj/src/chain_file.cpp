// SPDX-License-Identifier: Apache-2.0
#include "svnet/chain_file.hpp"

#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "svnet/error.hpp"

namespace svnet {

namespace {

using nlohmann::json;

double non_negative(const json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(fmt::format("{}: missing '{}'", where, key));
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("{}: '{}' must be a number", where, key));
  const double d = v.get<double>();
  if (d < 0.0) throw ConfigError(fmt::format("{}: '{}' must be >= 0", where, key));
  return d;
}

}  // namespace

ChainFile read_chain_file(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("chain file: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("stations") || !doc["stations"].is_array() || doc["stations"].empty())
    throw ConfigError("chain file: need a non-empty 'stations' array");

  ChainFile out;
  std::size_t j = 0;
  for (const auto& js : doc["stations"]) {
    const std::string where = fmt::format("station {}", j++);
    if (!js.is_object()) throw ConfigError(where + ": must be an object");
    qna::Station st;
    for (const auto& src : js.value("external", json::array()))
      st.external.push_back({non_negative(src, "rate", where), non_negative(src, "scv", where, 1.0)});
    st.generation_rate = non_negative(js, "generation_rate", where, 0.0);
    if (!js.contains("hops") || !js["hops"].is_array() || js["hops"].empty())
      throw ConfigError(where + ": need a non-empty 'hops' array");
    for (const auto& h : js["hops"]) st.hops.push_back({non_negative(h, "rate", where), non_negative(h, "split", where)});
    st.next_hop_scv = non_negative(js, "next_hop_scv", where, 1.0);
    if (js.contains("service_scv")) st.service_scv = non_negative(js, "service_scv", where);
    if (js.contains("arrival_scv")) st.arrival_scv = non_negative(js, "arrival_scv", where);
    out.model.stations.push_back(std::move(st));
  }
  if (doc.contains("scv_grid")) {
    out.scv_grid.clear();
    for (const auto& v : doc["scv_grid"]) {
      if (!v.is_number() || v.get<double>() < 0.0) throw ConfigError("chain file: scv_grid entries must be >= 0");
      out.scv_grid.push_back(v.get<double>());
    }
  }
  return out;
}

ChainFile read_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open chain file '{}'", path));
  return read_chain_file(in);
}

}  // namespace svnet
