// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "approx.hpp"

#include <sstream>

#include "svnet/config.hpp"
#include "svnet/error.hpp"

using namespace svnet;

TEST_CASE("every key reads back what it writes") {
  const RunConfig defaults;
  RunConfig c;
  for (const auto& key : config_keys()) {
    CAPTURE(key);
    const auto v = get_config_value(defaults, key);
    set_config_value(c, key, v);
    CHECK(get_config_value(c, key) == v);
  }
}

TEST_CASE("keys are sorted and cover every section") {
  const auto keys = config_keys();
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  for (const char* k : {"traffic.density", "radio.tx_power_dbm", "mac.cw", "protocol.alpha_w", "qna.arrival_scv",
                        "sim.pgr", "sim.seed"})
    CHECK(is_config_key(k));
  CHECK_FALSE(is_config_key("sim.bogus"));
}

TEST_CASE("values parse with units and ratios") {
  RunConfig c;
  set_config_value(c, "traffic.density", "1/60");
  CHECK(c.traffic.density == approx(1.0 / 60.0));
  set_config_value(c, "mac.slot_us", "13");
  CHECK(c.mac.slot_time == approx(13e-6));
  set_config_value(c, "protocol.alpha_w", "0.6");
  CHECK(c.weights.beta_w == approx(0.4));
  set_config_value(c, "protocol.scheme", "baseline");
  CHECK(c.scheme == Scheme::Baseline);
  set_config_value(c, "traffic.bidirectional", "yes");
  CHECK(c.traffic.bidirectional);
  CHECK_THROWS_AS(set_config_value(c, "traffic.density", "fast"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "traffic.density", "1/0"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "mac.cw", "3.5"), ConfigError);
  CHECK_THROWS_AS(set_config_value(c, "nope.key", "1"), ConfigError);
}

TEST_CASE("INI documents load over the defaults") {
  std::istringstream in("[traffic]\ndensity = 0.05\n[sim]\npgr = 25\nseed = 9\n");
  const auto c = load_config(in);
  CHECK(c.traffic.density == 0.05);
  CHECK(c.pgr == 25.0);
  CHECK(c.seed == 9);
  CHECK(c.duration == RunConfig{}.duration);
}

TEST_CASE("unknown keys and invalid values are rejected") {
  std::istringstream unknown("[sim]\nspeed_of_light = 3\n");
  CHECK_THROWS_AS(load_config(unknown), ConfigError);
  std::istringstream section("[warp]\ndensity = 3\n");
  CHECK_THROWS_AS(load_config(section), ConfigError);
  std::istringstream invalid("[sim]\nwarmup = 100\nduration = 90\n");
  CHECK_THROWS_AS(load_config(invalid), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("shipped configurations load") {
  const auto c = load_config_file(std::string(SVNET_CONFIG_DIR) + "/operating_point.ini");
  CHECK(c.traffic.density == approx(1.0 / 60.0));
  CHECK(c.pgr == 20.0);
  CHECK_NOTHROW(load_config_file(std::string(SVNET_CONFIG_DIR) + "/ngsim_us101.ini"));
}

TEST_CASE("sweep specifications") {
  const auto [key, values] = parse_sweep("sim.pgr=5,10,15");
  CHECK(key == "sim.pgr");
  CHECK(values == std::vector<std::string>{"5", "10", "15"});
  CHECK_THROWS_AS(parse_sweep("sim.bogus=1,2"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("sim.pgr"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("sim.pgr=5,abc"), ConfigError);
}
