// SPDX-License-Identifier: Apache-2.0
//
// INI experiment configuration. Keys are addressed as `section.key`
// ([traffic], [radio], [mac], [protocol], [qna], [sim]); the registry is
// the single list of accepted keys, shared by file loading and sweeps.
#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "svnet/sim.hpp"

namespace svnet {

/// All accepted keys, sorted.
std::vector<std::string> config_keys();

bool is_config_key(const std::string& key);

/// Parses `value` into the field named by `key`. Throws ConfigError for an
/// unknown key or an unparsable value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Current value of `key`, formatted so that set_config_value reads it back.
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Reads an INI document over the defaults. Unknown sections or keys are
/// errors; the result is validated.
RunConfig load_config(std::istream& in);
RunConfig load_config_file(const std::string& path);

/// `key=v1,v2,...` -> (key, values). The key must exist.
std::pair<std::string, std::vector<std::string>> parse_sweep(const std::string& spec);

}  // namespace svnet
