// SPDX-License-Identifier: Apache-2.0
//
// JSON chain description for the analyzer front end:
//
//   {"stations": [{"external": [{"rate": 20, "scv": 0.2}],
//                  "generation_rate": 0,
//                  "hops": [{"rate": 300, "split": 1}],
//                  "next_hop_scv": 0.2,
//                  "service_scv": 0.2,     (optional)
//                  "arrival_scv": 0.2},    (optional)
//                 ...],
//    "scv_grid": [0.2, 0.4, 0.6, 0.8, 1.0]}  (optional)
#pragma once

#include <istream>
#include <string>
#include <vector>

#include "svnet/qna.hpp"

namespace svnet {

struct ChainFile {
  qna::ChainModel model;
  std::vector<double> scv_grid{0.2, 0.4, 0.6, 0.8, 1.0};
};

/// Throws ConfigError on malformed JSON, missing fields or negative
/// rates/SCVs.
ChainFile read_chain_file(std::istream& in);
ChainFile read_chain_file(const std::string& path);

}  // namespace svnet
