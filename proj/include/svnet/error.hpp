// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace svnet {

/// Argument outside the mathematical domain of a model (non-positive
/// distance, empty obstacle profile, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Bad or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Trace ingestion failure that cannot be recovered by skipping a row.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Queueing station with utilization >= 1; analysis is invalid.
class OverloadError : public std::runtime_error {
 public:
  OverloadError(std::size_t station, double rho)
      : std::runtime_error("station " + std::to_string(station) + " overloaded (rho=" +
                           std::to_string(rho) + ")"),
        station_(station),
        rho_(rho) {}

  std::size_t station() const noexcept { return station_; }
  double rho() const noexcept { return rho_; }

 private:
  std::size_t station_;
  double rho_;
};

/// Jointly infeasible QNA inputs (e.g. a split SCV that no thinned
/// renewal stream can have).
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Link distance beyond the maximum transmission distance.
class NoLinkError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No SV candidate at the first bootstrap hop; the requester retries
/// on its next beacon period.
class BootstrapFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svnet
