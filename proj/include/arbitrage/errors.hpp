#pragma once

#include <stdexcept>
#include <string>

namespace arbitrage {

// Exit-code contract: 0 success, 2 configuration/input error,
// 3 data-failure threshold breached, 4 numeric failure.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitDataFailure = 3,
  kExitNumeric = 4,
};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad config files, malformed inputs, unknown languages, mismatched pools.
struct ConfigError : Error {
  using Error::Error;
};

// A prompt could not be routed (language missing from table, no eligible teacher).
struct RoutingError : Error {
  using Error::Error;
};

// Reward scoring failed (malformed marker, non-numeric remote response).
struct ScoringError : Error {
  using Error::Error;
};

// Too many per-prompt failures while assembling a dataset.
struct DataFailureError : Error {
  using Error::Error;
};

// Non-finite values where finite ones are required (e.g. training loss).
struct NumericError : Error {
  using Error::Error;
};

// Text could not be tokenized (empty or punctuation-only input).
struct MetricsError : Error {
  using Error::Error;
};

}  // namespace arbitrage
