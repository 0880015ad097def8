#pragma once

// JSON encoding of configurations and results.

#include <json.hpp>
#include <stdexcept>
#include <string>

#include "vbspool/approx.hpp"
#include "vbspool/exact.hpp"
#include "vbspool/model.hpp"
#include "vbspool/simulator.hpp"

namespace vbspool {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates a config document. Throws ConfigError on missing or
/// mistyped keys and on invariant violations.
PoolConfig parse_config(const nlohmann::json& doc);
PoolConfig parse_config_text(const std::string& text);
/// Throws IoError when the file cannot be read.
PoolConfig load_config(const std::string& path);

/// Canonical form: every class as arrival_rate + service_rate.
nlohmann::json to_json(const PoolConfig& config);
nlohmann::json to_json(const BlockingReport& report);
nlohmann::json to_json(const SimStats& stats);
nlohmann::json to_json(const GainReport& gain);

}  // namespace vbspool
