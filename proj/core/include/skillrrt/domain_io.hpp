#pragma once

#include <string>
#include <vector>

#include "skillrrt/config.hpp"
#include "skillrrt/connector.hpp"
#include "skillrrt/domain.hpp"
#include "skillrrt/simulator.hpp"

namespace skillrrt {

/// A domain with the reward and noise tables declared next to it.
struct DomainBundle {
  Domain domain;
  RewardSet rewards;
  NoiseConfig noise;
};

/// Builds and validates a domain from a parsed configuration. Unknown keys,
/// wrong types and broken references raise ConfigError naming the key path.
DomainBundle LoadDomain(const config::Value& root);
DomainBundle LoadDomainText(const std::string& text);

/// Names of the domains compiled into the library.
std::vector<std::string> BuiltinDomainNames();
/// Source text of a built-in domain; throws ConfigError for unknown names.
const std::string& BuiltinDomainText(const std::string& name);

/// Resolves "builtin:<name>" or reads a file; returns the config text.
/// Throws IoError when a file cannot be read.
std::string ReadDomainSource(const std::string& spec);

NoiseConfig LoadNoise(const config::Value& table, const NoiseConfig& defaults);

}  // namespace skillrrt
