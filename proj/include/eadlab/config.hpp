#pragma once

// Strict-schema JSON configuration. Top-level keys:
//   "space" {"lo","hi"}, "rates" {"b","d","c","m"}, "kernel" {"A","weights"},
//   "x0", "scaling" {"K","u","sigma","alpha"}, "experiment" {...}, "seed".
// Unknown keys, wrong types and non-finite numbers raise ConfigError with a
// JSON pointer to the offending key.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "eadlab/harness.hpp"
#include "eadlab/model.hpp"

namespace eadlab {

struct Config {
  ModelSpec spec;
  std::uint64_t seed = 1;
  std::optional<ExperimentPlan> experiment;  ///< present iff "experiment" is given
};

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Reads a whole file; throws Error with the path on failure.
std::string read_file(const std::filesystem::path& path);

}  // namespace eadlab
