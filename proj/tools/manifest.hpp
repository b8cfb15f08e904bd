#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace coexist::cli {

/// Sidecar describing how an output file was produced. Replaying `argv`
/// with the recorded seeds and embedded config file reproduces the run.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> argv;      // arguments after the program name
  nlohmann::json config;              // fully resolved parameters
  nlohmann::json config_file;         // contents of --config, or null
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;
  std::string figure;                 // preset name for figure sweeps
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// PATH.manifest.json
std::string manifest_path_for(const std::string& output);

void write_manifest(const std::string& path, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

}  // namespace coexist::cli
