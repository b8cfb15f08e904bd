#include "manifest.hpp"

#include <fstream>

#include "coexist/errors.hpp"
#include "coexist/serialize.hpp"

namespace coexist::cli {

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j = {{"schema_version", kSchemaVersion},
                      {"artifact_version", COEXIST_VERSION},
                      {"subcommand", subcommand},
                      {"argv", argv},
                      {"config", config},
                      {"config_file", config_file},
                      {"seeds", seeds},
                      {"outputs", outputs},
                      {"wall_clock_seconds", wall_clock_seconds}};
  if (!figure.empty()) j["figure"] = figure;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.subcommand = j.at("subcommand").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.config = j.value("config", nlohmann::json::object());
    m.config_file = j.value("config_file", nlohmann::json());
    m.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.figure = j.value("figure", std::string{});
    m.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << m.to_json().dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path);
  try {
    return RunManifest::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace coexist::cli
