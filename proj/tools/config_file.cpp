#include "config_file.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

namespace coexist::cli {

namespace {

const std::map<std::string, std::vector<std::string>>& allowed_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"system", {"nA", "nC", "qA", "qC", "rhoA", "rhoC", "S", "lC"}},
      {"sim",
       {"mode", "T", "seed", "trace", "audit", "nW", "CW", "lW", "qL", "inclusive_window",
        "fail_overhead"}},
      {"optimize", {"gamma", "lc_set", "rho_a_step", "closed_form", "jobs"}},
      {"casestudy", {"nW", "gamma", "S", "lW_max", "robust", "lw_range", "nw_range", "T", "seed"}},
  };
  return keys;
}

}  // namespace

ConfigFile::ConfigFile(nlohmann::json doc, std::string origin)
    : doc_(std::move(doc)), origin_(std::move(origin)) {
  if (!doc_.is_object()) throw ConfigError(origin_ + ": top level must be a JSON object");
  for (const auto& [section, body] : doc_.items()) {
    const auto known = allowed_keys().find(section);
    if (known == allowed_keys().end())
      throw ConfigError(origin_ + ": unknown top-level key '" + section + "'");
    if (!body.is_object()) throw ConfigError(origin_ + ": '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      const auto& names = known->second;
      if (std::find(names.begin(), names.end(), key) == names.end())
        throw ConfigError(origin_ + ": unknown key '" + section + "." + key + "'");
    }
  }
}

void ConfigFile::type_error(const char* section, const char* key, const char* want) const {
  std::ostringstream os;
  os << origin_ << ": " << section << '.' << key << " must be a " << want;
  throw ConfigError(os.str());
}

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ConfigFile(std::move(doc), path);
}

}  // namespace coexist::cli
