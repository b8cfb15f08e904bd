#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "coexist/analytic.hpp"
#include "coexist/casestudy.hpp"
#include "coexist/chain.hpp"
#include "coexist/config.hpp"
#include "coexist/optimizer.hpp"
#include "coexist/simulator.hpp"

// JSON encodings shared by the command-line tool and the schema files in
// schemas/. Bump kSchemaVersion whenever a field is renamed or removed.

namespace coexist {

inline constexpr const char* kSchemaVersion = "1";

void to_json(nlohmann::json& j, const SystemConfig& c);

namespace model {
/// States, transition matrix, holding times and both distributions.
void to_json(nlohmann::json& j, const EmbeddedChain& chain);
}

namespace analytic {
void to_json(nlohmann::json& j, const ThroughputReport& r);
}

namespace optimizer {
void to_json(nlohmann::json& j, const LengthOptimum& l);
void to_json(nlohmann::json& j, const OptimizationResult& r);
}

namespace sim {
void to_json(nlohmann::json& j, const WifiLteConfig& w);
void to_json(nlohmann::json& j, const SimConfig& c);
void to_json(nlohmann::json& j, const SimResult& r);

inline constexpr const char* kSimCsvHeader =
    "mode,seed,duration,success_A,success_C,collisions_A,collisions_C,busy_minislots,"
    "idle_minislots,lambda_A,lambda_C,lambda_total,idle_fraction";

void write_csv_row(std::ostream& os, const SimResult& r);
}

namespace casestudy {
void to_json(nlohmann::json& j, const DeploymentConfig& d);
void to_json(nlohmann::json& j, const SweepRow& r);
}

}  // namespace coexist
