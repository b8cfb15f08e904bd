#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "coexist/serialize.hpp"

using namespace coexist;
using nlohmann::json;

TEST_CASE("system config keys") {
  SystemConfig c;
  c.aloha_nodes = 2;
  c.csma_nodes = 3;
  c.aloha_tx_prob = 0.1;
  c.csma_tx_prob = 0.2;
  c.slot_len = 4;
  c.csma_len = 5;
  const json j = c;
  CHECK(j == json{{"nA", 2}, {"nC", 3}, {"qA", 0.1}, {"qC", 0.2}, {"S", 4}, {"lC", 5}});
}

TEST_CASE("chain dump") {
  const auto chain = model::enumerate_chain(rates_from_idle(1, 1, 0.5, 0.5, 2), 2, 2);
  const json j = chain;
  REQUIRE(j.at("states").size() == chain.states.size());
  CHECK(j.at("states")[0] == chain.states[0].to_string());
  CHECK(j.at("tau").size() == chain.tau.size());
  double pi_sum = 0.0;
  for (const auto& v : j.at("pi_tilde")) pi_sum += v.get<double>();
  CHECK(pi_sum == doctest::Approx(1.0));
  for (const auto& row : j.at("P")) {
    double s = 0.0;
    for (const auto& e : row) s += e[1].get<double>();
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("throughput report") {
  analytic::ThroughputReport r;
  r.lambda_A = 0.25;
  r.lambda_C = 0.5;
  r.lambda_total = 0.75;
  r.alpha_C = 0.1;
  r.route = analytic::kRouteGeneral;
  const json j = r;
  CHECK(j.at("provenance") == "closed-form");
  CHECK(j.at("route") == analytic::kRouteGeneral);
  CHECK(j.at("lambda_total") == 0.75);
}

TEST_CASE("optimization result omits optimum fields when infeasible") {
  optimizer::OptimizationResult r;
  r.status = optimizer::OptimizationStatus::Infeasible;
  json j = r;
  CHECK(j.at("status") == "infeasible");
  CHECK_FALSE(j.contains("rho_A_opt"));

  r.status = optimizer::OptimizationStatus::Optimal;
  r.achieved_ratio = std::numeric_limits<double>::infinity();
  j = r;
  CHECK(j.contains("lC_opt"));
  CHECK(j.at("achieved_ratio").is_null());
}

TEST_CASE("simulation result and CSV row") {
  sim::SimResult r;
  r.seed = 9;
  r.duration = 100;
  r.success_A = 3;
  r.lambda_A = 0.12;
  const json j = r;
  CHECK(j.at("mode") == "generic");
  CHECK(j.at("T") == 100);
  CHECK_FALSE(j.contains("trace"));

  std::ostringstream os;
  sim::write_csv_row(os, r);
  const std::string row = os.str();
  CHECK(row.rfind("generic,9,100,3,", 0) == 0);
  std::size_t commas = 0;
  for (char c : row) commas += c == ',';
  std::size_t header_commas = 0;
  for (const char* p = sim::kSimCsvHeader; *p; ++p) header_commas += *p == ',';
  CHECK(commas == header_commas);
}

TEST_CASE("sweep rows") {
  casestudy::SweepRow r;
  r.parameter = 3;
  r.method = "failed";
  r.error = "boom";
  json j = r;
  CHECK(j.at("error") == "boom");
  CHECK_FALSE(j.contains("lambda_A"));
  r.method = "analytic";
  r.ratio = std::numeric_limits<double>::infinity();
  j = r;
  CHECK(j.at("ratio").is_null());
}
