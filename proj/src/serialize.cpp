#include "coexist/serialize.hpp"

#include <cmath>
#include <ostream>

namespace coexist {

namespace {

// JSON has no infinity; ratios with a silent denominator become null.
nlohmann::json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const SystemConfig& c) {
  j = {{"nA", c.aloha_nodes}, {"nC", c.csma_nodes}, {"qA", c.aloha_tx_prob},
       {"qC", c.csma_tx_prob}, {"S", c.slot_len},   {"lC", c.csma_len}};
}

namespace model {

void to_json(nlohmann::json& j, const EmbeddedChain& chain) {
  const auto n = static_cast<Eigen::Index>(chain.states.size());
  nlohmann::json states = nlohmann::json::array();
  nlohmann::json P = nlohmann::json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    states.push_back(chain.states[static_cast<std::size_t>(i)].to_string());
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < n; ++k)
      if (chain.P(i, k) != 0.0) row.push_back({k, chain.P(i, k)});
    P.push_back(row);
  }
  j = {{"S", chain.slot_len},
       {"lC", chain.csma_len},
       {"rho_A", chain.rates.rho_A},
       {"rho_C", chain.rates.rho_C},
       {"states", states},
       {"P", P},
       {"tau", chain.tau},
       {"pi", std::vector<double>(chain.pi.data(), chain.pi.data() + n)},
       {"pi_tilde", std::vector<double>(chain.pi_tilde.data(), chain.pi_tilde.data() + n)},
       {"transient_dropped", chain.transient_dropped}};
}

}  // namespace model

namespace analytic {

void to_json(nlohmann::json& j, const ThroughputReport& r) {
  j = {{"lambda_A", r.lambda_A},
       {"lambda_C", r.lambda_C},
       {"lambda_total", r.lambda_total},
       {"alpha_C", r.alpha_C},
       {"provenance", to_string(r.provenance)},
       {"route", r.route}};
}

}  // namespace analytic

namespace optimizer {

void to_json(nlohmann::json& j, const LengthOptimum& l) {
  j = {{"lC", l.csma_len}, {"feasible", l.feasible}, {"refined", l.refined}};
  if (l.feasible) {
    j["rho_A"] = l.rho_A;
    j["rho_C"] = l.rho_C;
    j["lambda_A"] = l.lambda_A;
    j["lambda_C"] = l.lambda_C;
    j["lambda_total"] = l.lambda_total;
  }
}

void to_json(nlohmann::json& j, const OptimizationResult& r) {
  j = {{"status", to_string(r.status)},
       {"method", to_string(r.method)},
       {"gamma", r.gamma},
       {"evaluations", r.evaluations},
       {"scan_fallbacks", r.scan_fallbacks},
       {"note", r.note}};
  if (r.status == OptimizationStatus::Optimal) {
    j["rho_A_opt"] = r.rho_A;
    j["rho_C_opt"] = r.rho_C;
    j["lC_opt"] = r.csma_len;
    j["lambda_max"] = r.lambda_max;
    j["lambda_A"] = r.lambda_A;
    j["lambda_C"] = r.lambda_C;
    j["achieved_ratio"] = finite_or_null(r.achieved_ratio);
  }
  if (!r.per_length.empty()) j["per_length"] = r.per_length;
}

}  // namespace optimizer

namespace sim {

void to_json(nlohmann::json& j, const WifiLteConfig& w) {
  j = {{"nW", w.wifi_nodes},  {"CW", w.backoff_window},
       {"inclusive_window", w.inclusive_window},
       {"lW", w.wifi_len},    {"qL", w.lte_tx_prob},
       {"S", w.slot_len},     {"fail_overhead", w.fail_overhead}};
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = {{"mode", to_string(c.mode)}, {"T", c.duration}, {"seed", c.seed}};
  if (c.mode == SimMode::Generic)
    j["system"] = c.system;
  else
    j["wifi"] = c.wifi;
}

void to_json(nlohmann::json& j, const SimResult& r) {
  j = {{"mode", to_string(r.mode)},
       {"seed", r.seed},
       {"T", r.duration},
       {"success_A", r.success_A},
       {"success_C", r.success_C},
       {"collisions_A", r.collisions_A},
       {"collisions_C", r.collisions_C},
       {"busy_minislots", r.busy_minislots},
       {"idle_minislots", r.idle_minislots},
       {"lambda_A", r.lambda_A},
       {"lambda_C", r.lambda_C},
       {"lambda_total", r.lambda_total},
       {"idle_fraction", r.idle_fraction}};
  if (!r.trace.empty()) j["trace"] = r.trace;
}

void write_csv_row(std::ostream& os, const SimResult& r) {
  const auto old = os.precision(10);
  os << to_string(r.mode) << ',' << r.seed << ',' << r.duration << ',' << r.success_A << ','
     << r.success_C << ',' << r.collisions_A << ',' << r.collisions_C << ',' << r.busy_minislots
     << ',' << r.idle_minislots << ',' << r.lambda_A << ',' << r.lambda_C << ','
     << r.lambda_total << ',' << r.idle_fraction << '\n';
  os.precision(old);
}

}  // namespace sim

namespace casestudy {

void to_json(nlohmann::json& j, const DeploymentConfig& d) {
  j = {{"nW", d.wifi_nodes},
       {"gamma", d.gamma},
       {"S", d.slot_len},
       {"CW_opt", d.backoff_window},
       {"qL_opt", d.lte_tx_prob},
       {"lW_opt", d.wifi_len},
       {"rho_A_opt", d.rho_A},
       {"rho_C_opt", d.rho_C},
       {"lambda_max", d.lambda_max},
       {"predicted", d.predicted}};
}

void to_json(nlohmann::json& j, const SweepRow& r) {
  j = {{"parameter", r.parameter}, {"method", r.method}, {"seed", r.seed}};
  if (r.method == "failed") {
    j["error"] = r.error;
    return;
  }
  j["lambda_A"] = r.lambda_A;
  j["lambda_C"] = r.lambda_C;
  j["lambda_total"] = r.lambda_total;
  j["ratio"] = finite_or_null(r.ratio);
}

}  // namespace casestudy

}  // namespace coexist
