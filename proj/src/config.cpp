#include "coexist/config.hpp"

#include <cmath>
#include <sstream>

#include "coexist/errors.hpp"

namespace coexist {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void SystemConfig::validate() const {
  std::ostringstream why;
  if (aloha_nodes < 0) why << "aloha_nodes must be >= 0; ";
  if (csma_nodes < 0) why << "csma_nodes must be >= 0; ";
  if (aloha_nodes + csma_nodes < 1) why << "at least one node is required; ";
  if (!is_probability(aloha_tx_prob)) why << "aloha_tx_prob must lie in [0,1]; ";
  if (!is_probability(csma_tx_prob)) why << "csma_tx_prob must lie in [0,1]; ";
  if (slot_len < 1) why << "slot_len must be >= 1; ";
  if (csma_len < 1) why << "csma_len must be >= 1; ";
  const std::string msg = why.str();
  if (!msg.empty()) throw ConfigError("invalid SystemConfig: " + msg.substr(0, msg.size() - 2));
}

SystemConfig SystemConfig::from_idle_probs(int aloha_nodes, int csma_nodes, double aloha_idle,
                                           double csma_idle, int slot_len, int csma_len) {
  auto invert = [](int n, double rho, const char* name) {
    if (!is_probability(rho)) throw ConfigError(std::string(name) + " must lie in [0,1]");
    if (n == 0) {
      if (rho != 1.0) throw ConfigError(std::string(name) + " must be 1 when there are no nodes");
      return 0.0;
    }
    return tx_prob_from_idle(n, rho);
  };
  SystemConfig cfg;
  cfg.aloha_nodes = aloha_nodes;
  cfg.csma_nodes = csma_nodes;
  cfg.slot_len = slot_len;
  cfg.csma_len = csma_len;
  cfg.aloha_tx_prob = invert(aloha_nodes, aloha_idle, "rho_A");
  cfg.csma_tx_prob = invert(csma_nodes, csma_idle, "rho_C");
  cfg.validate();
  return cfg;
}

std::string SystemConfig::describe() const {
  std::ostringstream os;
  os << "n_A=" << aloha_nodes << " n_C=" << csma_nodes << " q_A=" << aloha_tx_prob
     << " q_C=" << csma_tx_prob << " S=" << slot_len << " l_C=" << csma_len;
  return os.str();
}

double idle_prob(int nodes, double tx_prob) {
  if (nodes == 0 || tx_prob == 0.0) return 1.0;
  if (tx_prob == 1.0) return 0.0;
  return std::exp(nodes * std::log1p(-tx_prob));
}

double tx_prob_from_idle(int nodes, double rho) {
  if (nodes < 1) throw ConfigError("tx_prob_from_idle needs at least one node");
  if (rho == 0.0) return 1.0;
  if (rho == 1.0) return 0.0;
  return -std::expm1(std::log(rho) / nodes);
}

double conditional_success(int nodes, double q) {
  if (nodes <= 1 || q == 0.0) return 1.0;
  if (q == 1.0) return 0.0;
  const double l1q = std::log1p(-q);
  return nodes * q * std::exp((nodes - 1) * l1q) / -std::expm1(nodes * l1q);
}

double conditional_success_from_idle(int nodes, double rho) {
  if (nodes <= 1 || rho == 1.0) return 1.0;
  if (rho == 0.0) return 0.0;
  const double lr = std::log(rho);
  const double q = -std::expm1(lr / nodes);
  return nodes * q * std::exp(lr * (nodes - 1) / nodes) / (1.0 - rho);
}

DerivedRates rates_from_idle(int aloha_nodes, int csma_nodes, double rho_A, double rho_C,
                             int slot_len) {
  DerivedRates r;
  r.aloha_nodes = aloha_nodes;
  r.csma_nodes = csma_nodes;
  r.rho_A = rho_A;
  r.rho_C = rho_C;
  r.f = rho_A + rho_C - rho_A * rho_C;
  r.Phi = std::pow(r.f, slot_len);
  r.success_A = conditional_success_from_idle(aloha_nodes, rho_A);
  r.success_C = conditional_success_from_idle(csma_nodes, rho_C);
  return r;
}

DerivedRates derive_rates(const SystemConfig& cfg) {
  DerivedRates r;
  r.aloha_nodes = cfg.aloha_nodes;
  r.csma_nodes = cfg.csma_nodes;
  r.rho_A = idle_prob(cfg.aloha_nodes, cfg.aloha_tx_prob);
  r.rho_C = idle_prob(cfg.csma_nodes, cfg.csma_tx_prob);
  r.f = r.rho_A + r.rho_C - r.rho_A * r.rho_C;
  r.Phi = std::pow(r.f, cfg.slot_len);
  r.success_A = conditional_success(cfg.aloha_nodes, cfg.aloha_tx_prob);
  r.success_C = conditional_success(cfg.csma_nodes, cfg.csma_tx_prob);
  return r;
}

}  // namespace coexist
