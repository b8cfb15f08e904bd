#pragma once

#include <string>

namespace coexist {

/// Full parameterization of one coexistence scenario.
///
/// Time is measured in mini-slots. An Aloha slot spans `slot_len` mini-slots
/// (S = 1/a) and a CSMA packet spans `csma_len` mini-slots (l_C).
struct SystemConfig {
  int aloha_nodes = 1;          // n_A
  int csma_nodes = 1;           // n_C
  double aloha_tx_prob = 0.0;   // q_A, per slot
  double csma_tx_prob = 0.0;    // q_C, per idle-sensed mini-slot
  int slot_len = 1;             // S
  int csma_len = 1;             // l_C

  /// Throws ConfigError when any field is out of range.
  void validate() const;

  bool is_integer_multiple() const noexcept { return csma_len % slot_len == 0; }

  /// Builds a config from idle probabilities, inverting q = 1 - rho^(1/n).
  static SystemConfig from_idle_probs(int aloha_nodes, int csma_nodes, double aloha_idle,
                                      double csma_idle, int slot_len, int csma_len);

  std::string describe() const;
};

/// Quantities the model consumes instead of raw transmission probabilities.
struct DerivedRates {
  int aloha_nodes = 1;
  int csma_nodes = 1;
  double rho_A = 1.0;   // no Aloha node transmits at a slot start
  double rho_C = 1.0;   // no CSMA node transmits after idle sensing
  double f = 1.0;       // rho_A + rho_C - rho_A rho_C
  double Phi = 1.0;     // f^S
  double success_A = 1.0;  // P(exactly one | at least one) for Aloha
  double success_C = 1.0;  // same for CSMA
};

DerivedRates derive_rates(const SystemConfig& cfg);

/// Rates expressed directly in idle probabilities. Node counts enter only
/// through the conditional-success factors.
DerivedRates rates_from_idle(int aloha_nodes, int csma_nodes, double rho_A, double rho_C,
                             int slot_len);

/// rho = (1-q)^n, with rho = 1 when n == 0.
double idle_prob(int nodes, double tx_prob);

/// q = 1 - rho^(1/n). Requires n >= 1.
double tx_prob_from_idle(int nodes, double rho);

/// n q (1-q)^(n-1) / (1 - (1-q)^n), continued by its limit 1 at q = 0.
double conditional_success(int nodes, double tx_prob);

/// The same factor written in rho: n rho^((n-1)/n) (1 - rho^(1/n)) / (1 - rho).
double conditional_success_from_idle(int nodes, double rho);

}  // namespace coexist
