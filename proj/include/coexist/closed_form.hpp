#pragma once

// Explicit formulas for l_C an integer multiple of S, and their l_C = S
// reductions. Arguments are idle probabilities; l_C a enters as csma_len / slot_len.

namespace coexist::analytic::closed_form {

/// n rho^((n-1)/n) (1 - rho^(1/n)); zero when n == 0.
double attempt_term(int nodes, double rho);

/// 1 - (rho_A + rho_C - rho_A rho_C)^S, evaluated without cancellation.
double one_minus_phi(double rho_A, double rho_C, int slot_len);

double idle_state_prob(double rho_A, double rho_C, int slot_len, int csma_len, int d);
double idle_fraction(double rho_A, double rho_C, int slot_len, int csma_len);
double idle_fraction_equal(double rho_A, double rho_C, int slot_len);
double aloha_throughput(int aloha_nodes, double rho_A, double rho_C, int slot_len, int csma_len);
double aloha_throughput_equal(int aloha_nodes, double rho_A, double rho_C, int slot_len);
double csma_throughput(int csma_nodes, double rho_A, double rho_C, int slot_len, int csma_len);
double csma_throughput_equal(int csma_nodes, double rho_A, double rho_C, int slot_len);

/// Shared denominator l_C a rho_A (1-rho_C)(1-Phi) + (1-rho_A)(1-rho_C).
double idle_denominator(double rho_A, double rho_C, int slot_len, int csma_len);

}  // namespace coexist::analytic::closed_form
