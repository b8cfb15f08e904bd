#include "coexist/closed_form.hpp"

#include <cmath>

#include "coexist/errors.hpp"

namespace coexist::analytic::closed_form {

namespace {

double multiple_of(int slot_len, int csma_len) {
  if (slot_len < 1 || csma_len < 1 || csma_len % slot_len != 0)
    throw ConfigError("closed forms require csma_len to be a nonzero multiple of slot_len");
  return static_cast<double>(csma_len / slot_len);
}

// 1 - rho_A Phi, grouped to avoid cancellation as Phi -> 1.
double one_minus_rho_phi(double rho_A, double rho_C, int S) {
  return (1.0 - rho_A) + rho_A * one_minus_phi(rho_A, rho_C, S);
}

}  // namespace

double attempt_term(int n, double rho) {
  if (n <= 0 || rho == 1.0) return 0.0;
  if (rho == 0.0) return n == 1 ? 1.0 : 0.0;
  const double lr = std::log(rho);
  return n * std::exp(lr * (n - 1) / n) * -std::expm1(lr / n);
}

double one_minus_phi(double rho_A, double rho_C, int S) {
  const double x = (1.0 - rho_A) * (1.0 - rho_C);
  return -std::expm1(S * std::log1p(-x));
}

double idle_denominator(double rho_A, double rho_C, int S, int l) {
  const double m = multiple_of(S, l);
  return m * rho_A * (1.0 - rho_C) * one_minus_phi(rho_A, rho_C, S) + (1.0 - rho_A) * (1.0 - rho_C);
}

double idle_state_prob(double rho_A, double rho_C, int S, int l, int d) {
  const double f = rho_A + rho_C - rho_A * rho_C;
  const double a = 1.0 / S;
  return std::pow(f, d) * a * rho_A * (1.0 - rho_A) * (1.0 - rho_C) /
         idle_denominator(rho_A, rho_C, S, l);
}

double idle_fraction(double rho_A, double rho_C, int S, int l) {
  const double a = 1.0 / S;
  return a * rho_A * one_minus_phi(rho_A, rho_C, S) / idle_denominator(rho_A, rho_C, S, l);
}

double idle_fraction_equal(double rho_A, double rho_C, int S) {
  const double a = 1.0 / S;
  return a * rho_A * one_minus_phi(rho_A, rho_C, S) /
         (one_minus_rho_phi(rho_A, rho_C, S) * (1.0 - rho_C));
}

double aloha_throughput(int n_A, double rho_A, double rho_C, int S, int l) {
  const double m = multiple_of(S, l);
  return attempt_term(n_A, rho_A) * (1.0 - rho_A) /
         (m * rho_A * one_minus_phi(rho_A, rho_C, S) + 1.0 - rho_A);
}

double aloha_throughput_equal(int n_A, double rho_A, double rho_C, int S) {
  return attempt_term(n_A, rho_A) * (1.0 - rho_A) / one_minus_rho_phi(rho_A, rho_C, S);
}

double csma_throughput(int n_C, double rho_A, double rho_C, int S, int l) {
  const double m = multiple_of(S, l);
  return m * attempt_term(n_C, rho_C) * std::pow(rho_A, m + 1.0) *
         one_minus_phi(rho_A, rho_C, S) / idle_denominator(rho_A, rho_C, S, l);
}

double csma_throughput_equal(int n_C, double rho_A, double rho_C, int S) {
  return attempt_term(n_C, rho_C) * rho_A * rho_A * one_minus_phi(rho_A, rho_C, S) /
         ((1.0 - rho_C) * one_minus_rho_phi(rho_A, rho_C, S));
}

}  // namespace coexist::analytic::closed_form
