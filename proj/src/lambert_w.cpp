#include <cmath>
#include <limits>
#include <stdexcept>

#include "coexist/optimizer.hpp"

namespace coexist::optimizer {

namespace {

constexpr double kInvE = 0.36787944117144233;

double initial_guess(double x) {
  if (x < -0.32) {
    // Series about the branch point.
    const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  if (x < 3.0) return std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return l1 - l2 + l2 / l1;
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x)) return x;
  if (x < -kInvE) {
    if (x > -kInvE - 1e-15) return -1.0;
    throw std::domain_error("lambert_w0: argument below -1/e");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  double w = initial_guess(x);
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= dw;
    if (std::abs(dw) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

double lambert_w0_exp(double t) {
  if (std::isnan(t)) return t;
  if (t < 1.0) return lambert_w0(std::exp(t));
  // Solve w + ln w = t by Newton.
  double w = t - std::log(t);
  if (w <= 0.0) w = 0.5;
  for (int it = 0; it < 64; ++it) {
    const double f = w + std::log(w) - t;
    const double dw = f / (1.0 + 1.0 / w);
    w -= dw;
    if (std::abs(dw) <= 1e-15 * w) break;
  }
  return w;
}

}  // namespace coexist::optimizer
