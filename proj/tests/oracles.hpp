#pragma once

// Reference computations that share no code with the library: literal
// transcriptions of published matrices and expressions, brute-force counts,
// and plain iterative solvers. Values frozen in the tests come from here or
// from the offline scripts noted next to each constant.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline Eigen::VectorXd power_iteration(const Eigen::MatrixXd& P, int max_iter = 2'000'000,
                                       double tol = 1e-15) {
  const auto n = P.rows();
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Lazy chain (I + P)/2 removes periodicity without moving the fixed point.
  for (int it = 0; it < max_iter; ++it) {
    Eigen::RowVectorXd next = 0.5 * (x + x * P);
    next /= next.sum();
    const double delta = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    if (delta < tol) break;
  }
  return x.transpose();
}

/// Slots touched by `len` mini-slots starting at phase k, counted one mini-slot at a time.
inline std::vector<int> brute_span_counts(int slot_len, int len) {
  std::vector<int> m(static_cast<std::size_t>(slot_len));
  for (int k = 0; k < slot_len; ++k) {
    int touched = 0;
    int last = -1;
    for (int t = k; t < k + len; ++t)
      if (t / slot_len != last) {
        last = t / slot_len;
        ++touched;
      }
    m[static_cast<std::size_t>(k)] = touched;
  }
  return m;
}

// Published 4x4 idle-system matrix for l_C = 5, S = 4.
inline Eigen::Matrix4d published_A_l5_s4(double rA, double rC) {
  const double u = rA * (rC - 1), z = rA * (1 - rC);
  Eigen::Matrix4d A;
  A << u, u, u, 2 * u,
       rC, 0, 0, z,
       z, rC, 0, 0,
       0, z, rC, 0;
  return A;
}

// Published 4x4 idle-system matrix for l_C = 2, S = 4.
inline Eigen::Matrix4d published_A_l2_s4(double rA, double rC) {
  const double u = rA * (rC - 1), z = rA * (1 - rC);
  Eigen::Matrix4d A;
  A << 0, 0, u, u,
       rC, 0, z, 0,
       0, rC, 0, z,
       1 - rC, 0, rC, 0;
  return A;
}

// Published limiting probability of (I,I,0) for l_C = 5, S = 4, as printed.
inline double published_pi_tilde_ii0_l5_s4(double rA, double rC) {
  const double num = rA * rC * rC;
  const double den = 4 * std::pow(rC - 1, 3) * std::pow(rA, 3) +
                     4 * rC * std::pow(rC - 1, 2) * rA * rA + (4 * std::pow(rC, 3) - 4 * rC * rC) * rA +
                     8 * std::pow(rC, 3);
  return num / den;
}

// The same quantity obtained by eliminating the published matrix symbolically
// (sympy, offline) and normalizing by the holding times of the chain.
inline double derived_pi_tilde_ii0_l5_s4(double a, double c) {
  const double num = a * (a * a * c * c - 2 * a * a * c + a * a - a * c * c * c + a * c * c - 1);
  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
  const double c2 = c * c, c3 = c2 * c, c4 = c3 * c;
  const double den = 4 * a4 * c4 - 16 * a4 * c3 + 24 * a4 * c2 - 16 * a4 * c + 4 * a4 + 4 * a3 * c4 -
                     16 * a3 * c3 + 24 * a3 * c2 - 16 * a3 * c + 4 * a3 + 4 * a2 * c4 - 24 * a2 * c3 +
                     36 * a2 * c2 - 16 * a2 * c + 8 * a * c4 - 8 * a * c3 + 4 * a * c2 - 4 * a - 4;
  return num / den;
}

// Published idle fraction for l_C = 2, S = 4.
inline double published_alpha_l2_s4(double rA, double rC) {
  const double num = -(rA * (std::pow(rC - 1, 3) * rA * rA + (-4 * rC * rC + 5 * rC - 1) * rA -
                             std::pow(rC, 3) - rC * rC - 2));
  const double den = 4 + 4 * std::pow(rC - 1, 4) * rA * rA +
                     (-4 * std::pow(rC, 4) + 16 * rC * rC - 16 * rC + 4) * rA;
  return num / den;
}

// Published Aloha throughput for l_C = 2, S = 4.
inline double published_lambda_a_l2_s4(int nA, double rA, double rC) {
  const double n = nA;
  const double attempt = n * std::pow(rA, (n - 1) / n) * (1 - std::pow(rA, 1 / n));
  const double num = attempt * (2 * rA * rC * rC - 2 * rA * rC + 1);
  const double den = 1 + std::pow(rC - 1, 4) * rA * rA + (-std::pow(rC, 4) + 4 * rC * rC - 4 * rC + 1) * rA;
  return num / den;
}

// Published CSMA throughput for l_C = 2, S = 4, as printed (its sign is flipped).
inline double published_lambda_c_l2_s4(int nC, double rA, double rC) {
  const double n = nC;
  const double attempt = n * std::pow(rC, (n - 1) / n) * (1 - std::pow(rC, 1 / n));
  const double num = attempt * rA *
                     (2 * std::pow(rC - 1, 3) * rA * rA +
                      (-2 * std::pow(rC, 3) - 2 * rC * rC + 3 * rC - 1) * rA - rC - 1);
  const double den = 2 + 2 * std::pow(rC - 1, 4) * rA * rA +
                     (-2 * std::pow(rC, 4) + 8 * rC * rC - 8 * rC + 2) * rA;
  return num / den;
}

// Many-Aloha optimum at l_C = S, from the published exponential forms.
inline double published_rho_a_many(double gamma) {
  return std::exp(0.5 * (gamma - std::sqrt(gamma * gamma + 4 * gamma)));
}

/// Plain bisection on a bracketing interval.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Frozen constants.
inline constexpr double kW0AtOne = 0.5671432904097838;       // omega constant
inline constexpr double kAlphaEqualS2 = 0.30434782608695654;  // 7/23 at rho 0.5, S = l_C = 2
inline constexpr double kLambdaAEqualS2 = 0.34782608695652173;  // 8/23, n_A = 1, same point
inline constexpr double kPiTildeIi0L5S4Half = 0.07124681933842239;  // derived rational at 0.5/0.5

}  // namespace oracle
