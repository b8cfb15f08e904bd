#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "coexist/chain.hpp"
#include "coexist/config.hpp"

namespace coexist::analytic {

struct MatrixCoefficients {
  double h = 0, e = 0;  // floor / ceil of l_C a, times u
  double v = 0, z = 0;
  double g = 0, f = 0;  // integer-multiple template
  double u = 0, w = 0;
};

MatrixCoefficients matrix_coefficients(double rho_A, double rho_C, int slot_len, int csma_len);

enum class MatrixForm { LongPacket, IntegerMultiple, ShortPacket };

const char* to_string(MatrixForm form);

/// Idle-state system y = A y + b with y[d] the limiting probability of (I,I,d).
struct IdleSystem {
  MatrixForm form = MatrixForm::IntegerMultiple;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd y;
  bool solved = false;
  double residual = 0.0;

  double alpha() const { return y.sum(); }
};

IdleSystem build_A(double rho_A, double rho_C, int slot_len, int csma_len);
IdleSystem build_A(const SystemConfig& cfg);

/// Solves (I - A) y = b. Throws DegenerateParameterError if I - A is singular.
IdleSystem solve_idle(IdleSystem system);
IdleSystem solve_idle(const SystemConfig& cfg);

double alpha_C(const SystemConfig& cfg);

/// M[k]: Aloha slots touched by a CSMA transmission starting at phase k.
std::vector<int> span_counts(int slot_len, int csma_len);
std::vector<int> span_counts(const SystemConfig& cfg);

double aloha_throughput(const SystemConfig& cfg);
double csma_throughput(const SystemConfig& cfg);

enum class Method { ClosedForm, ChainSolve };
enum class Provenance { ClosedForm, ChainSolve, Simulation };

const char* to_string(Provenance p);

struct ThroughputReport {
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double lambda_total = 0.0;
  double alpha_C = 1.0;
  Provenance provenance = Provenance::ClosedForm;
  std::string route;
};

/// Throughputs computed from idle probabilities alone.
struct Evaluation {
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double alpha_C = 1.0;
  const char* route = "";
};

inline constexpr const char* kRouteIntegerMultiple = "integer-multiple closed form";
inline constexpr const char* kRouteGeneral = "general case (linear solve)";
inline constexpr const char* kRouteChain = "embedded chain solve";

/// Closed-form route: integer-multiple formulas when l_C mod S == 0 and their
/// denominators are nonzero, otherwise the idle system plus busy-state
/// relations.
Evaluation evaluate(const DerivedRates& rates, int slot_len, int csma_len);

/// Same quantities read off a solved chain.
Evaluation evaluate_chain(const model::EmbeddedChain& chain);

/// Throughputs from a solved idle vector (any l_C).
Evaluation throughputs_from_idle(const Eigen::VectorXd& y, const DerivedRates& rates, int slot_len,
                                 int csma_len);

ThroughputReport throughput_report(const SystemConfig& cfg, Method method);

}  // namespace coexist::analytic
