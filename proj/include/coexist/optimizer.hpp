#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace coexist::optimizer {

/// Principal branch of the Lambert W function. Throws std::domain_error for
/// x < -1/e.
double lambert_w0(double x);

/// W0(exp(t)) without forming exp(t); valid for any finite t.
double lambert_w0_exp(double t);

struct RatioContext {
  int aloha_nodes = 1;
  int csma_nodes = 1;
  int slot_len = 1;
  int csma_len = 1;
};

struct RatioSolveOptions {
  double tolerance = 1e-6;           // relative, on lambda_A / lambda_C
  std::optional<double> hint;        // previous root, enables a local bracket
};

struct RatioSolveStats {
  std::size_t evaluations = 0;
  std::size_t scan_fallbacks = 0;
};

/// Largest rho_C in (0,1) with lambda_A / lambda_C = gamma at the given rho_A,
/// or nullopt when no rho_C attains the ratio. The ratio diverges as
/// rho_C -> 1, so the largest root lies on the branch where it increases.
std::optional<double> ratio_solve_rho_c(double gamma, double rho_A, const RatioContext& ctx,
                                        const RatioSolveOptions& opts = {},
                                        RatioSolveStats* stats = nullptr);

struct OptimizationSpec {
  double gamma = 1.0;
  int aloha_nodes = 1;
  int csma_nodes = 1;
  int slot_len = 1;
  std::vector<int> csma_len_candidates;  // empty selects 1..3S
  double rho_a_step = 1e-3;    // grid step of the final search stage
  double coarse_step = 2e-2;   // grid step of the screening stage
  std::size_t refine_top = 4;  // candidates carried into the fine stage
  double ratio_tolerance = 1e-6;
  int jobs = 1;

  void validate() const;
  std::vector<int> candidates() const;
};

enum class OptimizationMethod { Numeric, ClosedFormSingleAloha, ClosedFormManyAloha };
enum class OptimizationStatus { Optimal, Infeasible };

const char* to_string(OptimizationMethod m);
const char* to_string(OptimizationStatus s);

struct LengthOptimum {
  int csma_len = 0;
  bool feasible = false;
  bool refined = false;  // evaluated on the fine grid
  double rho_A = 0.0;
  double rho_C = 0.0;
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double lambda_total = 0.0;
};

struct OptimizationResult {
  OptimizationStatus status = OptimizationStatus::Infeasible;
  OptimizationMethod method = OptimizationMethod::Numeric;
  double gamma = 1.0;
  double rho_A = 0.0;
  double rho_C = 0.0;
  int csma_len = 0;
  double lambda_max = 0.0;
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double achieved_ratio = 0.0;
  std::size_t evaluations = 0;
  std::size_t scan_fallbacks = 0;
  std::vector<LengthOptimum> per_length;
  std::string note;
};

/// Best (rho_A, rho_C) for one packet length: grid on rho_A with step
/// `step`, then golden-section refinement around the best cell. A screening
/// pass uses fewer tail points and a looser final bracket.
LengthOptimum optimize_length(double gamma, const RatioContext& ctx, double step,
                              double ratio_tolerance, RatioSolveStats* stats = nullptr,
                              bool screening = false);

OptimizationResult optimize(const OptimizationSpec& spec);

enum class AlohaRegime { Single, Many };

/// Grouping of the n_A = 1 optimality condition.
///  Printed:   a g r^2 W (1 - (1-r)(1-W))^(1/a) = (1-r)^3
///  Regrouped: a g r^2 W (1 - Phi(r, rho_C(r))) = (1-r)^3, rho_C = a W / (1-r)
/// with W = W0(exp((1-r)/a)).
enum class SingleAlohaEquation { Printed, Regrouped };

/// Approximate optimum at l_C = S from the explicit expressions.
OptimizationResult closed_form_optimum(double gamma, AlohaRegime regime, int slot_len,
                                       SingleAlohaEquation eq = SingleAlohaEquation::Regrouped);

/// Residual of the n_A = 1 optimality condition at rho_A.
double single_aloha_condition(double rho_A, double gamma, int slot_len, SingleAlohaEquation eq);

}  // namespace coexist::optimizer
