#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coexist/analytic.hpp"
#include "coexist/optimizer.hpp"
#include "coexist/simulator.hpp"

namespace coexist::casestudy {

/// What the access point knows when it configures a duty-cycled LTE-U eNB
/// and its WiFi stations.
struct DeploymentInput {
  int wifi_nodes = 20;      // n_W
  double gamma = 1.0;       // agreed lambda_L / lambda_W
  int slot_len = 112;       // mini-slots per ON period
  int max_wifi_len = 0;     // largest WiFi packet searched; 0 selects slot_len
  int fixed_wifi_len = 0;   // nonzero pins the packet length instead of searching
  int jobs = 1;

  void validate() const;
};

struct DeploymentConfig {
  int wifi_nodes = 0;
  double gamma = 1.0;
  int slot_len = 112;
  int backoff_window = 0;     // CW
  double lte_tx_prob = 0.0;   // q_L
  int wifi_len = 0;           // l_W
  double rho_A = 0.0;         // continuous optimum
  double rho_C = 0.0;
  double lambda_max = 0.0;
  analytic::ThroughputReport predicted;  // at the rounded CW and q_L
  optimizer::OptimizationResult optimum;

  /// Simulator configuration for this deployment, optionally with another
  /// WiFi packet length or node count.
  sim::WifiLteConfig wifi_config(int wifi_len_override = 0, int wifi_nodes_override = 0) const;
};

/// Smallest integer CW with (1 - 2/(CW-1))^n_W no larger than rho_C, i.e.
/// ceil(2 / (1 - rho_C^(1/n_W)) + 1).
int backoff_window_for(double rho_C, int wifi_nodes);

double lte_tx_prob_for(double rho_A);

/// rho_C implied by a backoff window through q_C = 2/(CW-1).
double idle_prob_for_window(int backoff_window, int wifi_nodes);

/// Throws InfeasibleError when the optimizer finds no configuration.
DeploymentConfig derive_deployment(const DeploymentInput& input);

/// One row of a sweep table.
struct SweepRow {
  double parameter = 0.0;
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double lambda_total = 0.0;
  double ratio = 0.0;
  std::string method;   // "analytic", "simulation" or "failed"
  std::uint64_t seed = 0;
  std::string error;
};

inline constexpr const char* kSweepHeader =
    "parameter,lambda_A,lambda_C,lambda_total,ratio,method,seed";

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct RobustnessOptions {
  std::int64_t duration = 100'000'000;
  std::uint64_t seed = 1;
  bool with_analytics = true;
  int jobs = 1;
};

/// Fixed CW and q_L, varying the packet length the WiFi stations actually use.
std::vector<SweepRow> robustness_lw(const DeploymentConfig& config,
                                    const std::vector<int>& wifi_lens,
                                    const RobustnessOptions& opts = {});

/// Parameters derived for one node count, simulated at the true node counts.
std::vector<SweepRow> robustness_nw(const DeploymentConfig& config,
                                    const std::vector<int>& wifi_nodes,
                                    const RobustnessOptions& opts = {});

}  // namespace coexist::casestudy
