#include "coexist/casestudy.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "coexist/errors.hpp"

namespace coexist::casestudy {

void DeploymentInput::validate() const {
  if (wifi_nodes < 1) throw ConfigError("wifi_nodes must be >= 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be > 0");
  if (slot_len < 1) throw ConfigError("slot_len must be >= 1");
  if (max_wifi_len < 0) throw ConfigError("max_wifi_len must be >= 0");
  if (fixed_wifi_len < 0) throw ConfigError("fixed_wifi_len must be >= 0");
}

sim::WifiLteConfig DeploymentConfig::wifi_config(int wifi_len_override,
                                                 int wifi_nodes_override) const {
  sim::WifiLteConfig w;
  w.wifi_nodes = wifi_nodes_override > 0 ? wifi_nodes_override : wifi_nodes;
  w.backoff_window = backoff_window;
  w.wifi_len = wifi_len_override > 0 ? wifi_len_override : wifi_len;
  w.lte_tx_prob = lte_tx_prob;
  w.slot_len = slot_len;
  return w;
}

int backoff_window_for(double rho_C, int wifi_nodes) {
  if (!(rho_C > 0.0 && rho_C < 1.0)) throw ConfigError("rho_C must lie in (0, 1)");
  if (wifi_nodes < 1) throw ConfigError("wifi_nodes must be >= 1");
  const double q = -std::expm1(std::log(rho_C) / wifi_nodes);
  const double cw = 2.0 / q + 1.0;
  if (cw > static_cast<double>(std::numeric_limits<int>::max() - 1))
    throw ConfigError("backoff window overflows");
  // Absorb representation error when the expression lands on an integer.
  return static_cast<int>(std::ceil(cw - 1e-9 * cw));
}

double lte_tx_prob_for(double rho_A) { return 1.0 - rho_A; }

double idle_prob_for_window(int backoff_window, int wifi_nodes) {
  if (backoff_window < 3) throw ConfigError("backoff window must be >= 3");
  return std::pow(1.0 - 2.0 / (backoff_window - 1), wifi_nodes);
}

DeploymentConfig derive_deployment(const DeploymentInput& input) {
  input.validate();
  optimizer::OptimizationSpec spec;
  spec.gamma = input.gamma;
  spec.aloha_nodes = 1;
  spec.csma_nodes = input.wifi_nodes;
  spec.slot_len = input.slot_len;
  spec.jobs = input.jobs;
  if (input.fixed_wifi_len > 0) {
    spec.csma_len_candidates = {input.fixed_wifi_len};
  } else {
    const int top = input.max_wifi_len > 0 ? input.max_wifi_len : input.slot_len;
    for (int l = 1; l <= top; ++l) spec.csma_len_candidates.push_back(l);
  }

  DeploymentConfig out;
  out.optimum = optimizer::optimize(spec);
  if (out.optimum.status != optimizer::OptimizationStatus::Optimal)
    throw InfeasibleError("no deployment attains gamma = " + std::to_string(input.gamma));

  out.wifi_nodes = input.wifi_nodes;
  out.gamma = input.gamma;
  out.slot_len = input.slot_len;
  out.rho_A = out.optimum.rho_A;
  out.rho_C = out.optimum.rho_C;
  out.lambda_max = out.optimum.lambda_max;
  out.wifi_len = out.optimum.csma_len;
  out.backoff_window = backoff_window_for(out.rho_C, input.wifi_nodes);
  out.lte_tx_prob = lte_tx_prob_for(out.rho_A);
  out.predicted =
      analytic::throughput_report(out.wifi_config().as_system(), analytic::Method::ClosedForm);
  return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  const auto old = os.precision(10);
  for (const auto& r : rows) {
    os << r.parameter << ',';
    if (r.method == "failed") {
      os << ",,,," << r.method << ',' << r.seed << '\n';
      continue;
    }
    os << r.lambda_A << ',' << r.lambda_C << ',' << r.lambda_total << ',' << r.ratio << ','
       << r.method << ',' << r.seed << '\n';
  }
  os.precision(old);
}

namespace {

double ratio_of(double a, double c) {
  return c > 0.0 ? a / c : std::numeric_limits<double>::infinity();
}

SweepRow analytic_row(double parameter, const SystemConfig& cfg) {
  SweepRow row;
  row.parameter = parameter;
  row.method = "analytic";
  try {
    const auto rep = analytic::throughput_report(cfg, analytic::Method::ClosedForm);
    row.lambda_A = rep.lambda_A;
    row.lambda_C = rep.lambda_C;
    row.lambda_total = rep.lambda_total;
    row.ratio = ratio_of(rep.lambda_A, rep.lambda_C);
  } catch (const std::exception& e) {
    row.method = "failed";
    row.error = e.what();
  }
  return row;
}

std::vector<SweepRow> simulate_points(const std::vector<double>& params,
                                      const std::vector<sim::WifiLteConfig>& wifis,
                                      const RobustnessOptions& opts) {
  std::vector<sim::SimConfig> cfgs;
  for (const auto& w : wifis) {
    sim::SimConfig c;
    c.mode = sim::SimMode::WifiLte;
    c.wifi = w;
    c.duration = opts.duration;
    c.seed = opts.seed;
    cfgs.push_back(c);
  }
  const auto results = sim::run_batch(cfgs, opts.jobs);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    SweepRow row;
    row.parameter = params[i];
    row.seed = opts.seed;
    if (results[i].result) {
      const sim::SimResult& r = *results[i].result;
      row.method = "simulation";
      row.lambda_A = r.lambda_A;
      row.lambda_C = r.lambda_C;
      row.lambda_total = r.lambda_total;
      row.ratio = ratio_of(r.lambda_A, r.lambda_C);
    } else {
      row.method = "failed";
      row.error = results[i].error;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> sweep(const std::vector<double>& params,
                            const std::vector<sim::WifiLteConfig>& wifis,
                            const RobustnessOptions& opts) {
  std::vector<SweepRow> sims = simulate_points(params, wifis, opts);
  if (!opts.with_analytics) return sims;
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    rows.push_back(sims[i]);
    try {
      rows.push_back(analytic_row(params[i], wifis[i].as_system()));
    } catch (const std::exception& e) {
      SweepRow failed;
      failed.parameter = params[i];
      failed.method = "failed";
      failed.error = e.what();
      rows.push_back(failed);
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> robustness_lw(const DeploymentConfig& config,
                                    const std::vector<int>& wifi_lens,
                                    const RobustnessOptions& opts) {
  std::vector<double> params;
  std::vector<sim::WifiLteConfig> wifis;
  for (int l : wifi_lens) {
    if (l < 1 || l > config.slot_len)
      throw ConfigError("WiFi packet length " + std::to_string(l) + " outside [1, S]");
    params.push_back(l);
    wifis.push_back(config.wifi_config(l));
  }
  return sweep(params, wifis, opts);
}

std::vector<SweepRow> robustness_nw(const DeploymentConfig& config,
                                    const std::vector<int>& wifi_nodes,
                                    const RobustnessOptions& opts) {
  std::vector<double> params;
  std::vector<sim::WifiLteConfig> wifis;
  for (int n : wifi_nodes) {
    if (n < 1) throw ConfigError("WiFi node count must be >= 1");
    params.push_back(n);
    wifis.push_back(config.wifi_config(0, n));
  }
  return sweep(params, wifis, opts);
}

}  // namespace coexist::casestudy
