#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coexist/config.hpp"

namespace coexist::sim {

enum class SimMode { Generic, WifiLte };

const char* to_string(SimMode mode);

/// LTE-U eNB as a one-node Aloha transmitter sharing the channel with WiFi
/// stations running DCF with a single backoff stage.
struct WifiLteConfig {
  int wifi_nodes = 1;           // n_W
  int backoff_window = 3;       // CW
  bool inclusive_window = true; // counter drawn from {0..CW}; false gives {0..CW-1}
  int wifi_len = 104;           // l_W, successful transmission including ACK
  double lte_tx_prob = 0.5;     // q_L, per ON period
  int slot_len = 112;           // S
  int fail_overhead = 6;        // mini-slots a failed transmission omits

  void validate() const;

  /// 2 / (CW - 1), the geometric attempt rate the analytic model assigns to DCF.
  double csma_tx_prob() const { return 2.0 / (backoff_window - 1); }

  /// Generic-model view of this deployment.
  SystemConfig as_system() const;
};

struct SimConfig {
  SimMode mode = SimMode::Generic;
  SystemConfig system;
  WifiLteConfig wifi;
  std::int64_t duration = 10'000'000;  // T, mini-slots
  std::uint64_t seed = 1;
  std::size_t trace_limit = 0;          // mini-slots of channel trace to keep
  bool audit = false;                   // record intervals and check successes

  void validate() const;
};

struct SimResult {
  SimMode mode = SimMode::Generic;
  std::uint64_t seed = 0;
  std::int64_t duration = 0;
  std::uint64_t success_A = 0;
  std::uint64_t success_C = 0;
  std::uint64_t collisions_A = 0;
  std::uint64_t collisions_C = 0;
  std::int64_t busy_minislots = 0;
  std::int64_t idle_minislots = 0;
  double lambda_A = 0.0;
  double lambda_C = 0.0;
  double lambda_total = 0.0;
  double idle_fraction = 0.0;
  /// One char per mini-slot: '.' idle, 'A' Aloha only, 'C' CSMA only, 'X' overlap.
  std::string trace;
  /// Successful transmissions that overlapped another one; only filled in audit runs.
  std::uint64_t audit_violations = 0;
};

SimResult run(const SimConfig& cfg);

struct BatchItem {
  std::optional<SimResult> result;
  std::string error;
};

/// Runs each config independently; errors are reported per item.
std::vector<BatchItem> run_batch(const std::vector<SimConfig>& cfgs, int jobs = 1);

/// Stable 64-bit digest of a config, used to tag batch results.
std::uint64_t config_hash(const SimConfig& cfg);

}  // namespace coexist::sim
