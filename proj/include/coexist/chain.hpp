#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coexist/config.hpp"

namespace coexist::model {

enum class ChannelStatus : std::uint8_t { Idle = 0, Busy = 1 };

char status_char(ChannelStatus s);

/// One state of the dual-channel renewal process.
///
/// `offset` is the start time of the CSMA-channel state minus the start time
/// of the Aloha-channel state. Idle-CSMA states carry a phase in [0, S);
/// busy-CSMA states may carry a negative offset when the transmission began
/// in an earlier slot.
struct ChainState {
  ChannelStatus aloha = ChannelStatus::Idle;
  ChannelStatus csma = ChannelStatus::Idle;
  int offset = 0;

  auto operator<=>(const ChainState&) const = default;
  std::string to_string() const;  // e.g. "(I,B,-3)"
};

inline constexpr ChainState make_state(char aloha, char csma, int offset) {
  return {aloha == 'B' ? ChannelStatus::Busy : ChannelStatus::Idle,
          csma == 'B' ? ChannelStatus::Busy : ChannelStatus::Idle, offset};
}

bool offset_in_range(const ChainState& s, int slot_len, int csma_len);

/// Mini-slots spent in `s` before the next transition epoch.
/// Throws ConfigError if the offset is outside the range of the state class.
int holding_time(const ChainState& s, int slot_len, int csma_len);
int holding_time(const ChainState& s, const SystemConfig& cfg);

struct ChainOptions {
  std::size_t max_states = 0;  // 0 selects 10 S (S + l_C)
  // Drop states that cannot be revisited (for instance (I,I,0) when the Aloha
  // channel is busy in every slot). When false such states raise an error.
  bool restrict_to_recurrent = true;
};

struct Transition {
  std::size_t to;
  double prob;
};

/// Enumerated state space with its solved distributions. Immutable once built.
struct EmbeddedChain {
  int slot_len = 1;
  int csma_len = 1;
  DerivedRates rates;
  std::vector<ChainState> states;
  Eigen::MatrixXd P;
  std::vector<int> tau;
  Eigen::VectorXd pi;
  Eigen::VectorXd pi_tilde;
  std::size_t transient_dropped = 0;

  std::optional<std::size_t> find(const ChainState& s) const;
  double stationary(const ChainState& s) const;  // 0 when unreachable
  double limiting(const ChainState& s) const;    // 0 when unreachable
  double idle_fraction() const;                  // sum of limiting (I,I,d)
  double mean_holding() const;                   // sum pi tau

  std::map<ChainState, std::size_t> index;
};

EmbeddedChain enumerate_chain(const SystemConfig& cfg, const ChainOptions& opts = {});
EmbeddedChain enumerate_chain(const DerivedRates& rates, int slot_len, int csma_len,
                              const ChainOptions& opts = {});

/// Solves pi P = pi with sum(pi) = 1 by a direct dense solve.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P);

/// pi_tilde[i] = pi[i] tau[i] / sum_j pi[j] tau[j].
Eigen::VectorXd limiting_distribution(const Eigen::VectorXd& pi, const std::vector<int>& tau);

/// Index of the idle state whose successor starts a CSMA transmission at
/// offset d <= 0, i.e. (d - 1) mod S.
int wrap_index(int offset, int slot_len);

struct BusyRelation {
  ChainState state;
  double from_idle = 0.0;  // value rebuilt from idle-state probabilities
  double direct = 0.0;     // value read from the solved chain
  bool limiting = false;   // true: limiting probability, false: embedded
};

/// Rebuilds every busy-state probability from idle-state probabilities and
/// pairs it with the directly solved value. Throws ModelConsistencyError when
/// any pair differs by more than `tolerance`.
std::vector<BusyRelation> busy_from_idle(const EmbeddedChain& chain, double tolerance = 1e-10);

}  // namespace coexist::model
