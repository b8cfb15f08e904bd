#include "coexist/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include "coexist/errors.hpp"

namespace coexist::sim {

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max() / 4;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream per node, a function of (seed, node id) only.
class NodeStream {
 public:
  NodeStream(std::uint64_t seed, std::uint64_t node_id) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (node_id + 1));
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s) >> 32),
                      static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s) >> 32)};
    eng_.seed(seq);
  }

  // Uniform on (0, 1].
  double uniform_open0() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

  // Failures before the first success of Bernoulli(q) trials.
  std::int64_t geometric(double q) {
    if (q <= 0.0) return kNever;
    if (q >= 1.0) return 0;
    const double g = std::floor(std::log(uniform_open0()) / std::log1p(-q));
    return g >= static_cast<double>(kNever) ? kNever : static_cast<std::int64_t>(g);
  }

  // Uniform integer in [0, n].
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(eng_() % static_cast<std::uint64_t>(n + 1));
  }

 private:
  std::mt19937_64 eng_;
};

enum class Kind : std::uint8_t { Aloha, Csma };

struct Transmission {
  Kind kind;
  int node;
  std::int64_t start;
  std::int64_t end;
  bool collided = false;
  bool ack_phase = false;
};

struct Interval {
  std::int64_t start;
  std::int64_t end;
  bool success;
};

struct Params {
  bool wifi = false;
  int aloha_nodes = 0;
  int csma_nodes = 0;
  double q_A = 0.0;
  double q_C = 0.0;
  int S = 1;
  int csma_len = 1;      // full length of a clean CSMA transmission
  int fail_len = 1;      // length before the success check
  int backoff_max = 0;   // wifi: counter drawn from [0, backoff_max]
};

Params params_of(const SimConfig& cfg) {
  Params p;
  if (cfg.mode == SimMode::Generic) {
    const SystemConfig& s = cfg.system;
    p.aloha_nodes = s.aloha_nodes;
    p.csma_nodes = s.csma_nodes;
    p.q_A = s.aloha_tx_prob;
    p.q_C = s.csma_tx_prob;
    p.S = s.slot_len;
    p.csma_len = p.fail_len = s.csma_len;
  } else {
    const WifiLteConfig& w = cfg.wifi;
    p.wifi = true;
    p.aloha_nodes = 1;
    p.csma_nodes = w.wifi_nodes;
    p.q_A = w.lte_tx_prob;
    p.S = w.slot_len;
    p.csma_len = w.wifi_len;
    p.fail_len = w.wifi_len - w.fail_overhead;
    p.backoff_max = w.inclusive_window ? w.backoff_window : w.backoff_window - 1;
  }
  return p;
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg) : cfg_(cfg), p_(params_of(cfg)) {
    for (int i = 0; i < p_.aloha_nodes; ++i) {
      streams_.emplace_back(cfg.seed, static_cast<std::uint64_t>(i));
      aloha_next_.push_back(streams_.back().geometric(p_.q_A));
    }
    for (int j = 0; j < p_.csma_nodes; ++j) {
      streams_.emplace_back(cfg.seed, static_cast<std::uint64_t>(p_.aloha_nodes + j));
      csma_fire_.push_back(draw_backoff(streams_.back()));
    }
  }

  SimResult run() {
    const std::int64_t T = cfg_.duration;
    std::int64_t t = 0;
    bool idle_prev = true;
    std::int64_t opp = 0;  // index of the next CSMA sensing opportunity

    while (t < T) {
      finish_at(t);

      if (t % p_.S == 0) {
        const std::int64_t slot = t / p_.S;
        for (int i = 0; i < p_.aloha_nodes; ++i) {
          if (aloha_next_[i] != slot) continue;
          start(Kind::Aloha, i, t, t + p_.S);
          aloha_next_[i] = slot + 1 + stream_A(i).geometric(p_.q_A);
        }
      }

      if (idle_prev) {
        for (int j = 0; j < p_.csma_nodes; ++j) {
          if (csma_fire_[j] != opp) continue;
          start(Kind::Csma, j, t, t + p_.fail_len);
          csma_fire_[j] = opp + 1 + draw_backoff(stream_C(j));
        }
        ++opp;
      }

      std::int64_t next = std::min(T, next_aloha_start(t));
      if (!active_.empty()) {
        for (const auto& tx : active_) next = std::min(next, tx.end);
        record(t, next, occupancy());
        res_.busy_minislots += next - t;
        idle_prev = false;
      } else {
        const std::int64_t fire = next_csma_fire();
        if (fire < kNever) next = std::min(next, t + 1 + (fire - opp));
        record(t, next, '.');
        res_.idle_minislots += next - t;
        opp += next - t - 1;
        idle_prev = true;
      }
      t = next;
    }

    finalize();
    return res_;
  }

 private:
  NodeStream& stream_A(int i) { return streams_[static_cast<std::size_t>(i)]; }
  NodeStream& stream_C(int j) { return streams_[static_cast<std::size_t>(p_.aloha_nodes + j)]; }

  std::int64_t draw_backoff(NodeStream& s) {
    return p_.wifi ? s.uniform_int(p_.backoff_max) : s.geometric(p_.q_C);
  }

  std::int64_t next_aloha_start(std::int64_t t) const {
    std::int64_t best = kNever;
    for (std::int64_t slot : aloha_next_)
      if (slot < kNever / p_.S) best = std::min(best, slot * p_.S);
    return best > t ? best : kNever;
  }

  std::int64_t next_csma_fire() const {
    std::int64_t best = kNever;
    for (std::int64_t f : csma_fire_) best = std::min(best, f);
    return best;
  }

  void start(Kind kind, int node, std::int64_t t, std::int64_t end) {
    active_.push_back({kind, node, t, end});
    if (active_.size() > 1)
      for (auto& tx : active_) tx.collided = true;
  }

  void finish_at(std::int64_t t) {
    for (std::size_t i = 0; i < active_.size();) {
      Transmission& tx = active_[i];
      if (tx.end != t) {
        ++i;
        continue;
      }
      if (p_.wifi && tx.kind == Kind::Csma && !tx.ack_phase && !tx.collided &&
          p_.csma_len > p_.fail_len) {
        tx.ack_phase = true;
        tx.end = tx.start + p_.csma_len;
        ++i;
        continue;
      }
      close(tx);
      active_[i] = active_.back();
      active_.pop_back();
    }
  }

  void close(const Transmission& tx) {
    const bool ok = !tx.collided;
    if (tx.kind == Kind::Aloha)
      ++(ok ? res_.success_A : res_.collisions_A);
    else
      ++(ok ? res_.success_C : res_.collisions_C);
    if (cfg_.audit) intervals_.push_back({tx.start, tx.end, ok});
  }

  char occupancy() const {
    if (active_.size() > 1) return 'X';
    return active_.front().kind == Kind::Aloha ? 'A' : 'C';
  }

  void record(std::int64_t from, std::int64_t to, char c) {
    const auto limit = static_cast<std::int64_t>(cfg_.trace_limit);
    if (from >= limit) return;
    res_.trace.append(static_cast<std::size_t>(std::min(to, limit) - from), c);
  }

  void finalize() {
    const std::int64_t T = cfg_.duration;
    res_.mode = cfg_.mode;
    res_.seed = cfg_.seed;
    res_.duration = T;
    const double dT = static_cast<double>(T);
    const double len_C = p_.csma_len;
    res_.lambda_A = static_cast<double>(res_.success_A) * p_.S / dT;
    res_.lambda_C = static_cast<double>(res_.success_C) * len_C / dT;
    res_.lambda_total = res_.lambda_A + res_.lambda_C;
    res_.idle_fraction = static_cast<double>(res_.idle_minislots) / dT;
    if (res_.busy_minislots + res_.idle_minislots != T)
      throw ModelConsistencyError("simulator lost track of channel time");
    if (cfg_.audit) audit();
  }

  // A successful interval must not intersect any other recorded interval or
  // any transmission still on air at the horizon.
  void audit() {
    for (const auto& tx : active_) intervals_.push_back({tx.start, tx.end, false});
    std::sort(intervals_.begin(), intervals_.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::int64_t reach = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const Interval& iv = intervals_[i];
      const bool hit_prev = reach > iv.start;
      const bool hit_next = i + 1 < intervals_.size() && intervals_[i + 1].start < iv.end;
      if (iv.success && (hit_prev || hit_next)) ++res_.audit_violations;
      reach = std::max(reach, iv.end);
    }
  }

  const SimConfig& cfg_;
  Params p_;
  std::vector<NodeStream> streams_;
  std::vector<std::int64_t> aloha_next_;  // slot index of each node's next attempt
  std::vector<std::int64_t> csma_fire_;   // opportunity index of each node's next attempt
  std::vector<Transmission> active_;
  std::vector<Interval> intervals_;
  SimResult res_;
};

void mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

template <typename T>
void mix(std::uint64_t& h, const T& v) {
  mix(h, &v, sizeof v);
}

}  // namespace

const char* to_string(SimMode mode) {
  return mode == SimMode::Generic ? "generic" : "wifi-lte";
}

void WifiLteConfig::validate() const {
  if (wifi_nodes < 1) throw ConfigError("wifi_nodes must be >= 1");
  if (backoff_window < 3) throw ConfigError("backoff_window must be >= 3 so that 2/(CW-1) <= 1");
  if (slot_len < 1) throw ConfigError("slot_len must be >= 1");
  if (fail_overhead < 0) throw ConfigError("fail_overhead must be >= 0");
  if (wifi_len <= fail_overhead) throw ConfigError("wifi_len must exceed fail_overhead");
  if (!(lte_tx_prob >= 0.0 && lte_tx_prob <= 1.0))
    throw ConfigError("lte_tx_prob must lie in [0, 1]");
}

SystemConfig WifiLteConfig::as_system() const {
  validate();
  SystemConfig s;
  s.aloha_nodes = 1;
  s.csma_nodes = wifi_nodes;
  s.aloha_tx_prob = lte_tx_prob;
  s.csma_tx_prob = csma_tx_prob();
  s.slot_len = slot_len;
  s.csma_len = wifi_len;
  return s;
}

void SimConfig::validate() const {
  if (duration < 1) throw ConfigError("duration must be >= 1 mini-slot");
  if (mode == SimMode::Generic)
    system.validate();
  else
    wifi.validate();
}

SimResult run(const SimConfig& cfg) {
  cfg.validate();
  Simulation s(cfg);
  return s.run();
}

std::vector<BatchItem> run_batch(const std::vector<SimConfig>& cfgs, int jobs) {
  std::vector<BatchItem> out(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        out[i].result = run(cfgs[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < std::min(n, cfgs.size()); ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return out;
}

std::uint64_t config_hash(const SimConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  mix(h, cfg.mode);
  mix(h, cfg.duration);
  mix(h, cfg.seed);
  if (cfg.mode == SimMode::Generic) {
    const SystemConfig& s = cfg.system;
    mix(h, s.aloha_nodes);
    mix(h, s.csma_nodes);
    mix(h, s.aloha_tx_prob);
    mix(h, s.csma_tx_prob);
    mix(h, s.slot_len);
    mix(h, s.csma_len);
  } else {
    const WifiLteConfig& w = cfg.wifi;
    mix(h, w.wifi_nodes);
    mix(h, w.backoff_window);
    mix(h, w.inclusive_window);
    mix(h, w.wifi_len);
    mix(h, w.lte_tx_prob);
    mix(h, w.slot_len);
    mix(h, w.fail_overhead);
  }
  return h;
}

}  // namespace coexist::sim
