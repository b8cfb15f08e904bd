#include "coexist/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "coexist/errors.hpp"

namespace coexist::model {

char status_char(ChannelStatus s) { return s == ChannelStatus::Busy ? 'B' : 'I'; }

std::string ChainState::to_string() const {
  std::ostringstream os;
  os << '(' << status_char(aloha) << ',' << status_char(csma) << ',' << offset << ')';
  return os.str();
}

bool offset_in_range(const ChainState& s, int slot_len, int csma_len) {
  if (s.csma == ChannelStatus::Idle) return s.offset >= 0 && s.offset < slot_len;
  return s.offset > -csma_len && s.offset < slot_len;
}

int holding_time(const ChainState& s, int S, int l) {
  if (!offset_in_range(s, S, l))
    throw ConfigError("offset out of range for state " + s.to_string());
  if (s.csma == ChannelStatus::Idle) return 1;
  const int D = s.offset;
  if (l <= S) {
    if (D > S - l) return S - D;
    if (D > 0) return l;
    return l + D;
  }
  if (D >= 0) return S - D;
  if (D >= S - l) return S;
  return l + D;
}

int holding_time(const ChainState& s, const SystemConfig& cfg) {
  return holding_time(s, cfg.slot_len, cfg.csma_len);
}

int wrap_index(int offset, int slot_len) {
  const int r = (offset - 1) % slot_len;
  return r < 0 ? r + slot_len : r;
}

namespace {

using Arc = std::pair<ChainState, double>;

// Successors of one state under the generative rule: advance to the next
// epoch, draw the Aloha status at slot boundaries, and let CSMA start only
// after a mini-slot that was idle on both channels.
std::vector<Arc> successors(const ChainState& s, const DerivedRates& r, int S, int l) {
  const int start = std::max(s.offset, 0);
  const int end = start + holding_time(s, S, l);
  const bool boundary = end == S;
  const int phase = end % S;

  std::vector<Arc> aloha_next;
  if (boundary) {
    aloha_next = {{make_state('B', 'I', 0), 1.0 - r.rho_A}, {make_state('I', 'I', 0), r.rho_A}};
  } else {
    aloha_next = {{ChainState{s.aloha, ChannelStatus::Idle, 0}, 1.0}};
  }

  std::vector<Arc> out;
  const bool csma_continues = s.csma == ChannelStatus::Busy && s.offset + l > end;
  const bool sensed_idle = s.aloha == ChannelStatus::Idle && s.csma == ChannelStatus::Idle;
  for (auto [a, pa] : aloha_next) {
    if (csma_continues) {
      out.push_back({ChainState{a.aloha, ChannelStatus::Busy, s.offset - S}, pa});
    } else if (sensed_idle) {
      out.push_back({ChainState{a.aloha, ChannelStatus::Busy, phase}, pa * (1.0 - r.rho_C)});
      out.push_back({ChainState{a.aloha, ChannelStatus::Idle, phase}, pa * r.rho_C});
    } else {
      out.push_back({ChainState{a.aloha, ChannelStatus::Idle, phase}, pa});
    }
  }
  std::erase_if(out, [](const Arc& a) { return !(a.second > 0.0); });
  return out;
}

// Tarjan's algorithm, iterative. Returns the component id of every vertex.
std::vector<int> strongly_connected(const std::vector<std::vector<Transition>>& adj,
                                    int& n_components) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::pair<int, std::size_t>> call;
  int counter = 0;
  n_components = 0;
  for (int root = 0; root < n; ++root) {
    if (idx[root] != -1) continue;
    call.push_back({root, 0});
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < adj[v].size()) {
        const int w = static_cast<int>(adj[v][next++].to);
        if (idx[w] == -1) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], idx[w]);
        }
        continue;
      }
      if (low[v] == idx[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = n_components;
        } while (w != v);
        ++n_components;
      }
      const int finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return comp;
}

}  // namespace

EmbeddedChain enumerate_chain(const SystemConfig& cfg, const ChainOptions& opts) {
  cfg.validate();
  return enumerate_chain(derive_rates(cfg), cfg.slot_len, cfg.csma_len, opts);
}

EmbeddedChain enumerate_chain(const DerivedRates& rates, int S, int l, const ChainOptions& opts) {
  if (S < 1 || l < 1) throw ConfigError("slot_len and csma_len must be >= 1");
  const std::size_t cap =
      opts.max_states ? opts.max_states : 10 * static_cast<std::size_t>(S) * (S + l);

  std::vector<ChainState> found;
  std::map<ChainState, std::size_t> where;
  std::vector<std::vector<Transition>> adj;
  std::deque<std::size_t> queue;

  auto intern = [&](const ChainState& s) {
    auto [it, fresh] = where.emplace(s, found.size());
    if (fresh) {
      if (found.size() >= cap)
        throw ModelConsistencyError("state count exceeds cap " + std::to_string(cap));
      found.push_back(s);
      adj.emplace_back();
      queue.push_back(it->second);
    }
    return it->second;
  };

  intern(make_state('I', 'I', 0));
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const ChainState s = found[i];
    for (const auto& [next, p] : successors(s, rates, S, l)) {
      const std::size_t j = intern(next);
      auto hit = std::find_if(adj[i].begin(), adj[i].end(),
                              [j](const Transition& t) { return t.to == j; });
      if (hit == adj[i].end()) {
        adj[i].push_back({j, p});
      } else {
        hit->prob += p;
      }
    }
  }

  int n_comp = 0;
  const std::vector<int> comp = strongly_connected(adj, n_comp);
  std::vector<char> closed(n_comp, 1);
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (const auto& t : adj[i])
      if (comp[t.to] != comp[i]) closed[comp[i]] = 0;
  const int n_closed = static_cast<int>(std::count(closed.begin(), closed.end(), 1));
  if (n_closed != 1)
    throw ModelConsistencyError("chain has " + std::to_string(n_closed) +
                                " closed classes; expected exactly one");
  const int keep = static_cast<int>(std::find(closed.begin(), closed.end(), 1) - closed.begin());
  if (n_comp > 1 && !opts.restrict_to_recurrent)
    throw ModelConsistencyError("chain is not irreducible on its reachable set");

  EmbeddedChain chain;
  chain.slot_len = S;
  chain.csma_len = l;
  chain.rates = rates;
  std::vector<std::size_t> remap(found.size(), SIZE_MAX);
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (comp[i] != keep) continue;
    remap[i] = chain.states.size();
    chain.index.emplace(found[i], chain.states.size());
    chain.states.push_back(found[i]);
    chain.tau.push_back(holding_time(found[i], S, l));
  }
  chain.transient_dropped = found.size() - chain.states.size();

  const auto n = static_cast<Eigen::Index>(chain.states.size());
  chain.P = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (remap[i] == SIZE_MAX) continue;
    for (const auto& t : adj[i]) chain.P(remap[i], remap[t.to]) += t.prob;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(chain.P.row(i).sum() - 1.0) > 1e-12)
      throw ModelConsistencyError("transition row of " + chain.states[i].to_string() +
                                  " does not sum to 1");
  }
  chain.pi = stationary_distribution(chain.P);
  chain.pi_tilde = limiting_distribution(chain.pi, chain.tau);
  return chain;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) throw ConfigError("transition matrix must be square and non-empty");
  Eigen::MatrixXd M = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  M.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  if (!(lu.rcond() > 1e-14))
    throw DegenerateParameterError("stationary system is singular; the chain is reducible");
  Eigen::VectorXd pi = lu.solve(rhs);
  pi += lu.solve(rhs - M * pi);  // one refinement step
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) < -1e-10) throw ModelConsistencyError("stationary solve produced a negative mass");
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  pi /= pi.sum();
  const double resid = (P.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  if (resid > 1e-12)
    throw SolverError("stationary residual " + std::to_string(resid) + " exceeds 1e-12");
  return pi;
}

Eigen::VectorXd limiting_distribution(const Eigen::VectorXd& pi, const std::vector<int>& tau) {
  if (static_cast<std::size_t>(pi.size()) != tau.size())
    throw ConfigError("pi and tau lengths differ");
  Eigen::VectorXd w(pi.size());
  for (Eigen::Index i = 0; i < pi.size(); ++i) w(i) = pi(i) * tau[static_cast<std::size_t>(i)];
  return w / w.sum();
}

std::optional<std::size_t> EmbeddedChain::find(const ChainState& s) const {
  auto it = index.find(s);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

double EmbeddedChain::stationary(const ChainState& s) const {
  auto i = find(s);
  return i ? pi(static_cast<Eigen::Index>(*i)) : 0.0;
}

double EmbeddedChain::limiting(const ChainState& s) const {
  auto i = find(s);
  return i ? pi_tilde(static_cast<Eigen::Index>(*i)) : 0.0;
}

double EmbeddedChain::idle_fraction() const {
  double sum = 0.0;
  for (int d = 0; d < slot_len; ++d) sum += limiting(make_state('I', 'I', d));
  return sum;
}

double EmbeddedChain::mean_holding() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) sum += pi(static_cast<Eigen::Index>(i)) * tau[i];
  return sum;
}

std::vector<BusyRelation> busy_from_idle(const EmbeddedChain& c, double tolerance) {
  const int S = c.slot_len;
  const int l = c.csma_len;
  const double rA = c.rates.rho_A;
  const double rC = c.rates.rho_C;
  auto idle_pi = [&](int d) { return c.stationary(make_state('I', 'I', d)); };
  auto idle_lim = [&](int d) { return c.limiting(make_state('I', 'I', d)); };

  std::vector<BusyRelation> out;
  for (int D = -(l - 1); D < S; ++D) {
    const ChainState ib = make_state('I', 'B', D);
    const double v = D > 0 ? (1.0 - rC) * idle_pi(D - 1) : rA * (1.0 - rC) * idle_pi(wrap_index(D, S));
    out.push_back({ib, v, c.stationary(ib), false});
    const ChainState bb = make_state('B', 'B', D);
    const double w = D > 0 ? 0.0 : (1.0 - rA) * (1.0 - rC) * idle_pi(wrap_index(D, S));
    out.push_back({bb, w, c.stationary(bb), false});
  }
  // Each phase carries 1/S of the time: subtract the idle share and the
  // share covered by CSMA transmissions that started within the last l_C
  // mini-slots.
  for (int k = 0; k < S; ++k) {
    double covered = 0.0;
    for (int m = 0; m < l; ++m) covered += idle_lim(wrap_index(k - m, S));
    const double v = 1.0 / S - idle_lim(k) - (1.0 - rC) * covered;
    const ChainState bi = make_state('B', 'I', k);
    out.push_back({bi, v, c.limiting(bi), true});
  }
  for (const auto& r : out) {
    if (std::abs(r.from_idle - r.direct) > tolerance) {
      std::ostringstream os;
      os << "busy-state relation fails at " << r.state.to_string() << ": " << r.from_idle
         << " vs " << r.direct;
      throw ModelConsistencyError(os.str());
    }
  }
  return out;
}

}  // namespace coexist::model
