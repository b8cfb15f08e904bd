#include "coexist/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coexist/closed_form.hpp"
#include "coexist/errors.hpp"

namespace coexist::analytic {

using model::make_state;

MatrixCoefficients matrix_coefficients(double rho_A, double rho_C, int S, int l) {
  MatrixCoefficients c;
  c.u = rho_A * (rho_C - 1.0);
  c.v = rho_C;
  c.z = rho_A * (1.0 - rho_C);
  c.w = 1.0 - rho_C;
  c.h = (l / S) * c.u;
  c.e = ((l + S - 1) / S) * c.u;
  c.g = (static_cast<double>(l) / S) * c.u;
  c.f = c.v + c.z;
  return c;
}

const char* to_string(MatrixForm form) {
  switch (form) {
    case MatrixForm::LongPacket: return "long-packet";
    case MatrixForm::IntegerMultiple: return "integer-multiple";
    case MatrixForm::ShortPacket: return "short-packet";
  }
  return "?";
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::ChainSolve: return "chain-solve";
    case Provenance::Simulation: return "simulation";
  }
  return "?";
}

IdleSystem build_A(double rho_A, double rho_C, int S, int l) {
  if (S < 1 || l < 1) throw ConfigError("slot_len and csma_len must be >= 1");
  const MatrixCoefficients c = matrix_coefficients(rho_A, rho_C, S, l);
  IdleSystem sys;
  sys.A = Eigen::MatrixXd::Zero(S, S);
  sys.b = Eigen::VectorXd::Zero(S);
  sys.b(0) = rho_A / S;

  if (l >= S) {
    const int r = l % S;
    sys.form = r == 0 ? MatrixForm::IntegerMultiple : MatrixForm::LongPacket;
    if (r == 0) {
      sys.A.row(0).setConstant(c.g);
      for (int d = 1; d < S; ++d) sys.A(d, d - 1) = c.f;
    } else {
      for (int j = 0; j < S; ++j) sys.A(0, j) = j < S - r ? c.h : c.e;
      for (int d = 1; d < S; ++d) {
        sys.A(d, d - 1) += c.v;
        sys.A(d, ((d - r - 1) % S + S) % S) += c.z;
      }
    }
  } else {
    sys.form = MatrixForm::ShortPacket;
    for (int j = S - l; j < S; ++j) sys.A(0, j) = c.u;
    for (int d = 1; d < S; ++d) {
      sys.A(d, d - 1) += c.v;
      if (d <= l) {
        sys.A(d, S - l - 1 + d) += c.z;
      } else {
        sys.A(d, d - l - 1) += c.w;
      }
    }
  }
  return sys;
}

IdleSystem build_A(const SystemConfig& cfg) {
  cfg.validate();
  const DerivedRates r = derive_rates(cfg);
  return build_A(r.rho_A, r.rho_C, cfg.slot_len, cfg.csma_len);
}

IdleSystem solve_idle(IdleSystem sys) {
  const Eigen::Index n = sys.A.rows();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - sys.A;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  if (!(lu.rcond() > 1e-13))
    throw DegenerateParameterError("I - A is singular at this parameterization");
  sys.y = lu.solve(sys.b);
  sys.y += lu.solve(sys.b - M * sys.y);
  sys.residual = (M * sys.y - sys.b).lpNorm<Eigen::Infinity>();
  if (sys.residual > 1e-12)
    throw SolverError("idle system residual " + std::to_string(sys.residual) + " exceeds 1e-12");
  sys.solved = true;
  return sys;
}

IdleSystem solve_idle(const SystemConfig& cfg) { return solve_idle(build_A(cfg)); }

std::vector<int> span_counts(int S, int l) {
  if (S < 1 || l < 1) throw ConfigError("slot_len and csma_len must be >= 1");
  std::vector<int> M(S);
  const int r = l % S;
  if (r == 0) {
    M[0] = l / S;
    for (int k = 1; k < S; ++k) M[k] = l / S + 1;
  } else {
    const int c = (l + S - 1) / S;
    for (int k = 0; k < S; ++k) M[k] = k <= S - r ? c : c + 1;
  }
  return M;
}

std::vector<int> span_counts(const SystemConfig& cfg) {
  return span_counts(cfg.slot_len, cfg.csma_len);
}

Evaluation throughputs_from_idle(const Eigen::VectorXd& y, const DerivedRates& r, int S, int l) {
  const std::vector<int> M = span_counts(S, l);
  Evaluation ev;
  ev.alpha_C = y.sum();

  // Time share at phase 0 not taken by the idle state or by CSMA
  // transmissions covering that mini-slot.
  double covered = (l / S) * ev.alpha_C;
  for (int m = 0; m < l % S; ++m) covered += y(model::wrap_index(-m, S));
  double busy_aloha = 1.0 / S - y(0) - (1.0 - r.rho_C) * covered;
  if (busy_aloha < 0.0 && busy_aloha > -1e-12) busy_aloha = 0.0;
  if (r.rho_A == 1.0) busy_aloha = 0.0;  // the subtraction leaves rounding residue
  ev.lambda_A = busy_aloha * r.success_A * S;

  double csma = 0.0;
  for (int k = 0; k < S; ++k) {
    const double starts = k > 0 ? y(k - 1) : r.rho_A * y(S - 1);
    const int tau = model::holding_time(make_state('I', 'B', k), S, l);
    const double limiting = tau * (1.0 - r.rho_C) * starts;
    csma += limiting * std::pow(r.rho_A, M[k] - 1) * l / tau;
  }
  ev.lambda_C = csma * r.success_C;
  return ev;
}

Evaluation evaluate(const DerivedRates& r, int S, int l) {
  if (l % S == 0) {
    const double den = closed_form::idle_denominator(r.rho_A, r.rho_C, S, l);
    const double aloha_den = (l / S) * r.rho_A * closed_form::one_minus_phi(r.rho_A, r.rho_C, S) +
                             1.0 - r.rho_A;
    if (r.rho_C < 1.0 && den > 0.0 && aloha_den > 0.0) {
      Evaluation ev;
      ev.alpha_C = closed_form::idle_fraction(r.rho_A, r.rho_C, S, l);
      ev.lambda_A = closed_form::aloha_throughput(r.aloha_nodes, r.rho_A, r.rho_C, S, l);
      ev.lambda_C = closed_form::csma_throughput(r.csma_nodes, r.rho_A, r.rho_C, S, l);
      ev.route = kRouteIntegerMultiple;
      return ev;
    }
  }
  const IdleSystem sys = solve_idle(build_A(r.rho_A, r.rho_C, S, l));
  Evaluation ev = throughputs_from_idle(sys.y, r, S, l);
  ev.route = kRouteGeneral;
  return ev;
}

Evaluation evaluate_chain(const model::EmbeddedChain& c) {
  const int S = c.slot_len;
  const int l = c.csma_len;
  const DerivedRates& r = c.rates;
  const std::vector<int> M = span_counts(S, l);
  Evaluation ev;
  ev.route = kRouteChain;
  ev.alpha_C = c.idle_fraction();
  ev.lambda_A = c.limiting(make_state('B', 'I', 0)) * r.success_A * S;
  double csma = 0.0;
  for (int k = 0; k < S; ++k) {
    const auto s = make_state('I', 'B', k);
    csma += c.limiting(s) * std::pow(r.rho_A, M[k] - 1) * l / model::holding_time(s, S, l);
  }
  ev.lambda_C = csma * r.success_C;
  return ev;
}

namespace {

void check_report(const ThroughputReport& rep) {
  constexpr double eps = 1e-12;
  auto in_unit = [](double x) { return x >= -eps && x <= 1.0 + eps; };
  if (!in_unit(rep.lambda_A) || !in_unit(rep.lambda_C) || !in_unit(rep.alpha_C) ||
      rep.lambda_total + rep.alpha_C > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "throughput report out of range: lambda_A=" << rep.lambda_A
       << " lambda_C=" << rep.lambda_C << " alpha_C=" << rep.alpha_C;
    throw ModelConsistencyError(os.str());
  }
}

}  // namespace

ThroughputReport throughput_report(const SystemConfig& cfg, Method method) {
  cfg.validate();
  const DerivedRates r = derive_rates(cfg);
  Evaluation ev;
  ThroughputReport rep;
  if (method == Method::ClosedForm) {
    ev = evaluate(r, cfg.slot_len, cfg.csma_len);
    rep.provenance = Provenance::ClosedForm;
  } else {
    ev = evaluate_chain(model::enumerate_chain(r, cfg.slot_len, cfg.csma_len));
    rep.provenance = Provenance::ChainSolve;
  }
  rep.lambda_A = ev.lambda_A;
  rep.lambda_C = ev.lambda_C;
  rep.lambda_total = ev.lambda_A + ev.lambda_C;
  rep.alpha_C = ev.alpha_C;
  rep.route = ev.route;
  check_report(rep);
  return rep;
}

double alpha_C(const SystemConfig& cfg) {
  cfg.validate();
  return evaluate(derive_rates(cfg), cfg.slot_len, cfg.csma_len).alpha_C;
}

double aloha_throughput(const SystemConfig& cfg) {
  cfg.validate();
  return evaluate(derive_rates(cfg), cfg.slot_len, cfg.csma_len).lambda_A;
}

double csma_throughput(const SystemConfig& cfg) {
  cfg.validate();
  return evaluate(derive_rates(cfg), cfg.slot_len, cfg.csma_len).lambda_C;
}

}  // namespace coexist::analytic
