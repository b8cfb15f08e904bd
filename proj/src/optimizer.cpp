#include "coexist/optimizer.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <sstream>
#include <mutex>
#include <thread>

#include "coexist/analytic.hpp"
#include "coexist/config.hpp"
#include "coexist/errors.hpp"

namespace coexist::optimizer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-300;

analytic::Evaluation evaluate_at(double rho_A, double rho_C, const RatioContext& ctx,
                                 RatioSolveStats* stats) {
  if (stats) ++stats->evaluations;
  const DerivedRates r =
      rates_from_idle(ctx.aloha_nodes, ctx.csma_nodes, rho_A, rho_C, ctx.slot_len);
  return analytic::evaluate(r, ctx.slot_len, ctx.csma_len);
}

// Probe points in s = log(1 - rho_C), ascending, i.e. rho_C descending from
// just below 1. The gap is close to linear in s where rho_C is near 1.
const std::vector<double>& scan_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int k = 24; k >= 2; k -= k > 10 ? 2 : 1) g.push_back(-k / 2.0 * std::log(10.0));
    for (double x : {0.85, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 1e-3})
      g.push_back(std::log1p(-x));
    return g;
  }();
  return grid;
}

constexpr double kMinS = -13.0 * 2.302585092994046;  // rho_C = 1 - 1e-13
constexpr double kMaxS = -1.0005e-3;                 // rho_C ~ 1e-3

double rho_c_of(double s) { return -std::expm1(s); }

// Gap is positive at lo and negative at hi; both in s coordinates.
struct Bracket {
  double lo, hi;
  double glo, ghi;
};

class RatioSolver {
 public:
  RatioSolver(double gamma, double rho_A, const RatioContext& ctx, RatioSolveStats* stats)
      : log_gamma_(std::log(gamma)), rho_A_(rho_A), ctx_(ctx), stats_(stats) {}

  // log(lambda_A / lambda_C) - log(gamma) at rho_C = 1 - exp(s).
  double gap(double s) {
    const auto ev = evaluate_at(rho_A_, rho_c_of(s), ctx_, stats_);
    return std::log(std::max(ev.lambda_A, kTiny)) - std::log(std::max(ev.lambda_C, kTiny)) -
           log_gamma_;
  }

  std::optional<Bracket> scan() {
    const auto& grid = scan_grid();
    double prev = grid.front();
    double gprev = gap(prev);
    if (!(gprev > 0.0)) return std::nullopt;
    double gmin = gprev;
    int rising = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double g = gap(grid[i]);
      if (g < 0.0) return Bracket{prev, grid[i], gprev, g};
      // The ratio has turned upward well above its minimum without reaching
      // gamma; no smaller rho_C can attain it.
      rising = g > gprev ? rising + 1 : 0;
      gmin = std::min(gmin, g);
      if (rising >= 2 && g > gmin + 1.0) return std::nullopt;
      prev = grid[i];
      gprev = g;
    }
    return std::nullopt;
  }

  // Expands a bracket around the previous root. Gives up (and lets the caller
  // scan) whenever the local shape is not the branch where the ratio grows
  // with rho_C.
  std::optional<Bracket> local(double s0) {
    const double g0 = gap(s0);
    double step = 0.05;
    double prev = s0, gprev = g0;
    if (g0 < 0.0) {
      for (int j = 0; j < 40; ++j) {
        const double s = std::max(prev - step, kMinS);
        const double g = gap(s);
        if (g > 0.0) return Bracket{s, prev, g, gprev};
        if (s <= kMinS) return std::nullopt;
        prev = s;
        gprev = g;
        step *= 2.0;
      }
      return std::nullopt;
    }
    for (int j = 0; j < 40; ++j) {
      const double s = std::min(prev + step, kMaxS);
      const double g = gap(s);
      if (g < 0.0) return Bracket{prev, s, gprev, g};
      if (g >= gprev || s >= kMaxS) return std::nullopt;
      prev = s;
      gprev = g;
      step *= 2.0;
    }
    return std::nullopt;
  }

  std::optional<double> refine(const Bracket& b, double tolerance) {
    const double target = std::log1p(tolerance) * 0.05;
    double best_s = std::abs(b.glo) < std::abs(b.ghi) ? b.lo : b.hi;
    double best_g = std::min(std::abs(b.glo), std::abs(b.ghi));
    bool done = best_g <= target;
    auto f = [&](double s) {
      const double g = gap(s);
      if (std::abs(g) < best_g) {
        best_g = std::abs(g);
        best_s = s;
      }
      if (best_g <= target) done = true;
      return g;
    };
    auto tol = [&](double a, double c) {
      return done || std::abs(c - a) <= 1e-15 * std::max(1.0, std::abs(c));
    };
    if (!done) {
      std::uintmax_t iters = 100;
      boost::math::tools::toms748_solve(f, b.lo, b.hi, b.glo, b.ghi, tol, iters);
    }
    if (std::expm1(best_g) > tolerance) return std::nullopt;
    return rho_c_of(best_s);
  }

 private:
  double log_gamma_;
  double rho_A_;
  RatioContext ctx_;
  RatioSolveStats* stats_;
};

std::vector<double> rho_a_grid(double step, int tail_stride) {
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor(1.0 / step));
  for (long k = 1; k <= n; ++k) {
    const double x = k * step;
    if (x < 1.0) g.push_back(x);
  }
  for (int j = 4; j <= 24; j += tail_stride) {
    g.push_back(std::pow(10.0, -j / 4.0));
    g.push_back(1.0 - std::pow(10.0, -j / 4.0));
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end(),
                      [](double a, double b) { return std::abs(a - b) < 1e-12; }),
          g.end());
  return g;
}

struct Point {
  double rho_A = 0.0;
  std::optional<double> rho_C;
  double total = kNegInf;
  double lambda_A = 0.0;
  double lambda_C = 0.0;
};

Point feasible_point(double gamma, double rho_A, const RatioContext& ctx, double tolerance,
                     std::optional<double> hint, RatioSolveStats* stats) {
  Point p;
  p.rho_A = rho_A;
  RatioSolveOptions opts;
  opts.tolerance = tolerance;
  opts.hint = hint;
  p.rho_C = ratio_solve_rho_c(gamma, rho_A, ctx, opts, stats);
  if (p.rho_C) {
    const auto ev = evaluate_at(rho_A, *p.rho_C, ctx, stats);
    p.lambda_A = ev.lambda_A;
    p.lambda_C = ev.lambda_C;
    p.total = ev.lambda_A + ev.lambda_C;
  }
  return p;
}

template <typename Fn>
void run_parallel(std::size_t n, int jobs, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::optional<double> ratio_solve_rho_c(double gamma, double rho_A, const RatioContext& ctx,
                                        const RatioSolveOptions& opts, RatioSolveStats* stats) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (!(rho_A > 0.0 && rho_A < 1.0)) throw ConfigError("rho_A must lie in (0,1)");
  RatioSolver solver(gamma, rho_A, ctx, stats);
  std::optional<Bracket> b;
  if (opts.hint && *opts.hint > 0.0 && *opts.hint < 1.0)
    b = solver.local(std::clamp(std::log1p(-*opts.hint), kMinS, kMaxS));
  if (!b) {
    if (opts.hint && stats) ++stats->scan_fallbacks;
    b = solver.scan();
  }
  if (!b) return std::nullopt;
  return solver.refine(*b, opts.tolerance);
}

void OptimizationSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (aloha_nodes < 1) throw ConfigError("the optimizer needs at least one Aloha node");
  if (csma_nodes < 1) throw ConfigError("the optimizer needs at least one CSMA node");
  if (slot_len < 1) throw ConfigError("slot_len must be >= 1");
  if (!(rho_a_step > 0.0 && rho_a_step < 0.5)) throw ConfigError("rho_a_step must lie in (0,0.5)");
  if (!(coarse_step > 0.0 && coarse_step < 0.5)) throw ConfigError("coarse_step must lie in (0,0.5)");
  if (!(ratio_tolerance > 0.0)) throw ConfigError("ratio_tolerance must be positive");
  for (int l : csma_len_candidates)
    if (l < 1) throw ConfigError("packet length candidates must be >= 1");
}

std::vector<int> OptimizationSpec::candidates() const {
  std::vector<int> c = csma_len_candidates;
  if (c.empty())
    for (int l = 1; l <= 3 * slot_len; ++l) c.push_back(l);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

const char* to_string(OptimizationMethod m) {
  switch (m) {
    case OptimizationMethod::Numeric: return "numeric";
    case OptimizationMethod::ClosedFormSingleAloha: return "closed-form-nA1";
    case OptimizationMethod::ClosedFormManyAloha: return "closed-form-nA-large";
  }
  return "?";
}

const char* to_string(OptimizationStatus s) {
  return s == OptimizationStatus::Optimal ? "optimal" : "infeasible";
}

LengthOptimum optimize_length(double gamma, const RatioContext& ctx, double step,
                              double tolerance, RatioSolveStats* stats, bool screening) {
  const std::vector<double> grid = rho_a_grid(step, screening ? 2 : 1);
  const double width = screening ? 1e-5 : 1e-8;
  std::vector<Point> pts;
  pts.reserve(grid.size());
  std::optional<double> hint;
  for (double x : grid) {
    pts.push_back(feasible_point(gamma, x, ctx, tolerance, hint, stats));
    if (pts.back().rho_C) hint = pts.back().rho_C;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].total > pts[best].total) best = i;

  LengthOptimum out;
  out.csma_len = ctx.csma_len;
  if (!pts[best].rho_C) return out;

  // Golden-section search on the neighbouring cells.
  Point top = pts[best];
  double lo = grid[best > 0 ? best - 1 : 0];
  double hi = grid[std::min(best + 1, grid.size() - 1)];
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto probe = [&](double x) {
    Point p = feasible_point(gamma, x, ctx, tolerance, top.rho_C, stats);
    if (p.total > top.total) top = p;
    return p.total;
  };
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = probe(x1);
  double f2 = probe(x2);
  while (hi - lo > width) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = probe(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = probe(x2);
    }
  }

  out.feasible = true;
  out.rho_A = top.rho_A;
  out.rho_C = *top.rho_C;
  out.lambda_A = top.lambda_A;
  out.lambda_C = top.lambda_C;
  out.lambda_total = top.total;
  return out;
}

OptimizationResult optimize(const OptimizationSpec& spec) {
  spec.validate();
  const std::vector<int> cands = spec.candidates();
  OptimizationResult res;
  res.gamma = spec.gamma;
  res.method = OptimizationMethod::Numeric;
  res.per_length.resize(cands.size());
  std::vector<RatioSolveStats> stats(cands.size());

  auto context = [&](int l) {
    return RatioContext{spec.aloha_nodes, spec.csma_nodes, spec.slot_len, l};
  };
  const bool two_stage = spec.coarse_step > spec.rho_a_step;
  const double first_step = two_stage ? spec.coarse_step : spec.rho_a_step;
  run_parallel(cands.size(), spec.jobs, [&](std::size_t i) {
    res.per_length[i] = optimize_length(spec.gamma, context(cands[i]), first_step,
                                        spec.ratio_tolerance, &stats[i], two_stage);
    res.per_length[i].refined = !two_stage;
  });

  if (two_stage) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < cands.size(); ++i)
      if (res.per_length[i].feasible) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return res.per_length[a].lambda_total > res.per_length[b].lambda_total;
    });
    std::vector<std::size_t> chosen;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const double v = res.per_length[order[k]].lambda_total;
      const double lead = res.per_length[order.front()].lambda_total;
      if (k < spec.refine_top || v >= lead * (1.0 - 1e-3)) chosen.push_back(order[k]);
    }
    run_parallel(chosen.size(), spec.jobs, [&](std::size_t k) {
      const std::size_t i = chosen[k];
      LengthOptimum fine = optimize_length(spec.gamma, context(cands[i]), spec.rho_a_step,
                                           spec.ratio_tolerance, &stats[i]);
      if (fine.feasible && fine.lambda_total >= res.per_length[i].lambda_total) {
        res.per_length[i] = fine;
      }
      res.per_length[i].refined = true;
    });
  }

  for (const auto& s : stats) {
    res.evaluations += s.evaluations;
    res.scan_fallbacks += s.scan_fallbacks;
  }

  const LengthOptimum* best = nullptr;
  for (const auto& p : res.per_length) {
    if (!p.feasible) continue;
    if (!best || p.lambda_total > best->lambda_total + 1e-9) best = &p;
  }
  if (!best) {
    res.status = OptimizationStatus::Infeasible;
    res.note = "no packet length and transmission probabilities attain the requested ratio";
    return res;
  }
  res.status = OptimizationStatus::Optimal;
  res.csma_len = best->csma_len;
  res.rho_A = best->rho_A;
  res.rho_C = best->rho_C;
  res.lambda_A = best->lambda_A;
  res.lambda_C = best->lambda_C;
  res.lambda_max = best->lambda_total;
  res.achieved_ratio = best->lambda_A / best->lambda_C;
  if (std::abs(res.achieved_ratio / spec.gamma - 1.0) > spec.ratio_tolerance)
    throw ModelConsistencyError("optimum violates the ratio constraint");
  return res;
}

double single_aloha_condition(double r, double gamma, int S, SingleAlohaEquation eq) {
  const double a = 1.0 / S;
  const double W = lambert_w0_exp((1.0 - r) * S);
  if (eq == SingleAlohaEquation::Printed) {
    return a * gamma * r * r * W * std::pow(1.0 - (1.0 - r) * (1.0 - W), S) -
           std::pow(1.0 - r, 3);
  }
  const double rho_C = a * W / (1.0 - r);
  const double Phi = std::pow(1.0 - (1.0 - r) * (1.0 - rho_C), S);
  return a * gamma * r * r * W * (1.0 - Phi) - std::pow(1.0 - r, 3);
}

OptimizationResult closed_form_optimum(double gamma, AlohaRegime regime, int S,
                                       SingleAlohaEquation eq) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (S < 1) throw ConfigError("slot_len must be >= 1");
  const double a = 1.0 / S;
  OptimizationResult res;
  res.gamma = gamma;
  res.csma_len = S;
  res.achieved_ratio = gamma;
  res.status = OptimizationStatus::Optimal;

  if (regime == AlohaRegime::Many) {
    const double root = std::sqrt(gamma * gamma + 4.0 * gamma);
    res.method = OptimizationMethod::ClosedFormManyAloha;
    res.rho_A = std::exp(0.5 * (gamma - root));
    const double inner =
        1.0 + 0.5 * (1.0 - std::sqrt(1.0 + 4.0 / gamma)) * std::expm1(0.5 * (root - gamma));
    res.rho_C = 1.0 + a * std::log(inner) / (1.0 - res.rho_A);
    res.lambda_max = (1.0 + gamma) * (root - gamma) * res.rho_A / (root + gamma);
    res.lambda_A = gamma * res.lambda_max / (1.0 + gamma);
    res.lambda_C = res.lambda_max / (1.0 + gamma);
    res.note = "approximation valid for rho_C near 1";
    return res;
  }

  res.method = OptimizationMethod::ClosedFormSingleAloha;
  auto f = [&](double r) { return single_aloha_condition(r, gamma, S, eq); };
  auto rho_c_of = [&](double r) { return a * lambert_w0_exp((1.0 - r) * S) / (1.0 - r); };
  constexpr int kProbes = 4000;
  double prev_x = 1e-9;
  double prev_f = f(prev_x);
  std::optional<std::pair<double, double>> bracket;
  for (int i = 1; i <= kProbes && !bracket; ++i) {
    const double x = std::min(static_cast<double>(i) / kProbes, 1.0 - 1e-9);
    const double fx = f(x);
    if (std::isfinite(prev_f) && std::isfinite(fx) && (prev_f < 0.0) != (fx < 0.0)) {
      const double rc = rho_c_of(0.5 * (prev_x + x));
      if (rc > 0.0 && rc < 1.0 - 1e-9) bracket = {prev_x, x};
    }
    prev_x = x;
    prev_f = fx;
  }
  if (!bracket) {
    std::ostringstream os;
    os << "no sign change of the n_A=1 optimality condition on [1e-9, 1-1e-9] (f(1e-9)="
       << f(1e-9) << ", f(0.5)=" << f(0.5) << ", f(1-1e-9)=" << f(1.0 - 1e-9) << ")";
    throw SolverError(os.str());
  }
  std::uintmax_t iters = 200;
  auto [lo, hi] = boost::math::tools::toms748_solve(
      f, bracket->first, bracket->second, boost::math::tools::eps_tolerance<double>(50), iters);
  if (iters >= 200) throw SolverError("n_A=1 root refinement did not converge");
  const double r = 0.5 * (lo + hi);
  res.rho_A = r;
  res.rho_C = rho_c_of(r);
  res.lambda_max = (1.0 + gamma) * (1.0 - r) * r / (r * (gamma - 1.0) + 1.0);
  res.lambda_A = gamma * res.lambda_max / (1.0 + gamma);
  res.lambda_C = res.lambda_max / (1.0 + gamma);
  res.note = eq == SingleAlohaEquation::Printed ? "printed grouping" : "regrouped condition";
  return res;
}

}  // namespace coexist::optimizer
