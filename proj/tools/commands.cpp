#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "coexist/analytic.hpp"
#include "coexist/casestudy.hpp"
#include "coexist/errors.hpp"
#include "coexist/optimizer.hpp"
#include "coexist/serialize.hpp"
#include "coexist/simulator.hpp"
#include "config_file.hpp"
#include "manifest.hpp"

namespace coexist::cli {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;
using casestudy::SweepRow;

struct Session {
  std::ostream& out;
  std::ostream& err;
  std::vector<std::string> args;
  bool write_files = true;
  Clock::time_point start = Clock::now();

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }
};

template <typename T>
CLI::Option* add_opt(CLI::App* app, const std::string& name, std::optional<T>& dst,
                     const std::string& desc) {
  return app->add_option_function<T>(name, [&dst](const T& v) { dst = v; }, desc);
}

// Counts like 1e8 are accepted as long as they are integral.
std::int64_t parse_count(const std::string& text, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !(v >= 1.0) || v > 9e18 || std::floor(v) != v)
    throw ConfigError(std::string(what) + " must be a positive integer, got '" + text + "'");
  return static_cast<std::int64_t>(v);
}

std::uint64_t parse_seed(const std::string& text, const char* origin) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] != '-') v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw ConfigError(std::string(origin) + " is not a valid 64-bit seed: '" + text + "'");
  return v;
}

std::uint64_t resolve_seed(const std::optional<std::string>& flag,
                           const std::optional<std::uint64_t>& from_file) {
  if (flag) return parse_seed(*flag, "--seed");
  if (from_file) return *from_file;
  if (const char* env = std::getenv("COEXIST_SEED"); env && *env)
    return parse_seed(env, "COEXIST_SEED");
  return 1;
}

// Values are either "a:b[:step]" or a comma list; an empty string is an
// empty range.
std::vector<double> parse_range(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v))
      throw ConfigError("bad range value '" + s + "' in '" + text + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3) throw ConfigError("range must be a:b or a:b:step");
    const double a = number(parts[0]);
    const double b = number(parts[1]);
    const double step = parts.size() == 3 ? number(parts[2]) : 1.0;
    if (!(step > 0.0)) throw ConfigError("range step must be > 0");
    if (b < a) return out;
    const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9)) + 1;
    if (n > 1'000'000) throw ConfigError("range has more than 1e6 points");
    for (long long i = 0; i < n; ++i) {
      // Trim accumulated representation error from a + i*step.
      const double v = a + static_cast<double>(i) * step;
      out.push_back(std::round(v * 1e12) / 1e12);
    }
    return out;
  }
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  return out;
}

std::vector<int> to_ints(const std::vector<double>& v, const char* what) {
  std::vector<int> out;
  for (double x : v) {
    if (std::floor(x) != x || std::abs(x) > 1e9)
      throw ConfigError(std::string(what) + " values must be integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), n);
  for (std::size_t k = 1; k < workers; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  f << content;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Shared option groups

struct Common {
  std::optional<std::string> config_path;
  std::optional<std::string> output;
  std::optional<std::string> manifest;
  ConfigFile file;

  void add(CLI::App* app) {
    add_opt(app, "--config", config_path, "JSON config file");
    add_opt(app, "--output", output, "also write the primary result to this path");
    add_opt(app, "--manifest", manifest, "manifest path (default: <output>.manifest.json)");
  }

  void load() {
    if (config_path) file = load_config(*config_path);
  }

  json config_file_json() const { return config_path ? file.doc() : json(); }
};

struct SystemFlags {
  std::optional<int> nA, nC, S, lC;
  std::optional<double> qA, qC, rhoA, rhoC;

  void add(CLI::App* app, bool with_len = true) {
    add_opt(app, "--nA", nA, "Aloha node count");
    add_opt(app, "--nC", nC, "CSMA node count");
    add_opt(app, "--qA", qA, "Aloha per-slot transmit probability");
    add_opt(app, "--qC", qC, "CSMA per-mini-slot transmit probability");
    add_opt(app, "--rhoA", rhoA, "probability that no Aloha node transmits");
    add_opt(app, "--rhoC", rhoC, "probability that no CSMA node transmits");
    add_opt(app, "--S", S, "mini-slots per Aloha slot");
    if (with_len) add_opt(app, "--lC", lC, "CSMA packet length in mini-slots");
  }
};

struct SystemDefaults {
  int nA = 20;
  int nC = 20;
  int S = 10;
  int lC = 10;
};

template <typename T>
T pick(const std::optional<T>& flag, const ConfigFile& file, const char* section, const char* key,
       T fallback) {
  if (flag) return *flag;
  if (auto v = file.get<T>(section, key)) return *v;
  return fallback;
}

double resolve_tx_prob(int nodes, std::optional<double> q, std::optional<double> rho,
                       const ConfigFile& file, const char* qkey, const char* rkey,
                       const char* net) {
  if (q && rho)
    throw ConfigError(std::string("over-specified ") + net + ": give --" + qkey + " or --" +
                      rkey + ", not both");
  if (!q && !rho) {
    q = file.get<double>("system", qkey);
    rho = file.get<double>("system", rkey);
    if (q && rho)
      throw ConfigError(std::string("over-specified ") + net + " in config: system." + qkey +
                        " and system." + rkey);
  }
  if (q) return *q;
  if (!rho)
    throw ConfigError(std::string("missing ") + net + " access probability: give --" + qkey +
                      " or --" + rkey);
  if (!(*rho >= 0.0 && *rho <= 1.0)) throw ConfigError(std::string(rkey) + " must lie in [0,1]");
  if (nodes == 0) {
    if (*rho != 1.0) throw ConfigError(std::string(rkey) + " must be 1 without nodes");
    return 0.0;
  }
  return tx_prob_from_idle(nodes, *rho);
}

SystemConfig resolve_system(const SystemFlags& f, const ConfigFile& file, SystemDefaults d) {
  SystemConfig c;
  c.aloha_nodes = pick(f.nA, file, "system", "nA", d.nA);
  c.csma_nodes = pick(f.nC, file, "system", "nC", d.nC);
  c.slot_len = pick(f.S, file, "system", "S", d.S);
  c.csma_len = pick(f.lC, file, "system", "lC", d.lC);
  if (c.aloha_nodes < 0 || c.csma_nodes < 0) throw ConfigError("node counts must be >= 0");
  c.aloha_tx_prob = resolve_tx_prob(c.aloha_nodes, f.qA, f.rhoA, file, "qA", "rhoA", "Aloha");
  c.csma_tx_prob = resolve_tx_prob(c.csma_nodes, f.qC, f.rhoC, file, "qC", "rhoC", "CSMA");
  c.validate();
  return c;
}

RunManifest base_manifest(const Session& s, const std::string& sub, const Common& common) {
  RunManifest m;
  m.subcommand = sub;
  m.argv = s.args;
  m.config_file = common.config_file_json();
  return m;
}

void emit_json(Session& s, const json& doc, const Common& common, RunManifest m) {
  s.out << doc.dump(2) << '\n';
  if (!s.write_files || !common.output) return;
  write_file(*common.output, doc.dump(2) + "\n");
  m.outputs.push_back(*common.output);
  m.wall_clock_seconds = s.elapsed();
  write_manifest(common.manifest ? *common.manifest : manifest_path_for(*common.output), m);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeCmd {
  Common common;
  SystemFlags system;
  std::optional<std::string> csv;
  std::optional<std::string> dump_chain;

  void add(CLI::App* app) {
    common.add(app);
    system.add(app);
    add_opt(app, "--csv", csv, "write both reports as CSV rows");
    add_opt(app, "--dump-chain", dump_chain,
            "write the embedded chain (states, P, tau, pi, pi_tilde) as JSON");
  }

  int run(Session& s) {
    common.load();
    const SystemConfig cfg = resolve_system(system, common.file, {});
    const auto closed = analytic::throughput_report(cfg, analytic::Method::ClosedForm);
    const auto chain = analytic::throughput_report(cfg, analytic::Method::ChainSolve);
    constexpr double tol = 1e-9;
    const json diff = {{"lambda_A", std::abs(closed.lambda_A - chain.lambda_A)},
                       {"lambda_C", std::abs(closed.lambda_C - chain.lambda_C)},
                       {"alpha_C", std::abs(closed.alpha_C - chain.alpha_C)}};
    double worst = 0.0;
    for (const auto& v : diff) worst = std::max(worst, v.get<double>());
    const bool agree = worst <= tol;
    const DerivedRates rates = derive_rates(cfg);

    json doc = {{"schema_version", kSchemaVersion},
                {"subcommand", "analyze"},
                {"config", cfg},
                {"rho_A", rates.rho_A},
                {"rho_C", rates.rho_C},
                {"route", closed.route},
                {"closed_form", closed},
                {"chain_solve", chain},
                {"difference", diff},
                {"max_abs_difference", worst},
                {"tolerance", tol},
                {"agree", agree}};

    RunManifest m = base_manifest(s, "analyze", common);
    m.config = {{"system", cfg}};
    if (csv && s.write_files) {
      std::ostringstream os;
      os << std::setprecision(15) << "method,lambda_A,lambda_C,lambda_total,alpha_C,route\n";
      for (const auto* r : {&closed, &chain})
        os << analytic::to_string(r->provenance) << ',' << r->lambda_A << ',' << r->lambda_C
           << ',' << r->lambda_total << ',' << r->alpha_C << ',' << r->route << '\n';
      write_file(*csv, os.str());
      RunManifest cm = m;
      cm.outputs = {*csv};
      cm.wall_clock_seconds = s.elapsed();
      write_manifest(manifest_path_for(*csv), cm);
    }
    if (dump_chain && s.write_files) {
      const json chain = model::enumerate_chain(cfg);
      write_file(*dump_chain, chain.dump(1) + "\n");
    }
    emit_json(s, doc, common, m);
    if (!agree) {
      s.err << "error: closed form and chain solve differ by " << worst << '\n';
      return kDualPathMismatch;
    }
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// optimize

struct OptimizeCmd {
  Common common;
  SystemFlags system;
  std::optional<double> gamma;
  std::optional<std::vector<int>> lc_set;
  std::optional<std::string> closed_form;
  std::optional<double> rho_a_step;
  std::optional<int> jobs;
  bool per_length = false;

  void add(CLI::App* app) {
    common.add(app);
    system.add(app, false);
    add_opt(app, "--gamma", gamma, "desired lambda_A / lambda_C");
    app->add_option_function<std::vector<int>>(
           "--lc-set", [this](const std::vector<int>& v) { lc_set = v; },
           "candidate CSMA packet lengths")
        ->delimiter(',');
    add_opt(app, "--closed-form", closed_form, "use the approximate optimum: nA1 or nAlarge")
        ->check(CLI::IsMember({"nA1", "nAlarge"}));
    add_opt(app, "--rho-a-step", rho_a_step, "rho_A grid step of the final search");
    add_opt(app, "--jobs", jobs, "worker threads");
    app->add_flag("--per-length", per_length, "include the best point of every candidate length");
  }

  int run(Session& s) {
    common.load();
    const ConfigFile& file = common.file;
    const double g = pick(gamma, file, "optimize", "gamma", std::numeric_limits<double>::quiet_NaN());
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("--gamma must be given and > 0");
    const auto form = closed_form ? closed_form : file.get<std::string>("optimize", "closed_form");
    if (form && *form != "nA1" && *form != "nAlarge")
      throw ConfigError("optimize.closed_form must be nA1 or nAlarge");

    const int default_nA = form && *form == "nAlarge" ? 50 : 1;
    const int nA = pick(system.nA, file, "system", "nA", default_nA);
    const int nC = pick(system.nC, file, "system", "nC", 20);
    const int S = pick(system.S, file, "system", "S", 20);

    optimizer::OptimizationResult res;
    json config = {{"system", {{"nA", nA}, {"nC", nC}, {"S", S}}}, {"optimize", {{"gamma", g}}}};
    if (form) {
      const auto regime =
          *form == "nA1" ? optimizer::AlohaRegime::Single : optimizer::AlohaRegime::Many;
      res = optimizer::closed_form_optimum(g, regime, S);
      config["optimize"]["closed_form"] = *form;
    } else {
      optimizer::OptimizationSpec spec;
      spec.gamma = g;
      spec.aloha_nodes = nA;
      spec.csma_nodes = nC;
      spec.slot_len = S;
      if (auto v = lc_set ? lc_set : file.get<std::vector<int>>("optimize", "lc_set"))
        spec.csma_len_candidates = *v;
      spec.rho_a_step = pick(rho_a_step, file, "optimize", "rho_a_step", spec.rho_a_step);
      spec.jobs = pick(jobs, file, "optimize", "jobs", 1);
      res = optimizer::optimize(spec);
      config["optimize"]["lc_set"] = spec.candidates();
      config["optimize"]["rho_a_step"] = spec.rho_a_step;
    }

    json out_res = res;
    if (!per_length) out_res.erase("per_length");
    json doc = {{"schema_version", kSchemaVersion}, {"subcommand", "optimize"}, {"result", out_res}};

    RunManifest m = base_manifest(s, "optimize", common);
    m.config = config;
    if (res.status != optimizer::OptimizationStatus::Optimal) {
      emit_json(s, doc, common, m);
      s.err << "error: " << res.note << '\n';
      return kInfeasible;
    }

    const SystemConfig at = SystemConfig::from_idle_probs(nA, nC, res.rho_A, res.rho_C, S,
                                                          res.csma_len);
    const auto rep = analytic::throughput_report(at, analytic::Method::ClosedForm);
    const double ratio = rep.lambda_A / rep.lambda_C;
    const double ratio_err = std::abs(ratio / g - 1.0);
    const double total_err = std::abs(rep.lambda_total - res.lambda_max);
    doc["verification"] = {{"lambda_A", rep.lambda_A},
                           {"lambda_C", rep.lambda_C},
                           {"lambda_total", rep.lambda_total},
                           {"ratio", ratio},
                           {"ratio_relative_error", ratio_err},
                           {"lambda_total_abs_error", total_err},
                           {"route", rep.route}};
    emit_json(s, doc, common, m);
    s.err << "verification: lambda_total=" << rep.lambda_total << " ratio=" << ratio
          << " (gamma " << g << ", relative error " << ratio_err << ")\n";
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimFlags {
  std::optional<std::string> mode;
  std::optional<std::string> T;
  std::optional<std::string> seed;
  std::optional<std::size_t> trace;
  bool audit = false;
  std::optional<int> nW, CW, lW, fail_overhead;
  std::optional<double> qL;
  bool exclusive_window = false;

  void add(CLI::App* app) {
    add_opt(app, "--mode", mode, "generic or wifi-lte")
        ->check(CLI::IsMember({"generic", "wifi-lte"}));
    add_opt(app, "--T", T, "duration in mini-slots");
    add_opt(app, "--seed", seed, "RNG seed (default: COEXIST_SEED or 1)");
    add_opt(app, "--trace", trace, "keep a channel trace of this many mini-slots");
    app->add_flag("--audit", audit, "check that successes overlap nothing");
    add_opt(app, "--nW", nW, "WiFi node count (wifi-lte)");
    add_opt(app, "--CW", CW, "backoff window (wifi-lte)");
    add_opt(app, "--lW", lW, "WiFi packet length (wifi-lte)");
    add_opt(app, "--qL", qL, "LTE-U transmit probability (wifi-lte)");
    add_opt(app, "--fail-overhead", fail_overhead, "mini-slots a failed WiFi packet omits");
    app->add_flag("--exclusive-window", exclusive_window,
                  "draw backoff counters from {0..CW-1} instead of {0..CW}");
  }
};

sim::SimConfig resolve_sim(const SimFlags& f, const SystemFlags& sys, const ConfigFile& file,
                           std::int64_t default_T) {
  sim::SimConfig c;
  const std::string mode = pick(f.mode, file, "sim", "mode", std::string("generic"));
  if (mode == "generic") {
    c.mode = sim::SimMode::Generic;
    c.system = resolve_system(sys, file, {});
  } else if (mode == "wifi-lte") {
    c.mode = sim::SimMode::WifiLte;
    sim::WifiLteConfig& w = c.wifi;
    w.wifi_nodes = pick(f.nW, file, "sim", "nW", 20);
    const auto cw = f.CW ? f.CW : file.get<int>("sim", "CW");
    const auto ql = f.qL ? f.qL : file.get<double>("sim", "qL");
    if (!cw || !ql) throw ConfigError("wifi-lte mode needs --CW and --qL");
    w.backoff_window = *cw;
    w.lte_tx_prob = *ql;
    w.wifi_len = pick(f.lW, file, "sim", "lW", 104);
    w.slot_len = pick(sys.S, file, "system", "S", 112);
    w.fail_overhead = pick(f.fail_overhead, file, "sim", "fail_overhead", 6);
    w.inclusive_window =
        f.exclusive_window ? false : file.get<bool>("sim", "inclusive_window").value_or(true);
  } else {
    throw ConfigError("sim.mode must be generic or wifi-lte");
  }
  if (f.T)
    c.duration = parse_count(*f.T, "--T");
  else
    c.duration = file.get<std::int64_t>("sim", "T").value_or(default_T);
  c.seed = resolve_seed(f.seed, file.get<std::uint64_t>("sim", "seed"));
  c.trace_limit = f.trace ? *f.trace : file.get<std::size_t>("sim", "trace").value_or(0);
  c.audit = f.audit || file.get<bool>("sim", "audit").value_or(false);
  c.validate();
  return c;
}

json sim_config_json(const sim::SimConfig& c) {
  json sim = {{"mode", sim::to_string(c.mode)}, {"T", c.duration}, {"seed", c.seed}};
  json out = json::object();
  if (c.mode == sim::SimMode::Generic) {
    out["system"] = c.system;
  } else {
    const sim::WifiLteConfig& w = c.wifi;
    sim.update({{"nW", w.wifi_nodes},
                {"CW", w.backoff_window},
                {"lW", w.wifi_len},
                {"qL", w.lte_tx_prob},
                {"inclusive_window", w.inclusive_window},
                {"fail_overhead", w.fail_overhead}});
    out["system"] = {{"S", w.slot_len}};
  }
  if (c.trace_limit) sim["trace"] = c.trace_limit;
  if (c.audit) sim["audit"] = true;
  out["sim"] = sim;
  return out;
}

struct SimulateCmd {
  Common common;
  SystemFlags system;
  SimFlags flags;
  std::optional<std::string> csv;

  void add(CLI::App* app) {
    common.add(app);
    system.add(app);
    flags.add(app);
    add_opt(app, "--csv", csv, "also write the result as a CSV row");
  }

  int run(Session& s) {
    common.load();
    const sim::SimConfig cfg = resolve_sim(flags, system, common.file, 10'000'000);
    const sim::SimResult r = sim::run(cfg);

    json result = r;
    if (cfg.audit) result["audit_violations"] = r.audit_violations;
    json doc = {{"schema_version", kSchemaVersion},
                {"subcommand", "simulate"},
                {"config", cfg},
                {"config_hash", hex64(sim::config_hash(cfg))},
                {"result", result}};

    RunManifest m = base_manifest(s, "simulate", common);
    m.config = sim_config_json(cfg);
    m.seeds = {cfg.seed};
    s.out << doc.dump(2) << '\n';
    if (s.write_files) {
      if (common.output) {
        write_file(*common.output, doc.dump(2) + "\n");
        m.outputs.push_back(*common.output);
      }
      if (csv) {
        std::ostringstream os;
        os << sim::kSimCsvHeader << '\n';
        sim::write_csv_row(os, r);
        write_file(*csv, os.str());
        m.outputs.push_back(*csv);
      }
      m.wall_clock_seconds = s.elapsed();
      const std::string path = common.manifest ? *common.manifest
                               : common.output ? manifest_path_for(*common.output)
                               : csv           ? manifest_path_for(*csv)
                                               : "simulate.manifest.json";
      write_manifest(path, m);
    }
    if (r.audit_violations > 0) {
      s.err << "error: " << r.audit_violations << " successful transmissions overlap others\n";
      return kDualPathMismatch;
    }
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// sweep

SweepRow failed_row(double p, const std::string& why) {
  SweepRow r;
  r.parameter = p;
  r.method = "failed";
  r.error = why;
  return r;
}

SweepRow row_from(double p, double a, double c, const char* method, std::uint64_t seed) {
  SweepRow r;
  r.parameter = p;
  r.lambda_A = a;
  r.lambda_C = c;
  r.lambda_total = a + c;
  r.ratio = c > 0.0 ? a / c : std::numeric_limits<double>::infinity();
  r.method = method;
  r.seed = seed;
  return r;
}

SweepRow analytic_row(double p, const SystemConfig& cfg) {
  const auto rep = analytic::throughput_report(cfg, analytic::Method::ClosedForm);
  return row_from(p, rep.lambda_A, rep.lambda_C, "analytic", 0);
}

SweepRow generic_sim_row(double p, const SystemConfig& cfg, std::int64_t T, std::uint64_t seed) {
  sim::SimConfig c;
  c.system = cfg;
  c.duration = T;
  c.seed = seed;
  const auto r = sim::run(c);
  return row_from(p, r.lambda_A, r.lambda_C, "simulation", seed);
}

SweepRow wifi_sim_row(double p, const sim::WifiLteConfig& w, std::int64_t T, std::uint64_t seed) {
  sim::SimConfig c;
  c.mode = sim::SimMode::WifiLte;
  c.wifi = w;
  c.duration = T;
  c.seed = seed;
  const auto r = sim::run(c);
  return row_from(p, r.lambda_A, r.lambda_C, "simulation", seed);
}

struct SweepCmd {
  Common common;
  SystemFlags system;
  std::optional<std::string> vary, range, against, preset, output_dir, T, seed;
  std::optional<double> gamma;
  std::optional<int> nW, jobs;
  std::optional<std::vector<int>> lc_set;

  void add(CLI::App* app) {
    common.add(app);
    system.add(app);
    add_opt(app, "--vary", vary, "axis: lC, rhoA, gamma, nW or lW")
        ->check(CLI::IsMember({"lC", "rhoA", "gamma", "nW", "lW"}));
    add_opt(app, "--range", range, "a:b[:step] or a comma list");
    add_opt(app, "--against", against, "analytic or sim")
        ->check(CLI::IsMember({"analytic", "sim"}));
    add_opt(app, "--preset", preset, "figure preset: fig7a or fig9a")
        ->check(CLI::IsMember({"fig7a", "fig9a"}));
    add_opt(app, "--output-dir", output_dir, "directory for preset CSV files");
    add_opt(app, "--T", T, "simulation duration in mini-slots");
    add_opt(app, "--seed", seed, "RNG seed");
    add_opt(app, "--gamma", gamma, "throughput proportion for optimizing axes");
    add_opt(app, "--nW", nW, "WiFi node count for the lW axis");
    add_opt(app, "--jobs", jobs, "worker threads");
    app->add_option_function<std::vector<int>>(
           "--lc-set", [this](const std::vector<int>& v) { lc_set = v; },
           "candidate lengths for the gamma axis")
        ->delimiter(',');
  }

  struct Plan {
    std::string name;  // curve label, empty for a single sweep
    std::vector<double> params;
    std::function<SweepRow(double)> eval;
  };

  bool simulate = false;
  std::int64_t duration = 0;
  std::uint64_t rng_seed = 1;
  int workers = 1;

  std::vector<SweepRow> evaluate(const Plan& p) const {
    std::vector<double> params = p.params;
    std::stable_sort(params.begin(), params.end());
    std::vector<SweepRow> rows(params.size());
    parallel_for(params.size(), workers, [&](std::size_t i) {
      try {
        rows[i] = p.eval(params[i]);
      } catch (const std::exception& e) {
        rows[i] = failed_row(params[i], e.what());
      }
    });
    return rows;
  }

  Plan axis_plan(const std::string& axis, std::vector<double> params, const ConfigFile& file) {
    Plan plan;
    plan.params = std::move(params);
    const std::int64_t T = duration;
    const std::uint64_t sd = rng_seed;
    const bool use_sim = simulate;
    const double g = pick(gamma, file, "casestudy", "gamma", 1.0);

    if (axis == "lC" || axis == "rhoA") {
      const SystemConfig base = resolve_system(system, file, {});
      plan.eval = [=](double p) {
        SystemConfig c = base;
        if (axis == "lC") {
          c.csma_len = to_ints({p}, "lC").front();
        } else {
          if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("rhoA must lie in [0,1]");
          c.aloha_tx_prob = c.aloha_nodes > 0 ? tx_prob_from_idle(c.aloha_nodes, p) : 0.0;
        }
        c.validate();
        return use_sim ? generic_sim_row(p, c, T, sd) : analytic_row(p, c);
      };
    } else if (axis == "gamma") {
      const int nA = pick(system.nA, file, "system", "nA", 1);
      const int nC = pick(system.nC, file, "system", "nC", 20);
      const int S = pick(system.S, file, "system", "S", 20);
      const auto cands = lc_set ? *lc_set
                                : file.get<std::vector<int>>("optimize", "lc_set").value_or(
                                      std::vector<int>{});
      plan.eval = [=](double p) {
        optimizer::OptimizationSpec spec;
        spec.gamma = p;
        spec.aloha_nodes = nA;
        spec.csma_nodes = nC;
        spec.slot_len = S;
        spec.csma_len_candidates = cands;
        const auto res = optimizer::optimize(spec);
        if (res.status != optimizer::OptimizationStatus::Optimal)
          throw InfeasibleError("infeasible at gamma " + std::to_string(p));
        if (!use_sim) return row_from(p, res.lambda_A, res.lambda_C, "analytic", 0);
        const auto c =
            SystemConfig::from_idle_probs(nA, nC, res.rho_A, res.rho_C, S, res.csma_len);
        return generic_sim_row(p, c, T, sd);
      };
    } else if (axis == "nW") {
      const int S = pick(system.S, file, "casestudy", "S", 112);
      plan.eval = [=](double p) {
        casestudy::DeploymentInput in;
        in.wifi_nodes = to_ints({p}, "nW").front();
        in.gamma = g;
        in.slot_len = S;
        const auto d = casestudy::derive_deployment(in);
        if (!use_sim)
          return row_from(p, d.predicted.lambda_A, d.predicted.lambda_C, "analytic", 0);
        return wifi_sim_row(p, d.wifi_config(), T, sd);
      };
    } else {  // lW
      casestudy::DeploymentInput in;
      in.wifi_nodes = pick(nW, file, "casestudy", "nW", 20);
      in.gamma = g;
      in.slot_len = pick(system.S, file, "casestudy", "S", 112);
      in.jobs = workers;
      const auto d = std::make_shared<casestudy::DeploymentConfig>(
          casestudy::derive_deployment(in));
      plan.eval = [=](double p) {
        const sim::WifiLteConfig w = d->wifi_config(to_ints({p}, "lW").front());
        if (use_sim) return wifi_sim_row(p, w, T, sd);
        return analytic_row(p, w.as_system());
      };
    }
    return plan;
  }

  std::vector<Plan> preset_plans(const std::string& name, const ConfigFile& file) {
    std::vector<Plan> plans;
    const std::int64_t T = duration;
    const std::uint64_t sd = rng_seed;
    const bool use_sim = simulate;
    if (name == "fig7a") {
      // Aloha throughput against rho_A for several CSMA packet lengths.
      const auto params = parse_range(range ? *range : "0.01:0.99:0.01");
      const double rhoC = system.rhoC ? *system.rhoC : 0.5;
      auto curve = [&](const std::string& label, int lC, double rc) {
        Plan p;
        p.name = label;
        p.params = params;
        p.eval = [=](double rhoA) {
          const auto c = SystemConfig::from_idle_probs(20, 20, rhoA, rc, 10, lC);
          return use_sim ? generic_sim_row(rhoA, c, T, sd) : analytic_row(rhoA, c);
        };
        plans.push_back(p);
      };
      for (int lC : {1, 5, 10, 15, 30}) curve("lC" + std::to_string(lC), lC, rhoC);
      curve("rhoC1", 10, 1.0);
    } else {
      // Total throughput against gamma at the optimal CW and q_L.
      const auto params = parse_range(range ? *range : "0.1,0.2,0.5,1,2,5,10");
      const int nWv = pick(nW, file, "casestudy", "nW", 20);
      auto curve = [&](const std::string& label, int fixed) {
        Plan p;
        p.name = label;
        p.params = params;
        p.eval = [=](double g) {
          casestudy::DeploymentInput in;
          in.wifi_nodes = nWv;
          in.gamma = g;
          in.slot_len = 112;
          in.fixed_wifi_len = fixed;
          const auto d = casestudy::derive_deployment(in);
          if (use_sim) return wifi_sim_row(g, d.wifi_config(), T, sd);
          return row_from(g, d.optimum.lambda_A, d.optimum.lambda_C, "analytic", 0);
        };
        plans.push_back(p);
      };
      for (int l : {40, 112, 224}) curve("lC" + std::to_string(l), l);
      curve("lCopt", 0);
    }
    return plans;
  }

  int run(Session& s) {
    common.load();
    const ConfigFile& file = common.file;
    simulate = against && *against == "sim";
    duration = T ? parse_count(*T, "--T") : 10'000'000;
    rng_seed = resolve_seed(seed, std::nullopt);
    workers = jobs.value_or(1);

    RunManifest m = base_manifest(s, "sweep", common);
    m.seeds = {rng_seed};
    m.config = {{"sweep",
                 {{"vary", vary.value_or("")},
                  {"range", range.value_or("")},
                  {"against", simulate ? "sim" : "analytic"},
                  {"T", duration}}}};

    std::size_t total = 0, failed = 0;
    auto tally = [&](const std::vector<SweepRow>& rows) {
      total += rows.size();
      for (const auto& r : rows) failed += r.method == "failed";
    };

    if (preset) {
      if (vary) throw ConfigError("--preset and --vary are mutually exclusive");
      const std::string dir = output_dir.value_or(".");
      if (s.write_files) std::filesystem::create_directories(dir);
      json files = json::array();
      for (const Plan& p : preset_plans(*preset, file)) {
        const auto rows = evaluate(p);
        tally(rows);
        const std::string path = (std::filesystem::path(dir) / (*preset + "_" + p.name + ".csv"))
                                     .string();
        if (s.write_files) {
          std::ofstream f(path);
          if (!f) throw Error("cannot write " + path);
          casestudy::write_sweep_csv(f, rows);
          m.outputs.push_back(path);
        }
        files.push_back({{"curve", p.name}, {"path", path}, {"rows", rows.size()}});
      }
      m.figure = *preset;
      m.wall_clock_seconds = s.elapsed();
      if (s.write_files)
        write_manifest(common.manifest ? *common.manifest
                                       : (std::filesystem::path(dir) / (*preset + ".manifest.json"))
                                             .string(),
                       m);
      s.out << json{{"schema_version", kSchemaVersion},
                    {"subcommand", "sweep"},
                    {"figure", *preset},
                    {"files", files},
                    {"rows", total},
                    {"failed", failed}}
                   .dump(2)
            << '\n';
    } else {
      if (!vary) throw ConfigError("sweep needs --vary or --preset");
      const auto rows = evaluate(axis_plan(*vary, parse_range(range.value_or("")), file));
      tally(rows);
      std::ostringstream csv;
      casestudy::write_sweep_csv(csv, rows);
      if (common.output && s.write_files) {
        write_file(*common.output, csv.str());
        m.outputs.push_back(*common.output);
        m.wall_clock_seconds = s.elapsed();
        write_manifest(common.manifest ? *common.manifest : manifest_path_for(*common.output), m);
      } else {
        s.out << csv.str();
      }
      for (const auto& r : rows)
        if (r.method == "failed") s.err << "row " << r.parameter << " failed: " << r.error << '\n';
    }

    if (total > 0 && static_cast<double>(total - failed) < 0.9 * static_cast<double>(total)) {
      s.err << "error: " << failed << " of " << total << " rows failed\n";
      return kFailure;
    }
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// casestudy

struct CasestudyCmd {
  Common common;
  std::optional<int> nW, S, lW_max, jobs;
  std::optional<double> gamma;
  std::optional<std::string> robust, lw_range, nw_range, T, seed, csv;
  bool no_sim = false;

  void add(CLI::App* app) {
    common.add(app);
    add_opt(app, "--nW", nW, "WiFi node count");
    add_opt(app, "--gamma", gamma, "agreed LTE-U / WiFi throughput proportion");
    add_opt(app, "--S", S, "mini-slots per LTE-U ON period");
    add_opt(app, "--lW-max", lW_max, "largest WiFi packet length searched");
    add_opt(app, "--robust", robust, "robustness table: lw or nw")
        ->check(CLI::IsMember({"lw", "nw"}));
    add_opt(app, "--lw-range", lw_range, "WiFi packet lengths for --robust lw");
    add_opt(app, "--nw-range", nw_range, "true WiFi node counts for --robust nw");
    add_opt(app, "--T", T, "simulation duration in mini-slots");
    add_opt(app, "--seed", seed, "RNG seed");
    add_opt(app, "--csv", csv, "robustness CSV path");
    add_opt(app, "--jobs", jobs, "worker threads");
    app->add_flag("--no-sim", no_sim, "skip the simulated check of the deployment");
  }

  int run(Session& s) {
    common.load();
    const ConfigFile& file = common.file;
    casestudy::DeploymentInput in;
    in.wifi_nodes = pick(nW, file, "casestudy", "nW", 20);
    in.gamma = pick(gamma, file, "casestudy", "gamma", 1.0);
    in.slot_len = pick(S, file, "casestudy", "S", 112);
    in.max_wifi_len = pick(lW_max, file, "casestudy", "lW_max", 0);
    in.jobs = jobs.value_or(1);
    const std::int64_t duration =
        T ? parse_count(*T, "--T") : file.get<std::int64_t>("casestudy", "T").value_or(100'000'000);
    const std::uint64_t sd = resolve_seed(seed, file.get<std::uint64_t>("casestudy", "seed"));
    const auto kind = robust ? robust : file.get<std::string>("casestudy", "robust");
    if (kind && *kind != "lw" && *kind != "nw")
      throw ConfigError("casestudy.robust must be lw or nw");

    const casestudy::DeploymentConfig d = casestudy::derive_deployment(in);
    json doc = {{"schema_version", kSchemaVersion}, {"subcommand", "casestudy"}, {"deployment", d}};

    RunManifest m = base_manifest(s, "casestudy", common);
    m.seeds = {sd};
    m.config = {{"casestudy",
                 {{"nW", in.wifi_nodes},
                  {"gamma", in.gamma},
                  {"S", in.slot_len},
                  {"lW_max", in.max_wifi_len},
                  {"T", duration},
                  {"seed", sd}}}};

    if (!no_sim) {
      sim::SimConfig c;
      c.mode = sim::SimMode::WifiLte;
      c.wifi = d.wifi_config();
      c.duration = duration;
      c.seed = sd;
      const auto r = sim::run(c);
      doc["simulation"] = {{"result", r},
                           {"ratio", r.lambda_C > 0.0 ? json(r.lambda_A / r.lambda_C) : json()}};
    }

    if (kind) {
      casestudy::RobustnessOptions opts;
      opts.duration = duration;
      opts.seed = sd;
      opts.jobs = in.jobs;
      std::vector<SweepRow> rows;
      auto range_for = [&](const std::optional<std::string>& flag, const char* key,
                           const std::string& fallback) {
        if (flag) return *flag;
        if (auto v = file.get<std::vector<int>>("casestudy", key)) return range_text(*v);
        return fallback;
      };
      if (*kind == "lw") {
        const std::string fallback =
            std::to_string(std::max(1, d.wifi_len - 8)) + ":" + std::to_string(in.slot_len);
        const auto lens = to_ints(parse_range(range_for(lw_range, "lw_range", fallback)), "lw-range");
        rows = casestudy::robustness_lw(d, lens, opts);
      } else {
        const auto counts = to_ints(parse_range(range_for(nw_range, "nw_range", "10:40")), "nw-range");
        rows = casestudy::robustness_nw(d, counts, opts);
      }
      const std::string path = csv.value_or("casestudy_robust_" + *kind + ".csv");
      if (s.write_files) {
        std::ofstream f(path);
        if (!f) throw Error("cannot write " + path);
        casestudy::write_sweep_csv(f, rows);
        RunManifest cm = m;
        cm.outputs = {path};
        cm.wall_clock_seconds = s.elapsed();
        write_manifest(manifest_path_for(path), cm);
      }
      doc["robust"] = {{"kind", *kind}, {"csv", path}, {"rows", rows}};
    }
    emit_json(s, doc, common, m);
    return kOk;
  }

  // [a, b] from a two-element config array.
  static std::string range_text(const std::vector<int>& v) {
    if (v.size() != 2) throw ConfigError("range arrays must hold [first, last]");
    return std::to_string(v[0]) + ":" + std::to_string(v[1]);
  }
};

// ---------------------------------------------------------------------------
// replay

int run_session(Session& s);

struct ReplayCmd {
  std::string manifest;

  void add(CLI::App* app) {
    app->add_option("manifest", manifest, "manifest written by an earlier run")->required();
  }

  int run(Session& s) {
    const RunManifest m = read_manifest(manifest);
    std::vector<std::string> args;
    std::optional<std::filesystem::path> tmp;
    static const std::vector<std::string> drop = {"--output", "--manifest", "--csv",
                                                  "--output-dir", "--seed"};
    for (std::size_t i = 0; i < m.argv.size(); ++i) {
      const std::string& a = m.argv[i];
      const auto eq = a.find('=');
      const std::string key = a.substr(0, eq);
      if (std::find(drop.begin(), drop.end(), key) != drop.end()) {
        if (eq == std::string::npos) ++i;
        continue;
      }
      if (key == "--config") {
        if (eq == std::string::npos) ++i;
        tmp = std::filesystem::temp_directory_path() /
              ("coexist-replay-" + std::to_string(std::hash<std::string>{}(manifest)) + ".json");
        write_file(tmp->string(), m.config_file.dump());
        args.push_back("--config");
        args.push_back(tmp->string());
        continue;
      }
      args.push_back(a);
    }
    if (!m.seeds.empty() && m.subcommand != "analyze" && m.subcommand != "optimize") {
      args.push_back("--seed");
      args.push_back(std::to_string(m.seeds.front()));
    }
    Session inner{s.out, s.err, args, false};
    const int code = run_session(inner);
    if (tmp) std::filesystem::remove(*tmp);
    return code;
  }
};

int run_session(Session& s) {
  CLI::App app{"Throughput analysis, optimization and simulation of coexisting Aloha and CSMA "
               "networks",
               "coexist"};
  app.set_version_flag("--version", COEXIST_VERSION);
  app.require_subcommand(1);

  AnalyzeCmd analyze;
  OptimizeCmd optimize;
  SimulateCmd simulate;
  SweepCmd sweep;
  CasestudyCmd casestudy;
  ReplayCmd replay;
  auto* a = app.add_subcommand("analyze", "closed-form and chain-solve throughput reports");
  auto* o = app.add_subcommand("optimize", "maximize total throughput at a throughput ratio");
  auto* m = app.add_subcommand("simulate", "discrete-event simulation");
  auto* w = app.add_subcommand("sweep", "CSV tables over one parameter axis");
  auto* c = app.add_subcommand("casestudy", "LTE-U / WiFi deployment parameters");
  auto* r = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  analyze.add(a);
  optimize.add(o);
  simulate.add(m);
  sweep.add(w);
  casestudy.add(c);
  replay.add(r);

  try {
    std::vector<std::string> rev(s.args.rbegin(), s.args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    s.out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    s.out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    s.out << COEXIST_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    s.err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  try {
    if (a->parsed()) return analyze.run(s);
    if (o->parsed()) return optimize.run(s);
    if (m->parsed()) return simulate.run(s);
    if (w->parsed()) return sweep.run(s);
    if (c->parsed()) return casestudy.run(s);
    if (r->parsed()) return replay.run(s);
  } catch (const ConfigError& e) {
    s.err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const DegenerateParameterError& e) {
    s.err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const InfeasibleError& e) {
    s.err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ModelConsistencyError& e) {
    s.err << "error: " << e.what() << '\n';
    return kDualPathMismatch;
  } catch (const std::exception& e) {
    s.err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Session s{out, err, args};
  return run_session(s);
}

}  // namespace coexist::cli
