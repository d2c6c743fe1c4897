// msvcj: command-line front end for the pricing library.
//
// Exit codes: 0 success, 2 validation error, 3 resource-cap error, 1 other.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "msvcj/aiv.hpp"
#include "msvcj/bermudan.hpp"
#include "msvcj/calibration.hpp"
#include "msvcj/config.hpp"
#include "msvcj/errors.hpp"
#include "msvcj/european.hpp"
#include "msvcj/montecarlo.hpp"

using nlohmann::json;
using namespace msvcj;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Common {
  std::string config;
  std::string out;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  long long seed = -1;  // negative: take numerics.seed
};

void add_common(CLI::App* cmd, Common& c, bool need_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "Model configuration (JSON)");
  if (need_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "Write the JSON result here instead of stdout");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", c.seed, "Random seed (overrides numerics.seed)");
}

ModelConfig load(const Common& c) {
  ModelConfig cfg = load_config(c.config);
  if (c.seed >= 0) cfg.numerics.seed = static_cast<std::uint64_t>(c.seed);
  return cfg;
}

void emit(const Common& c, const json& result) {
  const std::string text = result.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out);
  require(static_cast<bool>(f), "cli", "cannot write " + c.out);
  f << text;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cli", "cannot write " + path);
  f.precision(17);
  return f;
}

PricingOptions pricing_options(const ModelConfig& cfg) {
  PricingOptions o;
  o.orders = cfg.numerics.orders;
  o.aiv = cfg.numerics.aiv();
  return o;
}

json bound_json(const BoundedCount& b) {
  return b.saturated ? json("overflow") : json(b.value);
}

// ---------------------------------------------------------------- aiv

struct AivArgs {
  Common common;
  int steps = 0;
  std::string algo = "rr";
  std::string csv;
};

int cmd_aiv(const AivArgs& a) {
  const ModelConfig cfg = load(a.common);
  const ChainSpec& chain = cfg.model.chain;
  const int L = a.steps > 0 ? a.steps : horizon_steps(chain, cfg.market.maturity);
  const int m = static_cast<int>(chain.num_states());

  AivStats stats;
  const auto t0 = Clock::now();
  const AivDistribution d =
      a.algo == "ce" ? aiv_ce(chain, L, cfg.numerics.path_cap, cfg.numerics.key_digits)
                     : aiv_rr(chain, L, cfg.numerics.aiv(), &stats);
  const double wall = seconds_since(t0);

  if (!a.csv.empty()) {
    auto f = open_csv(a.csv);
    f << "v,prob\n";
    for (std::size_t i = 0; i < d.size(); ++i) f << d.support[i] << ',' << d.probs[i] << '\n';
  }
  json out{{"command", "aiv"},
           {"algorithm", a.algo},
           {"L", L},
           {"m", m},
           {"support_size", d.size()},
           {"support_bound", bound_json(support_bound(m, L))},
           {"triple_bound", bound_json(triple_bound(m, L))},
           {"mean", d.mean()},
           {"total_probability", d.total_probability()},
           {"seconds", wall},
           {"config", to_json(cfg)}};
  if (a.algo == "rr") {
    out["total_triples"] = stats.total_triples;
    out["peak_live_triples"] = stats.peak_live_triples;
    out["layer_triples"] = stats.layer_triples;
  }
  if (!a.csv.empty()) out["csv"] = a.csv;
  emit(a.common, out);
  return 0;
}

// ---------------------------------------------------------------- price-eu

int cmd_price_eu(const Common& c) {
  const ModelConfig cfg = load(c);
  const auto t0 = Clock::now();
  const PriceResult r = price_european(cfg.market, cfg.model, pricing_options(cfg));
  const double wall = seconds_since(t0);
  emit(c, json{{"command", "price-eu"},
               {"model", to_string(cfg.model.kind())},
               {"price", r.price},
               {"delta", r.delta},
               {"n_max", r.n_max},
               {"support_size", r.support_size},
               {"truncation_mass_dropped", r.truncation_mass_dropped},
               {"b_hat", r.b_hat},
               {"orders", {r.orders.hermite, r.orders.laguerre}},
               {"seconds", wall},
               {"config", to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------- price-berm

struct BermArgs {
  Common common;
  std::string schedule = "0.5:6";
  std::vector<int> n{200};
  std::string method = "both";
  std::vector<double> spots;
  double span = 2.0;
  int hermite = 16, laguerre = 4;
  std::string csv;
};

int cmd_price_berm(const BermArgs& a) {
  const ModelConfig cfg = load(a.common);
  const ExerciseSchedule sched = ExerciseSchedule::parse(a.schedule);
  const std::vector<double> spots = a.spots.empty() ? std::vector<double>{cfg.market.spot} : a.spots;

  BermudanOptions opt;
  opt.method = a.method == "tangent"  ? BoundMethod::tangent
               : a.method == "secant" ? BoundMethod::secant
                                      : BoundMethod::both;
  opt.grid_span = a.span;
  opt.kernel.orders = {a.hermite, a.laguerre};
  opt.kernel.aiv = cfg.numerics.aiv();

  const auto t0 = Clock::now();
  IntervalKernel kernel(cfg.model, sched.interval, cfg.market.rate, cfg.market.dividend_yield,
                        opt.kernel);
  const double kernel_seconds = seconds_since(t0);

  json runs = json::array();
  std::map<int, std::vector<BermudanResult>> table;
  for (int n : a.n) {
    opt.n_points = n;
    const auto t1 = Clock::now();
    auto res = price_bermudan(cfg.model, cfg.market, sched, spots, opt, kernel);
    const double wall = seconds_since(t1);
    json rows = json::array();
    for (const auto& r : res) {
      json row{{"spot", r.spot}};
      if (r.has_lower) row["tangent"] = r.lower_bound, row["tangent_delta"] = r.lower_delta;
      if (r.has_upper) row["secant"] = r.upper_bound, row["secant_delta"] = r.upper_delta;
      rows.push_back(row);
    }
    runs.push_back({{"n", n}, {"seconds", wall}, {"results", rows}});
    table[n] = std::move(res);
  }

  if (!a.csv.empty()) {
    auto f = open_csv(a.csv);
    f << "n,method";
    for (double s : spots) f << ",S0=" << s;
    f << '\n';
    for (const auto& [n, res] : table) {
      if (res.front().has_lower) {
        f << n << ",tangent";
        for (const auto& r : res) f << ',' << r.lower_bound;
        f << '\n';
      }
      if (res.front().has_upper) {
        f << n << ",secant";
        for (const auto& r : res) f << ',' << r.upper_bound;
        f << '\n';
      }
    }
  }
  emit(a.common, json{{"command", "price-berm"},
                      {"model", to_string(cfg.model.kind())},
                      {"schedule", a.schedule},
                      {"method", a.method},
                      {"grid_span", a.span},
                      {"orders", {a.hermite, a.laguerre}},
                      {"tabulated_kernel", kernel.tabulated()},
                      {"kernel_seconds", kernel_seconds},
                      {"runs", runs},
                      {"config", to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------- mc / lsm

struct McArgs {
  Common common;
  long paths = 100'000;
  int runs = 10;
  int substeps = 1500;
  bool antithetic = false;
  bool exact = false;
  bool relocate = false;
  std::string schedule = "0.5:6";
  int degree = 3;
  std::string csv;
};

SimConfig sim_config(const McArgs& a, const ModelConfig& cfg) {
  SimConfig s;
  s.n_paths = a.paths;
  s.n_runs = a.runs;
  s.n_substeps = a.substeps;
  s.antithetic = a.antithetic;
  s.seed = cfg.numerics.seed;
  s.threads = a.common.threads;
  return s;
}

json estimate_json(const McEstimate& e) {
  return {{"mean", e.mean},
          {"std_err", e.std_err},
          {"mean_std_err", e.mean_std_err},
          {"ci95", {e.mean - 1.96 * e.mean_std_err, e.mean + 1.96 * e.mean_std_err}},
          {"path_variance", e.path_variance},
          {"runs", e.runs}};
}

void write_runs(const std::string& path, const McEstimate& e) {
  if (path.empty()) return;
  auto f = open_csv(path);
  f << "run,estimate\n";
  for (std::size_t i = 0; i < e.runs.size(); ++i) f << i << ',' << e.runs[i] << '\n';
}

int cmd_mc(const McArgs& a) {
  const ModelConfig cfg = load(a.common);
  const SimConfig sim = sim_config(a, cfg);
  const auto t0 = Clock::now();
  const McEstimate e = a.exact ? mc_exact_conditional(cfg.model, cfg.market, sim, a.relocate)
                               : mc_european(cfg.model, cfg.market, sim);
  const double wall = seconds_since(t0);
  write_runs(a.csv, e);
  json out = estimate_json(e);
  out["command"] = "mc";
  out["estimator"] = a.exact ? (a.relocate ? "exact_conditional_relocated" : "exact_conditional")
                             : "euler";
  out["paths"] = a.paths;
  out["substeps"] = a.substeps;
  out["seed"] = sim.seed;
  out["seconds"] = wall;
  out["config"] = to_json(cfg);
  emit(a.common, out);
  return 0;
}

int cmd_lsm(const McArgs& a) {
  const ModelConfig cfg = load(a.common);
  const SimConfig sim = sim_config(a, cfg);
  const ExerciseSchedule sched = ExerciseSchedule::parse(a.schedule);
  const auto t0 = Clock::now();
  const McEstimate e = lsm_bermudan(cfg.model, cfg.market, sched, sim, a.degree);
  const double wall = seconds_since(t0);
  write_runs(a.csv, e);
  json out = estimate_json(e);
  out["command"] = "lsm";
  out["schedule"] = a.schedule;
  out["basis_degree"] = a.degree;
  out["paths"] = a.paths;
  out["antithetic"] = a.antithetic;
  out["seed"] = sim.seed;
  out["seconds"] = wall;
  out["config"] = to_json(cfg);
  emit(a.common, out);
  return 0;
}

// ---------------------------------------------------------------- bias

int cmd_bias(const Common& c) {
  const ModelConfig cfg = load(c);
  require(cfg.model.kind() == ModelSpec::Kind::ms_svcj, "cli",
          "bias needs an MS-SVCJ config (jumps and pea blocks)");
  const JumpSpec& jump = *cfg.model.jump;
  const double T = cfg.market.maturity;
  const int n_max = truncate_jumps(jump, T).n_max;
  const double eb = jump_time_bias(jump, *cfg.model.pea, T, n_max);
  const PriceResult p = price_european(cfg.market, cfg.model, pricing_options(cfg));
  const double iv = implied_volatility(p.price, cfg.market);
  emit(c, json{{"command", "bias"},
               {"n_max", n_max},
               {"expected_bias", eb},
               {"price", p.price},
               {"implied_vol", iv},
               {"implied_vol_impact", implied_vol_impact(iv, eb)},
               {"config", to_json(cfg)}});
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibArgs {
  Common common;
  std::string prices;
  std::string quotes;
  long iters = 20000;
  double k_f = 1.5;
  std::vector<double> lambda_box{0.1, 20.0};
  std::vector<double> mu_box{-0.2, 0.1};
  std::vector<double> eps2_box{1e-4, 0.05};
  std::vector<double> rate_points;  // t1 r1 t2 r2
  std::string quote_date;
  std::string csv;
};

int cmd_calibrate(const CalibArgs& a) {
  ModelConfig cfg = load(a.common);
  json out{{"command", "calibrate"}};

  if (!a.prices.empty()) {
    const ReturnSeries series = load_prices_csv(a.prices);
    const BoxplotSplit split = boxplot_split(series, a.k_f);
    out["boxplot"] = {{"k_f", split.k_f},
                      {"q1", split.q1},
                      {"q3", split.q3},
                      {"iqr", split.iqr},
                      {"lower_fence", split.lower},
                      {"upper_fence", split.upper},
                      {"returns", split.jump_indices.size() + split.diffusion_indices.size()},
                      {"jumps", split.jump_indices.size()},
                      {"zero_jump", split.zero_jump},
                      {"jump_intensity", split.jump_intensity},
                      {"jump_mean", split.jump_mean},
                      {"jump_var", split.jump_var}};
  }

  if (!a.rate_points.empty()) {
    require(a.rate_points.size() == 4, "cli", "--rate-points takes t1 r1 t2 r2");
    cfg.market.rate = interpolate_rate(a.rate_points[0], a.rate_points[1], a.rate_points[2],
                                       a.rate_points[3], cfg.market.maturity);
  }
  const auto quotes = load_quotes_csv(a.quotes, cfg.market.maturity, a.quote_date);

  auto box = [](const std::vector<double>& v, bool log_scale, const char* name) {
    require(v.size() == 2, "cli", std::string("--") + name + " takes lo hi");
    return SearchBox{v[0], v[1], log_scale && v[0] > 0.0};
  };
  CalibrationSearch search;
  search.iterations = a.iters;
  search.seed = cfg.numerics.seed;
  search.threads = a.common.threads;
  search.intensity = box(a.lambda_box, true, "lambda-box");
  search.log_mean = box(a.mu_box, false, "mu-box");
  search.log_var = box(a.eps2_box, true, "eps2-box");

  PricingOptions po = pricing_options(cfg);
  const auto t0 = Clock::now();
  const CalibrationResult r = calibrate_jumps(cfg.model, cfg.market, quotes, search, po);
  const double wall = seconds_since(t0);

  json fits = json::array();
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const double mid = quotes[i].mid(), model = r.model_prices[i];
    fits.push_back({{"strike", quotes[i].strike},
                    {"bid", quotes[i].bid},
                    {"ask", quotes[i].ask},
                    {"mid", mid},
                    {"model", model},
                    {"bias", (model - mid) / mid}});
  }
  if (!a.csv.empty()) {
    auto f = open_csv(a.csv);
    f << "iteration,best_objective\n";
    for (std::size_t i = 0; i < r.best_so_far.size(); ++i)
      f << i + 1 << ',' << r.best_so_far[i] << '\n';
  }
  for (const auto& d : r.diagnostics) std::cerr << d << '\n';
  out["rate"] = cfg.market.rate;
  out["lambda"] = r.intensity;
  out["mu"] = r.log_mean;
  out["eps2"] = r.log_var;
  out["objective"] = r.objective;
  out["evaluated"] = r.evaluated;
  out["rejected"] = r.rejected;
  out["iterations"] = a.iters;
  out["seed"] = search.seed;
  out["quotes"] = fits;
  out["seconds"] = wall;
  out["config"] = to_json(cfg);
  emit(a.common, out);
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<int> m{2, 3, 4, 5, 6};
  std::vector<int> ce_L{15, 16, 17, 18, 19, 20, 25, 30};
  std::vector<int> rr_L{20, 25, 30, 35, 40, 45, 50};
  std::vector<std::string> algos{"ce", "rr"};
  int repeats = 3;
  double path_cap = 1e8;
  std::string out;
  std::string summary;
};

// Dense chain on m generic levels (0.01 sqrt(p_k), p_k the k-th prime), so
// distinct occupation counts never share a variance sum.
ChainSpec bench_chain(int m, int L) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  require(m >= 1 && m <= 12, "cli", "bench supports 1 <= m <= 12");
  std::vector<double> vars;
  for (int k = 0; k < m; ++k) vars.push_back(0.01 * std::sqrt(static_cast<double>(primes[k])));
  std::vector<std::vector<double>> P(static_cast<std::size_t>(m),
                                     std::vector<double>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) P[i][j] = m == 1 ? 1.0 : (i == j ? 0.5 : 0.5 / (m - 1));
  return ChainSpec::from_variances(vars, P, 1.0 / L, 0);
}

std::string result_hash(const AivDistribution& d) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (std::size_t i = 0; i < d.size(); ++i) {
    mix(static_cast<std::uint64_t>(d.keys[i]));
    mix(static_cast<std::uint64_t>(std::llround(d.probs[i] * 1e12)));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int cmd_bench(const BenchArgs& a) {
  std::ostringstream csv;
  csv << "algo,m,L,seconds,repeats,result_hash\n";
  std::map<std::pair<int, int>, std::string> rr_hash, ce_hash;
  std::map<int, std::vector<std::pair<double, double>>> rr_times;
  int mismatches = 0;
  const auto cap = static_cast<std::uint64_t>(a.path_cap);

  for (const auto& algo : a.algos) {
    require(algo == "ce" || algo == "rr", "cli", "unknown algorithm " + algo);
    for (int m : a.m)
      for (int L : algo == "ce" ? a.ce_L : a.rr_L) {
        const ChainSpec chain = bench_chain(m, L);
        if (algo == "ce") {
          const auto paths = PathEnumerator::count_paths(chain.num_states(), L);
          if (!paths || *paths > cap) {
            csv << "ce," << m << ',' << L << ",skipped," << a.repeats << ",oom\n";
            continue;
          }
        }
        std::vector<double> secs;
        AivDistribution d;
        try {
          for (int r = 0; r < a.repeats; ++r) {
            const auto t0 = Clock::now();
            d = algo == "ce" ? aiv_ce(chain, L, cap) : aiv_rr(chain, L);
            secs.push_back(seconds_since(t0));
          }
        } catch (const ResourceCapError&) {
          csv << algo << ',' << m << ',' << L << ",skipped," << a.repeats << ",oom\n";
          continue;
        }
        std::sort(secs.begin(), secs.end());
        const double med = secs[secs.size() / 2];
        const std::string hash = result_hash(d);
        csv << algo << ',' << m << ',' << L << ',' << med << ',' << a.repeats << ',' << hash
            << '\n';
        (algo == "ce" ? ce_hash : rr_hash)[{m, L}] = hash;
        if (algo == "rr") rr_times[m].emplace_back(std::log(L), std::log(med));
        std::cerr << algo << " m=" << m << " L=" << L << " " << med << "s\n";
      }
  }
  json summary{{"command", "bench"}};
  json checks = json::array();
  // RR is only run on rr_L; compare wherever both algorithms saw the same (m, L).
  for (const auto& [key, h] : ce_hash) {
    std::string other = rr_hash.count(key) ? rr_hash[key] : result_hash(aiv_rr(
                                                               bench_chain(key.first, key.second),
                                                               key.second));
    const bool same = other == h;
    mismatches += !same;
    checks.push_back({{"m", key.first}, {"L", key.second}, {"equal", same}});
  }
  json slopes = json::object();
  for (const auto& [m, pts] : rr_times) {
    if (pts.size() < 2) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) sx += x, sy += y, sxx += x * x, sxy += x * y;
    const double n = static_cast<double>(pts.size());
    slopes[std::to_string(m)] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  summary["ce_rr_equal"] = checks;
  summary["rr_loglog_slope"] = slopes;

  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(a.out);
    require(static_cast<bool>(f), "cli", "cannot write " + a.out);
    f << csv.str();
  }
  if (!a.summary.empty()) {
    std::ofstream f(a.summary);
    require(static_cast<bool>(f), "cli", "cannot write " + a.summary);
    f << summary.dump(2) << '\n';
  } else {
    std::cerr << summary.dump() << '\n';
  }
  return mismatches ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Option pricing under Markov-switching stochastic volatility with co-jumps"};
  app.require_subcommand(1);

  AivArgs aiv;
  auto* c_aiv = app.add_subcommand("aiv", "Distribution of average integrated variance");
  add_common(c_aiv, aiv.common);
  c_aiv->add_option("--steps", aiv.steps, "Chain steps L (default maturity / tau)");
  c_aiv->add_option("--algo", aiv.algo, "rr or ce")->check(CLI::IsMember({"rr", "ce"}));
  c_aiv->add_option("--csv", aiv.csv, "Write v,prob rows here");

  Common eu;
  auto* c_eu = app.add_subcommand("price-eu", "European option price");
  add_common(c_eu, eu);

  BermArgs berm;
  auto* c_berm = app.add_subcommand("price-berm", "Bermudan lower/upper bounds");
  add_common(c_berm, berm.common);
  c_berm->add_option("--schedule", berm.schedule, "interval:count, e.g. 0.5:6");
  c_berm->add_option("--n", berm.n, "Interpolation points (one run per value)");
  c_berm->add_option("--method", berm.method)->check(CLI::IsMember({"tangent", "secant", "both"}));
  c_berm->add_option("--spots", berm.spots, "Spots to value (default market.spot)");
  c_berm->add_option("--span", berm.span, "Grid half-width in units of sbar sqrt(T)");
  c_berm->add_option("--hermite", berm.hermite, "Hermite order of the interval kernel");
  c_berm->add_option("--laguerre", berm.laguerre, "Laguerre order of the interval kernel");
  c_berm->add_option("--csv", berm.csv, "Convergence table: n,method,one column per spot");

  McArgs mc;
  auto* c_mc = app.add_subcommand("mc", "Monte Carlo European price");
  add_common(c_mc, mc.common);
  c_mc->add_option("--paths", mc.paths, "Paths per run");
  c_mc->add_option("--runs", mc.runs, "Independent runs");
  c_mc->add_option("--substeps", mc.substeps, "Euler substeps over [0, T]");
  c_mc->add_flag("--antithetic", mc.antithetic, "Antithetic normals");
  c_mc->add_flag("--exact", mc.exact, "Exact conditional variance instead of Euler sums");
  c_mc->add_flag("--relocate", mc.relocate, "With --exact: move jumps of [T-Delta,T] to T-Delta");
  c_mc->add_option("--csv", mc.csv, "Per-run estimates");

  McArgs lsm;
  lsm.paths = 100'000;
  auto* c_lsm = app.add_subcommand("lsm", "Least-squares Monte Carlo Bermudan price");
  add_common(c_lsm, lsm.common);
  c_lsm->add_option("--schedule", lsm.schedule, "interval:count, e.g. 0.5:6");
  c_lsm->add_option("--paths", lsm.paths, "Paths per run");
  c_lsm->add_option("--runs", lsm.runs, "Independent runs");
  c_lsm->add_option("--degree", lsm.degree, "Polynomial degree of the regression basis");
  c_lsm->add_flag("--antithetic", lsm.antithetic, "Antithetic normals");
  c_lsm->add_option("--csv", lsm.csv, "Per-run estimates");

  Common bias;
  auto* c_bias = app.add_subcommand("bias", "Expected AIV bias of the jump-time relocation");
  add_common(c_bias, bias);

  CalibArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Box-plot jump split and jump calibration");
  add_common(c_cal, cal.common);
  c_cal->add_option("--prices", cal.prices, "date,close CSV")->check(CLI::ExistingFile);
  c_cal->add_option("--quotes", cal.quotes, "strike,bid,ask CSV")
      ->required()
      ->check(CLI::ExistingFile);
  c_cal->add_option("--iters", cal.iters, "Random-search candidates");
  c_cal->add_option("--kf", cal.k_f, "Box-plot fence multiplier");
  c_cal->add_option("--lambda-box", cal.lambda_box, "lo hi (log-scaled)")->expected(2);
  c_cal->add_option("--mu-box", cal.mu_box, "lo hi")->expected(2);
  c_cal->add_option("--eps2-box", cal.eps2_box, "lo hi (log-scaled)")->expected(2);
  c_cal->add_option("--rate-points", cal.rate_points,
                    "t1 r1 t2 r2: interpolate the rate to the quote maturity")
      ->expected(4);
  c_cal->add_option("--quote-date", cal.quote_date);
  c_cal->add_option("--csv", cal.csv, "Best objective after each candidate");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "CE vs RR timing study");
  c_bench->add_option("--m", bench.m, "State counts");
  c_bench->add_option("--ce-L", bench.ce_L, "Horizons for CE");
  c_bench->add_option("--rr-L", bench.rr_L, "Horizons for RR");
  c_bench->add_option("--algos", bench.algos)->check(CLI::IsMember({"ce", "rr"}));
  c_bench->add_option("--repeats", bench.repeats)->check(CLI::PositiveNumber);
  c_bench->add_option("--path-cap", bench.path_cap, "CE entries above this path count are skipped");
  c_bench->add_option("--out", bench.out, "CSV output (default stdout)");
  c_bench->add_option("--summary", bench.summary, "JSON with equality checks and slopes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_aiv->parsed()) return cmd_aiv(aiv);
    if (c_eu->parsed()) return cmd_price_eu(eu);
    if (c_berm->parsed()) return cmd_price_berm(berm);
    if (c_mc->parsed()) return cmd_mc(mc);
    if (c_lsm->parsed()) return cmd_lsm(lsm);
    if (c_bias->parsed()) return cmd_bias(bias);
    if (c_cal->parsed()) return cmd_calibrate(cal);
    if (c_bench->parsed()) return cmd_bench(bench);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ResourceCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
