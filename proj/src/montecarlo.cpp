#include "msvcj/montecarlo.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "montecarlo";

using Rng = std::mt19937_64;

// Independent stream per run; identical across estimators so that paired
// comparisons see the same regime paths and jumps.
Rng run_stream(std::uint64_t seed, int run) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(run), 0x6d73u};
  return Rng(seq);
}

struct Jumps {
  std::vector<double> times;  // ascending
  std::vector<double> logs;   // ln J_i
  double log_sum = 0.0;
};

struct PathSampler {
  const ModelSpec& model;
  double horizon;
  int steps;  // chain steps over the horizon
  std::vector<double> cum;  // row-wise cumulative transition probabilities

  PathSampler(const ModelSpec& m, double T) : model(m), horizon(T) {
    steps = horizon_steps(m.chain, T);
    const std::size_t k = m.chain.num_states();
    cum.resize(k * k);
    for (std::size_t i = 0; i < k; ++i) {
      double c = 0.0;
      for (std::size_t j = 0; j < k; ++j) cum[i * k + j] = (c += m.chain.transition(i, j));
    }
  }

  // states[l] = sigma_l, l = 0..steps-1
  void chain(Rng& rng, std::vector<std::size_t>& states) const {
    const std::size_t k = model.chain.num_states();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    states.resize(static_cast<std::size_t>(steps));
    std::size_t s = model.chain.initial_state();
    for (int l = 0; l < steps; ++l) {
      states[static_cast<std::size_t>(l)] = s;
      const double x = u(rng) * cum[s * k + k - 1];
      std::size_t j = 0;
      while (j + 1 < k && cum[s * k + j] <= x) ++j;
      s = j;
    }
  }

  void jumps(Rng& rng, Jumps& out) const {
    out.times.clear();
    out.logs.clear();
    out.log_sum = 0.0;
    if (!model.jump || model.jump->intensity == 0.0) return;
    const JumpSpec& js = *model.jump;
    std::poisson_distribution<int> count(js.intensity * horizon);
    std::uniform_real_distribution<double> u(0.0, horizon);
    std::normal_distribution<double> size(js.log_mean, std::sqrt(js.log_var));
    const int n = count(rng);
    for (int i = 0; i < n; ++i) out.times.push_back(u(rng));
    std::sort(out.times.begin(), out.times.end());
    for (int i = 0; i < n; ++i) {
      out.logs.push_back(js.log_var > 0.0 ? size(rng) : js.log_mean);
      out.log_sum += out.logs.back();
    }
  }

  double chain_variance(const std::vector<std::size_t>& states, int from, int to) const {
    double v = 0.0;
    const auto vars = model.chain.variances();
    for (int l = from; l < to; ++l) v += vars[states[static_cast<std::size_t>(l)]];
    return v * model.chain.step();
  }

  // Exact integral over [a, b] of the PEA spikes of the jumps in `j`.
  double pea_exact(const Jumps& j, double a, double b, bool relocate) const {
    if (!model.pea || model.pea->proportional_coeff == 0.0) return 0.0;
    const PeaSpec& p = *model.pea;
    double v = 0.0;
    for (std::size_t i = 0; i < j.times.size(); ++i) {
      double t = j.times[i];
      if (relocate && t > horizon - p.duration) t = horizon - p.duration;
      const double lo = std::max(a, t), hi = std::min(b, t + p.duration);
      if (hi <= lo) continue;
      v += p.proportional_coeff * j.logs[i] * j.logs[i] / p.attenuation *
           (std::exp(-p.attenuation * (lo - t)) - std::exp(-p.attenuation * (hi - t)));
    }
    return v;
  }

  // Left-point sum h * sum_k f(t_k), t_k = k h, over k = 0..n-1, for the
  // spike f(t) = c e^{-beta (t - t_i)} on t_i < t <= t_i + Delta.
  double pea_euler(const Jumps& j, int n) const {
    if (!model.pea || model.pea->proportional_coeff == 0.0) return 0.0;
    const PeaSpec& p = *model.pea;
    const double h = horizon / n;
    const double ratio = std::exp(-p.attenuation * h);
    double v = 0.0;
    for (std::size_t i = 0; i < j.times.size(); ++i) {
      const double t = j.times[i];
      const long first = static_cast<long>(std::floor(t / h)) + 1;
      long last = static_cast<long>(std::floor((t + p.duration) / h));
      if ((last)*h > t + p.duration) --last;
      last = std::min<long>(last, n - 1);
      if (last < first) continue;
      const long count = last - first + 1;
      const double c = p.proportional_coeff * j.logs[i] * j.logs[i];
      v += c * h * std::exp(-p.attenuation * (first * h - t)) * (1.0 - std::pow(ratio, count)) /
           (1.0 - ratio);
    }
    return v;
  }
};

double drift_rate(const ModelSpec& model, const MarketSpec& market) {
  const double comp = model.jump ? model.jump->intensity * model.jump->mean_jump() : 0.0;
  return market.rate - market.dividend_yield - comp;
}

// Runs `per_run(run, rng, sum, sum_sq)` for every run, spread over threads,
// and reduces in run order.
McEstimate run_all(const SimConfig& sim,
                   const std::function<double(int, Rng&, double&)>& per_run) {
  McEstimate est;
  est.runs.assign(static_cast<std::size_t>(sim.n_runs), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(sim.n_runs), 0.0);
  const int threads = std::max(1, std::min(sim.threads, sim.n_runs));
  auto work = [&](int t) {
    for (int r = t; r < sim.n_runs; r += threads) {
      Rng rng = run_stream(sim.seed, r);
      double sumsq = 0.0;
      est.runs[static_cast<std::size_t>(r)] = per_run(r, rng, sumsq);
      sq[static_cast<std::size_t>(r)] = sumsq;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  double s = 0.0;
  for (double v : est.runs) s += v;
  est.mean = s / sim.n_runs;
  if (sim.n_runs > 1) {
    double ss = 0.0;
    for (double v : est.runs) ss += (v - est.mean) * (v - est.mean);
    est.std_err = std::sqrt(ss / (sim.n_runs - 1));
    est.mean_std_err = est.std_err / std::sqrt(static_cast<double>(sim.n_runs));
  }
  // Pooled per-path variance: E[x^2] - E[x]^2 within each run, averaged.
  double pv = 0.0;
  for (std::size_t r = 0; r < sq.size(); ++r) pv += sq[r] - est.runs[r] * est.runs[r];
  est.path_variance = pv / sim.n_runs * sim.n_paths / std::max(1.0, sim.n_paths - 1.0);
  return est;
}

double payoff(OptionKind kind, double s, double k) {
  return kind == OptionKind::call ? std::max(s - k, 0.0) : std::max(k - s, 0.0);
}

template <class PathValue>
McEstimate terminal_estimator(const ModelSpec& model, const MarketSpec& market,
                              const SimConfig& sim, PathValue value) {
  model.validate();
  market.validate();
  sim.validate();
  const PathSampler sampler(model, market.maturity);
  return run_all(sim, [&](int, Rng& rng, double& sumsq) {
    std::vector<std::size_t> states;
    Jumps jumps;
    std::normal_distribution<double> z(0.0, 1.0);
    double sum = 0.0;
    for (long p = 0; p < sim.n_paths; ++p) {
      sampler.chain(rng, states);
      sampler.jumps(rng, jumps);
      const double x = value(sampler, states, jumps, rng, z);
      sum += x;
      sumsq += x * x;
    }
    sumsq /= static_cast<double>(sim.n_paths);
    return sum / static_cast<double>(sim.n_paths);
  });
}

}  // namespace

void SimConfig::validate() const {
  require(n_substeps >= 1, kModule, "n_substeps must be >= 1");
  require(n_paths >= 1, kModule, "n_paths must be >= 1");
  require(n_runs >= 1, kModule, "n_runs must be >= 1");
  require(threads >= 1, kModule, "threads must be >= 1");
}

McEstimate mc_european(const ModelSpec& model, const MarketSpec& market, const SimConfig& sim) {
  const int L = horizon_steps(model.chain, market.maturity);
  require(sim.n_substeps % L == 0, kModule,
          "n_substeps (" + std::to_string(sim.n_substeps) + ") must be a multiple of L = T/tau (" +
              std::to_string(L) + ") so regime switches fall on the Euler grid");
  const double T = market.maturity;
  const double mu = drift_rate(model, market);
  const double disc = std::exp(-market.rate * T);
  return terminal_estimator(
      model, market, sim,
      [&](const PathSampler& s, const std::vector<std::size_t>& states, const Jumps& j, Rng& rng,
          std::normal_distribution<double>& z) {
        // With substeps aligned to the chain grid the left-point sum of the
        // regime part is exactly tau * sum sigma_l^2.
        const double v = s.chain_variance(states, 0, s.steps) + s.pea_euler(j, sim.n_substeps);
        const double base = std::log(market.spot) + mu * T - 0.5 * v + j.log_sum;
        const double g = z(rng) * std::sqrt(v);
        double x = payoff(market.kind, std::exp(base + g), market.strike);
        if (sim.antithetic) x = 0.5 * (x + payoff(market.kind, std::exp(base - g), market.strike));
        return disc * x;
      });
}

McEstimate mc_exact_conditional(const ModelSpec& model, const MarketSpec& market,
                                const SimConfig& sim, bool relocate) {
  const double T = market.maturity;
  const double comp = model.jump ? model.jump->intensity * model.jump->mean_jump() : 0.0;
  return terminal_estimator(
      model, market, sim,
      [&](const PathSampler& s, const std::vector<std::size_t>& states, const Jumps& j, Rng&,
          std::normal_distribution<double>&) {
        const double v = s.chain_variance(states, 0, s.steps) + s.pea_exact(j, 0.0, T, relocate);
        return bs_price(market.spot * std::exp(-comp * T + j.log_sum), v / T, market.rate,
                        market.dividend_yield, T, market.strike, market.kind)
            .price;
      });
}

McEstimate mc_discounted_spot(const ModelSpec& model, const MarketSpec& market,
                              const SimConfig& sim) {
  const double T = market.maturity;
  const double mu = drift_rate(model, market);
  const double disc = std::exp(-market.rate * T);
  return terminal_estimator(
      model, market, sim,
      [&](const PathSampler& s, const std::vector<std::size_t>& states, const Jumps& j, Rng& rng,
          std::normal_distribution<double>& z) {
        const double v = s.chain_variance(states, 0, s.steps) + s.pea_euler(j, sim.n_substeps);
        return disc * market.spot * std::exp(mu * T - 0.5 * v + j.log_sum + z(rng) * std::sqrt(v));
      });
}

McEstimate lsm_bermudan(const ModelSpec& model, const MarketSpec& market,
                        const ExerciseSchedule& schedule, const SimConfig& sim,
                        int basis_degree) {
  model.validate();
  schedule.validate();
  sim.validate();
  require(basis_degree >= 1, kModule, "basis_degree must be >= 1");
  MarketSpec mk = market;
  mk.maturity = schedule.maturity();
  mk.validate();
  const int N = schedule.num_intervals;
  const int per = horizon_steps(model.chain, schedule.interval);
  const PathSampler sampler(model, mk.maturity);
  const double mu = drift_rate(model, mk);
  const double dt = schedule.interval;
  const double K = mk.strike;
  const auto n = static_cast<std::size_t>(sim.n_paths);

  return run_all(sim, [&](int, Rng& rng, double& sumsq) {
    std::vector<std::size_t> states;
    Jumps jumps;
    std::normal_distribution<double> z(0.0, 1.0);
    // spot[p * N + i] = S at t_{i+1}
    std::vector<double> spot(n * static_cast<std::size_t>(N));
    std::vector<double> zs(static_cast<std::size_t>(N));
    for (std::size_t p = 0; p < n; ++p) {
      // Antithetic pairs share the regime path and jumps and flip the normals.
      const bool mirror = sim.antithetic && p % 2 == 1;
      if (!mirror) {
        sampler.chain(rng, states);
        sampler.jumps(rng, jumps);
        for (double& zi : zs) zi = z(rng);
      } else {
        for (double& zi : zs) zi = -zi;
      }
      double log_s = std::log(mk.spot);
      std::size_t next_jump = 0;
      for (int i = 0; i < N; ++i) {
        const double a = i * dt, b = (i + 1) * dt;
        const double v = sampler.chain_variance(states, i * per, (i + 1) * per) +
                         sampler.pea_exact(jumps, a, b, false);
        double jl = 0.0;
        while (next_jump < jumps.times.size() && jumps.times[next_jump] < b)
          jl += jumps.logs[next_jump++];
        log_s += mu * dt - 0.5 * v + jl + zs[static_cast<std::size_t>(i)] * std::sqrt(v);
        spot[p * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)] = std::exp(log_s);
      }
    }

    // cash[p] is the path's cash flow, discounted to the current date.
    std::vector<double> cash(n);
    for (std::size_t p = 0; p < n; ++p)
      cash[p] = payoff(mk.kind, spot[p * N + static_cast<std::size_t>(N - 1)], K);
    const double step_disc = std::exp(-mk.rate * dt);
    const int cols = basis_degree + 1;
    std::vector<std::size_t> itm;
    for (int i = N - 2; i >= 0; --i) {
      for (double& c : cash) c *= step_disc;
      itm.clear();
      for (std::size_t p = 0; p < n; ++p)
        if (payoff(mk.kind, spot[p * N + static_cast<std::size_t>(i)], K) > 0.0) itm.push_back(p);
      if (itm.size() <= static_cast<std::size_t>(cols)) continue;
      Eigen::MatrixXd A(static_cast<Eigen::Index>(itm.size()), cols);
      Eigen::VectorXd y(static_cast<Eigen::Index>(itm.size()));
      for (std::size_t r = 0; r < itm.size(); ++r) {
        const double x = spot[itm[r] * N + static_cast<std::size_t>(i)] / K;
        double xp = 1.0;
        for (int c = 0; c < cols; ++c, xp *= x) A(static_cast<Eigen::Index>(r), c) = xp;
        y(static_cast<Eigen::Index>(r)) = cash[itm[r]];
      }
      const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(y);
      const Eigen::VectorXd fitted = A * beta;
      for (std::size_t r = 0; r < itm.size(); ++r) {
        const double ex = payoff(mk.kind, spot[itm[r] * N + static_cast<std::size_t>(i)], K);
        if (ex > fitted(static_cast<Eigen::Index>(r))) cash[itm[r]] = ex;
      }
    }
    double sum = 0.0;
    for (double& c : cash) {
      c *= step_disc;
      sum += c;
      sumsq += c * c;
    }
    sumsq /= static_cast<double>(n);
    return std::max(payoff(mk.kind, mk.spot, K), sum / static_cast<double>(n));
  });
}

}  // namespace msvcj
