#include "msvcj/bermudan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "bermudan";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

struct Line {
  double intercept, slope;
  double at(double s) const { return intercept + slope * s; }
};

// Upper envelope of `lines` on S >= 0, as a PiecewiseValue.
PiecewiseValue upper_envelope(std::vector<Line> lines) {
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope < b.slope || (a.slope == b.slope && a.intercept > b.intercept);
  });
  std::vector<Line> hull;
  auto cross = [](const Line& a, const Line& b) {
    return (a.intercept - b.intercept) / (b.slope - a.slope);
  };
  for (const Line& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;  // lower intercept, same slope
    while (!hull.empty()) {
      // Steeper line dominates the last one everywhere on S >= 0.
      if (cross(hull.back(), l) <= 0.0) {
        hull.pop_back();
        continue;
      }
      if (hull.size() >= 2 && cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back())) {
        hull.pop_back();
        continue;
      }
      break;
    }
    hull.push_back(l);
  }
  PiecewiseValue f;
  f.intercept = hull.front().intercept;
  f.base_slope = hull.front().slope;
  for (std::size_t i = 1; i < hull.size(); ++i) {
    f.kinks.push_back(cross(hull[i - 1], hull[i]));
    f.gammas.push_back(hull[i].slope - hull[i - 1].slope);
  }
  return f;
}

// Chord interpolant through (0, h0) and the grid values, continued beyond the
// last node with `final_slope`.
PiecewiseValue chords(const std::vector<double>& grid, const std::vector<double>& values,
                      double h0, double final_slope) {
  PiecewiseValue f;
  f.intercept = h0;
  double prev_x = 0.0, prev_y = h0, prev_slope = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double slope = (values[j] - prev_y) / (grid[j] - prev_x);
    if (j == 0) {
      f.base_slope = slope;
    } else {
      f.kinks.push_back(prev_x);
      f.gammas.push_back(slope - prev_slope);
    }
    prev_x = grid[j];
    prev_y = values[j];
    prev_slope = slope;
  }
  f.kinks.push_back(prev_x);
  f.gammas.push_back(final_slope - prev_slope);
  return f;
}

// Chord slopes of a convex function can dip by rounding; anything beyond this
// relative size is a genuine convexity violation.
void clamp_gammas(PiecewiseValue& f, double scale) {
  for (double& g : f.gammas) {
    if (g < 0.0) {
      require(g > -1e-8 * std::max(1.0, scale), kModule,
              "value function lost convexity (slope decrement " + std::to_string(g) + ")");
      g = 0.0;
    }
  }
}

}  // namespace

ExerciseSchedule ExerciseSchedule::parse(const std::string& text) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, kModule, "schedule must look like \"interval:count\"");
  ExerciseSchedule s;
  try {
    std::size_t used = 0;
    s.interval = std::stod(text.substr(0, colon), &used);
    require(used == colon, kModule, "bad schedule interval");
    const std::string count = text.substr(colon + 1);
    s.num_intervals = std::stoi(count, &used);
    require(used == count.size(), kModule, "bad schedule count");
  } catch (const std::logic_error&) {
    throw ValidationError(std::string(kModule) + ": cannot parse schedule \"" + text + "\"");
  }
  s.validate();
  return s;
}

std::vector<double> ExerciseSchedule::dates() const {
  std::vector<double> out;
  for (int i = 0; i <= num_intervals; ++i) out.push_back(i * interval);
  return out;
}

void ExerciseSchedule::validate() const {
  require(std::isfinite(interval) && interval > 0.0, kModule, "exercise interval must be positive");
  require(num_intervals >= 1, kModule, "schedule needs at least one interval");
}

PiecewiseValue PiecewiseValue::payoff(OptionKind kind, double strike) {
  PiecewiseValue f;
  if (kind == OptionKind::put) {
    f.intercept = strike;
    f.base_slope = -1.0;
  }
  f.kinks = {strike};
  f.gammas = {1.0};
  return f;
}

double PiecewiseValue::operator()(double spot) const {
  double v = intercept + base_slope * spot;
  for (std::size_t j = 0; j < kinks.size(); ++j)
    if (spot > kinks[j]) v += gammas[j] * (spot - kinks[j]);
  return v;
}

double PiecewiseValue::slope(double spot) const {
  double s = base_slope;
  for (std::size_t j = 0; j < kinks.size(); ++j)
    if (spot >= kinks[j]) s += gammas[j];
  return s;
}

double PiecewiseValue::final_slope() const {
  double s = base_slope;
  for (double g : gammas) s += g;
  return s;
}

bool PiecewiseValue::convex(double tol) const {
  return std::all_of(gammas.begin(), gammas.end(), [tol](double g) { return g >= -tol; });
}

void PiecewiseValue::compact(double min_gap, double min_gamma) {
  std::vector<double> k, g;
  for (std::size_t j = 0; j < kinks.size(); ++j) {
    if (kinks[j] <= 0.0) {
      // A kink at or left of zero is part of the linear piece on S >= 0.
      intercept -= gammas[j] * kinks[j];
      base_slope += gammas[j];
      continue;
    }
    if (!k.empty() && kinks[j] - k.back() < min_gap) {
      const double total = g.back() + gammas[j];
      if (total > 0.0) k.back() = (k.back() * g.back() + kinks[j] * gammas[j]) / total;
      g.back() = total;
      continue;
    }
    k.push_back(kinks[j]);
    g.push_back(gammas[j]);
  }
  kinks.clear();
  gammas.clear();
  for (std::size_t j = 0; j < k.size(); ++j) {
    if (std::abs(g[j]) >= min_gamma) {
      kinks.push_back(k[j]);
      gammas.push_back(g[j]);
    }
  }
}

IntervalKernel::IntervalKernel(const ModelSpec& model, double interval, double rate,
                               double dividend_yield)
    : IntervalKernel(model, interval, rate, dividend_yield, Options{}) {}

IntervalKernel::IntervalKernel(const ModelSpec& model, double interval, double rate,
                               double dividend_yield, const Options& options)
    : interval_(interval), rate_(rate), q_(dividend_yield), options_(options) {
  model.validate();
  steps_ = horizon_steps(model.chain, interval);
  const std::size_t m = model.chain.num_states();
  std::size_t total = 0;
  for (std::size_t s = 0; s < m; ++s) {
    const auto aiv = default_aiv_cache().get(model.chain, s, steps_, options.aiv);
    per_state_.push_back(model_mixture(model, *aiv, interval, options.orders));
    total += per_state_.back().atoms.size();
  }
  using Mode = Options::Mode;
  tabulated_ = options.mode == Mode::tabulated ||
               (options.mode == Mode::automatic && total > options.exact_atom_limit);
  pi_ = StateDistribution::point_mass(m, model.chain.initial_state()).probs;
  if (!tabulated_) {
    set_distribution(pi_);
    return;
  }

  require(options.table_nodes >= 3 && options.table_half_width > 0.0, kModule,
          "kernel table needs >= 3 nodes and a positive half-width");
  const int n = options.table_nodes;
  lo_ = -options.table_half_width;
  h_ = 2.0 * options.table_half_width / (n - 1);
  std::vector<double> em(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) em[static_cast<std::size_t>(i)] = std::exp(lo_ + i * h_);
  const double dq = std::exp(-q_ * interval_), dr = std::exp(-rate_ * interval_);
  for (const Mixture& mix : per_state_) {
    Table t;
    t.c.assign(static_cast<std::size_t>(n), 0.0);
    t.dc = t.d = t.dd = t.c;
    for (const LognormalAtom& a : mix.atoms) {
      const double sd = std::sqrt(a.variance * interval_);
      const double fs = std::exp(a.log_shift);
      const double drift = a.log_shift + (rate_ - q_) * interval_ + 0.5 * sd * sd;
      for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double d1 = (lo_ + i * h_ + drift) / sd;
        const double nd1 = norm_cdf(d1);
        t.c[k] += a.weight * (em[k] * fs * dq * nd1 - dr * norm_cdf(d1 - sd));
        t.d[k] += a.weight * fs * dq * nd1;
        t.dd[k] += a.weight * fs * dq * norm_pdf(d1) / sd;
      }
    }
    for (std::size_t k = 0; k < em.size(); ++k) t.dc[k] = em[k] * t.d[k];
    tables_.push_back(std::move(t));
  }
  set_distribution(pi_);
}

void IntervalKernel::set_distribution(const std::vector<double>& pi) {
  StateDistribution sd{pi, 0};
  validate(sd, per_state_.size());
  pi_ = pi;
  if (tabulated_) {
    const std::size_t n = tables_.front().c.size();
    mixed_.c.assign(n, 0.0);
    mixed_.dc = mixed_.d = mixed_.dd = mixed_.c;
    for (std::size_t s = 0; s < tables_.size(); ++s) {
      if (pi[s] == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        mixed_.c[k] += pi[s] * tables_[s].c[k];
        mixed_.dc[k] += pi[s] * tables_[s].dc[k];
        mixed_.d[k] += pi[s] * tables_[s].d[k];
        mixed_.dd[k] += pi[s] * tables_[s].dd[k];
      }
    }
    return;
  }
  // Atoms with identical (shift, variance) across initial states merge.
  std::map<std::pair<double, double>, double> acc;
  for (std::size_t s = 0; s < per_state_.size(); ++s) {
    if (pi[s] == 0.0) continue;
    for (const LognormalAtom& a : per_state_[s].atoms)
      acc[{a.log_shift, a.variance}] += pi[s] * a.weight;
  }
  merged_.atoms.clear();
  for (const auto& [key, w] : acc) merged_.atoms.push_back({w, key.first, key.second});
}

BsValue IntervalKernel::exact_call(double spot, double strike) const {
  if (!tabulated_)
    return price_mixture(merged_, spot, strike, rate_, q_, interval_, OptionKind::call);
  BsValue acc;
  for (std::size_t s = 0; s < per_state_.size(); ++s) {
    if (pi_[s] == 0.0) continue;
    const BsValue v =
        price_mixture(per_state_[s], spot, strike, rate_, q_, interval_, OptionKind::call);
    acc.price += pi_[s] * v.price;
    acc.delta += pi_[s] * v.delta;
  }
  return acc;
}

BsValue IntervalKernel::call(double spot, double strike) const {
  if (!tabulated_ || spot <= 0.0) return exact_call(spot, strike);
  const double m = std::log(spot / strike);
  const double u = (m - lo_) / h_;
  const auto last = static_cast<double>(mixed_.c.size() - 1);
  if (!(u >= 0.0 && u < last)) return exact_call(spot, strike);
  const auto i = static_cast<std::size_t>(u);
  const double t = u - static_cast<double>(i);
  // Cubic Hermite basis.
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t, h01 = -2 * t3 + 3 * t2,
               h11 = t3 - t2;
  auto interp = [&](const std::vector<double>& f, const std::vector<double>& df) {
    return h00 * f[i] + h10 * h_ * df[i] + h01 * f[i + 1] + h11 * h_ * df[i + 1];
  };
  return {strike * interp(mixed_.c, mixed_.dc), interp(mixed_.d, mixed_.dd)};
}

BsValue continuation_value(const PiecewiseValue& pw, const IntervalKernel& kernel, double spot) {
  const double dt = kernel.interval();
  const double dq = std::exp(-kernel.dividend_yield() * dt);
  BsValue out{pw.intercept * std::exp(-kernel.rate() * dt) + pw.base_slope * spot * dq,
              pw.base_slope * dq};
  for (std::size_t j = 0; j < pw.kinks.size(); ++j) {
    if (pw.gammas[j] == 0.0) continue;
    const BsValue c = kernel.call(spot, pw.kinks[j]);
    out.price += pw.gammas[j] * c.price;
    out.delta += pw.gammas[j] * c.delta;
  }
  return out;
}

BsValue continuation_value(const PiecewiseValue& pw, const ModelSpec& model,
                           const StateDistribution& state_dist, double spot, double interval,
                           double rate, double dividend_yield) {
  IntervalKernel::Options opts;
  opts.mode = IntervalKernel::Options::Mode::exact;
  opts.orders = QuadratureOrders{};
  IntervalKernel kernel(model, interval, rate, dividend_yield, opts);
  kernel.set_distribution(state_dist.probs);
  return continuation_value(pw, kernel, spot);
}

std::vector<double> bermudan_grid(const ChainSpec& chain, const MarketSpec& market,
                                  double maturity, const BermudanOptions& options) {
  require(options.n_points >= 3, kModule, "n_points must be at least 3");
  require(options.grid_span > 0.0, kModule, "grid_span must be positive");
  const std::vector<double> pi = chain.stationary_distribution();
  double mean_var = 0.0;
  for (std::size_t k = 0; k < pi.size(); ++k) mean_var += pi[k] * chain.variances()[k];
  const double half = options.grid_span * std::sqrt(mean_var * maturity);
  const double lo = std::log(market.strike) - half, hi = std::log(market.strike) + half;
  std::vector<double> grid;
  for (int j = 0; j < options.n_points; ++j)
    grid.push_back(std::exp(lo + (hi - lo) * j / (options.n_points - 1)));
  if (options.include_strike &&
      std::none_of(grid.begin(), grid.end(), [&](double s) { return s == market.strike; })) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), market.strike), market.strike);
  }
  return grid;
}

std::vector<BermudanResult> price_bermudan(const ModelSpec& model, const MarketSpec& market,
                                           const ExerciseSchedule& schedule,
                                           const std::vector<double>& spots,
                                           const BermudanOptions& options) {
  MarketSpec m = market;
  m.maturity = schedule.interval;
  m.validate();
  IntervalKernel kernel(model, schedule.interval, m.rate, m.dividend_yield, options.kernel);
  return price_bermudan(model, market, schedule, spots, options, kernel);
}

std::vector<BermudanResult> price_bermudan(const ModelSpec& model, const MarketSpec& market,
                                           const ExerciseSchedule& schedule,
                                           const std::vector<double>& spots,
                                           const BermudanOptions& options,
                                           IntervalKernel& kernel) {
  model.validate();
  schedule.validate();
  MarketSpec m = market;
  m.maturity = schedule.maturity();
  m.validate();
  require(!spots.empty(), kModule, "need at least one spot");
  for (double s : spots) require(std::isfinite(s) && s > 0.0, kModule, "spots must be positive");

  const double dt = schedule.interval;
  const int N = schedule.num_intervals;
  const std::vector<double> grid = bermudan_grid(model.chain, m, m.maturity, options);
  const PiecewiseValue payoff = PiecewiseValue::payoff(m.kind, m.strike);
  require(std::abs(kernel.interval() - dt) < 1e-12 && kernel.rate() == m.rate &&
              kernel.dividend_yield() == m.dividend_yield,
          kModule, "kernel was built for a different interval or rates");
  const StateDistribution start =
      StateDistribution::point_mass(model.chain.num_states(), model.chain.initial_state());

  const bool want_lower = options.method != BoundMethod::secant;
  const bool want_upper = options.method != BoundMethod::tangent;
  PiecewiseValue f_lower = payoff, f_upper = payoff;
  std::vector<double> boundary_lower, boundary_upper;
  const double dq = std::exp(-m.dividend_yield * dt), dr = std::exp(-m.rate * dt);
  const double min_gap = 1e-9 * m.strike;

  std::vector<double> H(grid.size()), D(grid.size());
  auto step = [&](PiecewiseValue& f, bool tangent, std::vector<double>& boundary, double t) {
    double first_exercise = kNaN;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const BsValue c = continuation_value(f, kernel, grid[j]);
      const double pay = payoff(grid[j]);
      if (pay > c.price) {
        H[j] = pay;
        D[j] = payoff.slope(grid[j]);
        if (pay > 0.0 && (std::isnan(first_exercise) || m.kind == OptionKind::put))
          first_exercise = grid[j];
      } else {
        H[j] = c.price;
        D[j] = c.delta;
      }
    }
    boundary.push_back(first_exercise);

    const double cont0 = f.intercept * dr;
    const double pay0 = payoff(0.0);
    const double h0 = std::max(pay0, cont0);
    const double slope0 = pay0 > cont0 ? payoff.base_slope
                          : cont0 > pay0 ? f.base_slope * dq
                                         : std::max(payoff.base_slope, f.base_slope * dq);
    const double slope_inf = std::max(payoff.final_slope(), f.final_slope() * dq);
    const double tol = options.boundary_slope_tol * std::max(1.0, std::abs(slope_inf));
    if (std::abs(D.front() - slope0) > tol || std::abs(D.back() - slope_inf) > tol) {
      std::ostringstream os;
      os << "interpolation grid too narrow at t = " << t << ": end-point slopes (" << D.front()
         << ", " << D.back() << ") vs asymptotic slopes (" << slope0 << ", " << slope_inf
         << "); increase grid_span";
      throw ValidationError(std::string(kModule) + ": " + os.str());
    }

    if (tangent) {
      std::vector<Line> lines;
      lines.push_back({payoff.intercept, payoff.base_slope});
      lines.push_back({payoff(m.strike) - payoff.final_slope() * m.strike, payoff.final_slope()});
      lines.push_back({cont0, f.base_slope * dq});
      for (std::size_t j = 0; j < grid.size(); ++j) lines.push_back({H[j] - D[j] * grid[j], D[j]});
      f = upper_envelope(std::move(lines));
    } else {
      f = chords(grid, H, h0, slope_inf);
    }
    clamp_gammas(f, m.strike);
    f.compact(min_gap, 1e-12);
  };

  for (int i = N - 1; i >= 1; --i) {
    const StateDistribution pi =
        evolve_distribution(model.chain, start, static_cast<long>(i) * kernel.steps());
    kernel.set_distribution(pi.probs);
    if (want_lower) step(f_lower, true, boundary_lower, i * dt);
    if (want_upper) step(f_upper, false, boundary_upper, i * dt);
  }
  std::reverse(boundary_lower.begin(), boundary_lower.end());
  std::reverse(boundary_upper.begin(), boundary_upper.end());

  kernel.set_distribution(start.probs);
  std::vector<BermudanResult> out;
  for (double s0 : spots) {
    BermudanResult r;
    r.spot = s0;
    r.n_points = static_cast<int>(grid.size());
    const double pay = payoff(s0);
    auto value_at = [&](const PiecewiseValue& f, double& value, double& delta) {
      const BsValue c = continuation_value(f, kernel, s0);
      if (pay > c.price) {
        value = pay;
        delta = payoff.slope(s0);
      } else {
        value = c.price;
        delta = c.delta;
      }
    };
    if (want_lower) {
      value_at(f_lower, r.lower_bound, r.lower_delta);
      r.has_lower = true;
      r.boundary_lower = boundary_lower;
    }
    if (want_upper) {
      value_at(f_upper, r.upper_bound, r.upper_delta);
      r.has_upper = true;
      r.boundary_upper = boundary_upper;
    }
    out.push_back(std::move(r));
  }
  return out;
}

BermudanResult price_bermudan(const ModelSpec& model, const MarketSpec& market,
                              const ExerciseSchedule& schedule, const BermudanOptions& options) {
  return price_bermudan(model, market, schedule, std::vector<double>{market.spot}, options).front();
}

}  // namespace msvcj
