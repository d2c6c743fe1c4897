#pragma once

// Historical-data side (box-plot jump split, moment equations for the PEA
// block) and option-quote side (jump calibration by random search).

#include <cstdint>
#include <string>
#include <vector>

#include "msvcj/european.hpp"

namespace msvcj {

inline constexpr double kTradingDaysPerYear = 252.0;

/// Daily closes. `times` only needs to be strictly increasing (day numbers
/// for CSV input); returns are taken between consecutive observations and
/// each one counts as `interval` years.
struct ReturnSeries {
  std::vector<double> times;
  std::vector<double> closes;
  double interval = 1.0 / kTradingDaysPerYear;

  std::vector<double> log_returns() const;
  void validate() const;
};

/// Days since 1970-01-01 for an ISO "YYYY-MM-DD" date.
double day_number(const std::string& iso_date);

/// CSV with header `date,close`.
ReturnSeries load_prices_csv(const std::string& path,
                             double interval = 1.0 / kTradingDaysPerYear);

/// Linear interpolation between order statistics: h = (n-1)p.
double quantile(std::vector<double> values, double p);

struct BoxplotSplit {
  double k_f = 1.5;
  double q1 = 0.0, q3 = 0.0, iqr = 0.0;
  double lower = 0.0, upper = 0.0;  // fences Q1 - k_f R, Q3 + k_f R
  std::vector<std::size_t> jump_indices;
  std::vector<std::size_t> diffusion_indices;
  bool zero_jump = false;
  double jump_intensity = 0.0;  // jumps per year
  double jump_mean = 0.0;
  double jump_var = 0.0;  // sample variance (n - 1), 0 below two jumps
};

/// A return is a jump when it lies strictly outside [lower, upper]; returns
/// on a fence stay in the diffusion subsample, so R = 0 keeps ties inside.
BoxplotSplit boxplot_split(const ReturnSeries& series, double k_f = 1.5);

struct ReturnMoments {
  double variance = 0.0;
  double third = 0.0;   // central
  double fourth = 0.0;  // central
};

/// E[(ln J)^i], ln J ~ N(mu, eps2).
double log_jump_raw_moment(const JumpSpec& jump, int i);

/// Central moments of the a-period log-return given volatility level
/// sigma2, with M_i = lambda m_i and the attenuation rate in the role of
/// delta. The spike of a jump is integrated over its whole life (no Delta
/// cut-off), as in the stationary moment equations. Two fourth-moment terms
/// differ from the printed equations, both confirmed by simulation: the last
/// term carries 3a^2 M_2^2 (3a M_2^2 is not dimensionally consistent), and
/// the variance of the spike sum adds 3 b^2 g / delta^3 M_4 with
/// g = delta a - 1 + e^{-delta a}.
ReturnMoments gmm_moments(double sigma2, const JumpSpec& jump, double b, double attenuation,
                          double a);

/// Sample central moments (population normalization).
ReturnMoments sample_moments(const std::vector<double>& values);

struct SearchBox {
  double lo = 0.0, hi = 0.0;
  bool log_scale = false;  // requires lo > 0
};

/// Draws `n` points per dimension from mt19937_64(seed): uniform in each
/// box, on the log scale where requested. Candidate i does not depend on n.
std::vector<std::vector<double>> random_candidates(const std::vector<SearchBox>& boxes,
                                                   long n, std::uint64_t seed);

struct PeaMomentFit {
  double b = 0.0;
  double attenuation = 0.0;
  double loss = 0.0;
};

/// Least-squares match of gmm_moments to `target` over (b, attenuation) by
/// random search; each moment is scaled by its target magnitude.
PeaMomentFit fit_pea_moments(const ReturnMoments& target, double sigma2, const JumpSpec& jump,
                             double a, const SearchBox& b_box, const SearchBox& attenuation_box,
                             long iterations, std::uint64_t seed);

struct OptionQuote {
  double strike = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  double maturity = 0.0;
  std::string quote_date;

  double mid() const { return 0.5 * (bid + ask); }
  void validate() const;
};

/// CSV with header `strike,bid,ask`; maturity and date are applied to all rows.
std::vector<OptionQuote> load_quotes_csv(const std::string& path, double maturity,
                                         const std::string& quote_date = "");

/// Linear interpolation in maturity between two deposit rates.
double interpolate_rate(double t1, double r1, double t2, double r2, double t);

struct CalibrationSearch {
  long iterations = 20000;
  std::uint64_t seed = 7;
  SearchBox intensity{0.1, 20.0, true};
  SearchBox log_mean{-0.2, 0.1, false};
  SearchBox log_var{1e-4, 0.05, true};
  int threads = 1;
};

struct CalibrationResult {
  double intensity = 0.0;
  double log_mean = 0.0;
  double log_var = 0.0;
  double objective = 0.0;
  long evaluated = 0;
  long rejected = 0;
  std::vector<double> best_so_far;  // objective after each candidate
  std::vector<std::string> diagnostics;
  std::vector<double> model_prices;  // at the optimum, one per quote
};

/// sum_i (C_i(model) - mid_i)^2 / mid_i^2 with calls priced by price_european.
double calibration_objective(const ModelSpec& model, const MarketSpec& frame,
                             const std::vector<OptionQuote>& quotes,
                             const PricingOptions& options = {},
                             std::vector<double>* model_prices = nullptr);

/// Random search over the jump block of `model` (its chain and PEA stay
/// fixed; truncation settings are taken from model.jump when present).
/// `frame` supplies spot, rate, dividend yield and maturity.
CalibrationResult calibrate_jumps(const ModelSpec& model, const MarketSpec& frame,
                                  const std::vector<OptionQuote>& quotes,
                                  const CalibrationSearch& search,
                                  const PricingOptions& options = {});

}  // namespace msvcj
