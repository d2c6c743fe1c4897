#pragma once

// Bermudan options by backward induction on convex piecewise-linear value
// functions. Tangent lines under-approximate each date's value (lower bound),
// chords over-approximate it (upper bound); in both cases the next
// continuation value is a portfolio of European calls.

#include <string>
#include <vector>

#include "msvcj/european.hpp"

namespace msvcj {

/// Equally spaced exercise dates t_i = i * interval, i = 1..num_intervals
/// (t_0 = 0 is the valuation date).
struct ExerciseSchedule {
  double interval = 0.0;
  int num_intervals = 0;

  /// "0.5:6" -> interval 0.5, six intervals.
  static ExerciseSchedule parse(const std::string& text);
  double maturity() const { return interval * num_intervals; }
  std::vector<double> dates() const;
  void validate() const;
};

/// f(S) = intercept + base_slope * S + sum_j gammas[j] * (S - kinks[j])^+ on S >= 0.
struct PiecewiseValue {
  double intercept = 0.0;
  double base_slope = 0.0;
  std::vector<double> kinks;   // ascending
  std::vector<double> gammas;  // slope increments

  static PiecewiseValue payoff(OptionKind kind, double strike);

  double operator()(double spot) const;
  /// Right derivative at `spot`.
  double slope(double spot) const;
  double final_slope() const;
  bool convex(double tol = 0.0) const;
  /// Merges kinks closer than `min_gap` and drops increments below `min_gamma`.
  void compact(double min_gap, double min_gamma);
};

/// European call prices over one exercise interval under the mixture over
/// initial chain states pi (the state distribution at the interval start).
/// Small mixtures are evaluated atom by atom; large ones (MS-SVCJ) through a
/// per-state table in log-moneyness with cubic Hermite interpolation.
class IntervalKernel {
 public:
  struct Options {
    QuadratureOrders orders{16, 4};
    AivOptions aiv;
    enum class Mode { automatic, exact, tabulated } mode = Mode::automatic;
    std::size_t exact_atom_limit = 4096;  // automatic: tabulate above this
    double table_half_width = 3.5;        // |ln(S/K)| covered by the table
    int table_nodes = 351;
  };

  IntervalKernel(const ModelSpec& model, double interval, double rate, double dividend_yield,
                 const Options& options);
  IntervalKernel(const ModelSpec& model, double interval, double rate, double dividend_yield);

  void set_distribution(const std::vector<double>& pi);
  BsValue call(double spot, double strike) const;

  double interval() const { return interval_; }
  double rate() const { return rate_; }
  double dividend_yield() const { return q_; }
  bool tabulated() const { return tabulated_; }
  int steps() const { return steps_; }
  std::size_t atoms_per_state(std::size_t state) const { return per_state_[state].atoms.size(); }

 private:
  BsValue exact_call(double spot, double strike) const;

  double interval_, rate_, q_;
  int steps_ = 0;
  Options options_;
  bool tabulated_ = false;
  std::vector<Mixture> per_state_;
  std::vector<double> pi_;
  Mixture merged_;  // exact mode: atoms of all states weighted by pi
  // tabulated mode: per state c(m), c'(m), d(m), d'(m) on the m grid
  struct Table {
    std::vector<double> c, dc, d, dd;
  };
  std::vector<Table> tables_;
  Table mixed_;
  double lo_ = 0.0, h_ = 0.0;
};

/// alpha e^{-r dt} + beta S e^{-q dt} + sum gamma_j Call(S, k_j), with delta.
BsValue continuation_value(const PiecewiseValue& pw, const IntervalKernel& kernel, double spot);

/// Same, building the kernel for one state distribution.
BsValue continuation_value(const PiecewiseValue& pw, const ModelSpec& model,
                           const StateDistribution& state_dist, double spot, double interval,
                           double rate, double dividend_yield);

enum class BoundMethod { tangent, secant, both };

struct BermudanOptions {
  int n_points = 200;
  BoundMethod method = BoundMethod::both;
  /// Grid spans K e^{-span * sbar * sqrt(T)} .. K e^{+span * sbar * sqrt(T)},
  /// sbar^2 the stationary mean variance of the chain.
  double grid_span = 2.0;
  bool include_strike = false;
  /// Allowed gap between the end-point slopes of max(payoff, continuation)
  /// and its asymptotic slopes before the grid is declared too narrow.
  double boundary_slope_tol = 0.1;
  IntervalKernel::Options kernel;
};

struct BermudanResult {
  double lower_bound = 0.0;  // tangent
  double upper_bound = 0.0;  // secant
  double lower_delta = 0.0;
  double upper_delta = 0.0;
  bool has_lower = false;
  bool has_upper = false;
  int n_points = 0;
  double spot = 0.0;
  // Smallest grid point where exercise beats continuation, per date t_1..t_{N-1}
  // (NaN when exercise is never optimal on the grid).
  std::vector<double> boundary_lower;
  std::vector<double> boundary_upper;
};

/// The backward induction does not depend on the spot, so one run serves
/// every entry of `spots`.
std::vector<BermudanResult> price_bermudan(const ModelSpec& model, const MarketSpec& market,
                                           const ExerciseSchedule& schedule,
                                           const std::vector<double>& spots,
                                           const BermudanOptions& options = {});

BermudanResult price_bermudan(const ModelSpec& model, const MarketSpec& market,
                              const ExerciseSchedule& schedule,
                              const BermudanOptions& options = {});

/// Reuses a kernel built for `model` over one exercise interval (for example
/// across grid sizes); its distribution is overwritten.
std::vector<BermudanResult> price_bermudan(const ModelSpec& model, const MarketSpec& market,
                                           const ExerciseSchedule& schedule,
                                           const std::vector<double>& spots,
                                           const BermudanOptions& options,
                                           IntervalKernel& kernel);

/// Geometric interpolation grid used by price_bermudan.
std::vector<double> bermudan_grid(const ChainSpec& chain, const MarketSpec& market,
                                  double maturity, const BermudanOptions& options);

}  // namespace msvcj
