#pragma once

// Simulation oracles. Conditional on the chain path and the jumps the
// diffusion part of ln S is Gaussian with variance equal to the integrated
// variance, so each estimator draws the regime path and the jumps, integrates
// the variance over the relevant window (Euler left-point sum or exact), and
// then draws a single normal per window.

#include <cstdint>
#include <vector>

#include "msvcj/bermudan.hpp"
#include "msvcj/european.hpp"

namespace msvcj {

struct SimConfig {
  int n_substeps = 1500;  // Euler subintervals over [0, T]
  long n_paths = 100'000;  // per run
  int n_runs = 10;
  std::uint64_t seed = 7;
  bool antithetic = false;
  int threads = 1;

  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  /// Standard deviation of the per-run estimates: the error of a single run,
  /// which is how the Std Err columns of the reference tables are reported.
  double std_err = 0.0;
  /// std_err / sqrt(n_runs): the error of `mean` itself.
  double mean_std_err = 0.0;
  std::vector<double> runs;
  /// Sample variance of the per-path discounted payoffs, pooled over runs.
  double path_variance = 0.0;
};

/// Full dynamics: jumps at their true times with the PEA spike cut off at T.
/// The diffusion variance is the Euler left-point sum over n_substeps, which
/// is the variance the Euler scheme's Gaussian increments add up to.
McEstimate mc_european(const ModelSpec& model, const MarketSpec& market, const SimConfig& sim);

/// Exact integrated variance per path; `relocate` moves every jump of
/// [T - Delta, T] to T - Delta, which is the assumption behind b_hat.
McEstimate mc_exact_conditional(const ModelSpec& model, const MarketSpec& market,
                                const SimConfig& sim, bool relocate);

/// Least-squares Monte Carlo on in-the-money paths with regressors
/// 1, x, ..., x^basis_degree, x = S/K. Exercise dates from `schedule`.
McEstimate lsm_bermudan(const ModelSpec& model, const MarketSpec& market,
                        const ExerciseSchedule& schedule, const SimConfig& sim,
                        int basis_degree = 3);

/// Discounted terminal spot e^{-rT} S_T under the Euler scheme (martingale check).
McEstimate mc_discounted_spot(const ModelSpec& model, const MarketSpec& market,
                              const SimConfig& sim);

}  // namespace msvcj
