#pragma once

// Parameter sets shared by the test binaries.

#include <optional>
#include <random>
#include <vector>

#include "msvcj/european.hpp"

namespace fixtures {

inline std::vector<std::vector<double>> table2_transition() {
  return {{0.70, 0.15, 0.10, 0.05},
          {0.03, 0.90, 0.06, 0.01},
          {0.05, 0.05, 0.85, 0.05},
          {0.03, 0.07, 0.10, 0.80}};
}

inline const std::vector<double> kTable2Vars{0.02, 0.04, 0.06, 0.08};

/// Four-state chain started at 0.04 with step tau.
inline msvcj::ChainSpec table2_chain(double tau) {
  return msvcj::ChainSpec::from_variances(kTable2Vars, table2_transition(), tau, 1);
}

inline msvcj::JumpSpec table2_jump(std::optional<int> max_jumps = 10) {
  msvcj::JumpSpec j;
  j.intensity = 3.0;
  j.log_mean = -0.025;
  j.log_var = 0.005;
  j.truncation_eps = 5.5e-5;
  j.max_jumps = max_jumps;
  return j;
}

inline msvcj::PeaSpec table2_pea() { return {2.0, 250.0, 0.02}; }

inline msvcj::MarketSpec table2_market() {
  return {50.0, 55.0, 0.05, 0.0, 0.25, msvcj::OptionKind::call};
}

inline msvcj::ModelSpec table2_model() {
  return {table2_chain(0.25 / 30), table2_jump(), table2_pea()};
}

/// Bermudan example: K=100, r=0.05, q=0.04, exercise every 0.5y for 3y.
inline msvcj::MarketSpec bermudan_market(double spot = 100.0) {
  return {spot, 100.0, 0.05, 0.04, 3.0, msvcj::OptionKind::call};
}

/// Random row-stochastic matrix; roughly a fifth of the off-diagonal
/// entries are zeroed when `sparse`.
inline std::vector<std::vector<double>> random_stochastic(std::size_t m, std::mt19937_64& rng,
                                                          bool sparse = true) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> P(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      P[i][j] = (sparse && i != j && u(rng) < 0.2) ? 0.0 : u(rng) + 0.01;
      sum += P[i][j];
    }
    for (auto& p : P[i]) p /= sum;
    // Push the rounding residue onto the diagonal so rows sum to 1 tightly.
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s += P[i][j];
    P[i][i] = 1.0 - s;
  }
  return P;
}

}  // namespace fixtures
