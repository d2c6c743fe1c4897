#pragma once

// Lognormal co-jumps, their proportional-exponentially-attenuating (PEA)
// variance impact, and quadrature over the jump sums (X_n, Y_n).

#include <functional>
#include <optional>
#include <vector>

namespace msvcj {

struct JumpSpec {
  double intensity = 0.0;       // lambda, per year
  double log_mean = 0.0;        // mu of ln J
  double log_var = 0.0;         // eps^2 of ln J
  double truncation_eps = 5.5e-5;
  /// Fixed jump-count cutoff; when unset the smallest N_max meeting
  /// truncation_eps is used.
  std::optional<int> max_jumps;

  /// zeta = E[J] - 1
  double mean_jump() const;
  void validate() const;
};

struct PeaSpec {
  double proportional_coeff = 0.0;  // b
  double attenuation = 1.0;         // beta, per year
  double duration = 0.0;            // Delta, years

  void validate() const;
};

/// b_hat = b (1 - e^{-beta Delta}) / (T beta)
double pea_aggregate(const PeaSpec& pea, double maturity);

struct PoissonTruncation {
  int n_max = 0;
  std::vector<double> weights;  // p(N_T = n), n = 0..n_max, not renormalized
  double dropped_mass = 0.0;    // P(N_T > n_max)
};

/// Smallest n_max with P(N_T > n_max) < eps.
PoissonTruncation truncate_poisson(double intensity, double maturity, double eps);

/// Poisson weights up to a fixed n_max, with the dropped tail mass.
PoissonTruncation poisson_weights(double intensity, double maturity, int n_max);

/// Truncation used by the pricers: jump.max_jumps if set, else truncate_poisson.
PoissonTruncation truncate_jumps(const JumpSpec& jump, double maturity);

/// Density of (X_n, Y_n) = (sum ln J_i, sum ln^2 J_i). For n = 1 the law
/// lives on the parabola y = x^2 and the returned value is the density of x.
double joint_density(int n, double mu, double eps2, double x, double y);

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // normalized to sum 1
};

/// Probabilists' Gauss-Hermite: E f(Z), Z ~ N(0,1).
GaussRule gauss_hermite(int order);

/// Generalized Gauss-Laguerre for the weight t^alpha e^{-t}, normalized.
GaussRule gauss_laguerre(int order, double alpha);

inline constexpr int kDefaultHermiteOrder = 40;
inline constexpr int kDefaultLaguerreOrder = 40;

struct QuadratureOrders {
  int hermite = kDefaultHermiteOrder;
  int laguerre = kDefaultLaguerreOrder;
};

/// Tensor rule for E_{Xi_n}: nodes (x, y) with x ~ N(n mu, n eps2) and
/// y = x^2/n + eps2 q, q ~ chi^2(n-1) independent of x.
struct JumpQuadrature {
  int count = 0;
  QuadratureOrders orders;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> weights;
};

JumpQuadrature jump_quadrature(int n, double mu, double eps2, const QuadratureOrders& orders = {});

double expectation_over_jumps(int n, double mu, double eps2,
                              const std::function<double(double, double)>& h,
                              const QuadratureOrders& orders = {});

/// Expected AIV bias of relocating the jumps of [T - Delta, T] to T - Delta.
double jump_time_bias(const JumpSpec& jump, const PeaSpec& pea, double maturity, int n_max);

/// sqrt(var) - sqrt(var - bias): implied-volatility shift caused by `bias`
/// at the implied volatility sqrt(var).
double implied_vol_impact(double implied_vol, double bias);

}  // namespace msvcj
