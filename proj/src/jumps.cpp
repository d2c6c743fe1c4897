#include "msvcj/jumps.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "jumps";

double log_poisson(int n, double mean) {
  if (mean == 0.0) return n == 0 ? 0.0 : -INFINITY;
  return n * std::log(mean) - mean - std::lgamma(n + 1.0);
}

double poisson_pmf(int n, double mean) { return std::exp(log_poisson(n, mean)); }

// P(N > n), summed from the upper terms rather than as 1 - CDF, which would
// lose every digit once the tail drops below 1e-16.
double poisson_tail_above(int n, double mean) {
  if (mean == 0.0) return 0.0;
  double s = 0.0;
  for (int k = n + 1;; ++k) {
    const double p = poisson_pmf(k, mean);
    s += p;
    if (k > mean && p <= s * 1e-17) break;
  }
  return s;
}

// Golub-Welsch on a symmetric tridiagonal Jacobi matrix; weights are the
// squared first eigenvector components (so they come out normalized).
GaussRule golub_welsch(const std::vector<double>& diag, const std::vector<double>& off) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    J(i, i) = diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = off[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = eig.eigenvectors()(0, i);
    rule.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()(i);
    rule.weights[static_cast<std::size_t>(i)] = v * v;
    total += v * v;
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

template <class Key, class Make>
const GaussRule& memo(std::map<Key, GaussRule>& table, std::mutex& mutex, const Key& key,
                      Make make) {
  std::lock_guard<std::mutex> lock(mutex);
  auto it = table.find(key);
  if (it == table.end()) it = table.emplace(key, make()).first;
  return it->second;
}

}  // namespace

double JumpSpec::mean_jump() const { return std::exp(log_mean + 0.5 * log_var) - 1.0; }

void JumpSpec::validate() const {
  require(std::isfinite(intensity) && intensity >= 0.0, kModule, "jump intensity must be >= 0");
  require(std::isfinite(log_mean), kModule, "jump log-mean must be finite");
  require(std::isfinite(log_var) && log_var >= 0.0, kModule, "jump log-variance must be >= 0");
  require(truncation_eps > 0.0 && truncation_eps < 1.0, kModule,
          "truncation eps must lie in (0, 1)");
  require(!max_jumps || *max_jumps >= 0, kModule, "max_jumps must be >= 0");
}

void PeaSpec::validate() const {
  require(std::isfinite(proportional_coeff) && proportional_coeff >= 0.0, kModule,
          "PEA coefficient b must be >= 0");
  require(std::isfinite(attenuation) && attenuation > 0.0, kModule,
          "PEA attenuation beta must be > 0");
  require(std::isfinite(duration) && duration > 0.0, kModule, "PEA duration Delta must be > 0");
}

double pea_aggregate(const PeaSpec& pea, double maturity) {
  pea.validate();
  require(maturity > 0.0, kModule, "maturity must be positive");
  return pea.proportional_coeff * -std::expm1(-pea.attenuation * pea.duration) /
         (maturity * pea.attenuation);
}

PoissonTruncation truncate_poisson(double intensity, double maturity, double eps) {
  require(intensity >= 0.0 && maturity >= 0.0, kModule, "lambda*T must be non-negative");
  require(eps > 0.0 && eps < 1.0, kModule, "truncation eps must lie in (0, 1)");
  const double mean = intensity * maturity;
  PoissonTruncation out;
  int n = 0;
  double tail = poisson_tail_above(0, mean);
  while (tail >= eps) {
    ++n;
    tail = poisson_tail_above(n, mean);
  }
  out.n_max = n;
  out.weights.resize(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) out.weights[static_cast<std::size_t>(k)] = poisson_pmf(k, mean);
  out.dropped_mass = tail;
  return out;
}

PoissonTruncation poisson_weights(double intensity, double maturity, int n_max) {
  require(intensity >= 0.0 && maturity >= 0.0, kModule, "lambda*T must be non-negative");
  require(n_max >= 0, kModule, "n_max must be >= 0");
  const double mean = intensity * maturity;
  PoissonTruncation out;
  out.n_max = n_max;
  for (int k = 0; k <= n_max; ++k) out.weights.push_back(poisson_pmf(k, mean));
  out.dropped_mass = poisson_tail_above(n_max, mean);
  return out;
}

PoissonTruncation truncate_jumps(const JumpSpec& jump, double maturity) {
  if (jump.max_jumps) return poisson_weights(jump.intensity, maturity, *jump.max_jumps);
  return truncate_poisson(jump.intensity, maturity, jump.truncation_eps);
}

double joint_density(int n, double mu, double eps2, double x, double y) {
  require(n >= 1, kModule, "joint density needs n >= 1 jumps");
  require(eps2 > 0.0, kModule, "joint density needs eps2 > 0");
  const double mx = n * mu, vx = n * eps2;
  const double gx = std::exp(-0.5 * (x - mx) * (x - mx) / vx) / std::sqrt(2.0 * std::numbers::pi * vx);
  if (n == 1) return std::abs(y - x * x) <= 1e-12 * std::max(1.0, y) ? gx : 0.0;
  const double q = (y - x * x / n) / eps2;
  if (q <= 0.0) return 0.0;
  const double k = 0.5 * (n - 1);
  const double log_chi = (k - 1.0) * std::log(q) - 0.5 * q - k * std::log(2.0) - std::lgamma(k);
  return gx * std::exp(log_chi) / eps2;
}

GaussRule gauss_hermite(int order) {
  require(order >= 1, kModule, "quadrature order must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  return memo(cache, mutex, order, [order] {
    std::vector<double> diag(static_cast<std::size_t>(order), 0.0), off;
    for (int k = 1; k < order; ++k) off.push_back(std::sqrt(static_cast<double>(k)));
    return golub_welsch(diag, off);
  });
}

GaussRule gauss_laguerre(int order, double alpha) {
  require(order >= 1, kModule, "quadrature order must be >= 1");
  require(alpha > -1.0, kModule, "Laguerre exponent must exceed -1");
  static std::map<std::pair<int, double>, GaussRule> cache;
  static std::mutex mutex;
  return memo(cache, mutex, std::make_pair(order, alpha), [order, alpha] {
    std::vector<double> diag, off;
    for (int k = 0; k < order; ++k) diag.push_back(2.0 * k + alpha + 1.0);
    for (int k = 1; k < order; ++k) off.push_back(std::sqrt(k * (k + alpha)));
    return golub_welsch(diag, off);
  });
}

JumpQuadrature jump_quadrature(int n, double mu, double eps2, const QuadratureOrders& orders) {
  require(n >= 0, kModule, "jump count must be >= 0");
  require(eps2 >= 0.0, kModule, "eps2 must be >= 0");
  JumpQuadrature out;
  out.count = n;
  out.orders = orders;
  if (n == 0) {
    out.x = {0.0};
    out.y = {0.0};
    out.weights = {1.0};
    return out;
  }
  const GaussRule& hx = gauss_hermite(orders.hermite);
  const double sd = std::sqrt(n * eps2);
  if (n == 1 || eps2 == 0.0) {
    for (std::size_t i = 0; i < hx.nodes.size(); ++i) {
      const double x = n * mu + sd * hx.nodes[i];
      out.x.push_back(x);
      out.y.push_back(x * x / n);
      out.weights.push_back(hx.weights[i]);
    }
    return out;
  }
  // q = 2t with t ~ Gamma((n-1)/2): weight t^{(n-3)/2} e^{-t}.
  const GaussRule& lq = gauss_laguerre(orders.laguerre, 0.5 * (n - 3));
  for (std::size_t i = 0; i < hx.nodes.size(); ++i) {
    const double x = n * mu + sd * hx.nodes[i];
    for (std::size_t j = 0; j < lq.nodes.size(); ++j) {
      out.x.push_back(x);
      out.y.push_back(x * x / n + eps2 * 2.0 * lq.nodes[j]);
      out.weights.push_back(hx.weights[i] * lq.weights[j]);
    }
  }
  return out;
}

double expectation_over_jumps(int n, double mu, double eps2,
                              const std::function<double(double, double)>& h,
                              const QuadratureOrders& orders) {
  const JumpQuadrature rule = jump_quadrature(n, mu, eps2, orders);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.weights.size(); ++i) s += rule.weights[i] * h(rule.x[i], rule.y[i]);
  return s;
}

double jump_time_bias(const JumpSpec& jump, const PeaSpec& pea, double maturity, int n_max) {
  jump.validate();
  pea.validate();
  require(maturity > pea.duration, kModule, "maturity must exceed the PEA duration");
  require(n_max >= 1, kModule, "n_max must be >= 1");
  const double eta = jump.log_mean * jump.log_mean + jump.log_var;
  const double bd = pea.attenuation * pea.duration;
  const double shape = -std::expm1(-bd) / bd - std::exp(-bd);
  const double per_jump =
      pea.proportional_coeff * eta / (pea.attenuation * maturity) * shape;
  const double late = jump.intensity * pea.duration;
  const double early = jump.intensity * (maturity - pea.duration);
  double eb = 0.0;
  for (int l = 1; l <= n_max; ++l) {
    for (int j = 1; j <= l; ++j) {
      // P(j of l jumps in the last Delta) * P(N_T = l)
      eb += poisson_pmf(j, late) * poisson_pmf(l - j, early) * j * per_jump;
    }
  }
  return eb;
}

double implied_vol_impact(double implied_vol, double bias) {
  const double v = implied_vol * implied_vol;
  require(bias >= 0.0 && bias < v, kModule, "bias must lie in [0, sigma^2)");
  return implied_vol - std::sqrt(v - bias);
}

}  // namespace msvcj
