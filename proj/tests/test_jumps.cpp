#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "msvcj/errors.hpp"
#include "msvcj/jumps.hpp"

using namespace msvcj;

namespace {

// Poisson tail P(N > n) summed term by term from the far end.
double poisson_tail(double mean, int n) {
  double tail = 0.0;
  double term = std::exp(-mean);
  double below = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) term *= mean / k;
    below += term;
  }
  tail = 1.0 - below;
  return tail;
}

// E[z^k], z ~ N(mu, s2), by the recursion E z^k = mu E z^{k-1} + (k-1) s2 E z^{k-2}.
std::vector<double> normal_raw_moments(double mu, double s2, int kmax) {
  std::vector<double> m(kmax + 1);
  m[0] = 1.0;
  if (kmax >= 1) m[1] = mu;
  for (int k = 2; k <= kmax; ++k) m[k] = mu * m[k - 1] + (k - 1) * s2 * m[k - 2];
  return m;
}

// E[X^a Y^b] for (X, Y) = sum over n iid copies of (z, z^2), by repeated
// binomial convolution of the one-jump moments.
std::vector<std::vector<double>> xy_moments(int n, double mu, double s2, int amax, int bmax) {
  const auto z = normal_raw_moments(mu, s2, amax + 2 * bmax);
  auto choose = [](int a, int b) {
    double c = 1.0;
    for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
    return c;
  };
  std::vector<std::vector<double>> M(amax + 1, std::vector<double>(bmax + 1, 0.0));
  M[0][0] = 1.0;  // zero jumps
  for (int step = 0; step < n; ++step) {
    auto next = M;
    for (int a = 0; a <= amax; ++a)
      for (int b = 0; b <= bmax; ++b) {
        double s = 0.0;
        for (int i = 0; i <= a; ++i)
          for (int j = 0; j <= b; ++j)
            s += choose(a, i) * choose(b, j) * M[i][j] * z[(a - i) + 2 * (b - j)];
        next[a][b] = s;
      }
    M = next;
  }
  return M;
}

double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("jumps") {

TEST_CASE("Poisson truncation for lambda=3, T=0.25") {
  const auto tr = truncate_poisson(3.0, 0.25, 5.5e-5);
  CHECK(tr.n_max == 6);
  CHECK(tr.dropped_mass < 5.5e-5);
  CHECK(poisson_tail(0.75, 5) >= 5.5e-5);
  CHECK(tr.dropped_mass == doctest::Approx(poisson_tail(0.75, 6)).epsilon(1e-9));

  // A fixed cutoff above the minimum still meets the bound.
  const auto fixed = truncate_jumps(fixtures::table2_jump(10), 0.25);
  CHECK(fixed.n_max == 10);
  CHECK(fixed.dropped_mass < 5.5e-5);
  CHECK(fixed.weights.size() == 11);
  double s = 0.0;
  for (double w : fixed.weights) s += w;
  CHECK(s + fixed.dropped_mass == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(truncate_poisson(0.0, 1.0, 1e-6).n_max == 0);
}

TEST_CASE("aggregated PEA coefficient") {
  CHECK(pea_aggregate(fixtures::table2_pea(), 0.25) == doctest::Approx(0.0317845).epsilon(1e-5));
  // Increasing in b, decreasing in T.
  double prev = 0.0;
  for (double b : {0.5, 1.0, 2.0, 4.0}) {
    const double v = pea_aggregate({b, 250.0, 0.02}, 0.25);
    CHECK(v > prev);
    prev = v;
  }
  prev = 1e9;
  for (double T : {0.05, 0.25, 1.0, 3.0}) {
    const double v = pea_aggregate(fixtures::table2_pea(), T);
    CHECK(v < prev);
    CHECK(v > 0.0);
    prev = v;
  }
}

TEST_CASE("Gauss rules integrate polynomials exactly") {
  const auto gh = gauss_hermite(10);
  double s0 = 0, s2 = 0, s4 = 0, s6 = 0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double x = gh.nodes[i], w = gh.weights[i];
    s0 += w;
    s2 += w * x * x;
    s4 += w * std::pow(x, 4);
    s6 += w * std::pow(x, 6);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s4 == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(s6 == doctest::Approx(15.0).epsilon(1e-12));

  // Normalized gamma(alpha+1) moments: E t^k = (alpha+1)...(alpha+k).
  for (double alpha : {-0.5, 0.0, 1.5}) {
    const auto gl = gauss_laguerre(8, alpha);
    for (int k = 0; k <= 4; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], k);
      double expect = 1.0;
      for (int j = 1; j <= k; ++j) expect *= alpha + j;
      CHECK(s == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("expectation over jumps matches moments of (X_n, Y_n)") {
  const double mu = -0.025, eps2 = 0.005;
  for (int n = 1; n <= 10; ++n) {
    const auto M = xy_moments(n, mu, eps2, 4, 4);
    for (int a = 0; a <= 4; ++a)
      for (int b = 0; a + b <= 4; ++b) {
        CAPTURE(n);
        CAPTURE(a);
        CAPTURE(b);
        const double q = expectation_over_jumps(
            n, mu, eps2, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
        CHECK(std::abs(q - M[a][b]) <= 1e-8 * std::max(1e-3, std::abs(M[a][b])));
      }
  }
}

TEST_CASE("joint density integrates to one") {
  const double mu = -0.025, eps2 = 0.005;
  for (int n : {2, 3, 5}) {
    // y = x^2/n + t^2 removes the edge singularity at n = 2.
    const double sx = std::sqrt(n * eps2);
    const double tmax = std::sqrt(eps2 * 80.0);
    const double mass = simpson(
        [&](double x) {
          return simpson(
              [&](double t) {
                const double tt = std::max(t, 1e-9);  // the n = 2 integrand is finite at t = 0
                return joint_density(n, mu, eps2, x, x * x / n + tt * tt) * 2 * tt;
              },
              0.0, tmax, 400);
        },
        n * mu - 9 * sx, n * mu + 9 * sx, 400);
    CAPTURE(n);
    CHECK(std::abs(mass - 1.0) < 5e-3);
  }
  CHECK(joint_density(3, mu, eps2, 0.1, 0.001) == 0.0);  // below the parabola
}

TEST_CASE("jump-time bias") {
  const auto jump = fixtures::table2_jump();
  const auto pea = fixtures::table2_pea();
  const double eb = jump_time_bias(jump, pea, 0.25, 10);
  CHECK(eb == doctest::Approx(2.07e-6).epsilon(0.01));
  CHECK(implied_vol_impact(0.2475, eb) == doctest::Approx(4.18e-6).epsilon(0.01));

  // Oracle: expected count in the last Delta times the per-jump shift of the
  // decay, with the uniform arrival time integrated numerically.
  const double beta = pea.attenuation, delta = pea.duration, T = 0.25;
  const double eta = jump.log_mean * jump.log_mean + jump.log_var;
  const double avg = simpson([&](double s) { return std::exp(-beta * s); }, 0.0, delta, 200) / delta;
  const double oracle = jump.intensity * delta * pea.proportional_coeff * eta / (beta * T) *
                        (avg - std::exp(-beta * delta));
  CHECK(jump_time_bias(jump, pea, T, 40) == doctest::Approx(oracle).epsilon(1e-9));

  auto none = jump;
  none.intensity = 0.0;
  CHECK(jump_time_bias(none, pea, T, 10) == 0.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    JumpSpec j;
    j.intensity = 20 * u(rng);
    j.log_mean = -0.2 + 0.3 * u(rng);
    j.log_var = 0.05 * u(rng);
    const PeaSpec p{5 * u(rng), 1 + 800 * u(rng), 0.001 + 0.05 * u(rng)};
    CHECK(jump_time_bias(j, p, 0.1 + u(rng), 10) >= 0.0);
  }
}

TEST_CASE("validation") {
  auto j = fixtures::table2_jump();
  j.log_var = -1.0;
  CHECK_THROWS_AS(j.validate(), ValidationError);
  j = fixtures::table2_jump();
  j.truncation_eps = 1.0;
  CHECK_THROWS_AS(j.validate(), ValidationError);
  CHECK_THROWS_AS((PeaSpec{2.0, 0.0, 0.02}.validate()), ValidationError);
  CHECK_THROWS_AS((PeaSpec{-1.0, 250.0, 0.02}.validate()), ValidationError);
  CHECK_THROWS_AS(implied_vol_impact(0.1, 0.02), ValidationError);
}

}
