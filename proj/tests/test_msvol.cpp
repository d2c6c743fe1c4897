#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "msvcj/errors.hpp"
#include "msvcj/msvol.hpp"

using namespace msvcj;

TEST_SUITE("msvol") {

TEST_CASE("states are sorted and the transition matrix follows them") {
  const ChainSpec c = ChainSpec::from_variances({0.08, 0.02}, {{0.6, 0.4}, {0.3, 0.7}}, 0.1, 0);
  CHECK(c.variances()[0] == 0.02);
  CHECK(c.variances()[1] == 0.08);
  CHECK(c.initial_state() == 1);
  CHECK(c.transition(1, 1) == 0.6);
  CHECK(c.transition(0, 1) == 0.3);
  CHECK(c.volatilities()[1] == doctest::Approx(std::sqrt(0.08)).epsilon(1e-15));
}

TEST_CASE("validation names the offending row") {
  auto P = fixtures::table2_transition();
  P[2][0] += 0.01;
  try {
    ChainSpec::from_variances(fixtures::kTable2Vars, P, 0.01, 1);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  CHECK_THROWS_AS(ChainSpec::from_variances({0.02, 0.02}, {{1, 0}, {0, 1}}, 0.01, 0),
                  ValidationError);
  CHECK_THROWS_AS(ChainSpec::from_variances({0.02, -0.04}, {{1, 0}, {0, 1}}, 0.01, 0),
                  ValidationError);
  CHECK_THROWS_AS(ChainSpec::from_variances({0.02}, {{1}}, 0.0, 0), ValidationError);
  CHECK_THROWS_AS(ChainSpec::from_variances({0.02}, {{1}}, 0.1, 3), ValidationError);
}

TEST_CASE("renormalization rescales rows when asked") {
  const ChainSpec c =
      ChainSpec::from_variances({0.02, 0.04}, {{0.5, 0.5 + 1e-9}, {0.2, 0.8}}, 0.1, 0, true);
  CHECK(c.transition(0, 0) + c.transition(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("evolve_distribution edge cases") {
  const ChainSpec c = fixtures::table2_chain(0.01);
  const auto start = StateDistribution::point_mass(4, 1);
  CHECK(evolve_distribution(c, start, 0).probs == start.probs);

  const ChainSpec id = ChainSpec::from_variances(
      {0.01, 0.02, 0.03}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}, 0.1, 2);
  const auto d = evolve_distribution(id, StateDistribution::point_mass(3, 2), 5);
  CHECK(d.probs == std::vector<double>{0, 0, 1});
  CHECK(d.time_steps == 5);
}

TEST_CASE("evolve_distribution matches a direct matrix power") {
  const ChainSpec c = fixtures::table2_chain(0.25 / 30);
  Eigen::Matrix4d P;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) P(i, j) = c.transition(i, j);
  Eigen::Matrix4d Pk = Eigen::Matrix4d::Identity();
  for (int k = 0; k < 30; ++k) Pk = Pk * P;
  const auto d = evolve_distribution(c, StateDistribution::point_mass(4, 1), 30);
  for (int j = 0; j < 4; ++j) CHECK(d.probs[j] == doctest::Approx(Pk(1, j)).epsilon(1e-13));
}

TEST_CASE("Chapman-Kolmogorov over random chains") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + trial % 4;
    std::vector<double> vars;
    for (std::size_t k = 0; k < m; ++k) vars.push_back(0.01 * (k + 1));
    const ChainSpec c = ChainSpec::from_variances(vars, fixtures::random_stochastic(m, rng), 0.1, 0);
    const long s1 = trial % 7, s2 = 3 + trial % 5;
    const auto start = StateDistribution::point_mass(m, m - 1);
    const auto a = evolve_distribution(c, start, s1 + s2);
    const auto b = evolve_distribution(c, evolve_distribution(c, start, s1), s2);
    CHECK(b.time_steps == s1 + s2);
    for (std::size_t k = 0; k < m; ++k) CHECK(std::abs(a.probs[k] - b.probs[k]) <= 1e-12);
  }
}

TEST_CASE("stationary distribution is invariant") {
  const ChainSpec c = fixtures::table2_chain(0.01);
  const auto pi = c.stationary_distribution();
  const auto next = evolve_distribution(c, StateDistribution{pi, 0}, 1);
  for (int k = 0; k < 4; ++k) CHECK(next.probs[k] == doctest::Approx(pi[k]).epsilon(1e-12));
}

TEST_CASE("single-state chain enumerates one path") {
  const ChainSpec c = ChainSpec::from_variances({0.03}, {{1.0}}, 0.1, 0);
  PathEnumerator e(c, 4);
  REQUIRE(e.next());
  CHECK(e.current().prob == 1.0);
  CHECK(e.current().weight == doctest::Approx(0.03).epsilon(1e-15));
  CHECK_FALSE(e.next());
}

TEST_CASE("two-state tree up to L=3") {
  const ChainSpec c(std::vector<double>{0.2, 0.4}, {{0.7, 0.3}, {0.4, 0.6}}, 1.0 / 3, 1);
  PathEnumerator e(c, 3);
  std::set<std::vector<std::size_t>> seen;
  double total = 0.0;
  while (e.next()) {
    const auto& p = e.current();
    CHECK(p.states.size() == 4);
    CHECK(p.states.front() == 1);
    seen.insert(p.states);
    total += p.prob;
    double prob = 1.0, w = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      prob *= c.transition(p.states[k], p.states[k + 1]);
      w += c.variances()[p.states[k]];
    }
    CHECK(p.prob == doctest::Approx(prob).epsilon(1e-15));
    CHECK(p.weight == doctest::Approx(w / 3).epsilon(1e-15));
  }
  CHECK(seen.size() == 8);
  CHECK(seen.count({1, 1, 1, 1}) == 1);
  CHECK(seen.count({1, 0, 0, 0}) == 1);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("enumeration mass is one for small chains") {
  std::mt19937_64 rng(5);
  for (std::size_t m = 1; m <= 4; ++m)
    for (int L = 1; L <= 8; ++L) {
      std::vector<double> vars;
      for (std::size_t k = 0; k < m; ++k) vars.push_back(0.02 + 0.013 * k);
      const ChainSpec c =
          ChainSpec::from_variances(vars, fixtures::random_stochastic(m, rng), 0.1, m / 2);
      PathEnumerator e(c, L);
      double total = 0.0;
      std::uint64_t n = 0;
      while (e.next()) {
        total += e.current().prob;
        ++n;
      }
      CHECK(n == *PathEnumerator::count_paths(m, L));
      CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("all-initial-state path has weight u0^2 exactly") {
  const ChainSpec c = fixtures::table2_chain(0.01);
  PathEnumerator e(c, 6);
  while (e.next()) {
    const auto& s = e.current().states;
    if (std::all_of(s.begin(), s.end(), [](std::size_t k) { return k == 1; }))
      CHECK(e.current().weight == 0.04);
  }
}

TEST_CASE("m=3, L=5 gives 243 paths") {
  std::mt19937_64 rng(9);
  const ChainSpec c =
      ChainSpec::from_variances({0.01, 0.02, 0.05}, fixtures::random_stochastic(3, rng), 0.1, 0);
  PathEnumerator e(c, 5);
  int n = 0;
  while (e.next()) ++n;
  CHECK(n == 243);
}

TEST_CASE("enumeration cap") {
  const ChainSpec c = fixtures::table2_chain(0.01);
  CHECK_THROWS_AS(PathEnumerator(c, 16), ResourceCapError);
  CHECK_THROWS_AS(PathEnumerator(c, 10, 1000), ResourceCapError);
  CHECK_NOTHROW(PathEnumerator(c, 10));
}

TEST_CASE("fingerprint separates chains") {
  const ChainSpec a = fixtures::table2_chain(0.01);
  CHECK(a.fingerprint() == fixtures::table2_chain(0.01).fingerprint());
  CHECK(a.fingerprint() != fixtures::table2_chain(0.02).fingerprint());
  CHECK(a.fingerprint() != a.with_initial_state(0).fingerprint());
}

}
