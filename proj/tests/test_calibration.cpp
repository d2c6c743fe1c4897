#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "msvcj/calibration.hpp"
#include "msvcj/errors.hpp"

using namespace msvcj;

namespace {

ReturnSeries series_from_returns(const std::vector<double>& r) {
  ReturnSeries s;
  double logp = std::log(100.0);
  s.times.push_back(0);
  s.closes.push_back(100.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    logp += r[i];
    s.times.push_back(static_cast<double>(i + 1));
    s.closes.push_back(std::exp(logp));
  }
  return s;
}

// Daily Merton returns: Gaussian diffusion plus compound-Poisson lognormal jumps.
std::vector<double> merton_returns(std::size_t n, double sigma, double lambda, double mu,
                                   double eps, std::mt19937_64& rng) {
  const double a = 1.0 / 252;
  std::normal_distribution<double> z(0.0, 1.0);
  std::poisson_distribution<int> count(lambda * a);
  std::vector<double> r(n);
  for (auto& x : r) {
    x = sigma * std::sqrt(a) * z(rng);
    for (int k = count(rng); k > 0; --k) x += mu + eps * z(rng);
  }
  return r;
}

struct MomentSample {
  ReturnMoments m;
  ReturnMoments se;
};

// One a-period return in the stationary regime: jumps arrive on [-W, a];
// each adds b ln^2 J e^{-beta (t - s)} to the variance rate from its arrival
// s on, and those inside [0, a] also shift the return by ln J.
MomentSample simulate_interval(double sigma2, const JumpSpec& j, double b, double beta, double a,
                               long n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double W = 40.0 / beta;
  std::poisson_distribution<int> count(j.intensity * (W + a));
  std::vector<double> x(n);
  for (auto& r : x) {
    double shift = 0.0, var = sigma2 * a;
    for (int k = count(rng); k > 0; --k) {
      const double s = -W + (W + a) * u(rng);
      const double lj = j.log_mean + std::sqrt(j.log_var) * z(rng);
      const double from = std::max(s, 0.0);
      var += b * lj * lj / beta * (std::exp(-beta * (from - s)) - std::exp(-beta * (a - s)));
      if (s >= 0.0) shift += lj;
    }
    r = shift + std::sqrt(var) * z(rng);
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double c2 = 0, c3 = 0, c4 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (double r : x) {
    const double d = r - mean, d2 = d * d;
    c2 += d2;
    c3 += d2 * d;
    c4 += d2 * d2;
    s2 += d2 * d2;
    s3 += d2 * d2 * d2;
    s4 += d2 * d2 * d2 * d2;
  }
  c2 /= n, c3 /= n, c4 /= n;
  MomentSample out;
  out.m = {c2, c3, c4};
  out.se = {std::sqrt((s2 / n - c2 * c2) / n), std::sqrt((s3 / n - c3 * c3) / n),
            std::sqrt((s4 / n - c4 * c4) / n)};
  return out;
}

ModelSpec small_calibration_model() {
  const ChainSpec chain = ChainSpec::from_variances(
      {0.0059, 0.0151, 0.0332, 0.0577},
      {{0.90, 0.06, 0.03, 0.01}, {0.04, 0.90, 0.04, 0.02}, {0.02, 0.05, 0.90, 0.03},
       {0.01, 0.03, 0.06, 0.90}},
      0.125 / 8, 1);
  JumpSpec j;
  j.intensity = 4.40;
  j.log_mean = -0.0572;
  j.log_var = 0.0029;
  return {chain, j, PeaSpec{4.45, 550.0, 0.02}};
}

MarketSpec calibration_frame() { return {140.0, 140.0, 0.0236, 0.0, 0.125, OptionKind::call}; }

PricingOptions fast_orders() {
  PricingOptions o;
  o.orders = {8, 2};
  return o;
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("quantile by interpolation between order statistics") {
  CHECK(quantile({4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 0.75) == doctest::Approx(3.25));
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({7}, 0.3) == 7.0);
  CHECK(quantile({1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, 0.25) == doctest::Approx(3.5));
  CHECK_THROWS_AS(quantile({}, 0.5), ValidationError);
  CHECK_THROWS_AS(quantile({1, 2}, 1.5), ValidationError);
}

TEST_CASE("box-plot split") {
  // Ten returns with two obvious outliers.
  const std::vector<double> r{0.001, -0.002, 0.0005, 0.0015, -0.001, 0.08, 0.0, -0.0005, -0.09, 0.002};
  const auto s = boxplot_split(series_from_returns(r));
  CHECK(s.jump_indices == std::vector<std::size_t>{5, 8});
  CHECK(s.jump_indices.size() + s.diffusion_indices.size() == r.size());
  CHECK_FALSE(s.zero_jump);
  CHECK(s.jump_intensity == doctest::Approx(2.0 / (10.0 / 252)));
  CHECK(s.jump_mean == doctest::Approx(-0.005));
  CHECK(s.jump_var == doctest::Approx((0.085 * 0.085 + 0.085 * 0.085) / 1.0));
  for (auto i : s.jump_indices) CHECK((r[i] < s.lower || r[i] > s.upper));
  for (auto i : s.diffusion_indices) CHECK((r[i] >= s.lower && r[i] <= s.upper));

  SUBCASE("constant returns are all diffusion") {
    const auto c = boxplot_split(series_from_returns(std::vector<double>(20, 0.001)));
    CHECK(c.iqr == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.zero_jump);
    CHECK(c.diffusion_indices.size() == 20);
    CHECK(c.jump_intensity == 0.0);
  }
  SUBCASE("affine re-dating changes nothing") {
    auto a = series_from_returns(r);
    auto b = a;
    for (auto& t : b.times) t = 3.5 * t + 18000;
    const auto sa = boxplot_split(a), sb = boxplot_split(b);
    CHECK(sa.jump_indices == sb.jump_indices);
    CHECK(sa.lower == sb.lower);
    CHECK(sa.upper == sb.upper);
  }
  SUBCASE("permuting the returns permutes the split") {
    std::mt19937_64 rng(5);
    std::vector<std::size_t> perm(r.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> pr;
    for (auto i : perm) pr.push_back(r[i]);
    const auto sp = boxplot_split(series_from_returns(pr));
    CHECK(sp.lower == doctest::Approx(s.lower).epsilon(1e-9));
    CHECK(sp.upper == doctest::Approx(s.upper).epsilon(1e-9));
    std::vector<double> ja, jb;
    for (auto i : s.jump_indices) ja.push_back(r[i]);
    for (auto i : sp.jump_indices) jb.push_back(pr[i]);
    std::sort(ja.begin(), ja.end());
    std::sort(jb.begin(), jb.end());
    REQUIRE(ja.size() == jb.size());
    for (std::size_t i = 0; i < ja.size(); ++i) CHECK(ja[i] == doctest::Approx(jb[i]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(boxplot_split(series_from_returns({0.1, 0.2})), ValidationError);
}

TEST_CASE("box-plot split recovers a Merton jump intensity") {
  std::mt19937_64 rng(17);
  const double lambda = 25.0;
  const auto r = merton_returns(252 * 40, 0.15, lambda, -0.06, 0.01, rng);
  const auto s = boxplot_split(series_from_returns(r));
  CHECK(s.jump_intensity == doctest::Approx(lambda).epsilon(0.25));
  CHECK(s.jump_mean < 0.0);
}

TEST_CASE("price CSV loading") {
  const std::string path = "calibration_prices_test.csv";
  {
    std::ofstream out(path);
    out << "date,close\n2020-01-02,100\n2020-01-03,101\n2020-01-06,99.5\n";
  }
  const auto s = load_prices_csv(path);
  CHECK(s.closes.size() == 3);
  CHECK(s.times[1] - s.times[0] == 1.0);
  CHECK(s.times[2] - s.times[1] == 3.0);
  CHECK(s.log_returns()[0] == doctest::Approx(std::log(1.01)));
  CHECK(day_number("1970-01-02") == 1.0);
  {
    std::ofstream out(path);
    out << "date,close\n2020-01-03,100\n2020-01-02,101\n";
  }
  CHECK_THROWS_AS(load_prices_csv(path), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("moment equations") {
  const double a = 1.0 / 252, sigma2 = 0.04;
  SUBCASE("no jumps: Gaussian moments") {
    JumpSpec none;
    const auto m = gmm_moments(sigma2, none, 2.0, 250.0, a);
    CHECK(m.variance == doctest::Approx(a * sigma2));
    CHECK(m.third == 0.0);
    CHECK(m.fourth == doctest::Approx(3 * a * a * sigma2 * sigma2));
  }
  SUBCASE("simulation oracle") {
    const auto j = fixtures::table2_jump(std::nullopt);
    // The last pair makes the spike terms dominate the jump terms.
    for (auto [b, beta] : {std::pair{0.0, 250.0}, std::pair{2.0, 250.0}, std::pair{40.0, 25.0}}) {
      const auto m = gmm_moments(sigma2, j, b, beta, a);
      const auto sim = simulate_interval(sigma2, j, b, beta, a, 2'000'000, 23);
      CAPTURE(b);
      CAPTURE(beta);
      CHECK(std::abs(m.variance - sim.m.variance) <= 3 * sim.se.variance);
      CHECK(std::abs(m.third - sim.m.third) <= 3 * sim.se.third);
      CHECK(std::abs(m.fourth - sim.m.fourth) <= 3 * sim.se.fourth);
    }
  }
  SUBCASE("jump terms only add variance") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      JumpSpec j;
      j.intensity = 30 * u(rng);
      j.log_mean = -0.2 + 0.4 * u(rng);
      j.log_var = 0.05 * u(rng);
      const double s2 = 0.2 * u(rng);
      CHECK(gmm_moments(s2, j, 5 * u(rng), 1 + 1000 * u(rng), a).variance >= a * s2);
    }
  }
  SUBCASE("moment fit recovers (b, attenuation)") {
    const auto j = fixtures::table2_jump(std::nullopt);
    const auto target = gmm_moments(sigma2, j, 2.0, 250.0, a);
    const auto fit = fit_pea_moments(target, sigma2, j, a, {0.1, 10.0, true},
                                     {20.0, 2000.0, true}, 20000, 3);
    CHECK(fit.loss < 1e-3);
    CHECK(fit.b == doctest::Approx(2.0).epsilon(0.2));
  }
}

TEST_CASE("search candidates") {
  const std::vector<SearchBox> boxes{{0.1, 20.0, true}, {-0.2, 0.1, false}};
  const auto a = random_candidates(boxes, 100, 9);
  const auto b = random_candidates(boxes, 200, 9);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (const auto& c : b) {
    CHECK(c[0] >= 0.1);
    CHECK(c[0] <= 20.0);
    CHECK(c[1] >= -0.2);
    CHECK(c[1] <= 0.1);
  }
  CHECK_THROWS_AS(random_candidates({{0.0, 1.0, true}}, 5, 1), ValidationError);
}

TEST_CASE("rate interpolation and quotes") {
  CHECK(interpolate_rate(0.0833, 0.0230, 0.25, 0.0250, 0.125) ==
        doctest::Approx(0.0230 + (0.125 - 0.0833) / (0.25 - 0.0833) * 0.002));
  OptionQuote q{140, 2.0, 2.2, 0.125, "2020-01-01"};
  CHECK(q.mid() == doctest::Approx(2.1));
  q.bid = 3.0;
  CHECK_THROWS_AS(q.validate(), ValidationError);
}

TEST_CASE("calibration recovers a model-generated quote") {
  const ModelSpec model = small_calibration_model();
  const MarketSpec frame = calibration_frame();
  std::vector<double> prices;
  const std::vector<OptionQuote> dummy{{145.0, 1.0, 1.0, 0.125, ""}};
  calibration_objective(model, frame, dummy, fast_orders(), &prices);
  const std::vector<OptionQuote> quotes{{145.0, prices[0], prices[0], 0.125, ""}};
  CHECK(calibration_objective(model, frame, quotes, fast_orders()) < 1e-20);

  CalibrationSearch search;
  search.iterations = 50;
  search.intensity = {4.40 - 1e-6, 4.40 + 1e-6, false};
  search.log_mean = {-0.0572 - 1e-6, -0.0572 + 1e-6, false};
  search.log_var = {0.0029 - 1e-7, 0.0029 + 1e-7, false};
  const auto r = calibrate_jumps(model, frame, quotes, search, fast_orders());
  CHECK(r.objective < 1e-8);
  CHECK(r.intensity == doctest::Approx(4.40).epsilon(1e-5));
  CHECK(r.model_prices.size() == 1);
}

TEST_CASE("best-so-far never increases and more iterations never hurt") {
  const ModelSpec model = small_calibration_model();
  const MarketSpec frame = calibration_frame();
  std::vector<OptionQuote> quotes;
  for (double K : {130.0, 140.0, 150.0}) quotes.push_back({K, 1.0, 1.0, 0.125, ""});
  std::vector<double> prices;
  calibration_objective(model, frame, quotes, fast_orders(), &prices);
  for (std::size_t i = 0; i < quotes.size(); ++i)
    quotes[i].bid = quotes[i].ask = prices[i] * (1.0 + 0.01 * (i + 1));

  CalibrationSearch search;
  search.iterations = 40;
  search.seed = 4;
  const auto one = calibrate_jumps(model, frame, quotes, search, fast_orders());
  search.iterations = 80;
  search.threads = 2;
  const auto two = calibrate_jumps(model, frame, quotes, search, fast_orders());
  for (std::size_t i = 1; i < two.best_so_far.size(); ++i)
    CHECK(two.best_so_far[i] <= two.best_so_far[i - 1]);
  CHECK(two.objective <= one.objective);
  // The first 40 candidates are shared, so the 2x run passes through the 1x optimum.
  CHECK(two.best_so_far[39] == one.objective);
}

TEST_CASE("rejected candidates") {
  ModelSpec model = small_calibration_model();
  model.jump->truncation_eps = 2.0;  // every candidate fails validation
  const std::vector<OptionQuote> quotes{{140.0, 4.0, 4.2, 0.125, ""}};
  CalibrationSearch search;
  search.iterations = 5;
  try {
    calibrate_jumps(model, calibration_frame(), quotes, search, fast_orders());
    FAIL("expected every candidate to be rejected");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("every candidate was rejected") != std::string::npos);
  }
  search.log_var = {-0.01, 0.01, false};
  CHECK_THROWS_AS(calibrate_jumps(small_calibration_model(), calibration_frame(), quotes, search),
                  ValidationError);
}

}
