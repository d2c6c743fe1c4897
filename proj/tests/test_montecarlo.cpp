#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "msvcj/errors.hpp"
#include "msvcj/montecarlo.hpp"

using namespace msvcj;

namespace {

SimConfig small_sim(int threads = 1) {
  SimConfig s;
  s.n_substeps = 60;
  s.n_paths = 20000;
  s.n_runs = 4;
  s.seed = 11;
  s.threads = threads;
  return s;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("seed determinism and thread invariance") {
  const auto model = fixtures::table2_model();
  const auto mk = fixtures::table2_market();
  const auto a = mc_european(model, mk, small_sim(1));
  const auto b = mc_european(model, mk, small_sim(1));
  const auto c = mc_european(model, mk, small_sim(3));
  CHECK(a.runs == b.runs);
  CHECK(a.runs == c.runs);
  CHECK(a.mean == c.mean);
  auto other = small_sim(1);
  other.seed = 12;
  CHECK(mc_european(model, mk, other).runs != a.runs);
  CHECK(a.runs.size() == 4);
  CHECK(a.std_err >= 0.0);
  CHECK(a.mean_std_err == doctest::Approx(a.std_err / 2.0));
}

TEST_CASE("discounted spot is a martingale") {
  auto sim = small_sim();
  for (const auto& model :
       {ModelSpec{fixtures::table2_chain(0.25 / 30), std::nullopt, std::nullopt},
        fixtures::table2_model()}) {
    auto mk = fixtures::table2_market();
    mk.dividend_yield = 0.02;
    const auto e = mc_discounted_spot(model, mk, sim);
    const double target = mk.spot * std::exp(-mk.dividend_yield * mk.maturity);
    CHECK(std::abs(e.mean - target) <= 3 * e.mean_std_err);
  }
}

TEST_CASE("exact-conditional simulation with relocation matches the analytic price") {
  auto sim = small_sim();
  sim.n_paths = 100000;
  const auto model = fixtures::table2_model();
  const auto mk = fixtures::table2_market();
  const double analytic = price_european(mk, model).price;
  const auto e = mc_exact_conditional(model, mk, sim, true);
  CHECK(std::abs(e.mean - analytic) <= 3 * e.mean_std_err);

  // Without jumps both estimators target the MS-SV price.
  const ModelSpec sv{fixtures::table2_chain(0.25 / 30), std::nullopt, std::nullopt};
  const double sv_price = price_european(mk, sv).price;
  const auto x = mc_exact_conditional(sv, mk, sim, false);
  const auto y = mc_european(sv, mk, sim);
  CHECK(std::abs(x.mean - sv_price) <= 3 * x.mean_std_err);
  CHECK(std::abs(y.mean - sv_price) <= 3 * y.mean_std_err);
}

TEST_CASE("conditioning does not increase the path variance") {
  const auto model = fixtures::table2_model();
  const auto mk = fixtures::table2_market();
  const auto sim = small_sim();
  const auto full = mc_european(model, mk, sim);
  const auto cond = mc_exact_conditional(model, mk, sim, false);
  CHECK(cond.path_variance <= full.path_variance);
}

TEST_CASE("LSM stays under the secant bound") {
  const ModelSpec model{fixtures::table2_chain(0.5 / 30), std::nullopt, std::nullopt};
  const auto mk = fixtures::bermudan_market();
  const auto sched = ExerciseSchedule::parse("0.5:6");
  SimConfig sim = small_sim();
  sim.n_substeps = 60;
  sim.n_paths = 10000;
  sim.n_runs = 3;
  sim.antithetic = true;
  BermudanOptions opt;
  opt.n_points = 100;
  const auto bounds = price_bermudan(model, mk, sched, opt);
  const auto lsm = lsm_bermudan(model, mk, sched, sim);
  CHECK(lsm.mean <= bounds.upper_bound + 3 * lsm.std_err);
  CHECK(lsm.mean >= bounds.lower_bound - 3 * lsm.std_err);
}

TEST_CASE("validation") {
  auto sim = small_sim();
  sim.n_substeps = 45;  // not a multiple of the 30 chain steps
  CHECK_THROWS_AS(mc_european(fixtures::table2_model(), fixtures::table2_market(), sim),
                  ValidationError);
  sim = small_sim();
  sim.n_paths = 0;
  CHECK_THROWS_AS(sim.validate(), ValidationError);
}

}
