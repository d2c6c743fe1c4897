// Python module _msvcj: thin wrappers over the C++ API; results come back as
// plain dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "msvcj/bermudan.hpp"
#include "msvcj/calibration.hpp"
#include "msvcj/config.hpp"
#include "msvcj/errors.hpp"
#include "msvcj/montecarlo.hpp"

namespace py = pybind11;
using namespace msvcj;

namespace {

OptionKind parse_kind(const std::string& kind) {
  require(kind == "call" || kind == "put", "python", "kind must be \"call\" or \"put\"");
  return kind == "call" ? OptionKind::call : OptionKind::put;
}

py::dict estimate_dict(const McEstimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["std_err"] = e.std_err;
  d["mean_std_err"] = e.mean_std_err;
  d["runs"] = e.runs;
  d["path_variance"] = e.path_variance;
  return d;
}

SimConfig sim_config(long paths, int runs, int substeps, std::uint64_t seed, bool antithetic,
                     int threads) {
  SimConfig s;
  s.n_paths = paths;
  s.n_runs = runs;
  s.n_substeps = substeps;
  s.seed = seed;
  s.antithetic = antithetic;
  s.threads = threads;
  return s;
}

}  // namespace

PYBIND11_MODULE(_msvcj, m) {
  m.doc() = "Markov-switching volatility with co-jumps: exact AIV, European and Bermudan pricing";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ResourceCapError>(m, "ResourceCapError", PyExc_MemoryError);

  py::class_<ChainSpec>(m, "ChainSpec")
      .def(py::init<std::vector<double>, std::vector<std::vector<double>>, double, std::size_t,
                    bool>(),
           py::arg("volatilities"), py::arg("transition"), py::arg("step"),
           py::arg("initial_state"), py::arg("renormalize") = false)
      .def_static("from_variances", &ChainSpec::from_variances, py::arg("variances"),
                  py::arg("transition"), py::arg("step"), py::arg("initial_state"),
                  py::arg("renormalize") = false)
      .def_property_readonly("volatilities", [](const ChainSpec& c) {
        return std::vector<double>(c.volatilities().begin(), c.volatilities().end());
      })
      .def_property_readonly("variances", [](const ChainSpec& c) {
        return std::vector<double>(c.variances().begin(), c.variances().end());
      })
      .def_property_readonly("transition", &ChainSpec::transition_matrix)
      .def_property_readonly("step", &ChainSpec::step)
      .def_property_readonly("initial_state", &ChainSpec::initial_state)
      .def("stationary_distribution", &ChainSpec::stationary_distribution);

  py::class_<JumpSpec>(m, "JumpSpec")
      .def(py::init([](double lambda, double mu, double eps2, double trunc_eps,
                       std::optional<int> max_jumps) {
             JumpSpec j{lambda, mu, eps2, trunc_eps, max_jumps};
             j.validate();
             return j;
           }),
           py::arg("intensity"), py::arg("log_mean"), py::arg("log_var"),
           py::arg("truncation_eps") = 5.5e-5, py::arg("max_jumps") = py::none())
      .def_readwrite("intensity", &JumpSpec::intensity)
      .def_readwrite("log_mean", &JumpSpec::log_mean)
      .def_readwrite("log_var", &JumpSpec::log_var)
      .def_readwrite("truncation_eps", &JumpSpec::truncation_eps)
      .def_readwrite("max_jumps", &JumpSpec::max_jumps);

  py::class_<PeaSpec>(m, "PeaSpec")
      .def(py::init([](double b, double beta, double delta) {
             PeaSpec p{b, beta, delta};
             p.validate();
             return p;
           }),
           py::arg("b"), py::arg("beta"), py::arg("delta"))
      .def_readwrite("b", &PeaSpec::proportional_coeff)
      .def_readwrite("beta", &PeaSpec::attenuation)
      .def_readwrite("delta", &PeaSpec::duration);

  py::class_<MarketSpec>(m, "MarketSpec")
      .def(py::init([](double spot, double strike, double maturity, double rate, double q,
                       const std::string& kind) {
             MarketSpec mk{spot, strike, rate, q, maturity, parse_kind(kind)};
             mk.validate();
             return mk;
           }),
           py::arg("spot"), py::arg("strike"), py::arg("maturity"), py::arg("rate") = 0.0,
           py::arg("dividend_yield") = 0.0, py::arg("kind") = "call")
      .def_readwrite("spot", &MarketSpec::spot)
      .def_readwrite("strike", &MarketSpec::strike)
      .def_readwrite("rate", &MarketSpec::rate)
      .def_readwrite("dividend_yield", &MarketSpec::dividend_yield)
      .def_readwrite("maturity", &MarketSpec::maturity)
      .def_property(
          "kind", [](const MarketSpec& mk) { return mk.kind == OptionKind::call ? "call" : "put"; },
          [](MarketSpec& mk, const std::string& k) { mk.kind = parse_kind(k); });

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init([](const ChainSpec& c, std::optional<JumpSpec> j, std::optional<PeaSpec> p) {
             ModelSpec model{c, j, p};
             model.validate();
             return model;
           }),
           py::arg("chain"), py::arg("jump") = py::none(), py::arg("pea") = py::none())
      .def_readonly("chain", &ModelSpec::chain)
      .def_readonly("jump", &ModelSpec::jump)
      .def_readonly("pea", &ModelSpec::pea)
      .def_property_readonly("kind", [](const ModelSpec& s) { return to_string(s.kind()); });

  m.def(
      "load_config",
      [](const std::string& path) {
        const ModelConfig cfg = load_config(path);
        return py::make_tuple(cfg.model, cfg.market);
      },
      py::arg("path"), "Reads a JSON config; returns (model, market).");

  m.def(
      "aiv",
      [](const ChainSpec& chain, int steps, const std::string& algo) {
        require(algo == "rr" || algo == "ce", "python", "algo must be \"rr\" or \"ce\"");
        AivDistribution d;
        {
          py::gil_scoped_release release;
          d = algo == "rr" ? aiv_rr(chain, steps) : aiv_ce(chain, steps);
        }
        return py::make_tuple(d.support, d.probs);
      },
      py::arg("chain"), py::arg("steps"), py::arg("algo") = "rr",
      "Distribution of average integrated variance: (support, probabilities).");

  m.def(
      "price_european",
      [](const ModelSpec& model, const MarketSpec& market, int hermite, int laguerre) {
        PricingOptions o;
        o.orders = {hermite, laguerre};
        PriceResult r;
        {
          py::gil_scoped_release release;
          r = price_european(market, model, o);
        }
        py::dict d;
        d["price"] = r.price;
        d["delta"] = r.delta;
        d["n_max"] = r.n_max;
        d["support_size"] = r.support_size;
        d["truncation_mass_dropped"] = r.truncation_mass_dropped;
        d["b_hat"] = r.b_hat;
        return d;
      },
      py::arg("model"), py::arg("market"), py::arg("hermite") = kDefaultHermiteOrder,
      py::arg("laguerre") = kDefaultLaguerreOrder);

  m.def("bs_price",
        [](double spot, double variance, double rate, double q, double maturity, double strike,
           const std::string& kind) {
          const BsValue v = bs_price(spot, variance, rate, q, maturity, strike, parse_kind(kind));
          return py::make_tuple(v.price, v.delta);
        },
        py::arg("spot"), py::arg("variance"), py::arg("rate"), py::arg("dividend_yield"),
        py::arg("maturity"), py::arg("strike"), py::arg("kind") = "call");

  m.def(
      "price_bermudan",
      [](const ModelSpec& model, const MarketSpec& market, const std::string& schedule,
         std::vector<double> spots, int n_points, double grid_span) {
        BermudanOptions o;
        o.n_points = n_points;
        o.grid_span = grid_span;
        if (spots.empty()) spots.push_back(market.spot);
        std::vector<BermudanResult> rs;
        {
          py::gil_scoped_release release;
          rs = price_bermudan(model, market, ExerciseSchedule::parse(schedule), spots, o);
        }
        py::list out;
        for (const auto& r : rs) {
          py::dict d;
          d["spot"] = r.spot;
          d["lower"] = r.lower_bound;
          d["upper"] = r.upper_bound;
          d["lower_delta"] = r.lower_delta;
          d["upper_delta"] = r.upper_delta;
          out.append(d);
        }
        return out;
      },
      py::arg("model"), py::arg("market"), py::arg("schedule"),
      py::arg("spots") = std::vector<double>{}, py::arg("n_points") = 200,
      py::arg("grid_span") = 2.0, "Tangent (lower) and secant (upper) bounds per spot.");

  m.def(
      "mc_european",
      [](const ModelSpec& model, const MarketSpec& market, long paths, int runs, int substeps,
         std::uint64_t seed, bool antithetic, int threads) {
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = mc_european(model, market,
                          sim_config(paths, runs, substeps, seed, antithetic, threads));
        }
        return estimate_dict(e);
      },
      py::arg("model"), py::arg("market"), py::arg("paths") = 100000, py::arg("runs") = 10,
      py::arg("substeps") = 1500, py::arg("seed") = 7, py::arg("antithetic") = false,
      py::arg("threads") = 1);

  m.def(
      "lsm_bermudan",
      [](const ModelSpec& model, const MarketSpec& market, const std::string& schedule,
         long paths, int runs, std::uint64_t seed, int degree, bool antithetic) {
        const auto sched = ExerciseSchedule::parse(schedule);
        SimConfig sim = sim_config(paths, runs, 1, seed, antithetic, 1);
        sim.n_substeps = horizon_steps(model.chain, sched.maturity());
        McEstimate e;
        {
          py::gil_scoped_release release;
          e = lsm_bermudan(model, market, sched, sim, degree);
        }
        return estimate_dict(e);
      },
      py::arg("model"), py::arg("market"), py::arg("schedule"), py::arg("paths") = 100000,
      py::arg("runs") = 10, py::arg("seed") = 7, py::arg("degree") = 3,
      py::arg("antithetic") = false);

  m.def("jump_time_bias", &jump_time_bias, py::arg("jump"), py::arg("pea"), py::arg("maturity"),
        py::arg("n_max"));
  m.def("implied_vol_impact", &implied_vol_impact, py::arg("implied_vol"), py::arg("bias"));

  m.def(
      "boxplot_split",
      [](std::vector<double> times, std::vector<double> closes, double k_f, double interval) {
        ReturnSeries s{std::move(times), std::move(closes), interval};
        s.validate();
        const BoxplotSplit b = boxplot_split(s, k_f);
        py::dict d;
        d["q1"] = b.q1;
        d["q3"] = b.q3;
        d["lower"] = b.lower;
        d["upper"] = b.upper;
        d["jump_indices"] = b.jump_indices;
        d["zero_jump"] = b.zero_jump;
        d["jump_intensity"] = b.jump_intensity;
        d["jump_mean"] = b.jump_mean;
        d["jump_var"] = b.jump_var;
        return d;
      },
      py::arg("times"), py::arg("closes"), py::arg("k_f") = 1.5,
      py::arg("interval") = 1.0 / kTradingDaysPerYear);

  m.def(
      "calibrate_jumps",
      [](const ModelSpec& model, const MarketSpec& frame,
         const std::vector<std::tuple<double, double, double>>& quotes, long iterations,
         std::uint64_t seed, int hermite, int laguerre) {
        std::vector<OptionQuote> qs;
        for (const auto& [k, bid, ask] : quotes) qs.push_back({k, bid, ask, frame.maturity, ""});
        CalibrationSearch search;
        search.iterations = iterations;
        search.seed = seed;
        PricingOptions o;
        o.orders = {hermite, laguerre};
        CalibrationResult r;
        {
          py::gil_scoped_release release;
          r = calibrate_jumps(model, frame, qs, search, o);
        }
        py::dict d;
        d["intensity"] = r.intensity;
        d["log_mean"] = r.log_mean;
        d["log_var"] = r.log_var;
        d["objective"] = r.objective;
        d["rejected"] = r.rejected;
        d["model_prices"] = r.model_prices;
        return d;
      },
      py::arg("model"), py::arg("frame"), py::arg("quotes"), py::arg("iterations") = 2000,
      py::arg("seed") = 7, py::arg("hermite") = 8, py::arg("laguerre") = 2,
      "quotes: list of (strike, bid, ask).");
}
