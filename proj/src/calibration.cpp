#include "msvcj/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "calibration";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

double parse_number(const std::string& text, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError(std::string(kModule) + ": " + where + ": not a number '" + text + "'");
}

// Reads a CSV with the expected header; returns the data rows.
std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::vector<std::string>& header) {
  std::ifstream in(path);
  require(static_cast<bool>(in), kModule, "cannot open " + path);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool have_header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv(line);
    if (!have_header) {
      require(cells == header, kModule,
              path + ": expected header '" + [&] {
                std::string h;
                for (const auto& c : header) h += (h.empty() ? "" : ",") + c;
                return h;
              }() + "'");
      have_header = true;
      continue;
    }
    require(cells.size() == header.size(), kModule,
            path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                " fields");
    rows.push_back(std::move(cells));
  }
  return rows;
}

double normal_raw_moment(double mu, double v, int i) {
  switch (i) {
    case 0: return 1.0;
    case 1: return mu;
    case 2: return mu * mu + v;
    case 3: return mu * mu * mu + 3.0 * mu * v;
    case 4: return std::pow(mu, 4) + 6.0 * mu * mu * v + 3.0 * v * v;
    default: break;
  }
  // E X^i = mu E X^{i-1} + (i-1) v E X^{i-2}
  double a = 1.0, b = mu;
  for (int k = 2; k <= i; ++k) {
    const double c = mu * b + (k - 1) * v * a;
    a = b;
    b = c;
  }
  return b;
}

template <class F>
void parallel_for(long n, int threads, F&& body) {
  threads = std::max(1, threads);
  if (threads == 1 || n < 2) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      for (long i = t; i < n; i += threads) body(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

std::vector<double> ReturnSeries::log_returns() const {
  validate();
  std::vector<double> r(closes.size() - 1);
  for (std::size_t i = 0; i + 1 < closes.size(); ++i) r[i] = std::log(closes[i + 1] / closes[i]);
  return r;
}

void ReturnSeries::validate() const {
  require(times.size() == closes.size(), kModule, "dates and closes differ in length");
  require(closes.size() >= 2, kModule, "need at least two prices");
  require(std::isfinite(interval) && interval > 0.0, kModule, "sampling interval must be positive");
  for (std::size_t i = 0; i < closes.size(); ++i) {
    require(std::isfinite(closes[i]) && closes[i] > 0.0, kModule,
            "price " + std::to_string(i) + " is not positive");
    if (i > 0)
      require(times[i] > times[i - 1], kModule,
              "dates not strictly increasing at row " + std::to_string(i));
  }
}

double day_number(const std::string& iso_date) {
  int y = 0;
  unsigned m = 0, d = 0;
  char s1 = 0, s2 = 0;
  std::istringstream in(iso_date);
  in >> y >> s1 >> m >> s2 >> d;
  require(!in.fail() && s1 == '-' && s2 == '-' && in.peek() == EOF, kModule,
          "bad date '" + iso_date + "', expected YYYY-MM-DD");
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  require(ymd.ok(), kModule, "invalid date '" + iso_date + "'");
  return static_cast<double>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

ReturnSeries load_prices_csv(const std::string& path, double interval) {
  ReturnSeries s;
  s.interval = interval;
  int row = 1;
  for (const auto& cells : read_csv(path, {"date", "close"})) {
    ++row;
    s.times.push_back(day_number(cells[0]));
    s.closes.push_back(parse_number(cells[1], path + " row " + std::to_string(row)));
  }
  s.validate();
  return s;
}

double quantile(std::vector<double> values, double p) {
  require(!values.empty(), kModule, "quantile of an empty sample");
  require(p >= 0.0 && p <= 1.0, kModule, "quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - lo) * (values[hi] - values[lo]);
}

BoxplotSplit boxplot_split(const ReturnSeries& series, double k_f) {
  require(std::isfinite(k_f) && k_f >= 0.0, kModule, "k_f must be non-negative");
  const std::vector<double> r = series.log_returns();
  require(r.size() >= 8, kModule, "box-plot split needs at least 8 returns");

  BoxplotSplit out;
  out.k_f = k_f;
  out.q1 = quantile(r, 0.25);
  out.q3 = quantile(r, 0.75);
  out.iqr = out.q3 - out.q1;
  out.lower = out.q1 - k_f * out.iqr;
  out.upper = out.q3 + k_f * out.iqr;
  for (std::size_t i = 0; i < r.size(); ++i)
    (r[i] < out.lower || r[i] > out.upper ? out.jump_indices : out.diffusion_indices).push_back(i);

  out.zero_jump = out.jump_indices.empty();
  const double years = r.size() * series.interval;
  out.jump_intensity = out.jump_indices.size() / years;
  if (!out.zero_jump) {
    double sum = 0.0;
    for (auto i : out.jump_indices) sum += r[i];
    out.jump_mean = sum / out.jump_indices.size();
    if (out.jump_indices.size() > 1) {
      double ss = 0.0;
      for (auto i : out.jump_indices) ss += (r[i] - out.jump_mean) * (r[i] - out.jump_mean);
      out.jump_var = ss / (out.jump_indices.size() - 1);
    }
  }
  return out;
}

double log_jump_raw_moment(const JumpSpec& jump, int i) {
  require(i >= 0, kModule, "moment order must be non-negative");
  return normal_raw_moment(jump.log_mean, jump.log_var, i);
}

ReturnMoments gmm_moments(double sigma2, const JumpSpec& jump, double b, double attenuation,
                          double a) {
  require(sigma2 >= 0.0 && a > 0.0, kModule, "need sigma2 >= 0 and a > 0");
  require(b >= 0.0 && attenuation > 0.0, kModule, "need b >= 0 and attenuation > 0");
  jump.validate();
  const double d = attenuation;
  const double M2 = jump.intensity * log_jump_raw_moment(jump, 2);
  const double M3 = jump.intensity * log_jump_raw_moment(jump, 3);
  const double M4 = jump.intensity * log_jump_raw_moment(jump, 4);
  const double as2 = a * sigma2;
  // d a - 1 + e^{-d a} without cancellation for small d a
  const double g = std::expm1(-d * a) + d * a;

  ReturnMoments m;
  m.variance = as2 + a * (1.0 + b / d) * M2;
  m.third = (a + 3.0 * b / (d * d) * g) * M3;
  m.fourth = 3.0 * as2 * as2 + 6.0 * a * a * sigma2 * (1.0 + b / d) * M2 +
             (a + 6.0 * b / (d * d) * g + 3.0 * b * b / (d * d * d) * g) * M4 +
             (3.0 * a * a * b * (b + 2.0) / (d * d) + 3.0 * a * a) * M2 * M2;
  return m;
}

ReturnMoments sample_moments(const std::vector<double>& values) {
  require(!values.empty(), kModule, "moments of an empty sample");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  ReturnMoments m;
  for (double v : values) {
    const double c = v - mean, c2 = c * c;
    m.variance += c2;
    m.third += c2 * c;
    m.fourth += c2 * c2;
  }
  const double n = static_cast<double>(values.size());
  m.variance /= n;
  m.third /= n;
  m.fourth /= n;
  return m;
}

std::vector<std::vector<double>> random_candidates(const std::vector<SearchBox>& boxes, long n,
                                                   std::uint64_t seed) {
  for (const auto& box : boxes) {
    require(std::isfinite(box.lo) && std::isfinite(box.hi) && box.lo <= box.hi, kModule,
            "search box needs lo <= hi");
    require(!box.log_scale || box.lo > 0.0, kModule, "log-scaled box needs lo > 0");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(std::max(0L, n)),
                                       std::vector<double>(boxes.size()));
  for (auto& c : out)
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      const SearchBox& box = boxes[k];
      const double t = u(rng);
      c[k] = box.log_scale
                 ? std::exp(std::log(box.lo) + t * (std::log(box.hi) - std::log(box.lo)))
                 : box.lo + t * (box.hi - box.lo);
    }
  return out;
}

PeaMomentFit fit_pea_moments(const ReturnMoments& target, double sigma2, const JumpSpec& jump,
                             double a, const SearchBox& b_box, const SearchBox& attenuation_box,
                             long iterations, std::uint64_t seed) {
  require(iterations >= 1, kModule, "need at least one iteration");
  require(attenuation_box.lo > 0.0, kModule, "attenuation box must be positive");
  auto scale = [](double v) { return std::abs(v) > 0.0 ? std::abs(v) : 1.0; };
  const double s2 = scale(target.variance), s3 = scale(target.third), s4 = scale(target.fourth);

  PeaMomentFit best;
  best.loss = std::numeric_limits<double>::infinity();
  for (const auto& c : random_candidates({b_box, attenuation_box}, iterations, seed)) {
    const ReturnMoments m = gmm_moments(sigma2, jump, c[0], c[1], a);
    const double e2 = (m.variance - target.variance) / s2;
    const double e3 = (m.third - target.third) / s3;
    const double e4 = (m.fourth - target.fourth) / s4;
    const double loss = e2 * e2 + e3 * e3 + e4 * e4;
    if (loss < best.loss) best = {c[0], c[1], loss};
  }
  return best;
}

void OptionQuote::validate() const {
  require(std::isfinite(strike) && strike > 0.0, kModule, "quote strike must be positive");
  require(std::isfinite(bid) && std::isfinite(ask) && 0.0 <= bid && bid <= ask, kModule,
          "quote at strike " + std::to_string(strike) + " needs 0 <= bid <= ask");
  require(std::isfinite(maturity) && maturity > 0.0, kModule, "quote maturity must be positive");
}

std::vector<OptionQuote> load_quotes_csv(const std::string& path, double maturity,
                                         const std::string& quote_date) {
  std::vector<OptionQuote> quotes;
  int row = 1;
  for (const auto& cells : read_csv(path, {"strike", "bid", "ask"})) {
    const std::string where = path + " row " + std::to_string(++row);
    OptionQuote q{parse_number(cells[0], where), parse_number(cells[1], where),
                  parse_number(cells[2], where), maturity, quote_date};
    q.validate();
    quotes.push_back(q);
  }
  require(!quotes.empty(), kModule, path + ": no quotes");
  return quotes;
}

double interpolate_rate(double t1, double r1, double t2, double r2, double t) {
  require(t1 != t2, kModule, "rate interpolation needs two distinct maturities");
  return r1 + (r2 - r1) * (t - t1) / (t2 - t1);
}

double calibration_objective(const ModelSpec& model, const MarketSpec& frame,
                             const std::vector<OptionQuote>& quotes, const PricingOptions& options,
                             std::vector<double>* model_prices) {
  require(!quotes.empty(), kModule, "need at least one quote");
  frame.validate();
  model.validate();
  const int steps = horizon_steps(model.chain, frame.maturity);
  const std::shared_ptr<const AivDistribution> aiv =
      options.cache ? options.cache->get(model.chain, steps, options.aiv)
                    : std::make_shared<const AivDistribution>(aiv_rr(model.chain, steps, options.aiv));
  const Mixture mix = model_mixture(model, *aiv, frame.maturity, options.orders);

  double obj = 0.0;
  if (model_prices) model_prices->clear();
  for (const auto& q : quotes) {
    q.validate();
    const double mid = q.mid();
    require(mid > 0.0, kModule, "quote at strike " + std::to_string(q.strike) + " has zero mid");
    const double c = price_mixture(mix, frame.spot, q.strike, frame.rate, frame.dividend_yield,
                                   frame.maturity, OptionKind::call)
                         .price;
    require(std::isfinite(c), kModule, "non-finite model price");
    if (model_prices) model_prices->push_back(c);
    obj += (c - mid) * (c - mid) / (mid * mid);
  }
  return obj;
}

CalibrationResult calibrate_jumps(const ModelSpec& model, const MarketSpec& frame,
                                  const std::vector<OptionQuote>& quotes,
                                  const CalibrationSearch& search, const PricingOptions& options) {
  require(search.iterations >= 1, kModule, "need at least one iteration");
  require(!quotes.empty(), kModule, "need at least one quote");
  require(search.intensity.lo >= 0.0 && search.log_var.lo >= 0.0, kModule,
          "bounds need lambda >= 0 and eps2 >= 0");
  for (const auto& q : quotes) {
    q.validate();
    require(std::abs(q.maturity - frame.maturity) < 1e-12, kModule,
            "quote maturity differs from the pricing frame");
  }
  // Warm the AIV cache once so workers share it.
  if (options.cache) options.cache->get(model.chain, horizon_steps(model.chain, frame.maturity),
                                        options.aiv);

  const auto cands = random_candidates({search.intensity, search.log_mean, search.log_var},
                                       search.iterations, search.seed);
  const JumpSpec base = model.jump.value_or(JumpSpec{});
  std::vector<double> objs(cands.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errs(cands.size());
  parallel_for(static_cast<long>(cands.size()), search.threads, [&](long i) {
    ModelSpec m = model;
    JumpSpec j = base;
    j.intensity = cands[i][0];
    j.log_mean = cands[i][1];
    j.log_var = cands[i][2];
    m.jump = j;
    try {
      objs[i] = calibration_objective(m, frame, quotes, options);
      if (!std::isfinite(objs[i])) errs[i] = "non-finite objective";
    } catch (const std::exception& e) {
      errs[i] = e.what();
    }
  });

  CalibrationResult out;
  out.objective = std::numeric_limits<double>::infinity();
  out.best_so_far.reserve(cands.size());
  long best = -1;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    ++out.evaluated;
    if (!errs[i].empty()) {
      ++out.rejected;
      std::ostringstream msg;
      msg << "candidate " << i << " (" << cands[i][0] << ", " << cands[i][1] << ", "
          << cands[i][2] << ") rejected: " << errs[i];
      out.diagnostics.push_back(msg.str());
    } else if (objs[i] < out.objective) {
      out.objective = objs[i];
      best = static_cast<long>(i);
    }
    out.best_so_far.push_back(out.objective);
  }
  if (best < 0)
    throw ValidationError(std::string(kModule) + ": every candidate was rejected; " +
                          out.diagnostics.front());
  out.intensity = cands[best][0];
  out.log_mean = cands[best][1];
  out.log_var = cands[best][2];
  ModelSpec m = model;
  JumpSpec j = base;
  j.intensity = out.intensity;
  j.log_mean = out.log_mean;
  j.log_var = out.log_var;
  m.jump = j;
  calibration_objective(m, frame, quotes, options, &out.model_prices);
  return out;
}

}  // namespace msvcj
