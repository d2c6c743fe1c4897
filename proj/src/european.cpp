#include "msvcj/european.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "european";

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::shared_ptr<const AivDistribution> fetch_aiv(const ChainSpec& chain, int steps,
                                                 const PricingOptions& options) {
  if (options.cache) return options.cache->get(chain, steps, options.aiv);
  return std::make_shared<const AivDistribution>(aiv_rr(chain, steps, options.aiv));
}

PriceResult finish(const Mixture& mix, const MarketSpec& market, bool components,
                   const std::vector<std::pair<int, double>>* tags) {
  PriceResult out;
  const BsValue v = price_mixture(mix, market.spot, market.strike, market.rate,
                                  market.dividend_yield, market.maturity, market.kind);
  out.price = v.price;
  out.delta = v.delta;
  out.truncation_mass_dropped = mix.info.dropped_mass;
  out.n_max = mix.info.n_max;
  out.support_size = mix.info.support_size;
  out.orders = mix.info.orders;
  out.b_hat = mix.info.b_hat;
  if (components && tags) {
    std::map<std::pair<int, double>, double> acc;
    for (std::size_t i = 0; i < mix.atoms.size(); ++i) {
      const LognormalAtom& a = mix.atoms[i];
      const BsValue b = bs_price(market.spot * std::exp(a.log_shift), a.variance, market.rate,
                                 market.dividend_yield, market.maturity, market.strike,
                                 market.kind);
      acc[(*tags)[i]] += a.weight * b.price;
    }
    for (const auto& [key, c] : acc) out.components.push_back({key.first, key.second, c});
  }
  return out;
}

// (jump count, AIV support value) per atom, in the order the builders emit them.
std::vector<std::pair<int, double>> atom_tags(const ModelSpec::Kind kind,
                                              const AivDistribution& aiv, const Mixture& mix,
                                              double eps2 = 1.0) {
  std::vector<std::pair<int, double>> tags;
  tags.reserve(mix.atoms.size());
  const std::size_t nv = aiv.size();
  if (kind == ModelSpec::Kind::ms_sv) {
    for (std::size_t i = 0; i < nv; ++i) tags.emplace_back(0, aiv.support[i]);
    return tags;
  }
  // Builders emit blocks of nv atoms; each block belongs to one jump count.
  std::size_t i = 0;
  for (int n = 0; i < mix.atoms.size(); ++n) {
    const std::size_t blocks = kind == ModelSpec::Kind::ms_svj
                                   ? 1
                                   : jump_quadrature(n, 0.0, eps2, mix.info.orders).weights.size();
    for (std::size_t b = 0; b < blocks; ++b)
      for (std::size_t k = 0; k < nv; ++k, ++i) tags.emplace_back(n, aiv.support[k]);
  }
  return tags;
}

}  // namespace

void MarketSpec::validate() const {
  require(std::isfinite(spot) && spot > 0.0, kModule, "spot must be positive");
  require(std::isfinite(strike) && strike > 0.0, kModule, "strike must be positive");
  require(std::isfinite(maturity) && maturity > 0.0, kModule, "maturity must be positive");
  require(std::isfinite(rate) && std::isfinite(dividend_yield), kModule,
          "rate and dividend yield must be finite");
}

ModelSpec::Kind ModelSpec::kind() const {
  if (!jump) return Kind::ms_sv;
  return pea ? Kind::ms_svcj : Kind::ms_svj;
}

void ModelSpec::validate() const {
  require(jump.has_value() || !pea.has_value(), kModule,
          "a PEA block requires a jump block");
  if (jump) jump->validate();
  if (pea) pea->validate();
}

const char* to_string(ModelSpec::Kind kind) {
  switch (kind) {
    case ModelSpec::Kind::ms_sv: return "ms_sv";
    case ModelSpec::Kind::ms_svj: return "ms_svj";
    case ModelSpec::Kind::ms_svcj: return "ms_svcj";
  }
  return "?";
}

BsValue bs_price(double spot, double variance, double rate, double dividend_yield,
                 double maturity, double strike, OptionKind kind) {
  const double df_q = std::exp(-dividend_yield * maturity);
  const double df_r = std::exp(-rate * maturity);
  const double fwd = spot * df_q;   // discounted forward of the spot leg
  const double pv_k = strike * df_r;
  const bool call = kind == OptionKind::call;
  if (strike <= 0.0) {
    return call ? BsValue{fwd - pv_k, df_q} : BsValue{0.0, 0.0};
  }
  const double sd = std::sqrt(std::max(variance, 0.0) * maturity);
  if (sd == 0.0 || spot <= 0.0) {
    if (call) return fwd > pv_k ? BsValue{fwd - pv_k, df_q} : BsValue{0.0, 0.0};
    return pv_k > fwd ? BsValue{pv_k - fwd, -df_q} : BsValue{0.0, 0.0};
  }
  const double d1 = (std::log(fwd / pv_k) + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  if (call) return {fwd * norm_cdf(d1) - pv_k * norm_cdf(d2), df_q * norm_cdf(d1)};
  return {pv_k * norm_cdf(-d2) - fwd * norm_cdf(-d1), -df_q * norm_cdf(-d1)};
}

double implied_volatility(double price, const MarketSpec& market) {
  market.validate();
  auto value = [&](double vol) {
    return bs_price(market.spot, vol * vol, market.rate, market.dividend_yield, market.maturity,
                    market.strike, market.kind)
        .price;
  };
  double lo = 1e-8, hi = 10.0;
  require(std::isfinite(price) && price >= value(lo) && price <= value(hi), kModule,
          "price outside the Black-Scholes range");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) < price ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int horizon_steps(const ChainSpec& chain, double maturity) {
  require(maturity > 0.0, kModule, "maturity must be positive");
  const double ratio = maturity / chain.step();
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream os;
    os.precision(12);
    os << "maturity " << maturity << " is not a whole number of chain steps (T/tau = " << ratio
       << "); adjust tau so that T/tau is an integer";
    throw ValidationError(std::string(kModule) + ": " + os.str());
  }
  return static_cast<int>(rounded);
}

Mixture mixture_ms_sv(const AivDistribution& aiv) {
  Mixture mix;
  mix.atoms.reserve(aiv.size());
  for (std::size_t i = 0; i < aiv.size(); ++i) mix.atoms.push_back({aiv.probs[i], 0.0, aiv.support[i]});
  mix.info.support_size = aiv.size();
  return mix;
}

Mixture mixture_ms_svj(const AivDistribution& aiv, const JumpSpec& jump, double maturity) {
  jump.validate();
  const PoissonTruncation pois = truncate_jumps(jump, maturity);
  const double drift = -jump.intensity * jump.mean_jump() * maturity;
  Mixture mix;
  mix.atoms.reserve(aiv.size() * pois.weights.size());
  for (int n = 0; n <= pois.n_max; ++n) {
    const double pn = pois.weights[static_cast<std::size_t>(n)];
    const double shift = drift + n * (jump.log_mean + 0.5 * jump.log_var);
    const double extra = n * jump.log_var / maturity;
    for (std::size_t i = 0; i < aiv.size(); ++i)
      mix.atoms.push_back({pn * aiv.probs[i], shift, aiv.support[i] + extra});
  }
  mix.info = {pois.n_max, pois.dropped_mass, aiv.size(), {0, 0}, 0.0};
  return mix;
}

Mixture mixture_ms_svcj(const AivDistribution& aiv, const JumpSpec& jump, const PeaSpec& pea,
                        double maturity, const QuadratureOrders& orders) {
  jump.validate();
  const double b_hat = pea_aggregate(pea, maturity);
  const PoissonTruncation pois = truncate_jumps(jump, maturity);
  const double drift = -jump.intensity * jump.mean_jump() * maturity;
  Mixture mix;
  for (int n = 0; n <= pois.n_max; ++n) {
    const double pn = pois.weights[static_cast<std::size_t>(n)];
    const JumpQuadrature rule = jump_quadrature(n, jump.log_mean, jump.log_var, orders);
    for (std::size_t j = 0; j < rule.weights.size(); ++j) {
      const double w = pn * rule.weights[j];
      const double shift = drift + rule.x[j];
      const double extra = b_hat * rule.y[j];
      for (std::size_t i = 0; i < aiv.size(); ++i)
        mix.atoms.push_back({w * aiv.probs[i], shift, aiv.support[i] + extra});
    }
  }
  mix.info = {pois.n_max, pois.dropped_mass, aiv.size(), orders, b_hat};
  return mix;
}

Mixture model_mixture(const ModelSpec& model, const AivDistribution& aiv, double maturity,
                      const QuadratureOrders& orders) {
  switch (model.kind()) {
    case ModelSpec::Kind::ms_sv: return mixture_ms_sv(aiv);
    case ModelSpec::Kind::ms_svj: return mixture_ms_svj(aiv, *model.jump, maturity);
    case ModelSpec::Kind::ms_svcj:
      return mixture_ms_svcj(aiv, *model.jump, *model.pea, maturity, orders);
  }
  return {};
}

BsValue price_mixture(const Mixture& mix, double spot, double strike, double rate,
                      double dividend_yield, double maturity, OptionKind kind) {
  BsValue acc;
  for (const LognormalAtom& a : mix.atoms) {
    const double f = std::exp(a.log_shift);
    const BsValue b = bs_price(spot * f, a.variance, rate, dividend_yield, maturity, strike, kind);
    acc.price += a.weight * b.price;
    acc.delta += a.weight * f * b.delta;
  }
  return acc;
}

PriceResult price_ms_sv(const MarketSpec& market, const ChainSpec& chain,
                        const PricingOptions& options) {
  market.validate();
  const auto aiv = fetch_aiv(chain, horizon_steps(chain, market.maturity), options);
  const Mixture mix = mixture_ms_sv(*aiv);
  if (!options.components) return finish(mix, market, false, nullptr);
  const auto tags = atom_tags(ModelSpec::Kind::ms_sv, *aiv, mix);
  return finish(mix, market, true, &tags);
}

JumpDiffusionPricer merton_pricer(const JumpSpec& jump) {
  jump.validate();
  return [jump](double spot, double variance, const MarketSpec& m) {
    const PoissonTruncation pois = truncate_jumps(jump, m.maturity);
    const double drift = -jump.intensity * jump.mean_jump() * m.maturity;
    BsValue acc;
    for (int n = 0; n <= pois.n_max; ++n) {
      const double f = std::exp(drift + n * (jump.log_mean + 0.5 * jump.log_var));
      const BsValue b = bs_price(spot * f, variance + n * jump.log_var / m.maturity, m.rate,
                                 m.dividend_yield, m.maturity, m.strike, m.kind);
      const double pn = pois.weights[static_cast<std::size_t>(n)];
      acc.price += pn * b.price;
      acc.delta += pn * f * b.delta;
    }
    return acc;
  };
}

PriceResult price_ms_svj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                         const JumpDiffusionPricer& jd_pricer, const PricingOptions& options) {
  market.validate();
  jump.validate();
  require(static_cast<bool>(jd_pricer), kModule, "jump-diffusion pricer is empty");
  const auto aiv = fetch_aiv(chain, horizon_steps(chain, market.maturity), options);
  PriceResult out;
  for (std::size_t i = 0; i < aiv->size(); ++i) {
    const BsValue c = jd_pricer(market.spot, aiv->support[i], market);
    out.price += aiv->probs[i] * c.price;
    out.delta += aiv->probs[i] * c.delta;
    if (options.components) out.components.push_back({-1, aiv->support[i], aiv->probs[i] * c.price});
  }
  const PoissonTruncation pois =
      truncate_jumps(jump, market.maturity);
  out.truncation_mass_dropped = pois.dropped_mass;
  out.n_max = pois.n_max;
  out.support_size = aiv->size();
  return out;
}

PriceResult price_ms_svj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                         const PricingOptions& options) {
  return price_ms_svj(market, chain, jump, merton_pricer(jump), options);
}

PriceResult price_ms_svcj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                          const PeaSpec& pea, const PricingOptions& options) {
  market.validate();
  const auto aiv = fetch_aiv(chain, horizon_steps(chain, market.maturity), options);
  const Mixture mix = mixture_ms_svcj(*aiv, jump, pea, market.maturity, options.orders);
  if (!options.components) return finish(mix, market, false, nullptr);
  const auto tags = atom_tags(ModelSpec::Kind::ms_svcj, *aiv, mix, jump.log_var);
  return finish(mix, market, true, &tags);
}

PriceResult price_european(const MarketSpec& market, const ModelSpec& model,
                           const PricingOptions& options) {
  model.validate();
  switch (model.kind()) {
    case ModelSpec::Kind::ms_sv: return price_ms_sv(market, model.chain, options);
    case ModelSpec::Kind::ms_svj: return price_ms_svj(market, model.chain, *model.jump, options);
    case ModelSpec::Kind::ms_svcj:
      return price_ms_svcj(market, model.chain, *model.jump, *model.pea, options);
  }
  return {};
}

}  // namespace msvcj
