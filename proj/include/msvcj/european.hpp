#pragma once

// European options under MS-SV, MS-SVJ and MS-SVCJ. Every model is reduced to
// a finite lognormal mixture: weights w_a, log-spot shifts s_a and annualized
// variances v_a with price = sum_a w_a BS(S e^{s_a}, v_a).

#include <functional>
#include <optional>
#include <vector>

#include "msvcj/aiv.hpp"
#include "msvcj/jumps.hpp"
#include "msvcj/msvol.hpp"

namespace msvcj {

enum class OptionKind { call, put };

struct MarketSpec {
  double spot = 0.0;
  double strike = 0.0;
  double rate = 0.0;
  double dividend_yield = 0.0;
  double maturity = 0.0;
  OptionKind kind = OptionKind::call;

  void validate() const;
};

/// Chain plus optional jump and PEA blocks. No jump block selects MS-SV; a
/// jump block without PEA selects MS-SVJ.
struct ModelSpec {
  ChainSpec chain;
  std::optional<JumpSpec> jump;
  std::optional<PeaSpec> pea;

  enum class Kind { ms_sv, ms_svj, ms_svcj };
  Kind kind() const;
  void validate() const;
};

const char* to_string(ModelSpec::Kind kind);

struct BsValue {
  double price = 0.0;
  double delta = 0.0;
};

/// Black-Scholes with dividend yield; `variance` is annualized (total vT).
BsValue bs_price(double spot, double variance, double rate, double dividend_yield,
                 double maturity, double strike, OptionKind kind);

/// Black-Scholes volatility reproducing `price` (bisection on [1e-8, 10]).
double implied_volatility(double price, const MarketSpec& market);

struct LognormalAtom {
  double weight = 0.0;
  double log_shift = 0.0;
  double variance = 0.0;
};

struct MixtureInfo {
  int n_max = 0;
  double dropped_mass = 0.0;
  std::size_t support_size = 0;
  QuadratureOrders orders{0, 0};
  double b_hat = 0.0;
};

struct Mixture {
  std::vector<LognormalAtom> atoms;
  MixtureInfo info;
};

/// Number of chain steps L = T / tau; throws when T is not a whole multiple.
int horizon_steps(const ChainSpec& chain, double maturity);

struct PricingOptions {
  QuadratureOrders orders;
  AivOptions aiv;
  AivCache* cache = &default_aiv_cache();
  bool components = false;
};

Mixture mixture_ms_sv(const AivDistribution& aiv);
/// Merton series over the jump count on top of the AIV mixture.
Mixture mixture_ms_svj(const AivDistribution& aiv, const JumpSpec& jump, double maturity);
/// Theorem-style triple sum over jump count, AIV atom and quadrature node.
Mixture mixture_ms_svcj(const AivDistribution& aiv, const JumpSpec& jump, const PeaSpec& pea,
                        double maturity, const QuadratureOrders& orders);
/// Dispatch on the model kind.
Mixture model_mixture(const ModelSpec& model, const AivDistribution& aiv, double maturity,
                      const QuadratureOrders& orders);

/// sum_a w_a BS(spot e^{s_a}, v_a); delta carries the e^{s_a} chain factor.
BsValue price_mixture(const Mixture& mix, double spot, double strike, double rate,
                      double dividend_yield, double maturity, OptionKind kind);

struct PriceComponent {
  int jumps = 0;
  double variance = 0.0;
  double contribution = 0.0;
};

struct PriceResult {
  double price = 0.0;
  double delta = 0.0;
  double truncation_mass_dropped = 0.0;
  int n_max = 0;
  std::size_t support_size = 0;
  QuadratureOrders orders{0, 0};
  double b_hat = 0.0;
  std::vector<PriceComponent> components;  // filled on request
};

PriceResult price_ms_sv(const MarketSpec& market, const ChainSpec& chain,
                        const PricingOptions& options = {});

/// Jump-diffusion pricer C_jd(spot, diffusion variance, market).
using JumpDiffusionPricer =
    std::function<BsValue(double spot, double variance, const MarketSpec& market)>;

/// Merton lognormal-jump series truncated per jump.truncation_eps.
JumpDiffusionPricer merton_pricer(const JumpSpec& jump);

PriceResult price_ms_svj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                         const JumpDiffusionPricer& jd_pricer, const PricingOptions& options = {});
PriceResult price_ms_svj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                         const PricingOptions& options = {});

PriceResult price_ms_svcj(const MarketSpec& market, const ChainSpec& chain, const JumpSpec& jump,
                          const PeaSpec& pea, const PricingOptions& options = {});

/// Prices with whichever pricer the model kind selects.
PriceResult price_european(const MarketSpec& market, const ModelSpec& model,
                           const PricingOptions& options = {});

}  // namespace msvcj
