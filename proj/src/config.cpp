#include "msvcj/config.hpp"

#include <cmath>
#include <fstream>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "config";
using nlohmann::json;

const json& field(const json& obj, const char* block, const char* key) {
  require(obj.contains(key), kModule, std::string(block) + "." + key + " is required");
  return obj.at(key);
}

double number(const json& obj, const char* block, const char* key) {
  const json& v = field(obj, block, key);
  require(v.is_number(), kModule, std::string(block) + "." + key + " must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* block, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, block, key) : fallback;
}

std::uint64_t count_or(const json& obj, const char* block, const char* key,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const double v = number(obj, block, key);
  require(v >= 0.0 && v <= 1.8e19 && v == std::floor(v), kModule,
          std::string(block) + "." + key + " must be a non-negative integer");
  return obj.at(key).is_number_unsigned() ? obj.at(key).get<std::uint64_t>()
                                          : static_cast<std::uint64_t>(v);
}

int int_or(const json& obj, const char* block, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const double v = number(obj, block, key);
  require(v == std::floor(v) && std::abs(v) < 2e9, kModule,
          std::string(block) + "." + key + " must be an integer");
  return static_cast<int>(v);
}

std::vector<double> number_list(const json& v, const std::string& where) {
  require(v.is_array(), kModule, where + " must be an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    require(v[i].is_number(), kModule, where + "[" + std::to_string(i) + "] must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

const json& block(const json& doc, const char* name) {
  const json& b = field(doc, "config", name);
  require(b.is_object(), kModule, std::string(name) + " must be an object");
  return b;
}

ChainSpec parse_chain(const json& c) {
  const bool by_var = c.contains("states_var");
  require(by_var != c.contains("states_vol"), kModule,
          "chain needs exactly one of states_var, states_vol");
  std::vector<double> levels =
      number_list(c.at(by_var ? "states_var" : "states_vol"),
                  by_var ? "chain.states_var" : "chain.states_vol");
  std::vector<double> vars = levels;
  if (!by_var)
    for (double& v : vars) v *= v;

  const json& t = field(c, "chain", "transition");
  require(t.is_array(), kModule, "chain.transition must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < t.size(); ++i)
    rows.push_back(number_list(t[i], "chain.transition row " + std::to_string(i)));

  std::size_t initial = 0;
  if (c.contains("initial_state")) {
    const int idx = int_or(c, "chain", "initial_state", 0);
    require(idx >= 0 && static_cast<std::size_t>(idx) < levels.size(), kModule,
            "chain.initial_state out of range");
    initial = static_cast<std::size_t>(idx);
  } else {
    const bool iv = c.contains("initial_var");
    require(iv || c.contains("initial_vol"), kModule,
            "chain needs initial_var, initial_vol or initial_state");
    double target = number(c, "chain", iv ? "initial_var" : "initial_vol");
    if (!iv) target *= target;
    std::size_t best = 0;
    for (std::size_t k = 1; k < vars.size(); ++k)
      if (std::abs(vars[k] - target) < std::abs(vars[best] - target)) best = k;
    require(!vars.empty() && std::abs(vars[best] - target) <= 1e-12 * std::max(1.0, target),
            kModule, "chain initial level is not one of the states");
    initial = best;
  }
  const bool renorm = c.value("renormalize", false);
  const double tau = number(c, "chain", "tau");
  if (by_var) return ChainSpec::from_variances(levels, std::move(rows), tau, initial, renorm);
  return ChainSpec(levels, std::move(rows), tau, initial, renorm);
}

}  // namespace

ModelConfig parse_config(const json& input) {
  require(input.is_object(), kModule, "config must be a JSON object");
  const json& doc = input.contains("config") && input.at("config").is_object() &&
                            !input.contains("chain")
                        ? input.at("config")
                        : input;
  ModelConfig cfg{ModelSpec{parse_chain(block(doc, "chain")), std::nullopt, std::nullopt},
                  MarketSpec{}, NumericsConfig{}};

  if (doc.contains("jumps")) {
    const json& j = block(doc, "jumps");
    JumpSpec jump;
    jump.intensity = number(j, "jumps", "lambda");
    jump.log_mean = number(j, "jumps", "mu");
    jump.log_var = number(j, "jumps", "eps2");
    jump.truncation_eps = number_or(j, "jumps", "trunc_eps", jump.truncation_eps);
    if (j.contains("max_jumps")) jump.max_jumps = int_or(j, "jumps", "max_jumps", 0);
    cfg.model.jump = jump;
  }
  if (doc.contains("pea")) {
    require(doc.contains("jumps"), kModule, "a pea block needs a jumps block");
    const json& p = block(doc, "pea");
    cfg.model.pea = PeaSpec{number(p, "pea", "b"), number(p, "pea", "beta"),
                            number(p, "pea", "delta")};
  }
  cfg.model.validate();

  const json& m = block(doc, "market");
  cfg.market.spot = number(m, "market", "spot");
  cfg.market.strike = number(m, "market", "strike");
  cfg.market.rate = number_or(m, "market", "rate", 0.0);
  cfg.market.dividend_yield = number_or(m, "market", "dividend_yield", 0.0);
  cfg.market.maturity = number(m, "market", "maturity");
  const std::string kind = m.value("kind", std::string("call"));
  require(kind == "call" || kind == "put", kModule, "market.kind must be \"call\" or \"put\"");
  cfg.market.kind = kind == "call" ? OptionKind::call : OptionKind::put;
  cfg.market.validate();

  if (doc.contains("numerics")) {
    const json& n = block(doc, "numerics");
    NumericsConfig& num = cfg.numerics;
    num.orders.hermite = int_or(n, "numerics", "hermite", num.orders.hermite);
    num.orders.laguerre = int_or(n, "numerics", "laguerre", num.orders.laguerre);
    num.key_digits = int_or(n, "numerics", "key_digits", num.key_digits);
    num.triple_cap = count_or(n, "numerics", "triple_cap", num.triple_cap);
    num.path_cap = count_or(n, "numerics", "path_cap", num.path_cap);
    num.seed = count_or(n, "numerics", "seed", num.seed);
    require(num.orders.hermite >= 1 && num.orders.laguerre >= 1, kModule,
            "quadrature orders must be positive");
    require(num.key_digits >= 0 && num.key_digits <= 15, kModule,
            "numerics.key_digits must be in [0, 15]");
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), kModule, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string(kModule) + ": " + path + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ModelConfig& cfg) {
  const ChainSpec& c = cfg.model.chain;
  json chain;
  chain["states_var"] = std::vector<double>(c.variances().begin(), c.variances().end());
  chain["transition"] = c.transition_matrix();
  chain["tau"] = c.step();
  chain["initial_var"] = c.variances()[c.initial_state()];

  json doc;
  doc["chain"] = chain;
  if (cfg.model.jump) {
    const JumpSpec& j = *cfg.model.jump;
    doc["jumps"] = {{"lambda", j.intensity},
                    {"mu", j.log_mean},
                    {"eps2", j.log_var},
                    {"trunc_eps", j.truncation_eps}};
    if (j.max_jumps) doc["jumps"]["max_jumps"] = *j.max_jumps;
  }
  if (cfg.model.pea) {
    const PeaSpec& p = *cfg.model.pea;
    doc["pea"] = {{"b", p.proportional_coeff}, {"beta", p.attenuation}, {"delta", p.duration}};
  }
  const MarketSpec& m = cfg.market;
  doc["market"] = {{"spot", m.spot},
                   {"strike", m.strike},
                   {"rate", m.rate},
                   {"dividend_yield", m.dividend_yield},
                   {"maturity", m.maturity},
                   {"kind", m.kind == OptionKind::call ? "call" : "put"}};
  const NumericsConfig& n = cfg.numerics;
  doc["numerics"] = {{"hermite", n.orders.hermite},   {"laguerre", n.orders.laguerre},
                     {"key_digits", n.key_digits},     {"triple_cap", n.triple_cap},
                     {"path_cap", n.path_cap},         {"seed", n.seed}};
  return doc;
}

}  // namespace msvcj
