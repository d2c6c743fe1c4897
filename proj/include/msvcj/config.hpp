#pragma once

// JSON model configuration. The model is selected by which blocks are
// present: no "jumps" and no "pea" is MS-SV, "jumps" alone is MS-SVJ, both
// is MS-SVCJ.
//
//   {
//     "chain":   {"states_var": [...], "transition": [[...]], "tau": 0.00833,
//                 "initial_var": 0.04},
//     "jumps":   {"lambda": 3, "mu": -0.025, "eps2": 0.005, "trunc_eps": 5.5e-5},
//     "pea":     {"b": 2, "beta": 250, "delta": 0.02},
//     "market":  {"spot": 100, "strike": 100, "rate": 0.05, "dividend_yield": 0,
//                 "maturity": 0.25, "kind": "call"},
//     "numerics": {"hermite": 40, "laguerre": 40, "key_digits": 12,
//                  "triple_cap": 1e8, "path_cap": 1e8, "seed": 7}
//   }

#include <cstdint>
#include <string>

#include <json.hpp>

#include "msvcj/european.hpp"

namespace msvcj {

struct NumericsConfig {
  QuadratureOrders orders;
  int key_digits = kDefaultKeyDigits;
  std::uint64_t triple_cap = kDefaultTripleCap;
  std::uint64_t path_cap = kDefaultEnumerationCap;
  std::uint64_t seed = 7;

  AivOptions aiv() const { return {key_digits, triple_cap}; }
};

struct ModelConfig {
  ModelSpec model;
  MarketSpec market;
  NumericsConfig numerics;
};

/// Throws ValidationError naming the offending key. A document with a
/// top-level "config" object (an emitted result) is read through that object.
ModelConfig parse_config(const nlohmann::json& doc);
ModelConfig load_config(const std::string& path);

/// Canonical form of `config`; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ModelConfig& config);

}  // namespace msvcj
