#pragma once

// Exact distribution of the Markov-switching part of average integrated
// variance, V = (1/L) sum_{k=0}^{L-1} sigma_k^2, given sigma_0.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "msvcj/msvol.hpp"

namespace msvcj {

struct AivDistribution {
  std::vector<double> support;      // ascending, annualized variance
  std::vector<double> probs;        // p_V(v) > 0, sums to 1
  std::vector<std::int64_t> keys;   // fixed-point running sums behind `support`
  int horizon_steps = 0;            // L
  int key_digits = kDefaultKeyDigits;
  std::uint64_t chain_fingerprint = 0;

  std::size_t size() const { return support.size(); }
  double mean() const;
  double total_probability() const;
};

/// Result of an overflow-checked binomial-type count.
struct BoundedCount {
  std::uint64_t value = 0;
  bool saturated = false;  // true when the exact value exceeds 2^64-1

  friend bool operator<=(std::uint64_t lhs, const BoundedCount& rhs) {
    return rhs.saturated || lhs <= rhs.value;
  }
};

/// C(n, k), saturating.
BoundedCount binomial(std::uint64_t n, std::uint64_t k);

/// Upper bound on |support|: C(L+m-2, m-1).
BoundedCount support_bound(int m, int num_steps);

/// Upper bound on the number of distinct triples over steps 1..L: m*C(L-1+m, m).
BoundedCount triple_bound(int m, int num_steps);

inline constexpr std::uint64_t kDefaultTripleCap = 100'000'000;

struct AivOptions {
  int key_digits = kDefaultKeyDigits;
  /// Maximum number of live triples (two adjacent layers) allowed.
  std::uint64_t triple_cap = kDefaultTripleCap;
};

struct AivStats {
  std::uint64_t total_triples = 0;      // sum over layers of distinct (key, last state)
  std::uint64_t peak_live_triples = 0;  // max over l of |layer l| + |layer l+1|
  std::uint64_t max_layer_triples = 0;
  std::vector<std::uint64_t> layer_triples;  // index l-1
};

/// Recursive recombination. Layer l is stored as the sorted set of running
/// variance-sum keys with one probability column per last state; moving to
/// layer l+1 shifts each column by its state's key and merges the m sorted
/// shifted copies, so recombination is exact integer equality.
///
/// Throws ValidationError for num_steps < 1 and ResourceCapError when the
/// live triple count could exceed options.triple_cap.
AivDistribution aiv_rr(const ChainSpec& chain, int num_steps, const AivOptions& options = {},
                       AivStats* stats = nullptr);

/// Complete enumeration over all m^L paths. Same contract as aiv_rr.
AivDistribution aiv_ce(const ChainSpec& chain, int num_steps,
                       std::uint64_t path_cap = kDefaultEnumerationCap,
                       int key_digits = kDefaultKeyDigits);

/// Peak live-triple bound used for the up-front cap check: each layer holds
/// at most m * min(C(l+m-2, m-1), number of reachable integer key sums).
BoundedCount rr_live_triple_bound(const ChainSpec& chain, int num_steps, int key_digits);

/// Thread-safe memo of AIV distributions keyed by chain fingerprint, initial
/// state and horizon.
class AivCache {
 public:
  std::shared_ptr<const AivDistribution> get(const ChainSpec& chain, int num_steps,
                                             const AivOptions& options = {});
  std::shared_ptr<const AivDistribution> get(const ChainSpec& chain, std::size_t initial_state,
                                             int num_steps, const AivOptions& options = {});
  void clear();
  std::size_t size() const;

 private:
  using Key = std::tuple<std::uint64_t, int, int>;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const AivDistribution>> entries_;
};

AivCache& default_aiv_cache();

}  // namespace msvcj
