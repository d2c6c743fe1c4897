#include "msvcj/aiv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {

constexpr const char* kModule = "aiv";

double key_scale(int digits) { return std::pow(10.0, digits); }

AivDistribution point_mass(const ChainSpec& chain, int num_steps, int key_digits) {
  AivDistribution d;
  const std::int64_t k = variance_key(chain.variances()[chain.initial_state()], key_digits);
  d.support = {chain.variances()[chain.initial_state()]};
  d.probs = {1.0};
  d.keys = {k * num_steps};
  d.horizon_steps = num_steps;
  d.key_digits = key_digits;
  d.chain_fingerprint = chain.fingerprint();
  return d;
}

std::string format_count(const BoundedCount& c) {
  return c.saturated ? std::string(">= 2^64") : std::to_string(c.value);
}

}  // namespace

double AivDistribution::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) s += support[i] * probs[i];
  return s;
}

double AivDistribution::total_probability() const {
  return std::accumulate(probs.begin(), probs.end(), 0.0);
}

BoundedCount binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return {0, false};
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  constexpr unsigned __int128 kMax = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    r = r * (n - k + i) / i;
    if (r > kMax) return {std::numeric_limits<std::uint64_t>::max(), true};
  }
  return {static_cast<std::uint64_t>(r), false};
}

BoundedCount support_bound(int m, int num_steps) {
  require(m >= 1 && num_steps >= 1, kModule, "support_bound needs m >= 1 and L >= 1");
  return binomial(static_cast<std::uint64_t>(num_steps + m - 2),
                  static_cast<std::uint64_t>(m - 1));
}

BoundedCount triple_bound(int m, int num_steps) {
  require(m >= 1 && num_steps >= 1, kModule, "triple_bound needs m >= 1 and L >= 1");
  const BoundedCount c =
      binomial(static_cast<std::uint64_t>(num_steps - 1 + m), static_cast<std::uint64_t>(m));
  if (c.saturated) return c;
  const unsigned __int128 r = static_cast<unsigned __int128>(c.value) * static_cast<unsigned>(m);
  if (r > std::numeric_limits<std::uint64_t>::max())
    return {std::numeric_limits<std::uint64_t>::max(), true};
  return {static_cast<std::uint64_t>(r), false};
}

BoundedCount rr_live_triple_bound(const ChainSpec& chain, int num_steps, int key_digits) {
  const std::size_t m = chain.num_states();
  std::vector<std::int64_t> keys(m);
  for (std::size_t k = 0; k < m; ++k) keys[k] = variance_key(chain.variances()[k], key_digits);
  const std::int64_t kmin = *std::min_element(keys.begin(), keys.end());
  const std::int64_t kmax = *std::max_element(keys.begin(), keys.end());
  std::int64_t g = 0;
  for (std::int64_t k : keys) g = std::gcd(g, k - kmin);

  auto layer = [&](int l) -> unsigned __int128 {
    // Distinct sums of l-1 keys.
    const BoundedCount combos =
        binomial(static_cast<std::uint64_t>(l - 1 + static_cast<int>(m) - 1), m - 1);
    unsigned __int128 distinct = combos.saturated ? ~static_cast<unsigned __int128>(0) >> 1
                                                  : combos.value;
    if (g > 0) {
      const unsigned __int128 lattice =
          static_cast<unsigned __int128>(l - 1) * static_cast<std::uint64_t>((kmax - kmin) / g) + 1;
      distinct = std::min(distinct, lattice);
    } else {
      distinct = 1;
    }
    return distinct * m;
  };
  unsigned __int128 peak = layer(1);
  for (int l = 1; l < num_steps; ++l) peak = std::max(peak, layer(l) + layer(l + 1));
  if (peak > std::numeric_limits<std::uint64_t>::max())
    return {std::numeric_limits<std::uint64_t>::max(), true};
  return {static_cast<std::uint64_t>(peak), false};
}

AivDistribution aiv_rr(const ChainSpec& chain, int num_steps, const AivOptions& options,
                       AivStats* stats) {
  require(num_steps >= 1, kModule, "num_steps must be at least 1");
  const std::size_t m = chain.num_states();
  if (stats) *stats = AivStats{};
  if (m == 1) {
    if (stats) {
      stats->total_triples = static_cast<std::uint64_t>(num_steps);
      stats->peak_live_triples = num_steps > 1 ? 2 : 1;
      stats->max_layer_triples = 1;
      stats->layer_triples.assign(static_cast<std::size_t>(num_steps), 1);
    }
    return point_mass(chain, num_steps, options.key_digits);
  }

  const BoundedCount live_bound = rr_live_triple_bound(chain, num_steps, options.key_digits);
  auto cap_error = [&](const std::string& what) {
    std::ostringstream os;
    os << "aiv: " << what << " exceeds the triple cap " << options.triple_cap
       << " (m = " << m << ", L = " << num_steps
       << "; total distinct triples bounded by m*C(L-1+m, m) = "
       << format_count(triple_bound(static_cast<int>(m), num_steps)) << ")";
    throw ResourceCapError(os.str());
  };
  if (!(live_bound.value <= BoundedCount{options.triple_cap, false}) || live_bound.saturated) {
    cap_error("worst-case live triple count " + format_count(live_bound));
  }

  std::vector<std::int64_t> state_key(m);
  for (std::size_t k = 0; k < m; ++k)
    state_key[k] = variance_key(chain.variances()[k], options.key_digits);
  {
    // Largest reachable sum must stay representable.
    const std::int64_t kmax = *std::max_element(state_key.begin(), state_key.end());
    require(kmax == 0 || num_steps <= std::numeric_limits<std::int64_t>::max() / kmax, kModule,
            "variance-sum key overflows 64 bits; lower key_digits");
  }

  // Layer l: sorted keys (sum over sigma_0..sigma_{l-1}) and an m-column
  // probability block, row-major.
  const std::size_t s0 = chain.initial_state();
  std::vector<std::int64_t> keys{state_key[s0]};
  std::vector<double> probs(chain.transition_row(s0).begin(), chain.transition_row(s0).end());

  auto count_nonzero = [m](const std::vector<double>& p) {
    return static_cast<std::uint64_t>(
        std::count_if(p.begin(), p.end(), [](double x) { return x != 0.0; }));
  };
  std::uint64_t prev_count = count_nonzero(probs);
  AivStats local;
  local.layer_triples.push_back(prev_count);
  local.total_triples = prev_count;
  local.max_layer_triples = prev_count;
  local.peak_live_triples = prev_count;

  std::vector<std::int64_t> next_keys;
  std::vector<double> next_probs;
  std::vector<std::size_t> cursor(m);
  for (int l = 1; l < num_steps; ++l) {
    const std::size_t n = keys.size();
    next_keys.clear();
    next_probs.clear();
    next_keys.reserve(n + n / 2 + m);
    next_probs.reserve((n + n / 2 + m) * m);

    auto advance = [&](std::size_t s, std::size_t i) {
      while (i < n && probs[i * m + s] == 0.0) ++i;
      return i;
    };
    for (std::size_t s = 0; s < m; ++s) cursor[s] = advance(s, 0);

    for (;;) {
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      bool any = false;
      for (std::size_t s = 0; s < m; ++s) {
        if (cursor[s] < n) {
          best = std::min(best, keys[cursor[s]] + state_key[s]);
          any = true;
        }
      }
      if (!any) break;
      next_keys.push_back(best);
      next_probs.resize(next_probs.size() + m, 0.0);
      double* out = next_probs.data() + next_probs.size() - m;
      for (std::size_t s = 0; s < m; ++s) {
        const std::size_t i = cursor[s];
        if (i < n && keys[i] + state_key[s] == best) {
          const double p = probs[i * m + s];
          const auto row = chain.transition_row(s);
          for (std::size_t j = 0; j < m; ++j) out[j] += p * row[j];
          cursor[s] = advance(s, i + 1);
        }
      }
    }

    const std::uint64_t count = count_nonzero(next_probs);
    local.layer_triples.push_back(count);
    local.total_triples += count;
    local.max_layer_triples = std::max(local.max_layer_triples, count);
    local.peak_live_triples = std::max(local.peak_live_triples, prev_count + count);
    if (prev_count + count > options.triple_cap) {
      cap_error("live triple count " + std::to_string(prev_count + count));
    }
    prev_count = count;
    keys.swap(next_keys);
    probs.swap(next_probs);
  }

  AivDistribution d;
  d.horizon_steps = num_steps;
  d.key_digits = options.key_digits;
  d.chain_fingerprint = chain.fingerprint();
  const double denom = key_scale(options.key_digits) * num_steps;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    double p = 0.0;
    for (std::size_t j = 0; j < m; ++j) p += probs[i * m + j];
    if (p > 0.0) {
      d.keys.push_back(keys[i]);
      d.support.push_back(static_cast<double>(keys[i]) / denom);
      d.probs.push_back(p);
    }
  }
  if (stats) *stats = std::move(local);
  return d;
}

AivDistribution aiv_ce(const ChainSpec& chain, int num_steps, std::uint64_t path_cap,
                       int key_digits) {
  require(num_steps >= 1, kModule, "num_steps must be at least 1");
  if (chain.num_states() == 1) return point_mass(chain, num_steps, key_digits);
  PathEnumerator paths(chain, num_steps, path_cap, key_digits);
  std::unordered_map<std::int64_t, double> mass;
  while (paths.next()) {
    const double p = paths.current().prob;
    if (p != 0.0) mass[paths.weight_key()] += p;
  }
  std::vector<std::pair<std::int64_t, double>> atoms(mass.begin(), mass.end());
  std::sort(atoms.begin(), atoms.end());
  AivDistribution d;
  d.horizon_steps = num_steps;
  d.key_digits = key_digits;
  d.chain_fingerprint = chain.fingerprint();
  const double denom = key_scale(key_digits) * num_steps;
  for (const auto& [key, p] : atoms) {
    d.keys.push_back(key);
    d.support.push_back(static_cast<double>(key) / denom);
    d.probs.push_back(p);
  }
  return d;
}

std::shared_ptr<const AivDistribution> AivCache::get(const ChainSpec& chain, int num_steps,
                                                     const AivOptions& options) {
  const Key key{chain.fingerprint(), num_steps, options.key_digits};
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto dist = std::make_shared<const AivDistribution>(aiv_rr(chain, num_steps, options));
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.emplace(key, std::move(dist)).first->second;
}

std::shared_ptr<const AivDistribution> AivCache::get(const ChainSpec& chain,
                                                     std::size_t initial_state, int num_steps,
                                                     const AivOptions& options) {
  return get(chain.with_initial_state(initial_state), num_steps, options);
}

void AivCache::clear() {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.clear();
}

std::size_t AivCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

AivCache& default_aiv_cache() {
  static AivCache cache;
  return cache;
}

}  // namespace msvcj
