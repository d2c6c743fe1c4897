#include "msvcj/msvol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include "msvcj/errors.hpp"

namespace msvcj {

namespace {
constexpr const char* kModule = "msvol";
constexpr double kRowTol = 1e-12;
// Evolved distributions accumulate the row-sum slack of P once per step.
constexpr double kDistTol = 1e-10;
}  // namespace

ChainSpec::ChainSpec(std::vector<double> volatilities,
                     std::vector<std::vector<double>> transition, double step,
                     std::size_t initial_state, bool renormalize)
    : vols_(std::move(volatilities)), step_(step), initial_(initial_state) {
  const std::size_t m = vols_.size();
  require(m >= 1, kModule, "chain needs at least one state");
  require(transition.size() == m, kModule,
          "transition matrix has " + std::to_string(transition.size()) + " rows, expected " +
              std::to_string(m));
  trans_.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    require(transition[i].size() == m, kModule,
            "transition row " + std::to_string(i) + " has " +
                std::to_string(transition[i].size()) + " entries, expected " + std::to_string(m));
    trans_.insert(trans_.end(), transition[i].begin(), transition[i].end());
  }
  validate_and_sort(renormalize);
}

ChainSpec ChainSpec::from_variances(const std::vector<double>& variances,
                                    std::vector<std::vector<double>> transition, double step,
                                    std::size_t initial_state, bool renormalize) {
  std::vector<double> vols(variances.size());
  for (std::size_t k = 0; k < variances.size(); ++k) {
    require(std::isfinite(variances[k]) && variances[k] > 0.0, kModule,
            "state variance " + std::to_string(k) + " must be positive");
    vols[k] = std::sqrt(variances[k]);
  }
  ChainSpec chain(std::move(vols), std::move(transition), step, initial_state, renormalize);
  // Keep the user's variance levels bit-exact instead of re-squaring the roots.
  std::vector<double> sorted_vars = variances;
  std::sort(sorted_vars.begin(), sorted_vars.end());
  chain.vars_ = std::move(sorted_vars);
  return chain;
}

void ChainSpec::validate_and_sort(bool renormalize) {
  const std::size_t m = vols_.size();
  require(std::isfinite(step_) && step_ > 0.0, kModule, "step tau must be positive");
  require(initial_ < m, kModule,
          "initial state index " + std::to_string(initial_) + " out of range");
  for (std::size_t k = 0; k < m; ++k) {
    require(std::isfinite(vols_[k]) && vols_[k] > 0.0, kModule,
            "state " + std::to_string(k) + " must be a positive volatility");
  }
  for (std::size_t i = 0; i < m; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double p = trans_[i * m + j];
      require(std::isfinite(p) && p >= 0.0 && p <= 1.0, kModule,
              "transition row " + std::to_string(i) + " has entry outside [0,1]");
      sum += p;
    }
    if (renormalize) {
      require(sum > 0.0, kModule, "transition row " + std::to_string(i) + " is all zero");
      for (std::size_t j = 0; j < m; ++j) trans_[i * m + j] /= sum;
    } else if (std::abs(sum - 1.0) > kRowTol) {
      std::ostringstream os;
      os.precision(17);
      os << "transition row " << i << " sums to " << sum << " (tolerance 1e-12)";
      throw ValidationError(std::string(kModule) + ": " + os.str());
    }
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return vols_[a] < vols_[b]; });
  for (std::size_t k = 1; k < m; ++k) {
    require(vols_[order[k]] > vols_[order[k - 1]], kModule, "states must be distinct");
  }
  std::vector<double> vols(m), trans(m * m);
  std::size_t init = 0;
  for (std::size_t a = 0; a < m; ++a) {
    vols[a] = vols_[order[a]];
    if (order[a] == initial_) init = a;
    for (std::size_t b = 0; b < m; ++b) trans[a * m + b] = trans_[order[a] * m + order[b]];
  }
  vols_ = std::move(vols);
  trans_ = std::move(trans);
  initial_ = init;
  vars_.resize(m);
  for (std::size_t k = 0; k < m; ++k) vars_[k] = vols_[k] * vols_[k];
}

std::vector<std::vector<double>> ChainSpec::transition_matrix() const {
  const std::size_t m = num_states();
  std::vector<std::vector<double>> out(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i][j] = transition(i, j);
  return out;
}

ChainSpec ChainSpec::with_initial_state(std::size_t state) const {
  require(state < num_states(), kModule, "initial state index out of range");
  ChainSpec copy = *this;
  copy.initial_ = state;
  return copy;
}

std::vector<double> ChainSpec::stationary_distribution() const {
  const std::size_t m = num_states();
  std::vector<double> pi(m, 1.0 / static_cast<double>(m)), next(m), avg(m, 0.0);
  constexpr int kIters = 20000;
  for (int it = 0; it < kIters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) next[j] += pi[i] * transition(i, j);
    double diff = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      diff = std::max(diff, std::abs(next[j] - pi[j]));
      avg[j] += next[j];
    }
    pi.swap(next);
    if (diff < 1e-15) return pi;
  }
  for (double& a : avg) a /= kIters;
  return avg;
}

std::uint64_t ChainSpec::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t m = num_states();
  mix(&m, sizeof m);
  mix(vars_.data(), vars_.size() * sizeof(double));
  mix(trans_.data(), trans_.size() * sizeof(double));
  mix(&step_, sizeof step_);
  const std::uint64_t init = initial_;
  mix(&init, sizeof init);
  return h;
}

StateDistribution StateDistribution::point_mass(std::size_t num_states, std::size_t state) {
  require(state < num_states, kModule, "point mass state out of range");
  StateDistribution d;
  d.probs.assign(num_states, 0.0);
  d.probs[state] = 1.0;
  return d;
}

void validate(const StateDistribution& dist, std::size_t num_states) {
  require(dist.probs.size() == num_states, kModule, "state distribution has wrong length");
  double sum = 0.0;
  for (double p : dist.probs) {
    require(std::isfinite(p) && p >= 0.0, kModule, "state distribution has a negative entry");
    sum += p;
  }
  require(std::abs(sum - 1.0) <= kDistTol, kModule, "state distribution does not sum to 1");
}

StateDistribution evolve_distribution(const ChainSpec& chain, const StateDistribution& start,
                                      long steps) {
  require(steps >= 0, kModule, "steps must be non-negative");
  const std::size_t m = chain.num_states();
  validate(start, m);
  StateDistribution out = start;
  std::vector<double> next(m);
  for (long s = 0; s < steps; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double pi = out.probs[i];
      if (pi == 0.0) continue;
      const auto row = chain.transition_row(i);
      for (std::size_t j = 0; j < m; ++j) next[j] += pi * row[j];
    }
    out.probs.swap(next);
  }
  out.time_steps += steps;
  return out;
}

std::int64_t variance_key(double variance, int digits) {
  require(digits >= 0 && digits <= 15, kModule, "key digits must be in [0, 15]");
  const double scaled = variance * std::pow(10.0, digits);
  require(std::isfinite(scaled) && std::abs(scaled) < 9.0e15, kModule,
          "variance level too large for the fixed-point key");
  return std::llround(scaled);
}

std::optional<std::uint64_t> PathEnumerator::count_paths(std::size_t m, int num_steps) {
  std::uint64_t total = 1;
  for (int l = 0; l < num_steps; ++l) {
    if (m != 0 && total > UINT64_MAX / m) return std::nullopt;
    total *= m;
  }
  return total;
}

PathEnumerator::PathEnumerator(const ChainSpec& chain, int num_steps, std::uint64_t cap,
                               int key_digits)
    : chain_(&chain), num_steps_(num_steps) {
  require(num_steps >= 1, kModule, "num_steps must be at least 1");
  const std::size_t m = chain.num_states();
  const auto count = count_paths(m, num_steps);
  if (!count || *count > cap) {
    std::ostringstream os;
    os << "msvol: path enumeration needs m^L = " << m << "^" << num_steps << " paths"
       << (count ? " (" + std::to_string(*count) + ")" : std::string(" (overflows 64 bits)"))
       << ", exceeding the enumeration cap " << cap;
    throw ResourceCapError(os.str());
  }
  total_ = *count;
  keys_.resize(m);
  for (std::size_t k = 0; k < m; ++k) keys_[k] = variance_key(chain.variances()[k], key_digits);
  const auto L = static_cast<std::size_t>(num_steps);
  sum_sq_.assign(L + 1, 0.0);
  key_sum_.assign(L + 1, 0);
  prefix_prob_.assign(L + 1, 1.0);
  path_.states.assign(L + 1, 0);
  path_.states[0] = chain.initial_state();
}

void PathEnumerator::rebuild_from(int level) {
  // Recompute accumulators for levels > level given states[0..L].
  const auto vars = chain_->variances();
  for (int l = level; l < num_steps_; ++l) {
    const std::size_t s = path_.states[static_cast<std::size_t>(l)];
    const std::size_t nxt = path_.states[static_cast<std::size_t>(l) + 1];
    sum_sq_[l + 1] = sum_sq_[l] + vars[s];
    key_sum_[l + 1] = key_sum_[l] + keys_[s];
    prefix_prob_[l + 1] = prefix_prob_[l] * chain_->transition(s, nxt);
  }
  // Mean over positions 0..L-1 via state counts so that a constant path
  // reproduces its variance exactly.
  double w = 0.0;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] != 0) w += (static_cast<double>(counts_[k]) / num_steps_) * vars[k];
  }
  path_.weight = w;
  path_.prob = prefix_prob_[static_cast<std::size_t>(num_steps_)];
}

bool PathEnumerator::next() {
  if (done_) return false;
  const std::size_t m = chain_->num_states();
  if (!started_) {
    started_ = true;
    counts_.assign(m, 0);
    for (int l = 0; l < num_steps_; ++l) ++counts_[path_.states[static_cast<std::size_t>(l)]];
    rebuild_from(0);
    return true;
  }
  int pos = num_steps_;
  while (pos >= 1 && path_.states[static_cast<std::size_t>(pos)] + 1 == m) --pos;
  if (pos == 0) {
    done_ = true;
    return false;
  }
  for (int l = pos; l < num_steps_; ++l) --counts_[path_.states[static_cast<std::size_t>(l)]];
  ++path_.states[static_cast<std::size_t>(pos)];
  for (int l = pos + 1; l <= num_steps_; ++l) path_.states[static_cast<std::size_t>(l)] = 0;
  for (int l = pos; l < num_steps_; ++l) ++counts_[path_.states[static_cast<std::size_t>(l)]];
  rebuild_from(pos - 1);
  return true;
}

}  // namespace msvcj
