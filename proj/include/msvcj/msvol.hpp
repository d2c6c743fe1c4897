#pragma once

// Discrete-time Markov-switching volatility chain.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace msvcj {

/// Markov-switching volatility chain: volatility levels, one-step transition
/// matrix, step length (years) and the known initial state.
///
/// States are held both as volatilities and as precomputed variances; every
/// other module reads the variance vector so the squares are formed once.
class ChainSpec {
 public:
  /// Validates and canonicalizes. States must be positive; they are sorted
  /// ascending (the transition matrix and initial index are permuted along).
  /// Rows must sum to 1 within 1e-12 unless `renormalize` is set, in which
  /// case each row is rescaled to sum to 1.
  ChainSpec(std::vector<double> volatilities, std::vector<std::vector<double>> transition,
            double step, std::size_t initial_state, bool renormalize = false);

  /// Same, with states given as variance levels (u_k^2).
  static ChainSpec from_variances(const std::vector<double>& variances,
                                  std::vector<std::vector<double>> transition, double step,
                                  std::size_t initial_state, bool renormalize = false);

  std::size_t num_states() const { return vols_.size(); }
  std::span<const double> volatilities() const { return vols_; }
  std::span<const double> variances() const { return vars_; }
  double step() const { return step_; }
  std::size_t initial_state() const { return initial_; }

  /// p_ij
  double transition(std::size_t i, std::size_t j) const { return trans_[i * vols_.size() + j]; }
  std::span<const double> transition_row(std::size_t i) const {
    return {trans_.data() + i * vols_.size(), vols_.size()};
  }
  std::vector<std::vector<double>> transition_matrix() const;

  /// Copy of this chain started from a different state.
  ChainSpec with_initial_state(std::size_t state) const;

  /// Stationary distribution (power iteration from uniform, falls back to the
  /// average of iterates for periodic chains).
  std::vector<double> stationary_distribution() const;

  /// FNV-1a hash over states, transition, step and initial state.
  std::uint64_t fingerprint() const;

 private:
  ChainSpec() = default;
  void validate_and_sort(bool renormalize);

  std::vector<double> vols_;
  std::vector<double> vars_;
  std::vector<double> trans_;  // row-major m x m
  double step_ = 0.0;
  std::size_t initial_ = 0;
};

/// Probability vector over chain states after `time_steps` transitions.
struct StateDistribution {
  std::vector<double> probs;
  long time_steps = 0;

  static StateDistribution point_mass(std::size_t num_states, std::size_t state);
};

/// Checks entries >= 0 and sum 1 within 1e-12.
void validate(const StateDistribution& dist, std::size_t num_states);

/// start * P^steps
StateDistribution evolve_distribution(const ChainSpec& chain, const StateDistribution& start,
                                      long steps);

struct SamplePath {
  std::vector<std::size_t> states;  // sigma_0 .. sigma_L
  double weight = 0.0;              // mean of the first L squared volatilities
  double prob = 0.0;                // product of transition probabilities
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

/// Decimal digits kept when a variance level is turned into an integer
/// recombination key.
inline constexpr int kDefaultKeyDigits = 12;

/// round(variance * 10^digits). Throws ValidationError if it does not fit.
std::int64_t variance_key(double variance, int digits = kDefaultKeyDigits);

/// Lazy, single-consumer stream over all m^L paths started at the chain's
/// initial state. Paths are produced in lexicographic order of
/// (sigma_1, ..., sigma_L); each call to next() updates only the changed
/// suffix, so the amortized cost per path is O(1).
class PathEnumerator {
 public:
  /// Throws ResourceCapError when m^L exceeds `cap`.
  PathEnumerator(const ChainSpec& chain, int num_steps,
                 std::uint64_t cap = kDefaultEnumerationCap, int key_digits = kDefaultKeyDigits);

  /// Advances to the next path; false once the stream is exhausted.
  bool next();

  const SamplePath& current() const { return path_; }
  /// Running sum of squared volatilities of the first L states.
  double weight_sum() const { return sum_sq_[num_steps_]; }
  /// Fixed-point key of weight_sum(), see aiv.hpp.
  std::int64_t weight_key() const { return key_sum_[num_steps_]; }
  std::uint64_t path_count() const { return total_; }

  /// Number of paths m^L, or nullopt when it does not fit in 64 bits.
  static std::optional<std::uint64_t> count_paths(std::size_t m, int num_steps);

 private:
  void rebuild_from(int level);

  const ChainSpec* chain_;
  int num_steps_;
  std::uint64_t total_;
  bool started_ = false;
  bool done_ = false;
  std::vector<std::int64_t> keys_;
  // Prefix accumulators indexed by level l: quantities over sigma_0..sigma_{l-1}.
  std::vector<double> sum_sq_;
  std::vector<std::int64_t> key_sum_;
  std::vector<double> prefix_prob_;
  std::vector<long> counts_;  // state occupancy over positions 0..L-1
  SamplePath path_;
};

}  // namespace msvcj
