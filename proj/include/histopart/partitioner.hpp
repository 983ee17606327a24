/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef HISTOPART_PARTITIONER_HPP
#define HISTOPART_PARTITIONER_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "histopart/bsp.hpp"
#include "histopart/kernels.hpp"
#include "histopart/keyspace.hpp"

namespace histopart {

enum class FallbackPolicy { oversample, fail };

std::string to_string(FallbackPolicy policy);

/// Thrown when the round cap is reached and the fallback policy is `fail`.
class RoundCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-superstep traffic bound used for reporting: volume <= kappa * p.
inline constexpr double kVolumeKappa = 8.0;

struct PartitionerConfig {
  double epsilon = 1.0;
  double sample_constant = 3.0;  // c in q = c p / (|gamma| log* p)
  std::size_t max_rounds_cap = 0;  // 0 selects 10 + 10 log* p
  FallbackPolicy fallback = FallbackPolicy::oversample;
  bool count_broadcast = true;
  std::uint64_t seed = 0;
  Backend backend = Backend::omp;

  void validate() const;
  std::size_t effective_cap(std::size_t p) const;
  nlohmann::json to_json() const;
};

struct HistogramEntry {
  Key key = 0;
  Rank rank = 0;
};

/// Bounds on splitter j: its rank lies strictly between lower_rank and
/// upper_rank, both of which are ranks of previously histogrammed keys
/// (or the sentinels 0 and N + 1).
struct SplitterBound {
  Rank lower_rank = 0;
  Key lower_key = kKeyBelowAll;
  Rank upper_rank = 0;
  Key upper_key = kKeyAboveAll;
  bool achieved = false;
  Key achieved_key = 0;
  Rank achieved_rank = 0;
};

class SplitterState {
 public:
  SplitterState(std::size_t n_keys, std::size_t p, double epsilon);

  std::size_t n_keys() const noexcept { return n_keys_; }
  std::size_t processors() const noexcept { return p_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t splitters() const noexcept { return bounds_.size(); }

  /// Target window [j N/p, j N/p + eps N/p] for splitter j in 1..p-1.
  Rank window_low(std::size_t j) const noexcept { return static_cast<Rank>(j) * (n_keys_ / p_); }
  Rank window_high(std::size_t j) const noexcept;

  const SplitterBound& bound(std::size_t j) const { return bounds_.at(j - 1); }
  SplitterBound& bound(std::size_t j) { return bounds_.at(j - 1); }

  std::size_t unachieved() const noexcept;
  bool all_achieved() const noexcept { return unachieved() == 0; }

 private:
  std::size_t n_keys_;
  std::size_t p_;
  double epsilon_;
  Rank window_width_;
  std::vector<SplitterBound> bounds_;
};

/// Ranks [first, end) together with the exclusive key bounds processors use
/// to test membership locally.
struct GammaInterval {
  Rank first = 1;
  Rank end = 1;
  Key after = kKeyBelowAll;
  Key before = kKeyAboveAll;

  Rank length() const noexcept { return end - first; }
};

class GammaSet {
 public:
  GammaSet() = default;
  explicit GammaSet(std::vector<GammaInterval> intervals);

  const std::vector<GammaInterval>& intervals() const noexcept { return intervals_; }
  Rank total_length() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  bool contains_rank(Rank r) const noexcept;
  /// Rank-set containment.
  bool is_subset_of(const GammaSet& outer) const noexcept;
  std::vector<KeyRange> key_ranges() const;

 private:
  std::vector<GammaInterval> intervals_;
  Rank total_ = 0;
};

/// min(1, c p / (|gamma| log* p)); 1 when log* p == 0.
/// Throws std::invalid_argument for an empty gamma.
double per_key_probability(const GammaSet& gamma, std::size_t p, const PartitionerConfig& config);

/// Local samples of every processor: each key whose rank lies in gamma is
/// kept independently with probability q, decided by (seed, round, rank).
std::vector<std::vector<Key>> sample_round(const GlobalInput& input, const GammaSet& gamma, double q,
                                           std::uint64_t round, std::uint64_t seed, Backend backend = Backend::omp);

/// Tightens bounds of unachieved splitters and marks splitters achieved when
/// a histogram rank falls in their window (smallest such rank wins).
/// `histogram` must be sorted by rank.
SplitterState update_bounds(SplitterState state, std::span<const HistogramEntry> histogram);

/// Union over unachieved splitters of their open rank bounds, merged.
GammaSet compute_gamma(const SplitterState& state);

struct RoundTrace {
  std::uint64_t round = 0;
  std::size_t unachieved_at_start = 0;
  Rank gamma_length = 0;
  double probability = 0.0;
  std::uint64_t samples = 0;
  std::size_t newly_achieved = 0;
  bool lemma1_ok = true;
  bool fallback = false;
  std::vector<Rank> sampled_ranks;
};

struct PartitionResult {
  std::string algorithm;
  std::size_t n_keys = 0;
  std::size_t processors = 0;
  double epsilon = 1.0;
  bool success = false;
  bool fallback_used = false;
  std::vector<Rank> splitter_ranks;  // p - 1 entries, sorted, when success
  std::vector<Key> splitter_keys;
  std::vector<bool> achieved;  // per splitter 1..p-1
  std::vector<std::uint64_t> bucket_sizes;
  double balance_factor = 0.0;  // max bucket / (N / p); NaN on failure
  std::uint64_t rounds = 0;
  CostLedger ledger;
  std::vector<RoundTrace> trace;
  std::size_t lemma1_pass = 0;
  std::size_t lemma1_fail = 0;
  std::size_t gamma_nesting_violations = 0;
  std::size_t bound_monotonicity_violations = 0;
  std::size_t histogram_mismatches = 0;
  nlohmann::json config;
};

/// Run report: {algorithm, config, rounds, total_sample_volume, per_round,
/// splitter_ranks, balance_factor, lemma1_checks, ledger, ...}.
nlohmann::json to_json(const PartitionResult& result);

/// Histogram Partitioning with q = c p / (|gamma| log* p) every round.
PartitionResult run_histogram_partitioning(const GlobalInput& input, const PartitionerConfig& config);

/// HSS with a fixed expected budget per round: q = min(1, budget / |gamma|).
/// Uses config.epsilon, seed, cap, fallback and backend; ignores c.
PartitionResult run_hss_fixed(const GlobalInput& input, std::uint64_t per_round_budget,
                              const PartitionerConfig& config);

/// One round: every key sampled with probability S / N, one histogram.
/// Failure is reported through success/achieved, never thrown.
PartitionResult run_sample_sort(const GlobalInput& input, std::uint64_t total_samples, double epsilon,
                                std::uint64_t seed, Backend backend = Backend::omp);

struct BalanceCheck {
  bool balanced = false;
  std::uint64_t max_bucket = 0;
};

/// True iff every consecutive gap of 0, r_1, ..., r_{p-1}, N is at most
/// (1 + eps) N / p. Throws std::invalid_argument on unsorted or miscounted
/// ranks.
BalanceCheck verify_balance(std::span<const Rank> splitter_ranks, std::size_t n_keys, std::size_t p, double epsilon);

/// Same check with ranks recomputed from the splitter keys by the oracle.
BalanceCheck verify_balance(const PartitionResult& result, const RankOracle& oracle, double epsilon);

} // namespace histopart

#endif
