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

#include "histopart/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "histopart/core_math.hpp"

namespace histopart {

std::string to_string(FallbackPolicy policy) { return policy == FallbackPolicy::oversample ? "oversample" : "fail"; }

// ------------------------------------------------------------------- config

void PartitionerConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
  if (!(sample_constant > 0.0) || !std::isfinite(sample_constant))
    throw std::invalid_argument("sample constant c must be positive");
}

std::size_t PartitionerConfig::effective_cap(std::size_t p) const {
  if (max_rounds_cap > 0) return max_rounds_cap;
  return 10 + 10 * static_cast<std::size_t>(log_star(static_cast<double>(p)));
}

nlohmann::json PartitionerConfig::to_json() const {
  return {{"epsilon", epsilon},
          {"c", sample_constant},
          {"max_rounds_cap", max_rounds_cap},
          {"fallback", to_string(fallback)},
          {"count_broadcast", count_broadcast},
          {"seed", seed},
          {"kappa", kVolumeKappa}};
}

// ------------------------------------------------------------ SplitterState

SplitterState::SplitterState(std::size_t n_keys, std::size_t p, double epsilon)
    : n_keys_(n_keys), p_(p), epsilon_(epsilon) {
  if (p < 2 || n_keys == 0 || n_keys % p != 0) throw std::invalid_argument("SplitterState: need p >= 2 and p | N");
  if (!(epsilon > 0.0)) throw std::invalid_argument("SplitterState: epsilon must be positive");
  const long double width = std::floor(static_cast<long double>(epsilon) * static_cast<long double>(n_keys / p));
  window_width_ = width >= static_cast<long double>(n_keys) ? n_keys : static_cast<Rank>(width);
  bounds_.resize(p - 1);
  for (auto& b : bounds_) b.upper_rank = static_cast<Rank>(n_keys) + 1;
}

Rank SplitterState::window_high(std::size_t j) const noexcept {
  return std::min<Rank>(window_low(j) + window_width_, n_keys_);
}

std::size_t SplitterState::unachieved() const noexcept {
  return static_cast<std::size_t>(std::count_if(bounds_.begin(), bounds_.end(), [](const auto& b) { return !b.achieved; }));
}

// ----------------------------------------------------------------- GammaSet

GammaSet::GammaSet(std::vector<GammaInterval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (intervals_[i].end < intervals_[i].first) throw std::invalid_argument("GammaSet: reversed interval");
    if (i > 0 && intervals_[i].first < intervals_[i - 1].end)
      throw std::invalid_argument("GammaSet: intervals must be sorted and disjoint");
    total_ += intervals_[i].length();
  }
}

bool GammaSet::contains_rank(Rank r) const noexcept {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), r,
                             [](Rank value, const GammaInterval& iv) { return value < iv.end; });
  return it != intervals_.end() && it->first <= r;
}

bool GammaSet::is_subset_of(const GammaSet& outer) const noexcept {
  const auto& big = outer.intervals();
  std::size_t o = 0;
  for (const auto& iv : intervals_) {
    if (iv.length() == 0) continue;
    while (o < big.size() && big[o].end <= iv.first) ++o;
    if (o == big.size() || big[o].first > iv.first || big[o].end < iv.end) return false;
  }
  return true;
}

std::vector<KeyRange> GammaSet::key_ranges() const {
  std::vector<KeyRange> ranges;
  ranges.reserve(intervals_.size());
  for (const auto& iv : intervals_)
    if (iv.length() > 0) ranges.push_back({iv.after, iv.before});
  return ranges;
}

// --------------------------------------------------------------- operations

double per_key_probability(const GammaSet& gamma, std::size_t p, const PartitionerConfig& config) {
  if (gamma.empty()) throw std::invalid_argument("per_key_probability: empty gamma");
  const int ls = log_star(static_cast<double>(p));
  if (ls == 0) return 1.0;
  const double q = config.sample_constant * static_cast<double>(p) /
                   (static_cast<double>(gamma.total_length()) * static_cast<double>(ls));
  return std::min(1.0, q);
}

std::vector<std::vector<Key>> sample_round(const GlobalInput& input, const GammaSet& gamma, double q,
                                           std::uint64_t round, std::uint64_t seed, Backend backend) {
  if (!(q > 0.0) || q > 1.0) throw std::invalid_argument("sample_round: q must lie in (0, 1]");
  const auto ranges = gamma.key_ranges();
  return sample_local(backend, input, ranges, q, round, seed);
}

SplitterState update_bounds(SplitterState state, std::span<const HistogramEntry> histogram) {
  if (histogram.empty()) return state;
  const auto by_rank = [](const HistogramEntry& e, Rank r) { return e.rank < r; };
  for (std::size_t j = 1; j <= state.splitters(); ++j) {
    SplitterBound& b = state.bound(j);
    if (b.achieved) continue;
    const Rank lo = state.window_low(j);
    const Rank hi = state.window_high(j);
    auto it = std::lower_bound(histogram.begin(), histogram.end(), lo, by_rank);
    if (it != histogram.end() && it->rank <= hi) {
      b.achieved = true;
      b.achieved_key = it->key;
      b.achieved_rank = it->rank;
      continue;
    }
    if (it != histogram.begin()) {
      const auto& below = *std::prev(it);
      if (below.rank > b.lower_rank) {
        b.lower_rank = below.rank;
        b.lower_key = below.key;
      }
    }
    if (it != histogram.end() && it->rank < b.upper_rank) {
      b.upper_rank = it->rank;
      b.upper_key = it->key;
    }
  }
  return state;
}

GammaSet compute_gamma(const SplitterState& state) {
  std::vector<GammaInterval> merged;
  for (std::size_t j = 1; j <= state.splitters(); ++j) {
    const SplitterBound& b = state.bound(j);
    if (b.achieved) continue;
    GammaInterval iv{b.lower_rank + 1, b.upper_rank, b.lower_key, b.upper_key};
    if (iv.length() == 0) continue;
    if (!merged.empty() && iv.first <= merged.back().end) {
      auto& last = merged.back();
      if (iv.first < last.first) {
        last.first = iv.first;
        last.after = iv.after;
      }
      if (iv.end > last.end) {
        last.end = iv.end;
        last.before = iv.before;
      }
    } else {
      merged.push_back(iv);
    }
  }
  return GammaSet(std::move(merged));
}

// ------------------------------------------------------------ the round loop

namespace {

using ProbabilityRule = std::function<double(const GammaSet&)>;

struct LoopSettings {
  std::string algorithm;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
  std::size_t cap = 1;
  FallbackPolicy fallback = FallbackPolicy::oversample;
  bool allow_fallback = true;
  bool count_broadcast = true;
  Backend backend = Backend::omp;
  nlohmann::json config;
};

void finalize_splitters(PartitionResult& result, const SplitterState& state) {
  const std::size_t n_split = state.splitters();
  result.achieved.assign(n_split, false);
  for (std::size_t j = 1; j <= n_split; ++j) result.achieved[j - 1] = state.bound(j).achieved;
  result.success = state.all_achieved();
  if (!result.success) {
    result.balance_factor = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  std::vector<HistogramEntry> chosen;
  chosen.reserve(n_split);
  for (std::size_t j = 1; j <= n_split; ++j) chosen.push_back({state.bound(j).achieved_key, state.bound(j).achieved_rank});
  // Windows have non-decreasing endpoints, so sorting keeps every order
  // statistic inside its own window.
  std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  for (const auto& c : chosen) {
    result.splitter_ranks.push_back(c.rank);
    result.splitter_keys.push_back(c.key);
  }
  Rank previous = 0;
  std::uint64_t largest = 0;
  for (Rank r : result.splitter_ranks) {
    result.bucket_sizes.push_back(r - previous);
    previous = r;
  }
  result.bucket_sizes.push_back(static_cast<Rank>(state.n_keys()) - previous);
  for (auto size : result.bucket_sizes) largest = std::max(largest, size);
  result.balance_factor =
      static_cast<double>(largest) / (static_cast<double>(state.n_keys()) / static_cast<double>(state.processors()));
}

PartitionResult run_rounds(const GlobalInput& input, const LoopSettings& settings, const ProbabilityRule& rule) {
  const std::size_t n_keys = input.size();
  const std::size_t p = input.processors();
  const auto& oracle = input.oracle();

  PartitionResult result;
  result.algorithm = settings.algorithm;
  result.n_keys = n_keys;
  result.processors = p;
  result.epsilon = settings.epsilon;
  result.config = settings.config;

  BspHarness harness(input, settings.backend);
  SplitterState state(n_keys, p, settings.epsilon);
  GammaSet gamma = compute_gamma(state);

  std::uint64_t round = 0;
  while (!state.all_achieved()) {
    const bool fallback_round = round >= settings.cap;
    if (fallback_round) {
      if (!settings.allow_fallback || result.fallback_used) break;
      if (settings.fallback == FallbackPolicy::fail)
        throw RoundCapExceeded(settings.algorithm + ": round cap of " + std::to_string(settings.cap) + " exceeded");
      result.fallback_used = true;
    }
    ++round;

    RoundTrace trace;
    trace.round = round;
    trace.fallback = fallback_round;
    trace.unachieved_at_start = state.unachieved();
    trace.gamma_length = gamma.total_length();
    // |gamma| <= 3 k N / p with k unachieved splitters.
    trace.lemma1_ok = static_cast<long double>(gamma.total_length()) * static_cast<long double>(p) <=
                      3.0L * static_cast<long double>(trace.unachieved_at_start) * static_cast<long double>(n_keys);
    (trace.lemma1_ok ? result.lemma1_pass : result.lemma1_fail) += 1;

    if (fallback_round) {
      const double dense = 3.0 * std::log(static_cast<double>(p)) * static_cast<double>(p) /
                           static_cast<double>(gamma.total_length());
      trace.probability = std::min(1.0, dense);
    } else {
      trace.probability = rule(gamma);
    }

    const auto locals = sample_round(input, gamma, trace.probability, round, settings.seed, settings.backend);
    const auto sample = harness.gather_samples(locals);
    const auto ranks = harness.reduce_histogram(sample);

    std::vector<HistogramEntry> histogram(sample.size());
    trace.sampled_ranks.resize(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      histogram[i] = {sample[i], ranks[i]};
      trace.sampled_ranks[i] = ranks[i];
      if (oracle.rank(sample[i]) != ranks[i]) ++result.histogram_mismatches;
    }
    trace.samples = sample.size();

    SplitterState next = update_bounds(state, histogram);
    for (std::size_t j = 1; j <= state.splitters(); ++j) {
      const auto& before = state.bound(j);
      const auto& after = next.bound(j);
      if (after.lower_rank < before.lower_rank || after.upper_rank > before.upper_rank)
        ++result.bound_monotonicity_violations;
    }
    trace.newly_achieved = state.unachieved() - next.unachieved();
    GammaSet next_gamma = compute_gamma(next);
    if (!next_gamma.is_subset_of(gamma)) ++result.gamma_nesting_violations;

    if (settings.count_broadcast) {
      if (next.all_achieved())
        harness.broadcast_state(p - 1);
      else
        harness.broadcast_state(trace.newly_achieved + 2 * next_gamma.intervals().size());
    }
    harness.close_superstep();

    state = std::move(next);
    gamma = std::move(next_gamma);
    result.trace.push_back(std::move(trace));
  }

  result.rounds = round;
  result.ledger = harness.ledger();
  finalize_splitters(result, state);
  return result;
}

} // namespace

PartitionResult run_histogram_partitioning(const GlobalInput& input, const PartitionerConfig& config) {
  config.validate();
  LoopSettings settings;
  settings.algorithm = "histopart";
  settings.epsilon = config.epsilon;
  settings.seed = config.seed;
  settings.cap = config.effective_cap(input.processors());
  settings.fallback = config.fallback;
  settings.count_broadcast = config.count_broadcast;
  settings.backend = config.backend;
  settings.config = config.to_json();
  settings.config["max_rounds_cap"] = settings.cap;
  const std::size_t p = input.processors();
  return run_rounds(input, settings, [&](const GammaSet& gamma) { return per_key_probability(gamma, p, config); });
}

PartitionResult run_hss_fixed(const GlobalInput& input, std::uint64_t per_round_budget,
                              const PartitionerConfig& config) {
  config.validate();
  if (per_round_budget < 1) throw std::invalid_argument("run_hss_fixed: budget must be >= 1");
  LoopSettings settings;
  settings.algorithm = "hss_fixed";
  settings.epsilon = config.epsilon;
  settings.seed = config.seed;
  settings.cap = config.effective_cap(input.processors());
  settings.fallback = config.fallback;
  settings.count_broadcast = config.count_broadcast;
  settings.backend = config.backend;
  settings.config = config.to_json();
  settings.config["max_rounds_cap"] = settings.cap;
  settings.config["per_round_budget"] = per_round_budget;
  return run_rounds(input, settings, [per_round_budget](const GammaSet& gamma) {
    return std::min(1.0, static_cast<double>(per_round_budget) / static_cast<double>(gamma.total_length()));
  });
}

PartitionResult run_sample_sort(const GlobalInput& input, std::uint64_t total_samples, double epsilon,
                                std::uint64_t seed, Backend backend) {
  if (total_samples + 1 < input.processors()) throw std::invalid_argument("run_sample_sort: need S >= p - 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  LoopSettings settings;
  settings.algorithm = "sample_sort";
  settings.epsilon = epsilon;
  settings.seed = seed;
  settings.cap = 1;
  settings.allow_fallback = false;
  settings.backend = backend;
  settings.config = {{"epsilon", epsilon}, {"sample_size", total_samples}, {"seed", seed}};
  const double q = std::min(1.0, static_cast<double>(total_samples) / static_cast<double>(input.size()));
  return run_rounds(input, settings, [q](const GammaSet&) { return q; });
}

// ----------------------------------------------------------------- balance

BalanceCheck verify_balance(std::span<const Rank> splitter_ranks, std::size_t n_keys, std::size_t p, double epsilon) {
  if (p < 1 || splitter_ranks.size() + 1 != p) throw std::invalid_argument("verify_balance: need exactly p - 1 splitters");
  if (!std::is_sorted(splitter_ranks.begin(), splitter_ranks.end()))
    throw std::invalid_argument("verify_balance: splitter ranks must be sorted");
  if (!splitter_ranks.empty() && splitter_ranks.back() > n_keys)
    throw std::invalid_argument("verify_balance: splitter rank exceeds N");
  const long double limit = (1.0L + epsilon) * static_cast<long double>(n_keys) / static_cast<long double>(p);
  BalanceCheck check;
  Rank previous = 0;
  auto take_gap = [&](Rank next) {
    check.max_bucket = std::max<std::uint64_t>(check.max_bucket, next - previous);
    previous = next;
  };
  for (Rank r : splitter_ranks) take_gap(r);
  take_gap(static_cast<Rank>(n_keys));
  check.balanced = static_cast<long double>(check.max_bucket) <= limit;
  return check;
}

BalanceCheck verify_balance(const PartitionResult& result, const RankOracle& oracle, double epsilon) {
  if (!result.success) return {};
  std::vector<Rank> ranks;
  ranks.reserve(result.splitter_keys.size());
  for (Key k : result.splitter_keys) ranks.push_back(oracle.rank(k));
  return verify_balance(ranks, oracle.size(), result.processors, epsilon);
}

// -------------------------------------------------------------------- json

nlohmann::json to_json(const PartitionResult& result) {
  nlohmann::json per_round = nlohmann::json::array();
  for (const auto& t : result.trace)
    per_round.push_back({{"round", t.round},
                         {"unachieved_at_start", t.unachieved_at_start},
                         {"gamma_length", t.gamma_length},
                         {"probability", t.probability},
                         {"samples", t.samples},
                         {"newly_achieved", t.newly_achieved},
                         {"lemma1_ok", t.lemma1_ok},
                         {"fallback", t.fallback}});
  const double per_p = static_cast<double>(result.ledger.total_sample_volume()) / static_cast<double>(result.processors);
  const double kappa_observed = static_cast<double>(result.ledger.max_volume()) / static_cast<double>(result.processors);
  nlohmann::json out = {
      {"algorithm", result.algorithm},
      {"config", result.config},
      {"N", result.n_keys},
      {"p", result.processors},
      {"success", result.success},
      {"fallback_used", result.fallback_used},
      {"rounds", result.rounds},
      {"total_sample_volume", result.ledger.total_sample_volume()},
      {"sample_volume_per_p", per_p},
      {"kappa_observed", kappa_observed},
      {"per_round", std::move(per_round)},
      {"splitter_ranks", result.splitter_ranks},
      {"balance_factor", result.success ? nlohmann::json(result.balance_factor) : nlohmann::json(nullptr)},
      {"lemma1_checks", {{"pass", result.lemma1_pass}, {"fail", result.lemma1_fail}}},
      {"ledger", result.ledger.to_json()},
  };
  if (!result.success) {
    std::size_t missing = 0;
    for (bool a : result.achieved) missing += a ? 0 : 1;
    out["unachieved_splitters"] = missing;
  }
  return out;
}

} // namespace histopart
