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

#ifndef HISTOPART_KEYSPACE_HPP
#define HISTOPART_KEYSPACE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace histopart {

using Key = std::uint64_t;
using Rank = std::uint64_t;

/// Keys are distinct integers in [1, 2^63); 0 and UINT64_MAX are free for
/// use as open-interval sentinels.
inline constexpr Key kKeyBelowAll = 0;
inline constexpr Key kKeyAboveAll = ~Key{0};

/// Order-isomorphic embedding of rank r into 64-bit keys shared by every
/// generator except zipf_gaps. Requires r < 2^43.
Key universe_key(Rank r) noexcept;

enum class SkewMode { sorted_blocks, zipf_gaps };

std::string to_string(SkewMode mode);
SkewMode parse_skew_mode(const std::string& text);

struct LayoutTag {
  std::string generator;  // "uniform", "adversarial", "skewed", "loaded", "custom"
  std::uint64_t seed = 0;
  std::optional<std::size_t> parts;  // adversarial layout part count C
  std::optional<SkewMode> mode;
};

/// Sorted global key sequence; rank r (1-based) maps to sorted[r - 1].
class RankOracle {
 public:
  RankOracle() = default;
  explicit RankOracle(std::vector<Key> sorted_keys);

  std::size_t size() const noexcept { return sorted_.size(); }
  bool contains(Key key) const noexcept;
  /// Throws std::out_of_range for a key not in the input.
  Rank rank(Key key) const;
  /// Throws std::out_of_range unless 1 <= r <= N.
  Key key_of_rank(Rank r) const;
  std::span<const Key> sorted_keys() const noexcept { return sorted_; }

 private:
  std::vector<Key> sorted_;
};

/// N distinct keys spread over p simulated processors, N / p each.
/// Immutable after construction.
class GlobalInput {
 public:
  /// Validates equal local sizes and global distinctness.
  GlobalInput(std::vector<std::vector<Key>> keys_by_processor, LayoutTag tag);

  /// Builds from per-processor rank lists over a sorted key universe.
  /// Validates that the ranks form a permutation of 1..N split evenly.
  static GlobalInput from_rank_layout(const std::vector<std::vector<Rank>>& ranks_by_processor,
                                      std::vector<Key> sorted_universe, LayoutTag tag);

  std::size_t size() const noexcept { return oracle_.size(); }
  std::size_t processors() const noexcept { return local_.size(); }
  std::size_t keys_per_processor() const noexcept { return local_.empty() ? 0 : local_.front().size(); }

  /// Local keys in their dealt order.
  std::span<const Key> local_keys(std::size_t proc) const { return local_.at(proc); }
  std::span<const Key> sorted_local_keys(std::size_t proc) const { return sorted_local_.at(proc); }
  /// Global ranks aligned with sorted_local_keys(proc).
  std::span<const Rank> sorted_local_ranks(std::size_t proc) const { return sorted_local_ranks_.at(proc); }

  /// Number of local keys <= key on processor `proc`.
  std::size_t local_rank(std::size_t proc, Key key) const;

  const RankOracle& oracle() const noexcept { return oracle_; }
  const LayoutTag& layout() const noexcept { return tag_; }

 private:
  GlobalInput() = default;
  void index_locals();

  std::vector<std::vector<Key>> local_;
  std::vector<std::vector<Key>> sorted_local_;
  std::vector<std::vector<Rank>> sorted_local_ranks_;
  RankOracle oracle_;
  LayoutTag tag_;
};

/// Random permutation of the universe dealt into p equal blocks.
GlobalInput gen_uniform(std::size_t n_keys, std::size_t p, std::uint64_t seed);

/// Adversarial layout: p rank intervals grouped into C parts of p / C
/// intervals, every interval cut into C subintervals, and each part's p
/// subintervals assigned to the p processors by a uniform random bijection.
GlobalInput gen_adversarial(std::size_t n_keys, std::size_t p, std::size_t parts, std::uint64_t seed);

GlobalInput gen_skewed(std::size_t n_keys, std::size_t p, std::uint64_t seed, SkewMode mode);

/// Largest divisor of p not exceeding floor(sqrt(p)).
std::size_t default_adversarial_parts(std::size_t p);

struct AdversarialAudit {
  std::size_t n_keys = 0;
  std::size_t processors = 0;
  std::size_t parts = 0;
  std::size_t subinterval_length = 0;
  std::size_t split_subintervals = 0;      // subintervals not owned by a single processor
  std::size_t bad_processor_parts = 0;     // (processor, part) pairs without exactly one subinterval
  std::size_t bad_processor_sizes = 0;     // processors not holding N / p keys
  bool one_subinterval_per_pair() const noexcept { return split_subintervals == 0 && bad_processor_parts == 0; }
  bool keys_per_processor_ok() const noexcept { return bad_processor_sizes == 0; }
  bool passed() const noexcept { return one_subinterval_per_pair() && keys_per_processor_ok(); }
};

/// Structural check of a layout against the adversarial layout rules with C = parts.
AdversarialAudit audit_adversarial(const GlobalInput& input, std::size_t parts);

/// Writes proc_<i>.txt (one decimal key per line, dealt order) and
/// manifest.json into `dir`.
void save_input(const GlobalInput& input, const std::filesystem::path& dir);
GlobalInput load_input(const std::filesystem::path& dir);

} // namespace histopart

#endif
