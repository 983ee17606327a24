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

#ifndef HISTOPART_BSP_HPP
#define HISTOPART_BSP_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "histopart/kernels.hpp"
#include "histopart/keyspace.hpp"

namespace histopart {

/// Counters for one superstep, in key/entry units.
struct SuperstepRecord {
  std::uint64_t index = 0;  // 1-based round number
  std::uint64_t samples_gathered = 0;
  std::uint64_t histogram_entries = 0;
  std::uint64_t broadcast_entries = 0;
  std::uint64_t h = 0;  // coordinator traffic, the per-processor maximum

  std::uint64_t volume() const noexcept { return samples_gathered + histogram_entries + broadcast_entries; }
  bool operator==(const SuperstepRecord&) const = default;
};

class CostLedger {
 public:
  void append(const SuperstepRecord& record);

  std::uint64_t rounds() const noexcept { return supersteps_.size(); }
  std::uint64_t total_sample_volume() const noexcept { return total_sample_volume_; }
  std::uint64_t max_h() const noexcept;
  /// Largest per-superstep volume; the kappa in "volume <= kappa * p".
  std::uint64_t max_volume() const noexcept;
  const std::vector<SuperstepRecord>& supersteps() const noexcept { return supersteps_; }

  /// {rounds, total_sample_volume, supersteps: [{index, samples, histogram, broadcast, h}]}
  nlohmann::json to_json() const;

  bool operator==(const CostLedger&) const = default;

 private:
  std::vector<SuperstepRecord> supersteps_;
  std::uint64_t total_sample_volume_ = 0;
};

/// Superstep engine with processor 0 as coordinator. All-to-one gather,
/// histogram reduction and one-to-all broadcast accumulate into the open
/// superstep; close_superstep() freezes them into the ledger.
class BspHarness {
 public:
  explicit BspHarness(const GlobalInput& input, Backend backend = Backend::omp);

  /// Concatenates per-processor samples at the coordinator, sorted by key.
  /// Throws std::invalid_argument if a key is not local to its sender or
  /// appears twice.
  std::vector<Key> gather_samples(const std::vector<std::vector<Key>>& locals);

  /// h_j = R(a_j) as the sum over processors of local ranks.
  std::vector<Rank> reduce_histogram(std::span<const Key> sorted_sample);

  void broadcast_state(std::uint64_t payload_entries);

  SuperstepRecord close_superstep();

  const CostLedger& ledger() const noexcept { return ledger_; }
  const GlobalInput& input() const noexcept { return input_; }
  Backend backend() const noexcept { return backend_; }

 private:
  const GlobalInput& input_;
  Backend backend_;
  CostLedger ledger_;
  SuperstepRecord open_;
};

} // namespace histopart

#endif
