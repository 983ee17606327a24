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

#ifndef HISTOPART_SORTER_HPP
#define HISTOPART_SORTER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "histopart/kernels.hpp"
#include "histopart/keyspace.hpp"

namespace histopart {

struct SortOutcome {
  std::vector<std::vector<Key>> buckets;  // bucket i ends up on processor i
  std::uint64_t max_load = 0;
  std::uint64_t exchange_volume = 0;
  bool globally_sorted = false;

  nlohmann::json summary() const;
};

/// Sends key x to processor i when s_{i-1} < x <= s_i and sorts each
/// bucket locally. Throws std::invalid_argument unless exactly p - 1
/// sorted splitter keys are given. Equal neighbours leave an empty bucket.
SortOutcome exchange_and_sort(const GlobalInput& input, std::span<const Key> splitter_keys,
                              Backend backend = Backend::omp);

/// True iff the buckets concatenated in processor order equal the oracle's
/// sorted key sequence.
bool verify_sorted(const SortOutcome& outcome, const RankOracle& oracle);

} // namespace histopart

#endif
