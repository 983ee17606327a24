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

#include "histopart/sorter.hpp"

#include <algorithm>
#include <stdexcept>

namespace histopart {

nlohmann::json SortOutcome::summary() const {
  return {{"max_load", max_load}, {"exchange_volume", exchange_volume}, {"globally_sorted", globally_sorted}};
}

SortOutcome exchange_and_sort(const GlobalInput& input, std::span<const Key> splitter_keys, Backend backend) {
  if (splitter_keys.size() + 1 != input.processors())
    throw std::invalid_argument("exchange_and_sort: need exactly p - 1 splitters");
  if (std::adjacent_find(splitter_keys.begin(), splitter_keys.end(), std::greater<>()) != splitter_keys.end())
    throw std::invalid_argument("exchange_and_sort: splitters must be sorted");

  Routed routed = route_and_sort(backend, input, splitter_keys);
  SortOutcome outcome;
  outcome.exchange_volume = routed.moved;
  outcome.buckets = std::move(routed.buckets);

  bool sorted = true;
  const Key* last = nullptr;
  for (const auto& bucket : outcome.buckets) {
    outcome.max_load = std::max<std::uint64_t>(outcome.max_load, bucket.size());
    if (!std::is_sorted(bucket.begin(), bucket.end())) sorted = false;
    if (!bucket.empty()) {
      if (last != nullptr && *last >= bucket.front()) sorted = false;
      last = &bucket.back();
    }
  }
  outcome.globally_sorted = sorted;
  return outcome;
}

bool verify_sorted(const SortOutcome& outcome, const RankOracle& oracle) {
  const auto expected = oracle.sorted_keys();
  std::size_t pos = 0;
  for (const auto& bucket : outcome.buckets) {
    for (Key k : bucket) {
      if (pos >= expected.size() || expected[pos] != k) return false;
      ++pos;
    }
  }
  return pos == expected.size();
}

} // namespace histopart
