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

#include "histopart/bsp.hpp"

#include <algorithm>
#include <stdexcept>

namespace histopart {

void CostLedger::append(const SuperstepRecord& record) {
  supersteps_.push_back(record);
  total_sample_volume_ += record.samples_gathered;
}

std::uint64_t CostLedger::max_h() const noexcept {
  std::uint64_t best = 0;
  for (const auto& s : supersteps_) best = std::max(best, s.h);
  return best;
}

std::uint64_t CostLedger::max_volume() const noexcept {
  std::uint64_t best = 0;
  for (const auto& s : supersteps_) best = std::max(best, s.volume());
  return best;
}

nlohmann::json CostLedger::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : supersteps_)
    steps.push_back({{"index", s.index},
                     {"samples", s.samples_gathered},
                     {"histogram", s.histogram_entries},
                     {"broadcast", s.broadcast_entries},
                     {"h", s.h}});
  return {{"rounds", rounds()}, {"total_sample_volume", total_sample_volume_}, {"supersteps", std::move(steps)}};
}

BspHarness::BspHarness(const GlobalInput& input, Backend backend) : input_(input), backend_(backend) {}

std::vector<Key> BspHarness::gather_samples(const std::vector<std::vector<Key>>& locals) {
  if (locals.size() > input_.processors()) throw std::invalid_argument("gather_samples: more senders than processors");
  std::vector<Key> combined;
  std::size_t total = 0;
  for (const auto& l : locals) total += l.size();
  combined.reserve(total);
  for (std::size_t proc = 0; proc < locals.size(); ++proc) {
    const auto mine = input_.sorted_local_keys(proc);
    for (Key k : locals[proc]) {
      if (!std::binary_search(mine.begin(), mine.end(), k))
        throw std::invalid_argument("gather_samples: processor sent a key it does not hold");
      combined.push_back(k);
    }
  }
  std::sort(combined.begin(), combined.end());
  if (std::adjacent_find(combined.begin(), combined.end()) != combined.end())
    throw std::invalid_argument("gather_samples: duplicate key in combined sample");
  open_.samples_gathered += combined.size();
  return combined;
}

std::vector<Rank> BspHarness::reduce_histogram(std::span<const Key> sorted_sample) {
  auto ranks = reduce_local_ranks(backend_, input_, sorted_sample);
  open_.histogram_entries += ranks.size();
  return ranks;
}

void BspHarness::broadcast_state(std::uint64_t payload_entries) { open_.broadcast_entries += payload_entries; }

SuperstepRecord BspHarness::close_superstep() {
  SuperstepRecord record = open_;
  record.index = ledger_.rounds() + 1;
  record.h = record.volume();
  ledger_.append(record);
  open_ = SuperstepRecord{};
  return record;
}

} // namespace histopart
