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

#include <algorithm>
#include <cstdint>

#include <omp.h>

#include "histopart/kernels.hpp"

namespace histopart::kernels::omp {

namespace {

std::int64_t as_loop_bound(std::size_t n) { return static_cast<std::int64_t>(n); }

} // namespace

std::vector<std::vector<Key>> sample_local(const GlobalInput& input, std::span<const KeyRange> ranges, double q,
                                           std::uint64_t round, std::uint64_t seed) {
  std::vector<std::vector<Key>> out(input.processors());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t proc = 0; proc < as_loop_bound(input.processors()); ++proc) {
    const auto keys = input.sorted_local_keys(static_cast<std::size_t>(proc));
    const auto ranks = input.sorted_local_ranks(static_cast<std::size_t>(proc));
    auto& picked = out[static_cast<std::size_t>(proc)];
    if (ranges.size() <= keys.size()) {
      auto from = keys.begin();
      for (const KeyRange& range : ranges) {
        auto first = std::upper_bound(from, keys.end(), range.after);
        auto last = std::lower_bound(first, keys.end(), range.before);
        for (auto it = first; it != last; ++it) {
          const auto i = static_cast<std::size_t>(it - keys.begin());
          if (sample_coin(seed, round, ranks[i], q)) picked.push_back(*it);
        }
        from = last;
      }
    } else {
      // More ranges than local keys: locate each key's candidate range.
      auto range = ranges.begin();
      for (std::size_t i = 0; i < keys.size(); ++i) {
        range = std::upper_bound(range, ranges.end(), keys[i],
                                 [](Key key, const KeyRange& r) { return key < r.before; });
        if (range == ranges.end()) break;
        if (range->after < keys[i] && sample_coin(seed, round, ranks[i], q)) picked.push_back(keys[i]);
      }
    }
  }
  return out;
}

std::vector<Rank> reduce_local_ranks(const GlobalInput& input, std::span<const Key> sorted_sample) {
  const std::size_t s = sorted_sample.size();
  std::vector<Rank> global(s, 0);
  if (s == 0) return global;

#pragma omp parallel
  {
    std::vector<Rank> counts(s, 0);
    std::vector<Rank> diff(s + 1, 0);
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t proc = 0; proc < as_loop_bound(input.processors()); ++proc) {
      const auto keys = input.sorted_local_keys(static_cast<std::size_t>(proc));
      if (s <= keys.size()) {
        // One search per sample, each starting where the last one ended.
        auto it = keys.begin();
        for (std::size_t j = 0; j < s; ++j) {
          it = std::upper_bound(it, keys.end(), sorted_sample[j]);
          counts[j] += static_cast<Rank>(it - keys.begin());
        }
      } else {
        // Each local key adds one to every sample at or above it.
        auto it = sorted_sample.begin();
        for (Key key : keys) {
          it = std::lower_bound(it, sorted_sample.end(), key);
          if (it == sorted_sample.end()) break;
          ++diff[static_cast<std::size_t>(it - sorted_sample.begin())];
        }
      }
    }
    Rank running = 0;
    for (std::size_t j = 0; j < s; ++j) {
      running += diff[j];
      counts[j] += running;
    }
#pragma omp critical(histopart_reduce)
    for (std::size_t j = 0; j < s; ++j) global[j] += counts[j];
  }
  return global;
}

Routed route_and_sort(const GlobalInput& input, std::span<const Key> sorted_splitters) {
  const std::size_t p = input.processors();
  const std::size_t n_buckets = sorted_splitters.size() + 1;
  std::vector<std::vector<std::uint32_t>> dest(p);

#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t proc = 0; proc < as_loop_bound(p); ++proc) {
    const auto keys = input.sorted_local_keys(static_cast<std::size_t>(proc));
    auto& ids = dest[static_cast<std::size_t>(proc)];
    ids.resize(keys.size());
    auto it = sorted_splitters.begin();
    for (std::size_t i = 0; i < keys.size(); ++i) {
      it = std::lower_bound(it, sorted_splitters.end(), keys[i]);
      ids[i] = static_cast<std::uint32_t>(it - sorted_splitters.begin());
    }
  }

  Routed routed;
  std::vector<std::size_t> sizes(n_buckets, 0);
  for (std::size_t proc = 0; proc < p; ++proc)
    for (std::uint32_t b : dest[proc]) {
      ++sizes[b];
      if (b != proc) ++routed.moved;
    }
  routed.buckets.resize(n_buckets);
  for (std::size_t b = 0; b < n_buckets; ++b) routed.buckets[b].reserve(sizes[b]);
  for (std::size_t proc = 0; proc < p; ++proc) {
    const auto keys = input.sorted_local_keys(proc);
    for (std::size_t i = 0; i < keys.size(); ++i) routed.buckets[dest[proc][i]].push_back(keys[i]);
  }

#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t b = 0; b < as_loop_bound(n_buckets); ++b) {
    auto& bucket = routed.buckets[static_cast<std::size_t>(b)];
    std::sort(bucket.begin(), bucket.end());
  }
  return routed;
}

} // namespace histopart::kernels::omp
