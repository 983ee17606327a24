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

#include "histopart/kernels.hpp"
#include "histopart/random.hpp"

namespace histopart {

bool sample_coin(std::uint64_t seed, std::uint64_t round, Rank rank, double q) noexcept {
  return unit_interval(mix_words({seed, round, rank})) < q;
}

namespace kernels::serial {

std::vector<std::vector<Key>> sample_local(const GlobalInput& input, std::span<const KeyRange> ranges, double q,
                                           std::uint64_t round, std::uint64_t seed) {
  const auto& oracle = input.oracle();
  std::vector<std::vector<Key>> out(input.processors());
  for (std::size_t proc = 0; proc < input.processors(); ++proc) {
    for (Key key : input.local_keys(proc)) {
      const bool inside = std::any_of(ranges.begin(), ranges.end(),
                                      [key](const KeyRange& r) { return r.after < key && key < r.before; });
      if (inside && sample_coin(seed, round, oracle.rank(key), q)) out[proc].push_back(key);
    }
    std::sort(out[proc].begin(), out[proc].end());
  }
  return out;
}

std::vector<Rank> reduce_local_ranks(const GlobalInput& input, std::span<const Key> sorted_sample) {
  std::vector<Rank> global(sorted_sample.size(), 0);
  for (std::size_t j = 0; j < sorted_sample.size(); ++j)
    for (std::size_t proc = 0; proc < input.processors(); ++proc) global[j] += input.local_rank(proc, sorted_sample[j]);
  return global;
}

Routed route_and_sort(const GlobalInput& input, std::span<const Key> sorted_splitters) {
  Routed routed;
  routed.buckets.resize(sorted_splitters.size() + 1);
  for (std::size_t proc = 0; proc < input.processors(); ++proc) {
    for (Key key : input.local_keys(proc)) {
      const auto bucket = static_cast<std::size_t>(
          std::lower_bound(sorted_splitters.begin(), sorted_splitters.end(), key) - sorted_splitters.begin());
      routed.buckets[bucket].push_back(key);
      if (bucket != proc) ++routed.moved;
    }
  }
  for (auto& b : routed.buckets) std::sort(b.begin(), b.end());
  return routed;
}

} // namespace kernels::serial

std::vector<std::vector<Key>> sample_local(Backend backend, const GlobalInput& input, std::span<const KeyRange> ranges,
                                           double q, std::uint64_t round, std::uint64_t seed) {
  return backend == Backend::serial ? kernels::serial::sample_local(input, ranges, q, round, seed)
                                    : kernels::omp::sample_local(input, ranges, q, round, seed);
}

std::vector<Rank> reduce_local_ranks(Backend backend, const GlobalInput& input, std::span<const Key> sorted_sample) {
  return backend == Backend::serial ? kernels::serial::reduce_local_ranks(input, sorted_sample)
                                    : kernels::omp::reduce_local_ranks(input, sorted_sample);
}

Routed route_and_sort(Backend backend, const GlobalInput& input, std::span<const Key> sorted_splitters) {
  return backend == Backend::serial ? kernels::serial::route_and_sort(input, sorted_splitters)
                                    : kernels::omp::route_and_sort(input, sorted_splitters);
}

} // namespace histopart
