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

#ifndef HISTOPART_KERNELS_HPP
#define HISTOPART_KERNELS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "histopart/keyspace.hpp"

// Data-parallel inner loops of one simulated superstep. Each kernel has a
// straightforward serial reference (kernels::serial) and an OpenMP version
// (kernels::omp) that must produce identical output.

namespace histopart {

enum class Backend { serial, omp };

/// Keys strictly between the two bounds.
struct KeyRange {
  Key after = kKeyBelowAll;
  Key before = kKeyAboveAll;
};

/// Bernoulli(q) coin for the key of global rank `rank` in round `round`.
/// Depends only on (seed, round, rank), never on which processor holds the key.
bool sample_coin(std::uint64_t seed, std::uint64_t round, Rank rank, double q) noexcept;

struct Routed {
  std::vector<std::vector<Key>> buckets;  // sorted
  std::uint64_t moved = 0;                // keys whose bucket differs from their origin
};

namespace kernels::serial {

/// Per-processor samples from keys inside any of the sorted, disjoint
/// ranges; each list is returned in increasing key order.
std::vector<std::vector<Key>> sample_local(const GlobalInput& input, std::span<const KeyRange> ranges, double q,
                                           std::uint64_t round, std::uint64_t seed);

/// Global ranks of the sorted sample: sum over processors of local ranks.
std::vector<Rank> reduce_local_ranks(const GlobalInput& input, std::span<const Key> sorted_sample);

/// Routes key x to bucket i with s_{i-1} < x <= s_i, then sorts buckets.
Routed route_and_sort(const GlobalInput& input, std::span<const Key> sorted_splitters);

} // namespace kernels::serial

namespace kernels::omp {

std::vector<std::vector<Key>> sample_local(const GlobalInput& input, std::span<const KeyRange> ranges, double q,
                                           std::uint64_t round, std::uint64_t seed);
std::vector<Rank> reduce_local_ranks(const GlobalInput& input, std::span<const Key> sorted_sample);
Routed route_and_sort(const GlobalInput& input, std::span<const Key> sorted_splitters);

} // namespace kernels::omp

std::vector<std::vector<Key>> sample_local(Backend backend, const GlobalInput& input, std::span<const KeyRange> ranges,
                                           double q, std::uint64_t round, std::uint64_t seed);
std::vector<Rank> reduce_local_ranks(Backend backend, const GlobalInput& input, std::span<const Key> sorted_sample);
Routed route_and_sort(Backend backend, const GlobalInput& input, std::span<const Key> sorted_splitters);

} // namespace histopart

#endif
