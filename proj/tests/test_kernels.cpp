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

#include <doctest.h>

#include <algorithm>
#include <random>

#include <omp.h>

#include "histopart/kernels.hpp"
#include "histopart/keyspace.hpp"

using namespace histopart;

namespace {

// Random disjoint key ranges over the input's universe.
std::vector<KeyRange> random_ranges(const GlobalInput& input, std::mt19937_64& rng, std::size_t count) {
  const auto keys = input.oracle().sorted_keys();
  std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
  std::vector<std::size_t> cuts;
  for (std::size_t i = 0; i < 2 * count; ++i) cuts.push_back(pick(rng));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<KeyRange> ranges;
  for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) ranges.push_back({keys[cuts[i]], keys[cuts[i + 1]]});
  return ranges;
}

std::vector<Key> random_sample(const GlobalInput& input, std::mt19937_64& rng, std::size_t count) {
  std::vector<Key> keys(input.oracle().sorted_keys().begin(), input.oracle().sorted_keys().end());
  std::shuffle(keys.begin(), keys.end(), rng);
  keys.resize(std::min(count, keys.size()));
  std::sort(keys.begin(), keys.end());
  return keys;
}

} // namespace

TEST_CASE("sample coin depends only on (seed, round, rank)") {
  int heads = 0;
  for (Rank r = 1; r <= 4096; ++r) {
    CHECK(sample_coin(5, 2, r, 0.5) == sample_coin(5, 2, r, 0.5));
    CHECK(sample_coin(5, 2, r, 1.0));
    CHECK_FALSE(sample_coin(5, 2, r, 0.0));
    heads += sample_coin(5, 2, r, 0.5) ? 1 : 0;
  }
  // Binomial(4096, 1/2): mean 2048, sd 32; 4 sd band.
  CHECK(heads >= 2048 - 128);
  CHECK(heads <= 2048 + 128);
}

TEST_CASE("serial and OpenMP sampling agree") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 2 + trial % 9;
    const std::size_t per = 1 + static_cast<std::size_t>(trial * 7 % 40);
    const auto input = trial % 2 ? gen_uniform(p * per, p, trial) : gen_skewed(p * per, p, trial, SkewMode::zipf_gaps);
    // Both the few-ranges and many-ranges code paths.
    const auto ranges = random_ranges(input, rng, trial % 3 == 0 ? 3 * per : 2);
    const double q = 0.1 + 0.05 * trial;
    const auto a = kernels::serial::sample_local(input, ranges, std::min(q, 1.0), trial, 3);
    const auto b = kernels::omp::sample_local(input, ranges, std::min(q, 1.0), trial, 3);
    CHECK(a == b);
  }
}

TEST_CASE("full-range sampling with q = 1 takes every key") {
  const auto input = gen_uniform(512, 8, 2);
  const std::vector<KeyRange> all{KeyRange{}};
  const auto locals = kernels::omp::sample_local(input, all, 1.0, 1, 1);
  std::size_t total = 0;
  for (const auto& l : locals) total += l.size();
  CHECK(total == 512);
}

TEST_CASE("serial and OpenMP histogram reduction agree with the oracle") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 2 + trial % 13;
    const std::size_t per = 1 + static_cast<std::size_t>(trial * 5 % 33);
    const auto input = gen_adversarial(p * per, p, 1, trial);
    // Sample sizes below and above the local size exercise both strategies.
    const auto sample = random_sample(input, rng, trial % 2 ? per / 2 + 1 : 3 * per);
    const auto a = kernels::serial::reduce_local_ranks(input, sample);
    const auto b = kernels::omp::reduce_local_ranks(input, sample);
    REQUIRE(a == b);
    for (std::size_t j = 0; j < sample.size(); ++j) CHECK(b[j] == input.oracle().rank(sample[j]));
  }
  const auto input = gen_uniform(64, 4, 1);
  CHECK(kernels::omp::reduce_local_ranks(input, std::vector<Key>{}).empty());
}

TEST_CASE("serial and OpenMP routing agree") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t p = 2 + trial % 7;
    const auto input = gen_uniform(p * 32, p, trial);
    auto splitters = random_sample(input, rng, p - 1);
    const auto a = kernels::serial::route_and_sort(input, splitters);
    const auto b = kernels::omp::route_and_sort(input, splitters);
    CHECK(a.buckets == b.buckets);
    CHECK(a.moved == b.moved);
  }
}

TEST_CASE("kernels are thread-count independent") {
  const auto input = gen_uniform(1 << 14, 64, 8);
  const std::vector<KeyRange> all{KeyRange{}};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = kernels::omp::sample_local(input, all, 0.05, 4, 4);
  omp_set_num_threads(4);
  const auto four = kernels::omp::sample_local(input, all, 0.05, 4, 4);
  omp_set_num_threads(saved);
  CHECK(one == four);
}
