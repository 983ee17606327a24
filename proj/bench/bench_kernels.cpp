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

// Serial reference kernels vs their OpenMP counterparts on one superstep's
// worth of work. Arg(0) = p; keys per processor fixed at 256.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "histopart/kernels.hpp"
#include "histopart/keyspace.hpp"
#include "histopart/partitioner.hpp"

namespace {

using namespace histopart;

constexpr std::size_t kKeysPerProc = 256;

const GlobalInput& cached_input(std::size_t p) {
  static std::map<std::size_t, std::unique_ptr<GlobalInput>> cache;
  auto& slot = cache[p];
  if (!slot) slot = std::make_unique<GlobalInput>(gen_uniform(p * kKeysPerProc, p, 42));
  return *slot;
}

std::vector<Key> round_one_sample(const GlobalInput& input) {
  const double q = 1.0 / static_cast<double>(kKeysPerProc);
  const std::vector<KeyRange> all{KeyRange{}};
  std::vector<Key> sample;
  for (const auto& local : kernels::omp::sample_local(input, all, q, 1, 7)) sample.insert(sample.end(), local.begin(), local.end());
  std::sort(sample.begin(), sample.end());
  return sample;
}

template <Backend B>
void BM_Sample(benchmark::State& state) {
  const auto& input = cached_input(static_cast<std::size_t>(state.range(0)));
  const std::vector<KeyRange> all{KeyRange{}};
  for (auto _ : state) benchmark::DoNotOptimize(sample_local(B, input, all, 0.01, 1, 7));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(input.size()));
}

template <Backend B>
void BM_Histogram(benchmark::State& state) {
  const auto& input = cached_input(static_cast<std::size_t>(state.range(0)));
  const auto sample = round_one_sample(input);
  for (auto _ : state) benchmark::DoNotOptimize(reduce_local_ranks(B, input, sample));
  state.counters["samples"] = static_cast<double>(sample.size());
}

template <Backend B>
void BM_Route(benchmark::State& state) {
  const auto& input = cached_input(static_cast<std::size_t>(state.range(0)));
  std::vector<Key> splitters;
  const std::size_t p = input.processors();
  for (std::size_t j = 1; j < p; ++j) splitters.push_back(input.oracle().key_of_rank(j * kKeysPerProc));
  for (auto _ : state) benchmark::DoNotOptimize(route_and_sort(B, input, splitters));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(input.size()));
}

template <Backend B>
void BM_HistogramPartitioning(benchmark::State& state) {
  const auto& input = cached_input(static_cast<std::size_t>(state.range(0)));
  PartitionerConfig config;
  config.backend = B;
  config.seed = 3;
  for (auto _ : state) benchmark::DoNotOptimize(run_histogram_partitioning(input, config));
}

} // namespace

BENCHMARK(BM_Sample<Backend::serial>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sample<Backend::omp>)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histogram<Backend::serial>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Histogram<Backend::omp>)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Route<Backend::serial>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Route<Backend::omp>)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramPartitioning<Backend::serial>)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramPartitioning<Backend::omp>)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
