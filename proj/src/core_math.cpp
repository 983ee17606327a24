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

#include "histopart/core_math.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "histopart/random.hpp"

namespace histopart {

int log_star(double x) {
  if (!std::isfinite(x) || x <= 0.0) throw std::domain_error("log_star: argument must be positive and finite");
  int iterations = 0;
  while (x > 1.0) {
    x = std::log(x);
    ++iterations;
  }
  return iterations;
}

BigInt falling_factorial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  BigInt product = 1;
  for (std::uint64_t i = 0; i < k; ++i) product *= (n - i);
  return product;
}

std::uint64_t falling_factorial_u64(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t product = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (__builtin_mul_overflow(product, n - i, &product))
      throw std::overflow_error("falling_factorial_u64: result exceeds 64 bits");
  }
  return product;
}

namespace {

void require_queryable(const RunsModel& model) {
  if (model.k < 1) throw std::invalid_argument("runs model: k must be >= 1");
  if (model.m() < 1) throw std::invalid_argument("runs model: m1 + m2 must be >= 1");
  if (model.k > model.m()) throw std::domain_error("runs model: m^(k) is zero (k > m)");
}

// m1^(d) / m^(d) as a running product of ratios; stays in [0, 1].
double falling_ratio(std::uint64_t m1, std::uint64_t m, std::uint64_t depth) {
  if (depth > m1) return 0.0;
  double ratio = 1.0;
  for (std::uint64_t i = 0; i < depth; ++i)
    ratio *= static_cast<double>(m1 - i) / static_cast<double>(m - i);
  return ratio;
}

} // namespace

double runs_expectation(const RunsModel& model) {
  require_queryable(model);
  return static_cast<double>(model.m2 + 1) * falling_ratio(model.m1, model.m(), model.k);
}

double runs_variance(const RunsModel& model) {
  const double mean = runs_expectation(model);
  double pairs = 0.0;
  if (2 * model.k <= model.m1) {
    const double b = static_cast<double>(model.m2);
    pairs = (b + 1.0) * b * falling_ratio(model.m1, model.m(), 2 * model.k);
  }
  return std::max(0.0, pairs + mean * (1.0 - mean));
}

Rational runs_expectation_exact(const RunsModel& model) {
  require_queryable(model);
  return Rational(BigInt(model.m2 + 1) * falling_factorial(model.m1, model.k), falling_factorial(model.m(), model.k));
}

Rational runs_variance_exact(const RunsModel& model) {
  const Rational mean = runs_expectation_exact(model);
  Rational pairs = 0;
  const BigInt numerator = falling_factorial(model.m2 + 1, 2) * falling_factorial(model.m1, 2 * model.k);
  if (numerator != 0) pairs = Rational(numerator, falling_factorial(model.m(), 2 * model.k));
  return pairs + mean * (Rational(1) - mean);
}

ExactMoments runs_enumeration_oracle(const RunsModel& model) {
  const std::uint64_t m = model.m();
  if (m > kRunsEnumerationLimit) throw std::invalid_argument("runs_enumeration_oracle: m1 + m2 exceeds enumeration bound 20");
  if (model.k < 1) throw std::invalid_argument("runs_enumeration_oracle: k must be >= 1");

  BigInt total = 0;
  BigInt total_sq = 0;
  std::uint64_t arrangements = 0;
  std::vector<bool> arrangement(m);
  // Gosper's hack walks every m-bit mask with exactly m1 set bits.
  const std::uint64_t limit = std::uint64_t{1} << m;
  std::uint64_t mask = model.m1 == 0 ? 0 : (std::uint64_t{1} << model.m1) - 1;
  while (mask < limit) {
    for (std::uint64_t i = 0; i < m; ++i) arrangement[i] = (mask >> i) & 1U;
    const std::uint64_t runs = count_long_runs(arrangement, model.k);
    total += runs;
    total_sq += runs * runs;
    ++arrangements;
    if (mask == 0) break;
    const std::uint64_t low = mask & (~mask + 1);
    const std::uint64_t ripple = mask + low;
    mask = (((ripple ^ mask) >> 2) / low) | ripple;
  }
  const Rational mean(total, BigInt(arrangements));
  const Rational second(total_sq, BigInt(arrangements));
  return {mean, second - mean * mean};
}

SampledMoments runs_monte_carlo(const RunsModel& model, std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("runs_monte_carlo: trials must be >= 1");
  if (model.k < 1) throw std::invalid_argument("runs_monte_carlo: k must be >= 1");
  const std::uint64_t m = model.m();
  std::vector<std::uint64_t> counts(trials);

#pragma omp parallel
  {
    std::vector<bool> arrangement(m);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(trials); ++t) {
      std::mt19937_64 rng(mix_words({seed, static_cast<std::uint64_t>(t)}));
      // Selection sampling: each of the C(m, m1) arrangements is equally likely.
      std::uint64_t remaining_a = model.m1;
      for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t left = m - i;
        const bool pick = std::uniform_int_distribution<std::uint64_t>(0, left - 1)(rng) < remaining_a;
        arrangement[i] = pick;
        if (pick) --remaining_a;
      }
      counts[static_cast<std::size_t>(t)] = count_long_runs(arrangement, model.k);
    }
  }

  SampledMoments out;
  out.trials = trials;
  long double sum = 0.0L;
  for (std::uint64_t c : counts) sum += static_cast<long double>(c);
  const long double mean = sum / static_cast<long double>(trials);
  long double ss = 0.0L;
  for (std::uint64_t c : counts) {
    const long double d = static_cast<long double>(c) - mean;
    ss += d * d;
  }
  out.mean = static_cast<double>(mean);
  out.variance = trials > 1 ? static_cast<double>(ss / static_cast<long double>(trials - 1)) : 0.0;
  out.std_error = std::sqrt(out.variance / static_cast<double>(trials));
  return out;
}

} // namespace histopart
