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

#ifndef HISTOPART_CORE_MATH_HPP
#define HISTOPART_CORE_MATH_HPP

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace histopart {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Iterated natural logarithm: 0 for x <= 1, otherwise 1 + log_star(ln x).
/// Throws std::domain_error for non-positive or non-finite x.
int log_star(double x);

/// Exact n (n-1) ... (n-k+1). Equals 1 for k == 0 and 0 for k > n.
BigInt falling_factorial(std::uint64_t n, std::uint64_t k);

/// Same product in 64 bits. Throws std::overflow_error when it does not fit.
std::uint64_t falling_factorial_u64(std::uint64_t n, std::uint64_t k);

/// Arrangements of m1 a's and m2 b's; counts runs of a's of length >= k.
struct RunsModel {
  std::uint64_t m1 = 0;
  std::uint64_t m2 = 0;
  std::uint64_t k = 1;

  std::uint64_t m() const noexcept { return m1 + m2; }
};

/// Expected number of runs of a's with length >= k over uniformly random
/// arrangements: (m2 + 1) m1^(k) / m^(k).
double runs_expectation(const RunsModel& model);

/// Variance of the same count:
/// (m2 + 1)^(2) m1^(2k) / m^(2k) + E (1 - E).
/// The first summand is taken as 0 whenever m1^(2k) == 0.
double runs_variance(const RunsModel& model);

/// The two closed forms above evaluated in exact rational arithmetic.
Rational runs_expectation_exact(const RunsModel& model);
Rational runs_variance_exact(const RunsModel& model);

struct ExactMoments {
  Rational mean;
  Rational variance;
};

inline constexpr std::uint64_t kRunsEnumerationLimit = 20;

/// Exhaustively enumerates all C(m, m1) arrangements and returns the exact
/// population mean and variance of the run count. Requires m <= 20.
ExactMoments runs_enumeration_oracle(const RunsModel& model);

struct SampledMoments {
  double mean = 0.0;
  double variance = 0.0;   // unbiased (n - 1) estimator; 0 for one trial
  double std_error = 0.0;  // sqrt(variance / trials)
  std::uint64_t trials = 0;
};

/// Empirical moments from `trials` seeded uniform shuffles. Each trial draws
/// from its own stream derived from (seed, trial), so the result does not
/// depend on the OpenMP thread count.
SampledMoments runs_monte_carlo(const RunsModel& model, std::uint64_t trials, std::uint64_t seed);

/// Number of runs of `true` with length >= k in the arrangement.
template <typename Range>
std::uint64_t count_long_runs(const Range& arrangement, std::uint64_t k) {
  std::uint64_t runs = 0;
  std::uint64_t current = 0;
  for (bool is_a : arrangement) {
    if (is_a) {
      ++current;
    } else {
      if (current >= k) ++runs;
      current = 0;
    }
  }
  if (current >= k) ++runs;
  return runs;
}

} // namespace histopart

#endif
