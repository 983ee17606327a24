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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "histopart/core_math.hpp"

using namespace histopart;

namespace {

// Exact n! / (n - k)! from two factorials; independent of the product loop.
BigInt factorial_ratio(unsigned n, unsigned k) {
  BigInt num = 1, den = 1;
  for (unsigned i = 2; i <= n; ++i) num *= i;
  for (unsigned i = 2; i <= n - k; ++i) den *= i;
  return num / den;
}

} // namespace

TEST_CASE("log_star values") {
  CHECK(log_star(0.5) == 0);
  CHECK(log_star(1.0) == 0);
  CHECK(log_star(std::numbers::e) == 1);
  // 1024 -> 6.931 -> 1.936 -> 0.661
  CHECK(log_star(1024.0) == 3);
  CHECK(log_star(64.0) == 3);
  CHECK(log_star(4096.0) == 3);
  CHECK(log_star(2.0) == 1);
}

TEST_CASE("log_star on e towers") {
  // e^^0 = 1, e^^1 = e, e^^2 = e^e, e^^3 = e^(e^e); e^^4 overflows a double.
  double tower = 1.0;
  for (int n = 0; n <= 3; ++n) {
    CHECK_MESSAGE(log_star(tower) == n, "tower height ", n);
    tower = std::exp(tower);
  }
}

TEST_CASE("log_star is monotone") {
  int previous = 0;
  for (double x = 0.01; x < 1e12; x *= 1.07) {
    const int v = log_star(x);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("log_star rejects bad input") {
  CHECK_THROWS_AS(log_star(0.0), std::domain_error);
  CHECK_THROWS_AS(log_star(-3.0), std::domain_error);
  CHECK_THROWS_AS(log_star(INFINITY), std::domain_error);
  CHECK_THROWS_AS(log_star(NAN), std::domain_error);
}

TEST_CASE("falling_factorial") {
  CHECK(falling_factorial(7, 0) == 1);
  CHECK(falling_factorial(0, 0) == 1);
  CHECK(falling_factorial(5, 2) == 20);
  CHECK(falling_factorial(3, 4) == 0);
  CHECK(falling_factorial_u64(5, 2) == 20);
  CHECK(falling_factorial_u64(3, 4) == 0);
  for (unsigned n = 0; n <= 20; ++n)
    for (unsigned k = 0; k <= n; ++k) {
      CHECK(falling_factorial(n, k) == factorial_ratio(n, k));
      CHECK(BigInt(falling_factorial_u64(n, k)) == factorial_ratio(n, k));
    }
}

TEST_CASE("falling_factorial_u64 signals overflow") {
  CHECK_THROWS_AS(falling_factorial_u64(100, 30), std::overflow_error);
  // 21! overflows, exact path still works.
  CHECK_THROWS_AS(falling_factorial_u64(21, 21), std::overflow_error);
  CHECK(falling_factorial(21, 21) == factorial_ratio(21, 21));
}

TEST_CASE("runs closed forms on hand-enumerated cases") {
  // "ab", "ba": one run each.
  CHECK(runs_expectation({1, 1, 1}) == doctest::Approx(1.0));
  CHECK(runs_variance({1, 1, 1}) == doctest::Approx(0.0));
  // aab(1), aba(2), baa(1)
  CHECK(runs_expectation({2, 1, 1}) == doctest::Approx(4.0 / 3.0));
  CHECK(runs_variance({2, 1, 1}) == doctest::Approx(2.0 / 9.0));
  // length >= 2: aab(1), aba(0), baa(1)
  CHECK(runs_expectation({2, 1, 2}) == doctest::Approx(2.0 / 3.0));
  CHECK(runs_variance({2, 1, 2}) == doctest::Approx(2.0 / 9.0));
  // aabb(1) abab(0) abba(0) baab(1) baba(0) bbaa(1): mean 1/2, variance 1/4
  CHECK(runs_expectation({2, 2, 2}) == doctest::Approx(0.5));
  CHECK(runs_variance({2, 2, 2}) == doctest::Approx(0.25));
}

TEST_CASE("runs closed forms reject degenerate models") {
  CHECK_THROWS_AS(runs_expectation({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(runs_expectation({1, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(runs_expectation({1, 1, 3}), std::domain_error);
  CHECK_THROWS_AS(runs_variance({1, 1, 3}), std::domain_error);
}

TEST_CASE("enumeration oracle") {
  auto one = runs_enumeration_oracle({1, 1, 1});
  CHECK(one.mean == 1);
  CHECK(one.variance == 0);
  auto two = runs_enumeration_oracle({2, 1, 2});
  CHECK(two.mean == Rational(2, 3));
  CHECK(two.variance == Rational(2, 9));
  auto none = runs_enumeration_oracle({0, 3, 1});
  CHECK(none.mean == 0);
  CHECK(none.variance == 0);
  auto sq = runs_enumeration_oracle({2, 2, 2});
  CHECK(sq.mean == Rational(1, 2));
  CHECK(sq.variance == Rational(1, 4));
  CHECK_THROWS_AS(runs_enumeration_oracle({15, 6, 1}), std::invalid_argument);
}

TEST_CASE("closed forms equal enumeration for every model with m <= 12") {
  int checked = 0;
  for (std::uint64_t m = 1; m <= 12; ++m)
    for (std::uint64_t m1 = 0; m1 <= m; ++m1)
      for (std::uint64_t k = 1; k <= std::max<std::uint64_t>(m1, 1); ++k) {
        const RunsModel model{m1, m - m1, k};
        const ExactMoments oracle = runs_enumeration_oracle(model);
        REQUIRE(runs_expectation_exact(model) == oracle.mean);
        REQUIRE(runs_variance_exact(model) == oracle.variance);
        const double e = runs_expectation(model);
        const double v = runs_variance(model);
        const double e_ref = oracle.mean.convert_to<double>();
        const double v_ref = oracle.variance.convert_to<double>();
        CHECK(std::abs(e - e_ref) <= 1e-12 * std::max(1.0, std::abs(e_ref)));
        CHECK(std::abs(v - v_ref) <= 1e-12 * std::max(1.0, std::abs(v_ref)));
        CHECK(e >= 0.0);
        CHECK(e <= static_cast<double>(m1));
        ++checked;
      }
  CHECK(checked > 300);
}

TEST_CASE("runs_expectation is non-increasing in k") {
  for (std::uint64_t m1 = 1; m1 <= 40; m1 += 3)
    for (std::uint64_t m2 = 0; m2 <= 30; m2 += 4) {
      double previous = runs_expectation({m1, m2, 1});
      for (std::uint64_t k = 2; k <= m1 + m2; ++k) {
        const double e = runs_expectation({m1, m2, k});
        CHECK(e <= previous + 1e-15);
        previous = e;
      }
    }
}

TEST_CASE("count_long_runs") {
  CHECK(count_long_runs(std::vector<bool>{true, true, false, true}, 1) == 2);
  CHECK(count_long_runs(std::vector<bool>{true, true, false, true}, 2) == 1);
  CHECK(count_long_runs(std::vector<bool>{}, 1) == 0);
  CHECK(count_long_runs(std::vector<bool>{false, false}, 1) == 0);
}

TEST_CASE("Monte Carlo agrees with the oracle") {
  auto within_3se = [](const SampledMoments& mc, double reference) {
    if (mc.std_error == 0.0) return mc.mean == reference;
    return std::abs(mc.mean - reference) <= 3.0 * mc.std_error;
  };
  CHECK(within_3se(runs_monte_carlo({1, 1, 1}, 10000, 11), 1.0));
  CHECK(within_3se(runs_monte_carlo({2, 1, 1}, 10000, 12), 4.0 / 3.0));
  const RunsModel big{900, 100, 20};
  const auto mc = runs_monte_carlo(big, 50000, 13);
  const double se = std::sqrt(runs_variance(big) / 50000.0);
  CHECK(std::abs(mc.mean - runs_expectation(big)) <= 3.0 * se);
  CHECK(mc.variance == doctest::Approx(runs_variance(big)).epsilon(0.05));
}

TEST_CASE("Monte Carlo is deterministic per seed") {
  const auto a = runs_monte_carlo({30, 10, 3}, 2000, 99);
  const auto b = runs_monte_carlo({30, 10, 3}, 2000, 99);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK_THROWS_AS(runs_monte_carlo({3, 3, 1}, 0, 1), std::invalid_argument);
}
