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
#include <filesystem>
#include <set>

#include "histopart/keyspace.hpp"

using namespace histopart;

namespace {

std::vector<Key> all_keys(const GlobalInput& input) {
  std::vector<Key> keys;
  for (std::size_t proc = 0; proc < input.processors(); ++proc)
    keys.insert(keys.end(), input.local_keys(proc).begin(), input.local_keys(proc).end());
  std::sort(keys.begin(), keys.end());
  return keys;
}

void check_common_invariants(const GlobalInput& input, std::size_t n_keys, std::size_t p) {
  REQUIRE(input.size() == n_keys);
  REQUIRE(input.processors() == p);
  for (std::size_t proc = 0; proc < p; ++proc) CHECK(input.local_keys(proc).size() == n_keys / p);
  const auto keys = all_keys(input);
  CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
  CHECK(std::equal(keys.begin(), keys.end(), input.oracle().sorted_keys().begin(), input.oracle().sorted_keys().end()));
}

} // namespace

TEST_CASE("universe keys are strictly increasing and avoid sentinels") {
  for (Rank r = 1; r < 100000; ++r) {
    REQUIRE(universe_key(r) < universe_key(r + 1));
  }
  CHECK(universe_key(1) != kKeyBelowAll);
}

TEST_CASE("gen_uniform") {
  const auto a = gen_uniform(16, 4, 1);
  check_common_invariants(a, 16, 4);
  const auto b = gen_uniform(16, 4, 1);
  for (std::size_t proc = 0; proc < 4; ++proc)
    CHECK(std::ranges::equal(a.local_keys(proc), b.local_keys(proc)));
  const auto c = gen_uniform(4096, 16, 2);
  check_common_invariants(c, 4096, 16);
  CHECK_THROWS_AS(gen_uniform(15, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_uniform(16, 1, 1), std::invalid_argument);
}

TEST_CASE("different seeds deal differently") {
  const auto a = gen_uniform(1024, 8, 1);
  const auto b = gen_uniform(1024, 8, 2);
  CHECK_FALSE(std::ranges::equal(a.local_keys(0), b.local_keys(0)));
}

TEST_CASE("gen_adversarial small layout") {
  const auto input = gen_adversarial(16, 4, 2, 7);
  check_common_invariants(input, 16, 4);
  // Subintervals have length 16 / (4 * 2) = 2; part 0 is ranks 1..8.
  for (std::size_t proc = 0; proc < 4; ++proc) {
    const auto ranks = input.sorted_local_ranks(proc);
    REQUIRE(ranks.size() == 4);
    CHECK(ranks[1] == ranks[0] + 1);
    CHECK(ranks[3] == ranks[2] + 1);
    CHECK(ranks[0] % 2 == 1);
    CHECK(ranks[1] <= 8);
    CHECK(ranks[2] > 8);
  }
  const auto audit = audit_adversarial(input, 2);
  CHECK(audit.passed());
  CHECK(audit.subinterval_length == 2);
}

TEST_CASE("gen_adversarial audits clean over seeds and shapes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto input = gen_adversarial(4096, 64, 8, seed);
    check_common_invariants(input, 4096, 64);
    CHECK(audit_adversarial(input, 8).passed());
  }
  CHECK(audit_adversarial(gen_adversarial(1 << 12, 16, 4, 3), 4).passed());
  CHECK(audit_adversarial(gen_adversarial(1 << 12, 16, 1, 3), 1).passed());
}

TEST_CASE("gen_adversarial divisibility errors") {
  CHECK_THROWS_AS(gen_adversarial(16, 4, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_adversarial(24, 4, 4, 1), std::invalid_argument);
}

TEST_CASE("audit detects a non-adversarial layout") {
  const auto input = gen_uniform(4096, 64, 5);
  const auto audit = audit_adversarial(input, 8);
  CHECK_FALSE(audit.one_subinterval_per_pair());
  CHECK(audit.keys_per_processor_ok());
}

TEST_CASE("gen_skewed") {
  const auto blocks = gen_skewed(16, 4, 1, SkewMode::sorted_blocks);
  check_common_invariants(blocks, 16, 4);
  for (std::size_t proc = 0; proc < 4; ++proc) {
    const auto ranks = blocks.sorted_local_ranks(proc);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ranks[i] == 4 * proc + i + 1);
  }
  const auto zipf = gen_skewed(4096, 8, 3, SkewMode::zipf_gaps);
  check_common_invariants(zipf, 4096, 8);
  const auto sorted = zipf.oracle().sorted_keys();
  CHECK(std::adjacent_find(sorted.begin(), sorted.end(), std::greater_equal<>()) == sorted.end());
  CHECK_THROWS_AS(gen_skewed(15, 4, 1, SkewMode::zipf_gaps), std::invalid_argument);
}

TEST_CASE("rank oracle") {
  const auto input = gen_uniform(16, 4, 1);
  const auto& oracle = input.oracle();
  CHECK(oracle.key_of_rank(1) == oracle.sorted_keys().front());
  CHECK(oracle.key_of_rank(1) == *std::min_element(oracle.sorted_keys().begin(), oracle.sorted_keys().end()));
  for (Rank r = 1; r <= 16; ++r) CHECK(oracle.rank(oracle.key_of_rank(r)) == r);
  CHECK_THROWS_AS(oracle.key_of_rank(0), std::out_of_range);
  CHECK_THROWS_AS(oracle.key_of_rank(17), std::out_of_range);
  CHECK_THROWS_AS(oracle.rank(12345), std::out_of_range);
}

TEST_CASE("local ranks sum to the global rank") {
  const auto input = gen_uniform(16, 4, 1);
  std::size_t total = 0;
  for (std::size_t proc = 0; proc < 4; ++proc) total += input.local_rank(proc, input.oracle().key_of_rank(8));
  CHECK(total == 8);

  const auto big = gen_adversarial(2048, 16, 4, 9);
  for (Rank r = 1; r <= 2048; r += 37) {
    const Key key = big.oracle().key_of_rank(r);
    std::size_t sum = 0;
    for (std::size_t proc = 0; proc < 16; ++proc) sum += big.local_rank(proc, key);
    CHECK(sum == r);
  }
}

TEST_CASE("global ranks do not depend on the layout") {
  const auto uniform = gen_uniform(4096, 16, 4);
  const auto adversarial = gen_adversarial(4096, 16, 4, 4);
  CHECK(std::ranges::equal(uniform.oracle().sorted_keys(), adversarial.oracle().sorted_keys()));
}

TEST_CASE("constructor validation") {
  CHECK_THROWS_AS(GlobalInput({{1, 2}, {3}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(GlobalInput({{1, 2}, {2, 3}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(GlobalInput({{1, 2}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(GlobalInput({{0, 2}, {3, 4}}, {}), std::invalid_argument);
  const GlobalInput ok({{40, 10}, {30, 20}}, {"custom", 0, {}, {}});
  CHECK(ok.oracle().rank(30) == 3);
  CHECK(ok.sorted_local_ranks(0)[0] == 1);
  CHECK(ok.sorted_local_ranks(0)[1] == 4);
}

TEST_CASE("default adversarial parts") {
  CHECK(default_adversarial_parts(64) == 8);
  CHECK(default_adversarial_parts(256) == 16);
  CHECK(default_adversarial_parts(1024) == 32);
  CHECK(default_adversarial_parts(128) == 8);
  CHECK(default_adversarial_parts(12) == 3);
  CHECK(default_adversarial_parts(7) == 1);
}

TEST_CASE("dump and load round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "histopart_keyspace_io";
  std::filesystem::remove_all(dir);
  const auto input = gen_adversarial(256, 8, 2, 5);
  save_input(input, dir);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "proc_7.txt"));
  const auto loaded = load_input(dir);
  CHECK(loaded.layout().generator == "adversarial");
  CHECK(loaded.layout().parts == std::optional<std::size_t>(2));
  for (std::size_t proc = 0; proc < 8; ++proc) CHECK(std::ranges::equal(loaded.local_keys(proc), input.local_keys(proc)));
  CHECK(audit_adversarial(loaded, 2).passed());
  std::filesystem::remove_all(dir);
  CHECK_THROWS(load_input(dir));
}
