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

#include "histopart/keyspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "histopart/random.hpp"

namespace histopart {

namespace {

constexpr Rank kMaxUniverse = Rank{1} << 43;

void require_even_split(std::size_t n_keys, std::size_t p) {
  if (p < 2) throw std::invalid_argument("processor count p must be >= 2");
  if (n_keys == 0 || n_keys % p != 0) throw std::invalid_argument("N must be a positive multiple of p");
  if (n_keys >= kMaxUniverse) throw std::invalid_argument("N exceeds the supported key universe (2^43)");
}

std::vector<Key> standard_universe(std::size_t n_keys) {
  std::vector<Key> keys(n_keys);
  for (std::size_t i = 0; i < n_keys; ++i) keys[i] = universe_key(i + 1);
  return keys;
}

} // namespace

Key universe_key(Rank r) noexcept { return (r << 20) | (splitmix64(r) & 0xFFFFFULL); }

std::string to_string(SkewMode mode) { return mode == SkewMode::sorted_blocks ? "sorted_blocks" : "zipf_gaps"; }

SkewMode parse_skew_mode(const std::string& text) {
  if (text == "sorted_blocks") return SkewMode::sorted_blocks;
  if (text == "zipf_gaps") return SkewMode::zipf_gaps;
  throw std::invalid_argument("unknown skew mode: " + text);
}

// ---------------------------------------------------------------- RankOracle

RankOracle::RankOracle(std::vector<Key> sorted_keys) : sorted_(std::move(sorted_keys)) {
  if (std::adjacent_find(sorted_.begin(), sorted_.end(), std::greater_equal<>()) != sorted_.end())
    throw std::invalid_argument("RankOracle: keys must be strictly increasing");
}

bool RankOracle::contains(Key key) const noexcept { return std::binary_search(sorted_.begin(), sorted_.end(), key); }

Rank RankOracle::rank(Key key) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), key);
  if (it == sorted_.end() || *it != key) throw std::out_of_range("rank: key not present in input");
  return static_cast<Rank>(it - sorted_.begin()) + 1;
}

Key RankOracle::key_of_rank(Rank r) const {
  if (r < 1 || r > sorted_.size()) throw std::out_of_range("key_of_rank: rank outside 1..N");
  return sorted_[r - 1];
}

// --------------------------------------------------------------- GlobalInput

GlobalInput::GlobalInput(std::vector<std::vector<Key>> keys_by_processor, LayoutTag tag)
    : local_(std::move(keys_by_processor)), tag_(std::move(tag)) {
  if (local_.size() < 2) throw std::invalid_argument("GlobalInput: need at least 2 processors");
  const std::size_t per = local_.front().size();
  if (per == 0) throw std::invalid_argument("GlobalInput: processors must hold at least one key");
  std::vector<Key> all;
  all.reserve(per * local_.size());
  for (const auto& keys : local_) {
    if (keys.size() != per) throw std::invalid_argument("GlobalInput: every processor must hold N / p keys");
    for (Key k : keys) {
      if (k == kKeyBelowAll || k == kKeyAboveAll) throw std::invalid_argument("GlobalInput: reserved sentinel key");
      all.push_back(k);
    }
  }
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end())
    throw std::invalid_argument("GlobalInput: duplicate keys are not supported");
  oracle_ = RankOracle(std::move(all));
  index_locals();
}

GlobalInput GlobalInput::from_rank_layout(const std::vector<std::vector<Rank>>& ranks_by_processor,
                                          std::vector<Key> sorted_universe, LayoutTag tag) {
  const std::size_t n_keys = sorted_universe.size();
  const std::size_t p = ranks_by_processor.size();
  require_even_split(n_keys, p);
  std::vector<char> seen(n_keys + 1, 0);
  GlobalInput input;
  input.tag_ = std::move(tag);
  input.oracle_ = RankOracle(std::move(sorted_universe));
  input.local_.resize(p);
  input.sorted_local_.resize(p);
  input.sorted_local_ranks_.resize(p);
  for (std::size_t proc = 0; proc < p; ++proc) {
    const auto& ranks = ranks_by_processor[proc];
    if (ranks.size() != n_keys / p) throw std::invalid_argument("rank layout: every processor must hold N / p keys");
    auto& keys = input.local_[proc];
    keys.reserve(ranks.size());
    for (Rank r : ranks) {
      if (r < 1 || r > n_keys || seen[r]) throw std::invalid_argument("rank layout: ranks must be a permutation of 1..N");
      seen[r] = 1;
      keys.push_back(input.oracle_.key_of_rank(r));
    }
    auto& sorted_ranks = input.sorted_local_ranks_[proc];
    sorted_ranks = ranks;
    std::sort(sorted_ranks.begin(), sorted_ranks.end());
    auto& sorted_keys = input.sorted_local_[proc];
    sorted_keys.reserve(sorted_ranks.size());
    for (Rank r : sorted_ranks) sorted_keys.push_back(input.oracle_.key_of_rank(r));
  }
  return input;
}

void GlobalInput::index_locals() {
  sorted_local_.resize(local_.size());
  sorted_local_ranks_.resize(local_.size());
  for (std::size_t proc = 0; proc < local_.size(); ++proc) {
    sorted_local_[proc] = local_[proc];
    std::sort(sorted_local_[proc].begin(), sorted_local_[proc].end());
    auto& ranks = sorted_local_ranks_[proc];
    ranks.clear();
    ranks.reserve(sorted_local_[proc].size());
    for (Key k : sorted_local_[proc]) ranks.push_back(oracle_.rank(k));
  }
}

std::size_t GlobalInput::local_rank(std::size_t proc, Key key) const {
  const auto& keys = sorted_local_.at(proc);
  return static_cast<std::size_t>(std::upper_bound(keys.begin(), keys.end(), key) - keys.begin());
}

// ---------------------------------------------------------------- generators

GlobalInput gen_uniform(std::size_t n_keys, std::size_t p, std::uint64_t seed) {
  require_even_split(n_keys, p);
  std::vector<Rank> perm(n_keys);
  std::iota(perm.begin(), perm.end(), Rank{1});
  std::mt19937_64 rng(mix_words({seed, 0x756e69666f726dULL}));
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t per = n_keys / p;
  std::vector<std::vector<Rank>> ranks(p);
  for (std::size_t proc = 0; proc < p; ++proc)
    ranks[proc].assign(perm.begin() + static_cast<std::ptrdiff_t>(proc * per),
                       perm.begin() + static_cast<std::ptrdiff_t>((proc + 1) * per));
  return GlobalInput::from_rank_layout(ranks, standard_universe(n_keys), LayoutTag{"uniform", seed, {}, {}});
}

GlobalInput gen_adversarial(std::size_t n_keys, std::size_t p, std::size_t parts, std::uint64_t seed) {
  require_even_split(n_keys, p);
  if (parts < 1 || p % parts != 0) throw std::invalid_argument("adversarial layout: C must divide p");
  if (n_keys % (p * parts) != 0) throw std::invalid_argument("adversarial layout: p * C must divide N");
  const std::size_t sub_len = n_keys / (p * parts);
  std::mt19937_64 rng(mix_words({seed, 0x616476ULL, parts}));
  std::vector<std::vector<Rank>> ranks(p);
  for (auto& r : ranks) r.reserve(n_keys / p);
  std::vector<std::size_t> owner(p);
  // Part c covers subintervals c*p .. c*p + p - 1 in rank order.
  for (std::size_t part = 0; part < parts; ++part) {
    std::iota(owner.begin(), owner.end(), std::size_t{0});
    std::shuffle(owner.begin(), owner.end(), rng);
    for (std::size_t t = 0; t < p; ++t) {
      const Rank first = static_cast<Rank>((part * p + t) * sub_len) + 1;
      auto& dest = ranks[owner[t]];
      for (std::size_t i = 0; i < sub_len; ++i) dest.push_back(first + i);
    }
  }
  return GlobalInput::from_rank_layout(ranks, standard_universe(n_keys), LayoutTag{"adversarial", seed, parts, {}});
}

GlobalInput gen_skewed(std::size_t n_keys, std::size_t p, std::uint64_t seed, SkewMode mode) {
  require_even_split(n_keys, p);
  const std::size_t per = n_keys / p;
  LayoutTag tag{"skewed", seed, {}, mode};
  std::vector<std::vector<Rank>> ranks(p);
  if (mode == SkewMode::sorted_blocks) {
    for (std::size_t proc = 0; proc < p; ++proc) {
      ranks[proc].resize(per);
      std::iota(ranks[proc].begin(), ranks[proc].end(), static_cast<Rank>(proc * per + 1));
    }
    return GlobalInput::from_rank_layout(ranks, standard_universe(n_keys), std::move(tag));
  }

  // Heavy-tailed gaps: P(gap >= g) ~ g^-1.2, truncated at 2^20.
  std::mt19937_64 rng(mix_words({seed, 0x7a697066ULL}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Key> universe(n_keys);
  Key key = 0;
  for (std::size_t i = 0; i < n_keys; ++i) {
    const double u = 1.0 - unit(rng);  // (0, 1]
    const double gap = std::min(std::floor(std::pow(u, -1.0 / 1.2)), 1048576.0);
    key += static_cast<Key>(gap);
    universe[i] = key;
  }
  std::vector<Rank> perm(n_keys);
  std::iota(perm.begin(), perm.end(), Rank{1});
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t proc = 0; proc < p; ++proc)
    ranks[proc].assign(perm.begin() + static_cast<std::ptrdiff_t>(proc * per),
                       perm.begin() + static_cast<std::ptrdiff_t>((proc + 1) * per));
  return GlobalInput::from_rank_layout(ranks, std::move(universe), std::move(tag));
}

std::size_t default_adversarial_parts(std::size_t p) {
  if (p == 0) throw std::invalid_argument("p must be positive");
  std::size_t c = static_cast<std::size_t>(std::sqrt(static_cast<double>(p)));
  while (c * c > p) --c;
  while ((c + 1) * (c + 1) <= p) ++c;
  while (c > 1 && p % c != 0) --c;
  return std::max<std::size_t>(c, 1);
}

AdversarialAudit audit_adversarial(const GlobalInput& input, std::size_t parts) {
  AdversarialAudit audit;
  audit.n_keys = input.size();
  audit.processors = input.processors();
  audit.parts = parts;
  const std::size_t p = audit.processors;
  if (parts < 1 || p % parts != 0 || audit.n_keys % (p * parts) != 0)
    throw std::invalid_argument("audit: parameters violate C | p and pC | N");
  audit.subinterval_length = audit.n_keys / (p * parts);
  const std::size_t n_sub = p * parts;

  constexpr std::size_t kUnowned = ~std::size_t{0};
  constexpr std::size_t kShared = kUnowned - 1;
  std::vector<std::size_t> owner(n_sub, kUnowned);
  std::vector<std::size_t> per_pair(p * parts, 0);
  for (std::size_t proc = 0; proc < p; ++proc) {
    if (input.sorted_local_ranks(proc).size() != audit.n_keys / p) ++audit.bad_processor_sizes;
    std::size_t last_sub = kUnowned;
    for (Rank r : input.sorted_local_ranks(proc)) {
      const std::size_t sub = static_cast<std::size_t>(r - 1) / audit.subinterval_length;
      if (owner[sub] == kUnowned) owner[sub] = proc;
      else if (owner[sub] != proc) owner[sub] = kShared;
      if (sub != last_sub) {
        ++per_pair[proc * parts + sub / p];
        last_sub = sub;
      }
    }
  }
  for (std::size_t o : owner)
    if (o == kShared || o == kUnowned) ++audit.split_subintervals;
  for (std::size_t count : per_pair)
    if (count != 1) ++audit.bad_processor_parts;
  return audit;
}

// ------------------------------------------------------------------------ io

void save_input(const GlobalInput& input, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t proc = 0; proc < input.processors(); ++proc) {
    std::ofstream out(dir / ("proc_" + std::to_string(proc) + ".txt"));
    if (!out) throw std::runtime_error("cannot write " + (dir / ("proc_" + std::to_string(proc) + ".txt")).string());
    for (Key k : input.local_keys(proc)) out << k << '\n';
  }
  nlohmann::json manifest;
  manifest["N"] = input.size();
  manifest["p"] = input.processors();
  manifest["generator"] = input.layout().generator;
  manifest["seed"] = input.layout().seed;
  manifest["C"] = input.layout().parts ? nlohmann::json(*input.layout().parts) : nlohmann::json(nullptr);
  if (input.layout().mode) manifest["mode"] = to_string(*input.layout().mode);
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

GlobalInput load_input(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw std::runtime_error("missing manifest.json in " + dir.string());
  const auto manifest = nlohmann::json::parse(manifest_in);
  const auto n_keys = manifest.at("N").get<std::size_t>();
  const auto p = manifest.at("p").get<std::size_t>();
  LayoutTag tag;
  tag.generator = manifest.value("generator", std::string("loaded"));
  tag.seed = manifest.value("seed", std::uint64_t{0});
  if (manifest.contains("C") && !manifest["C"].is_null()) tag.parts = manifest["C"].get<std::size_t>();
  if (manifest.contains("mode")) tag.mode = parse_skew_mode(manifest["mode"].get<std::string>());

  std::vector<std::vector<Key>> keys(p);
  for (std::size_t proc = 0; proc < p; ++proc) {
    const auto path = dir / ("proc_" + std::to_string(proc) + ".txt");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    Key k = 0;
    while (in >> k) keys[proc].push_back(k);
    if (!in.eof()) throw std::runtime_error("malformed key in " + path.string());
  }
  GlobalInput input(std::move(keys), std::move(tag));
  if (input.size() != n_keys) throw std::runtime_error("manifest N does not match the stored keys");
  return input;
}

} // namespace histopart
