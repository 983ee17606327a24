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

#ifndef HISTOPART_EXPERIMENT_HPP
#define HISTOPART_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "histopart/keyspace.hpp"
#include "histopart/partitioner.hpp"

namespace histopart {

enum class Algorithm { histopart, hss_fixed, sample_sort };
enum class WorkloadKind { uniform, adversarial, sorted_blocks, zipf_gaps };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);
std::string to_string(WorkloadKind kind);
/// Accepts uniform, adversarial, sorted_blocks, zipf_gaps and the
/// skewed:<mode> spelling.
WorkloadKind parse_workload(const std::string& text);

struct ExperimentSpec {
  Algorithm algorithm = Algorithm::histopart;
  std::vector<std::size_t> p_list{64};
  std::size_t keys_per_proc = 256;
  double epsilon = 1.0;
  double c = 3.0;
  /// sample_sort: total sample size S (default ceil(3 p ln p)).
  /// hss_fixed: per-round budget (default p).
  std::optional<std::uint64_t> sample_size;
  std::size_t trials = 1;
  std::uint64_t base_seed = 1;
  WorkloadKind workload = WorkloadKind::uniform;
  std::optional<std::size_t> parts;  // C for the adversarial layout
  bool count_broadcast = true;
  Backend backend = Backend::omp;

  /// Throws std::invalid_argument on a bad field.
  void validate() const;
};

struct ResultRow {
  std::string algorithm;
  std::size_t p = 0;
  std::size_t n_keys = 0;
  std::uint64_t seed = 0;
  std::uint64_t rounds = 0;
  std::uint64_t total_sample_volume = 0;
  double balance_factor = 0.0;
  bool success = false;
  std::uint64_t max_h = 0;
  double wall_time = 0.0;  // seconds; excluded from determinism checks

  bool has_sort = false;
  std::uint64_t max_load = 0;
  std::uint64_t exchange_volume = 0;
  bool globally_sorted = false;
};

std::uint64_t default_sample_sort_size(std::size_t p);

GlobalInput make_workload(const ExperimentSpec& spec, std::size_t p, std::uint64_t seed);
PartitionResult run_algorithm(const ExperimentSpec& spec, const GlobalInput& input, std::uint64_t seed);

/// One row per (p, trial), ordered by (p, trial); trial seeds are
/// base_seed + trial. When `reports` is given it receives the matching run
/// reports in the same order.
std::vector<ResultRow> cmd_partition(const ExperimentSpec& spec, std::vector<nlohmann::json>* reports = nullptr);
std::vector<ResultRow> cmd_sort(const ExperimentSpec& spec, std::vector<nlohmann::json>* reports = nullptr);
std::vector<ResultRow> cmd_sweep(const ExperimentSpec& spec);

void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool include_wall_time = true);
nlohmann::json rows_to_json(std::span<const ResultRow> rows);

/// Closed form vs enumeration oracle (m <= 20) vs Monte Carlo.
nlohmann::json cmd_runsstats(std::uint64_t m1, std::uint64_t m2, std::uint64_t k, std::uint64_t trials,
                             std::uint64_t seed);

struct AuditReport {
  AdversarialAudit audit;
  std::vector<std::string> lines;
  nlohmann::json to_json() const;
};

AuditReport cmd_adversarial_audit(std::size_t n_keys, std::size_t p, std::size_t parts, std::uint64_t seed);

} // namespace histopart

#endif
