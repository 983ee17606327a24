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

#include "histopart/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>

#include "histopart/core_math.hpp"
#include "histopart/sorter.hpp"

namespace histopart {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::histopart: return "histopart";
    case Algorithm::hss_fixed: return "hss_fixed";
    case Algorithm::sample_sort: return "sample_sort";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "histopart") return Algorithm::histopart;
  if (text == "hss_fixed") return Algorithm::hss_fixed;
  if (text == "sample_sort") return Algorithm::sample_sort;
  throw std::invalid_argument("unknown algorithm: " + text);
}

std::string to_string(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::uniform: return "uniform";
    case WorkloadKind::adversarial: return "adversarial";
    case WorkloadKind::sorted_blocks: return "sorted_blocks";
    case WorkloadKind::zipf_gaps: return "zipf_gaps";
  }
  return "unknown";
}

WorkloadKind parse_workload(const std::string& text) {
  std::string name = text;
  if (name.rfind("skewed:", 0) == 0) name = name.substr(7);
  if (name == "uniform") return WorkloadKind::uniform;
  if (name == "adversarial") return WorkloadKind::adversarial;
  if (name == "sorted_blocks") return WorkloadKind::sorted_blocks;
  if (name == "zipf_gaps") return WorkloadKind::zipf_gaps;
  throw std::invalid_argument("unknown workload: " + text);
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (p_list.empty()) throw std::invalid_argument("p list must not be empty");
  for (std::size_t p : p_list)
    if (p < 2) throw std::invalid_argument("every p must be >= 2");
  if (keys_per_proc < 1) throw std::invalid_argument("keys per processor must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (sample_size && *sample_size < 1) throw std::invalid_argument("sample size must be >= 1");
  if (workload == WorkloadKind::adversarial && parts) {
    for (std::size_t p : p_list)
      if (*parts < 1 || p % *parts != 0 || keys_per_proc % *parts != 0)
        throw std::invalid_argument("adversarial C must divide p and keys per processor");
  }
}

std::uint64_t default_sample_sort_size(std::size_t p) {
  return static_cast<std::uint64_t>(std::ceil(3.0 * static_cast<double>(p) * std::log(static_cast<double>(p))));
}

GlobalInput make_workload(const ExperimentSpec& spec, std::size_t p, std::uint64_t seed) {
  const std::size_t n_keys = p * spec.keys_per_proc;
  switch (spec.workload) {
    case WorkloadKind::uniform: return gen_uniform(n_keys, p, seed);
    case WorkloadKind::adversarial:
      return gen_adversarial(n_keys, p, spec.parts.value_or(default_adversarial_parts(p)), seed);
    case WorkloadKind::sorted_blocks: return gen_skewed(n_keys, p, seed, SkewMode::sorted_blocks);
    case WorkloadKind::zipf_gaps: return gen_skewed(n_keys, p, seed, SkewMode::zipf_gaps);
  }
  throw std::invalid_argument("unknown workload");
}

PartitionResult run_algorithm(const ExperimentSpec& spec, const GlobalInput& input, std::uint64_t seed) {
  const std::size_t p = input.processors();
  PartitionerConfig config;
  config.epsilon = spec.epsilon;
  config.sample_constant = spec.c;
  config.count_broadcast = spec.count_broadcast;
  config.seed = seed;
  config.backend = spec.backend;
  switch (spec.algorithm) {
    case Algorithm::histopart: return run_histogram_partitioning(input, config);
    case Algorithm::hss_fixed: return run_hss_fixed(input, spec.sample_size.value_or(p), config);
    case Algorithm::sample_sort:
      return run_sample_sort(input, spec.sample_size.value_or(default_sample_sort_size(p)), spec.epsilon, seed,
                             spec.backend);
  }
  throw std::invalid_argument("unknown algorithm");
}

namespace {

ResultRow row_from(const PartitionResult& result, std::uint64_t seed) {
  ResultRow row;
  row.algorithm = result.algorithm;
  row.p = result.processors;
  row.n_keys = result.n_keys;
  row.seed = seed;
  row.rounds = result.rounds;
  row.total_sample_volume = result.ledger.total_sample_volume();
  row.balance_factor = result.balance_factor;
  row.success = result.success;
  row.max_h = result.ledger.max_h();
  return row;
}

std::vector<ResultRow> run_matrix(const ExperimentSpec& spec, bool with_sort, std::vector<nlohmann::json>* reports) {
  spec.validate();
  const std::size_t n_points = spec.p_list.size() * spec.trials;
  std::vector<ResultRow> rows(n_points);
  std::vector<nlohmann::json> collected(reports ? n_points : 0);
  std::exception_ptr failure;
  std::mutex failure_mutex;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(n_points); ++idx) {
    try {
      const auto i = static_cast<std::size_t>(idx);
      const std::size_t p = spec.p_list[i / spec.trials];
      const std::uint64_t seed = spec.base_seed + i % spec.trials;
      const auto start = std::chrono::steady_clock::now();
      const GlobalInput input = make_workload(spec, p, seed);
      const PartitionResult result = run_algorithm(spec, input, seed);
      ResultRow row = row_from(result, seed);
      nlohmann::json report;
      if (reports) report = to_json(result);
      if (with_sort) {
        row.has_sort = true;
        if (result.success) {
          const SortOutcome outcome = exchange_and_sort(input, result.splitter_keys, spec.backend);
          row.max_load = outcome.max_load;
          row.exchange_volume = outcome.exchange_volume;
          row.globally_sorted = outcome.globally_sorted && verify_sorted(outcome, input.oracle());
          if (reports) report["sort"] = outcome.summary();
        }
      }
      row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows[i] = std::move(row);
      if (reports) collected[i] = std::move(report);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (reports) *reports = std::move(collected);
  return rows;
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string rational_text(const Rational& r) {
  std::string s = boost::multiprecision::numerator(r).str();
  const auto den = boost::multiprecision::denominator(r);
  if (den != 1) s += "/" + den.str();
  return s;
}

} // namespace

std::vector<ResultRow> cmd_partition(const ExperimentSpec& spec, std::vector<nlohmann::json>* reports) {
  return run_matrix(spec, false, reports);
}

std::vector<ResultRow> cmd_sort(const ExperimentSpec& spec, std::vector<nlohmann::json>* reports) {
  return run_matrix(spec, true, reports);
}

std::vector<ResultRow> cmd_sweep(const ExperimentSpec& spec) { return run_matrix(spec, false, nullptr); }

void write_csv(std::ostream& out, std::span<const ResultRow> rows, bool include_wall_time) {
  const bool with_sort = !rows.empty() && rows.front().has_sort;
  out << "algorithm,p,N,seed,rounds,total_sample_volume,balance_factor,success,max_h";
  if (include_wall_time) out << ",wall_time";
  if (with_sort) out << ",max_load,exchange_volume,globally_sorted";
  out << '\n';
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.p << ',' << r.n_keys << ',' << r.seed << ',' << r.rounds << ','
        << r.total_sample_volume << ',' << format_real(r.balance_factor) << ',' << (r.success ? "true" : "false") << ','
        << r.max_h;
    if (include_wall_time) out << ',' << format_real(r.wall_time);
    if (with_sort)
      out << ',' << r.max_load << ',' << r.exchange_volume << ',' << (r.globally_sorted ? "true" : "false");
    out << '\n';
  }
}

nlohmann::json rows_to_json(std::span<const ResultRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"algorithm", r.algorithm},
                        {"p", r.p},
                        {"N", r.n_keys},
                        {"seed", r.seed},
                        {"rounds", r.rounds},
                        {"total_sample_volume", r.total_sample_volume},
                        {"balance_factor", std::isnan(r.balance_factor) ? nlohmann::json(nullptr)
                                                                         : nlohmann::json(r.balance_factor)},
                        {"success", r.success},
                        {"max_h", r.max_h},
                        {"wall_time", r.wall_time}};
    if (r.has_sort) {
      j["max_load"] = r.max_load;
      j["exchange_volume"] = r.exchange_volume;
      j["globally_sorted"] = r.globally_sorted;
    }
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::json cmd_runsstats(std::uint64_t m1, std::uint64_t m2, std::uint64_t k, std::uint64_t trials,
                             std::uint64_t seed) {
  const RunsModel model{m1, m2, k};
  const double mean = runs_expectation(model);
  const double variance = runs_variance(model);
  nlohmann::json out = {{"m1", m1}, {"m2", m2}, {"k", k}};
  out["closed_form"] = {{"expectation", mean},
                        {"variance", variance},
                        {"expectation_exact", rational_text(runs_expectation_exact(model))},
                        {"variance_exact", rational_text(runs_variance_exact(model))}};
  if (model.m() <= kRunsEnumerationLimit) {
    const ExactMoments oracle = runs_enumeration_oracle(model);
    out["oracle"] = {{"expectation", rational_text(oracle.mean)},
                     {"variance", rational_text(oracle.variance)},
                     {"matches_closed_form", oracle.mean == runs_expectation_exact(model) &&
                                                 oracle.variance == runs_variance_exact(model)}};
  } else {
    out["oracle"] = nullptr;
  }
  if (trials > 0) {
    const SampledMoments mc = runs_monte_carlo(model, trials, seed);
    const double se = std::sqrt(variance / static_cast<double>(trials));
    const double z = se > 0.0 ? (mc.mean - mean) / se : (mc.mean == mean ? 0.0 : std::numeric_limits<double>::infinity());
    out["monte_carlo"] = {{"trials", trials},
                          {"seed", seed},
                          {"mean", mc.mean},
                          {"variance", mc.variance},
                          {"std_error", se},
                          {"z", z},
                          {"within_3se", std::abs(z) <= 3.0}};
  }
  return out;
}

nlohmann::json AuditReport::to_json() const {
  return {{"N", audit.n_keys},
          {"p", audit.processors},
          {"C", audit.parts},
          {"subinterval_length", audit.subinterval_length},
          {"split_subintervals", audit.split_subintervals},
          {"bad_processor_parts", audit.bad_processor_parts},
          {"bad_processor_sizes", audit.bad_processor_sizes},
          {"one_subinterval_per_pair", audit.one_subinterval_per_pair()},
          {"keys_per_processor_ok", audit.keys_per_processor_ok()},
          {"passed", audit.passed()}};
}

AuditReport cmd_adversarial_audit(std::size_t n_keys, std::size_t p, std::size_t parts, std::uint64_t seed) {
  const GlobalInput input = gen_adversarial(n_keys, p, parts, seed);
  AuditReport report;
  report.audit = audit_adversarial(input, parts);
  const auto verdict = [](bool ok) { return ok ? std::string("PASS") : std::string("FAIL"); };
  report.lines.push_back("one subinterval per (processor, part): " + verdict(report.audit.one_subinterval_per_pair()));
  report.lines.push_back("keys per processor = " + std::to_string(n_keys / p) + ": " +
                         verdict(report.audit.keys_per_processor_ok()));
  return report;
}

} // namespace histopart
