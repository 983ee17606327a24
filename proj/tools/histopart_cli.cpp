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

// histopart: experiment runner for splitter selection on simulated processors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "histopart/experiment.hpp"

namespace {

using histopart::ExperimentSpec;

struct CommonFlags {
  std::string algo = "histopart";
  std::vector<std::size_t> p_list{64};
  std::size_t keys_per_proc = 256;
  double epsilon = 1.0;
  double c = 3.0;
  std::optional<std::uint64_t> sample_size;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  std::string workload = "uniform";
  std::optional<std::size_t> parts;
  std::string out;
  std::string format;
  bool count_broadcast = true;
  bool serial = false;

  ExperimentSpec to_spec() const {
    ExperimentSpec spec;
    spec.algorithm = histopart::parse_algorithm(algo);
    spec.p_list = p_list;
    spec.keys_per_proc = keys_per_proc;
    spec.epsilon = epsilon;
    spec.c = c;
    spec.sample_size = sample_size;
    spec.trials = trials;
    spec.base_seed = seed;
    spec.workload = histopart::parse_workload(workload);
    spec.parts = parts;
    spec.count_broadcast = count_broadcast;
    spec.backend = serial ? histopart::Backend::serial : histopart::Backend::omp;
    spec.validate();
    return spec;
  }
};

void add_experiment_flags(CLI::App* cmd, CommonFlags& f, const std::string& default_format) {
  f.format = default_format;
  cmd->add_option("--algo", f.algo, "histopart | hss_fixed | sample_sort")->capture_default_str();
  cmd->add_option("--p", f.p_list, "processor counts (comma separated)")->delimiter(',')->capture_default_str();
  cmd->add_option("--keys-per-proc", f.keys_per_proc, "keys per processor (N = p * keys)")->capture_default_str();
  cmd->add_option("--epsilon", f.epsilon, "balance slack")->capture_default_str();
  cmd->add_option("--c", f.c, "sample constant for histopart")->capture_default_str();
  cmd->add_option("--sample-size", f.sample_size,
                  "sample_sort: total samples (default ceil(3 p ln p)); hss_fixed: per-round budget (default p)");
  cmd->add_option("--trials", f.trials, "trials per p")->capture_default_str();
  cmd->add_option("--seed", f.seed, "base seed; trial t uses seed + t")->capture_default_str();
  cmd->add_option("--workload", f.workload, "uniform | adversarial | sorted_blocks | zipf_gaps")->capture_default_str();
  cmd->add_option("--C", f.parts, "part count for the adversarial layout (default: largest divisor <= sqrt p)");
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--format", f.format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  cmd->add_option("--count-broadcast", f.count_broadcast, "count bound/splitter broadcasts in the ledger")
      ->capture_default_str();
  cmd->add_flag("--serial", f.serial, "use the serial reference kernels");
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write output file " + path);
  file << text;
  if (!file) throw std::runtime_error("failed writing output file " + path);
}

std::string render_rows(const std::vector<histopart::ResultRow>& rows, const std::string& format,
                        const std::vector<nlohmann::json>* reports) {
  if (format == "json") {
    if (reports) return nlohmann::json(*reports).dump(2) + "\n";
    return histopart::rows_to_json(rows).dump(2) + "\n";
  }
  std::ostringstream csv;
  histopart::write_csv(csv, rows);
  return csv.str();
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << nlohmann::json{{"error", message}, {"kind", kind}}.dump() << std::endl;
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Histogram partitioning simulator: splitter selection, sorting, runs statistics"};
  app.require_subcommand(1);

  CommonFlags partition_flags, sort_flags, sweep_flags;
  auto* partition = app.add_subcommand("partition", "run a partitioner and report per-run results");
  add_experiment_flags(partition, partition_flags, "json");
  auto* sort = app.add_subcommand("sort", "partition, exchange keys and verify the global order");
  add_experiment_flags(sort, sort_flags, "csv");
  auto* sweep = app.add_subcommand("sweep", "result matrix over p list x trials");
  add_experiment_flags(sweep, sweep_flags, "csv");

  std::uint64_t m1 = 0, m2 = 0, k = 1, runs_trials = 10000, runs_seed = 1;
  std::string runs_out;
  auto* runsstats = app.add_subcommand("runsstats", "closed-form vs enumeration vs Monte Carlo runs statistics");
  runsstats->add_option("--m1", m1, "count of a's")->required();
  runsstats->add_option("--m2", m2, "count of b's")->required();
  runsstats->add_option("--k", k, "minimum run length")->required();
  runsstats->add_option("--trials", runs_trials, "Monte Carlo trials (0 skips)")->capture_default_str();
  runsstats->add_option("--seed", runs_seed, "Monte Carlo seed")->capture_default_str();
  runsstats->add_option("--out", runs_out, "output file (default stdout)");

  std::size_t audit_n = 0, audit_p = 64, audit_kpp = 64;
  std::optional<std::size_t> audit_c;
  std::uint64_t audit_seed = 1;
  std::string audit_format = "text", audit_out;
  auto* audit = app.add_subcommand("adversarial-audit", "structural audit of the adversarial layout");
  audit->add_option("--N", audit_n, "total keys (default p * keys-per-proc)");
  audit->add_option("--p", audit_p, "processor count")->capture_default_str();
  audit->add_option("--keys-per-proc", audit_kpp, "keys per processor when --N is absent")->capture_default_str();
  audit->add_option("--C", audit_c, "part count (default: largest divisor <= sqrt p)");
  audit->add_option("--seed", audit_seed, "layout seed")->capture_default_str();
  audit->add_option("--format", audit_format, "text | json")->check(CLI::IsMember({"text", "json"}))->capture_default_str();
  audit->add_option("--out", audit_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (partition->parsed() || sort->parsed() || sweep->parsed()) {
      const CommonFlags& flags = partition->parsed() ? partition_flags : sort->parsed() ? sort_flags : sweep_flags;
      ExperimentSpec spec;
      try {
        spec = flags.to_spec();
      } catch (const std::invalid_argument& e) {
        return fail("invalid_spec", e.what(), 2);
      }
      std::vector<nlohmann::json> reports;
      const bool want_reports = flags.format == "json" && !sweep->parsed();
      std::vector<histopart::ResultRow> rows;
      if (partition->parsed()) rows = histopart::cmd_partition(spec, want_reports ? &reports : nullptr);
      else if (sort->parsed()) rows = histopart::cmd_sort(spec, want_reports ? &reports : nullptr);
      else rows = histopart::cmd_sweep(spec);
      emit(flags.out, render_rows(rows, flags.format, want_reports ? &reports : nullptr));
      bool all_ok = true;
      for (const auto& r : rows) all_ok = all_ok && r.success && (!r.has_sort || r.globally_sorted);
      return all_ok || spec.algorithm == histopart::Algorithm::sample_sort ? 0 : 3;
    }
    if (runsstats->parsed()) {
      emit(runs_out, histopart::cmd_runsstats(m1, m2, k, runs_trials, runs_seed).dump(2) + "\n");
      return 0;
    }
    if (audit->parsed()) {
      const std::size_t n_keys = audit_n > 0 ? audit_n : audit_p * audit_kpp;
      const std::size_t parts = audit_c.value_or(histopart::default_adversarial_parts(audit_p));
      const auto report = histopart::cmd_adversarial_audit(n_keys, audit_p, parts, audit_seed);
      if (audit_format == "json") {
        emit(audit_out, report.to_json().dump(2) + "\n");
      } else {
        std::string text;
        for (const auto& line : report.lines) text += line + "\n";
        emit(audit_out, text);
      }
      return report.audit.passed() ? 0 : 3;
    }
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what(), 2);
  } catch (const std::domain_error& e) {
    return fail("domain_error", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("runtime_error", e.what(), 1);
  }
  return 0;
}
