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
#include <sstream>

#include "histopart/experiment.hpp"

using namespace histopart;

TEST_CASE("parsing names") {
  CHECK(parse_algorithm("histopart") == Algorithm::histopart);
  CHECK(parse_algorithm("hss_fixed") == Algorithm::hss_fixed);
  CHECK(parse_algorithm("sample_sort") == Algorithm::sample_sort);
  CHECK_THROWS_AS(parse_algorithm("quicksort"), std::invalid_argument);
  CHECK(parse_workload("skewed:zipf_gaps") == WorkloadKind::zipf_gaps);
  CHECK(parse_workload("sorted_blocks") == WorkloadKind::sorted_blocks);
  CHECK(parse_workload("adversarial") == WorkloadKind::adversarial);
  CHECK_THROWS_AS(parse_workload("skewed:other"), std::invalid_argument);
  CHECK(to_string(WorkloadKind::uniform) == "uniform");
}

TEST_CASE("spec validation") {
  ExperimentSpec spec;
  CHECK_NOTHROW(spec.validate());
  spec.p_list = {};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.p_list = {1};
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.epsilon = -1.0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.trials = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.workload = WorkloadKind::adversarial;
  spec.p_list = {64};
  spec.parts = 5;  // does not divide p
  CHECK_THROWS_AS(cmd_partition(spec), std::invalid_argument);
}

TEST_CASE("default sample sort size") {
  CHECK(default_sample_sort_size(1024) == static_cast<std::uint64_t>(std::ceil(3.0 * 1024 * std::log(1024.0))));
  CHECK(default_sample_sort_size(2) == 5);
}

TEST_CASE("sweep shape and determinism") {
  ExperimentSpec spec;
  spec.p_list = {16, 64};
  spec.trials = 3;
  spec.base_seed = 10;
  const auto a = cmd_sweep(spec);
  REQUIRE(a.size() == 6);
  CHECK(a[0].p == 16);
  CHECK(a[0].seed == 10);
  CHECK(a[2].seed == 12);
  CHECK(a[3].p == 64);
  CHECK(a[5].n_keys == 64 * 256);
  for (const auto& row : a) {
    CHECK(row.success);
    CHECK(row.balance_factor <= 2.0);
    CHECK(row.algorithm == "histopart");
  }

  std::ostringstream first, second;
  write_csv(first, a, false);
  write_csv(second, cmd_sweep(spec), false);
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind("algorithm,p,N,seed,rounds,total_sample_volume,balance_factor,success,max_h\n", 0) == 0);

  std::ostringstream timed;
  write_csv(timed, a);
  CHECK(timed.str().find("wall_time") != std::string::npos);
}

TEST_CASE("sort rows carry exchange columns") {
  ExperimentSpec spec;
  spec.p_list = {32};
  spec.keys_per_proc = 128;
  std::vector<nlohmann::json> reports;
  const auto rows = cmd_sort(spec, &reports);
  REQUIRE(rows.size() == 1);
  REQUIRE(reports.size() == 1);
  CHECK(rows[0].has_sort);
  CHECK(rows[0].globally_sorted);
  CHECK(rows[0].max_load <= 2 * 128);
  std::ostringstream out;
  write_csv(out, rows);
  CHECK(out.str().find("max_load,exchange_volume,globally_sorted") != std::string::npos);
  const auto j = rows_to_json(rows);
  CHECK(j.size() == 1);
  CHECK(j[0]["globally_sorted"] == true);
}

TEST_CASE("failed sample sort rows") {
  ExperimentSpec spec;
  spec.algorithm = Algorithm::sample_sort;
  spec.p_list = {1024};
  spec.sample_size = 1024;
  spec.trials = 2;
  const auto rows = cmd_partition(spec);
  for (const auto& row : rows) {
    if (!row.success) CHECK(std::isnan(row.balance_factor));
  }
  std::ostringstream out;
  write_csv(out, rows, false);
  if (!rows[0].success) CHECK(out.str().find(",nan,") != std::string::npos);
}

TEST_CASE("runsstats small case") {
  const auto j = cmd_runsstats(2, 1, 2, 20000, 3);
  CHECK(j["closed_form"]["expectation"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(j["closed_form"]["variance"].get<double>() == doctest::Approx(2.0 / 9.0));
  CHECK(j["closed_form"]["expectation_exact"] == "2/3");
  CHECK(j["closed_form"]["variance_exact"] == "2/9");
  CHECK(j["oracle"]["matches_closed_form"] == true);
  CHECK(j["monte_carlo"]["within_3se"] == true);

  const auto big = cmd_runsstats(900, 100, 5, 2000, 1);
  CHECK(big["oracle"].is_null());
  CHECK_THROWS_AS(cmd_runsstats(2, 1, 0, 10, 1), std::invalid_argument);
}

TEST_CASE("adversarial audit report") {
  const auto report = cmd_adversarial_audit(16, 4, 2, 7);
  CHECK(report.audit.passed());
  bool found = false;
  for (const auto& line : report.lines) found = found || line == "one subinterval per (processor, part): PASS";
  CHECK(found);
  CHECK(report.to_json()["passed"] == true);
  CHECK_THROWS_AS(cmd_adversarial_audit(16, 4, 3, 7), std::invalid_argument);
}
