// Copyright 2026 The MBPS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark sweeps (baseline, latency, crash) and report rendering.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mbps/faults.h"
#include "mbps/scheduler.h"

namespace mbps {

enum class Experiment { kBaseline, kLatency, kCrash };
enum class SchedulerKind { kSerial, kStandard, kAssisted, kLockfree };

std::string_view to_string(Experiment e);
std::string_view to_string(SchedulerKind s);
std::optional<Experiment> parse_experiment(std::string_view text);
std::optional<SchedulerKind> parse_scheduler(std::string_view text);

struct BenchConfig {
  Experiment experiment = Experiment::kBaseline;
  std::vector<std::size_t> n_txns{200, 400, 600, 800, 1000, 1200};
  std::vector<double> dependency_pct{20.0};
  std::vector<SchedulerKind> schedulers{SchedulerKind::kSerial, SchedulerKind::kStandard,
                                        SchedulerKind::kAssisted, SchedulerKind::kLockfree};
  std::size_t num_threads = 8;
  std::vector<double> delayed_pct{0.0};
  std::chrono::microseconds delay{5000};
  std::vector<double> crashed_pct{0.0};
  CrashPoint crash_point = CrashPoint::kPhase1PrePublish;
  std::size_t repetitions = 5;
  std::chrono::microseconds per_txn_work{1000};
  std::size_t n_accounts = 1000;
  std::uint64_t seed = 1;
  std::uint64_t fault_seed = 7;
  std::chrono::milliseconds watchdog{30'000};
  // Compare every run against the serial oracle and the bin oracle.
  bool check = true;

  // Sweep defaults matching each experiment family.
  static BenchConfig defaults_for(Experiment e);

  // Throws std::invalid_argument.
  void validate() const;

  std::size_t expected_rows() const;
};

// Applies `key = value` lines (comments start with '#') on top of `base`.
// List values are comma separated. Throws std::invalid_argument naming the
// offending line.
BenchConfig parse_bench_config(std::string_view text, BenchConfig base);

// Applies one key/value pair; shared by the config file and the CLI flags.
void set_bench_option(BenchConfig& config, std::string_view key, std::string_view value);

struct BenchRow {
  std::string scheduler;
  std::size_t n_txns = 0;
  double dependency_pct = 0;
  double cp1 = 0;
  double cp2 = 0;
  double cp3 = 0;
  std::size_t num_threads = 0;
  double delayed_pct = 0;
  double crashed_pct = 0;
  double exec_time_s = 0;
  double throughput_tps = 0;
  std::size_t num_bins = 0;
  double phase1_s = 0;
  double phase2_s = 0;
  double exec_stage_s = 0;
  std::uint64_t seed = 0;
  std::size_t rep = 0;
  std::string flags;  // empty, NON_TERMINATION, INVARIANT_VIOLATION

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

inline constexpr std::string_view kNonTermination = "NON_TERMINATION";
inline constexpr std::string_view kInvariantViolation = "INVARIANT_VIOLATION";

inline constexpr std::string_view kCsvHeader =
    "scheduler,n_txns,dependency_pct,cp1,cp2,cp3,num_threads,delayed_pct,"
    "crashed_pct,exec_time_s,throughput_tps,num_bins,phase1_s,phase2_s,"
    "exec_stage_s,seed,rep,flags";

using RowSink = std::function<void(const BenchRow&)>;

// Runs every sweep point x scheduler x repetition in order, handing each
// row to `sink` as soon as it is measured. Failed runs still yield a row.
std::vector<BenchRow> run_benchmark(const BenchConfig& config, const RowSink& sink = {});

std::string format_csv_row(const BenchRow& row);
std::string to_csv(std::span<const BenchRow> rows);
// Expects the exact header on the first line.
std::vector<BenchRow> parse_csv(std::string_view text);

enum class ReportFormat { kCsv, kJson, kGnuplot };
std::optional<ReportFormat> parse_report_format(std::string_view text);

// Median per (scheduler, n_txns, dependency_pct, num_threads, delayed_pct,
// crashed_pct). Flagged rows are left out of the medians and counted in
// the aggregate's flags ("NON_TERMINATION=2/5"); `rep` holds the number of
// rows that went into the medians and throughput is n_txns over the median
// time. Series are grouped by scheduler in first-seen order.
std::vector<BenchRow> aggregate(std::span<const BenchRow> rows);

// Throws std::invalid_argument on empty input.
std::string report(std::span<const BenchRow> rows, ReportFormat format);

}  // namespace mbps
