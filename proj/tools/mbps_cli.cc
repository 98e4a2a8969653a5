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

// mbps: workload generation, benchmark sweeps, one-shot scheduling with
// debug dumps, and report rendering.
//
// Exit codes: 0 success, 1 configuration error, 2 invariant violation.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbps/bench.h"
#include "mbps/binning.h"
#include "mbps/executor.h"
#include "mbps/scheduler.h"
#include "mbps/workload.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes to `path`, or stdout when empty.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

struct GenArgs {
  mbps::WorkloadSpec spec;
  std::string out;
};

int run_gen(const GenArgs& args) {
  std::vector<mbps::Transaction> txns = mbps::generate_workload(args.spec);
  Output out(args.out);
  out.stream() << mbps::workload_to_json(txns) << '\n';
  mbps::ConflictParams cp = mbps::compute_conflict_params(txns);
  std::fprintf(stderr, "generated %zu transactions: cp1=%.2f cp2=%.2f cp3=%.2f\n",
               txns.size(), cp.cp1, cp.cp2, cp.cp3);
  return kExitOk;
}

struct RunArgs {
  std::string config_file;
  std::string experiment;
  // Flag name -> raw value, applied after the config file and the
  // environment.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string out;
  bool no_check = false;
};

int run_bench(const RunArgs& args) {
  mbps::BenchConfig config;
  if (!args.experiment.empty()) {
    auto e = mbps::parse_experiment(args.experiment);
    if (!e) throw std::invalid_argument("unknown experiment '" + args.experiment + "'");
    config = mbps::BenchConfig::defaults_for(*e);
  }
  if (!args.config_file.empty()) {
    config = mbps::parse_bench_config(read_file(args.config_file), config);
  }
  config.watchdog = mbps::watchdog_from_env(config.watchdog);
  for (const auto& [key, value] : args.overrides) {
    if (!value.empty()) mbps::set_bench_option(config, key, value);
  }
  if (args.no_check) config.check = false;
  config.validate();

  Output out(args.out);
  out.stream() << mbps::kCsvHeader << '\n' << std::flush;
  bool violation = false;
  mbps::run_benchmark(config, [&](const mbps::BenchRow& row) {
    out.stream() << mbps::format_csv_row(row) << '\n' << std::flush;
    if (row.flags == mbps::kInvariantViolation) violation = true;
  });
  return violation ? kExitInvariant : kExitOk;
}

struct ScheduleArgs {
  std::string workload;
  mbps::WorkloadSpec spec;
  std::string variant = "LOCKFREE";
  std::size_t threads = 8;
  double delayed_pct = 0;
  double delay_ms = 5;
  double crashed_pct = 0;
  std::string crash_point = "PHASE1_PRE_PUBLISH";
  std::uint64_t fault_seed = 7;
  double per_txn_work_ms = 0;
  bool dump_conflicts = false;
  bool dump_bins = false;
  bool dump_state = false;
};

int run_schedule(const ScheduleArgs& args) {
  auto variant = mbps::parse_variant(args.variant);
  if (!variant) throw std::invalid_argument("unknown variant '" + args.variant + "'");
  auto crash_point = mbps::parse_crash_point(args.crash_point);
  if (!crash_point) throw std::invalid_argument("unknown crash point '" + args.crash_point + "'");

  std::vector<mbps::Transaction> txns = args.workload.empty()
                                            ? mbps::generate_workload(args.spec)
                                            : mbps::read_workload_file(args.workload);
  mbps::FaultPlan faults = mbps::make_fault_plan(
      args.threads, args.delayed_pct,
      std::chrono::microseconds(std::llround(args.delay_ms * 1000.0)), args.crashed_pct,
      *crash_point, args.fault_seed);
  mbps::ScheduleOptions options;
  options.watchdog = mbps::watchdog_from_env(options.watchdog);

  mbps::ScheduleResult result = mbps::schedule(txns, *variant, args.threads, faults, options);

  nlohmann::json summary{{"variant", args.variant},
                         {"n_txns", txns.size()},
                         {"threads", args.threads},
                         {"crashed_workers", result.crashed_workers()}};
  if (!result.completed()) {
    summary["status"] = "NON_TERMINATION";
    std::cout << summary.dump(2) << '\n';
    return kExitOk;
  }
  summary["status"] = "COMPLETED";
  summary["num_bins"] = result.plan.num_bins;
  summary["phase1_s"] = result.timing.phase1.count();
  summary["phase2_s"] = result.timing.phase2.count();
  summary["cas_retries"] = result.cas_retries();
  summary["not_ready_skips"] = result.not_ready_skips();
  summary["total_s"] = result.timing.total.count();
  nlohmann::json workers = nlohmann::json::array();
  for (const mbps::WorkerReport& w : result.workers) {
    workers.push_back({{"claims", w.stats.claims},
                       {"publications", w.stats.publications},
                       {"lost_publications", w.stats.lost_publications},
                       {"sweeps", w.stats.sweeps},
                       {"crashed", w.crashed}});
  }
  summary["workers"] = workers;

  bool ok = result.assignment->initial_bins() == mbps::bin_oracle(txns);
  if (args.dump_conflicts) {
    summary["conflicts"] = result.conflicts->snapshot();
  }
  if (args.dump_bins) {
    summary["bins"] = result.plan.bin_matrix;
    summary["initial_bin"] = result.assignment->initial_bins();
  }
  mbps::WalletState initial = mbps::initial_state_for(txns);
  mbps::WalletState state = mbps::execute_plan(
      result.plan, txns, initial, std::max<std::size_t>(args.threads - result.crashed_workers(), 1),
      std::chrono::microseconds(std::llround(args.per_txn_work_ms * 1000.0)));
  ok = ok && state == mbps::execute_serial(txns, initial);
  if (args.dump_state) {
    nlohmann::json balances = nlohmann::json::object();
    for (const auto& [address, balance] : state.balances) balances[address.str()] = balance;
    summary["state"] = balances;
  }
  summary["matches_oracle"] = ok;
  std::cout << summary.dump(2) << '\n';
  return ok ? kExitOk : kExitInvariant;
}

struct ReportArgs {
  std::string input;
  std::string format = "csv";
  std::string out;
};

int run_report(const ReportArgs& args) {
  auto format = mbps::parse_report_format(args.format);
  if (!format) throw std::invalid_argument("unknown format '" + args.format + "'");
  std::vector<mbps::BenchRow> rows = mbps::parse_csv(read_file(args.input));
  Output out(args.out);
  out.stream() << mbps::report(rows, *format);
  return kExitOk;
}

void add_workload_flags(CLI::App* cmd, mbps::WorkloadSpec& spec) {
  cmd->add_option("-n,--n-txns", spec.n_txns, "Transactions in the block");
  cmd->add_option("--dependency-pct", spec.dependency_pct, "Percent of hot-pool transactions")
      ->check(CLI::Range(0.0, 100.0));
  cmd->add_option("--accounts", spec.n_accounts, "Upper bound on the hot account pool");
  cmd->add_option("--amount-min", spec.amount_min, "Smallest transfer amount");
  cmd->add_option("--amount-max", spec.amount_max, "Largest transfer amount");
  cmd->add_option("--seed", spec.seed, "Workload seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-bin parallel scheduler: workloads, benchmarks and reports"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic workload file");
  add_workload_flags(gen_cmd, gen.spec);
  gen_cmd->add_option("-o,--out", gen.out, "Output file (default stdout)");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a benchmark sweep, one CSV row per run");
  run_cmd->add_option("--config", run.config_file, "key = value config file");
  run_cmd->add_option("--experiment", run.experiment, "BASELINE, LATENCY or CRASH");
  // Sweep flags are kept as raw strings and applied through the same
  // parser as the config file.
  static const char* kSweepKeys[] = {
      "n_txns",     "dependency_pct",  "schedulers",  "threads",   "delayed_pct",
      "delay_ms",   "crashed_pct",     "crash_point", "fault_seed", "repetitions",
      "per_txn_work_ms", "n_accounts", "seed",        "watchdog_secs"};
  run.overrides.reserve(std::size(kSweepKeys));
  for (const char* key : kSweepKeys) {
    run.overrides.emplace_back(key, "");
    std::string flag = "--" + std::string(key);
    for (char& c : flag) {
      if (c == '_') c = '-';
    }
    run_cmd->add_option(flag, run.overrides.back().second, std::string("Overrides ") + key);
  }
  run_cmd->add_flag("--no-check", run.no_check, "Skip oracle comparison");
  run_cmd->add_option("-o,--out", run.out, "CSV output file (default stdout)");

  ScheduleArgs sched;
  sched.spec.n_txns = 600;
  sched.spec.dependency_pct = 40;
  auto* sched_cmd = app.add_subcommand("schedule", "Schedule and execute one block");
  sched_cmd->add_option("--workload", sched.workload, "Workload JSON file (else generated)");
  add_workload_flags(sched_cmd, sched.spec);
  sched_cmd->add_option("--variant", sched.variant, "STANDARD, ASSISTED or LOCKFREE");
  sched_cmd->add_option("--threads", sched.threads, "Worker count");
  sched_cmd->add_option("--delayed-pct", sched.delayed_pct, "Percent of delayed workers");
  sched_cmd->add_option("--delay-ms", sched.delay_ms, "Delay per claim");
  sched_cmd->add_option("--crashed-pct", sched.crashed_pct, "Percent of crashed workers");
  sched_cmd->add_option("--crash-point", sched.crash_point, "Where crashed workers stop");
  sched_cmd->add_option("--fault-seed", sched.fault_seed, "Seed for fault selection");
  sched_cmd->add_option("--per-txn-work-ms", sched.per_txn_work_ms, "Simulated work per transaction");
  sched_cmd->add_flag("--dump-conflicts", sched.dump_conflicts, "Include the conflict table");
  sched_cmd->add_flag("--dump-bins", sched.dump_bins, "Include bins and initial_bin");
  sched_cmd->add_flag("--dump-state", sched.dump_state, "Include the final balances");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Aggregate benchmark rows into medians");
  report_cmd->add_option("input", rep.input, "CSV produced by `run`")->required();
  report_cmd->add_option("--format", rep.format, "csv, json or gnuplot");
  report_cmd->add_option("-o,--out", rep.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) return run_gen(gen);
    if (run_cmd->parsed()) return run_bench(run);
    if (sched_cmd->parsed()) return run_schedule(sched);
    if (report_cmd->parsed()) return run_report(rep);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
