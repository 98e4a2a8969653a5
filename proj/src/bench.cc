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

#include "mbps/bench.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "mbps/binning.h"
#include "mbps/executor.h"
#include "mbps/workload.h"

namespace mbps {

namespace {

using Seconds = std::chrono::duration<double>;
using Clock = std::chrono::steady_clock;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    // from_chars has no "nan"/"inf" spelling for output we produce ourselves.
    if constexpr (std::is_floating_point_v<T>) {
      if (text == "nan") return std::numeric_limits<T>::quiet_NaN();
    }
    throw std::invalid_argument("bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view what) {
  std::vector<T> out;
  for (std::string_view item : split(text, ',')) out.push_back(parse_number<T>(item, what));
  if (out.empty()) throw std::invalid_argument("empty list for " + std::string(what));
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2.0;
}

double throughput(std::size_t n, double secs) {
  return secs > 0.0 ? static_cast<double>(n) / secs : 0.0;
}

std::optional<Variant> variant_of(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kSerial:
      return std::nullopt;
    case SchedulerKind::kStandard:
      return Variant::kStandard;
    case SchedulerKind::kAssisted:
      return Variant::kAssisted;
    case SchedulerKind::kLockfree:
      return Variant::kLockfree;
  }
  return std::nullopt;
}

struct SweepPoint {
  std::size_t n_txns;
  double dependency_pct;
  double delayed_pct;
  double crashed_pct;
};

BenchRow measure(const BenchConfig& config, const SweepPoint& point,
                 SchedulerKind kind, std::size_t rep,
                 std::span<const Transaction> txns, const ConflictParams& cp,
                 std::uint64_t workload_seed) {
  BenchRow row;
  row.scheduler = std::string(to_string(kind));
  row.n_txns = point.n_txns;
  row.dependency_pct = point.dependency_pct;
  row.cp1 = cp.cp1;
  row.cp2 = cp.cp2;
  row.cp3 = cp.cp3;
  row.num_threads = kind == SchedulerKind::kSerial ? 1 : config.num_threads;
  row.delayed_pct = point.delayed_pct;
  row.crashed_pct = point.crashed_pct;
  row.seed = workload_seed;
  row.rep = rep;

  const WalletState initial = initial_state_for(txns);
  std::optional<Variant> variant = variant_of(kind);

  if (!variant) {
    auto t0 = Clock::now();
    WalletState out = execute_serial(txns, initial, config.per_txn_work);
    row.exec_time_s = Seconds(Clock::now() - t0).count();
    row.exec_stage_s = row.exec_time_s;
    row.throughput_tps = throughput(row.n_txns, row.exec_time_s);
    if (config.check && out.total() != initial.total()) {
      row.flags = std::string(kInvariantViolation);
    }
    return row;
  }

  FaultPlan faults = make_fault_plan(config.num_threads, point.delayed_pct, config.delay,
                                     point.crashed_pct, config.crash_point,
                                     config.fault_seed + rep);
  ScheduleOptions options;
  options.watchdog = config.watchdog;
  options.allow_crash_on_barrier_variant = true;

  auto t0 = Clock::now();
  ScheduleResult sched = schedule(txns, *variant, config.num_threads, faults, options);
  if (!sched.completed()) {
    row.exec_time_s = Seconds(config.watchdog).count();
    row.throughput_tps = throughput(row.n_txns, row.exec_time_s);
    row.flags = std::string(kNonTermination);
    return row;
  }
  auto t1 = Clock::now();
  // Crashed workers stay dead for the execution stage too.
  std::size_t live = std::max<std::size_t>(config.num_threads - sched.crashed_workers(), 1);
  WalletState out = execute_plan(sched.plan, txns, initial, live, config.per_txn_work);
  auto t2 = Clock::now();

  row.exec_time_s = Seconds(t2 - t0).count();
  row.exec_stage_s = Seconds(t2 - t1).count();
  row.phase1_s = sched.timing.phase1.count();
  row.phase2_s = sched.timing.phase2.count();
  row.num_bins = sched.plan.num_bins;
  row.throughput_tps = throughput(row.n_txns, row.exec_time_s);

  if (config.check) {
    bool ok = sched.assignment->initial_bins() == bin_oracle(txns) &&
              out == execute_serial(txns, initial) && out.total() == initial.total();
    if (!ok) row.flags = std::string(kInvariantViolation);
  }
  return row;
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::kBaseline:
      return "BASELINE";
    case Experiment::kLatency:
      return "LATENCY";
    case Experiment::kCrash:
      return "CRASH";
  }
  return "?";
}

std::string_view to_string(SchedulerKind s) {
  switch (s) {
    case SchedulerKind::kSerial:
      return "SERIAL";
    case SchedulerKind::kStandard:
      return "STANDARD";
    case SchedulerKind::kAssisted:
      return "ASSISTED";
    case SchedulerKind::kLockfree:
      return "LOCKFREE";
  }
  return "?";
}

std::optional<Experiment> parse_experiment(std::string_view text) {
  for (Experiment e : {Experiment::kBaseline, Experiment::kLatency, Experiment::kCrash}) {
    if (text == to_string(e)) return e;
  }
  return std::nullopt;
}

std::optional<SchedulerKind> parse_scheduler(std::string_view text) {
  for (SchedulerKind s : {SchedulerKind::kSerial, SchedulerKind::kStandard,
                          SchedulerKind::kAssisted, SchedulerKind::kLockfree}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

BenchConfig BenchConfig::defaults_for(Experiment e) {
  BenchConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::kBaseline:
      c.dependency_pct = {40.0};
      break;
    case Experiment::kLatency:
      c.n_txns = {600};
      c.dependency_pct = {40.0};
      c.delayed_pct = {0.0, 20.0, 40.0, 60.0, 80.0};
      break;
    case Experiment::kCrash:
      c.n_txns = {600};
      c.dependency_pct = {40.0};
      c.crashed_pct = {0.0, 20.0, 40.0, 60.0, 80.0, 99.0};
      c.schedulers = {SchedulerKind::kLockfree};
      break;
  }
  return c;
}

void BenchConfig::validate() const {
  if (num_threads == 0) throw std::invalid_argument("threads must be >= 1");
  if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");
  if (n_txns.empty() || dependency_pct.empty() || schedulers.empty() ||
      delayed_pct.empty() || crashed_pct.empty()) {
    throw std::invalid_argument("every sweep axis needs at least one value");
  }
  if (per_txn_work.count() < 0 || delay.count() < 0) {
    throw std::invalid_argument("durations must be non-negative");
  }
  if (watchdog.count() <= 0) throw std::invalid_argument("watchdog must be positive");
  for (double d : dependency_pct) {
    WorkloadSpec{.n_txns = 0, .n_accounts = n_accounts, .dependency_pct = d}.validate();
  }
  bool any_crash = std::any_of(crashed_pct.begin(), crashed_pct.end(),
                               [](double p) { return p != 0.0; });
  bool any_delay = std::any_of(delayed_pct.begin(), delayed_pct.end(),
                               [](double p) { return p != 0.0; });
  switch (experiment) {
    case Experiment::kBaseline:
      if (any_crash || any_delay) {
        throw std::invalid_argument("BASELINE runs without delayed or crashed workers");
      }
      break;
    case Experiment::kLatency:
      if (any_crash) throw std::invalid_argument("LATENCY runs without crashed workers");
      break;
    case Experiment::kCrash:
      for (SchedulerKind s : schedulers) {
        if (s != SchedulerKind::kSerial && s != SchedulerKind::kLockfree) {
          throw std::invalid_argument("CRASH experiment only runs SERIAL and LOCKFREE");
        }
      }
      break;
  }
  // Surface impossible fault selections before the first row.
  for (double d : delayed_pct) {
    for (double c : crashed_pct) {
      make_fault_plan(num_threads, d, delay, c, crash_point, fault_seed);
    }
  }
}

std::size_t BenchConfig::expected_rows() const {
  return n_txns.size() * dependency_pct.size() * delayed_pct.size() * crashed_pct.size() *
         schedulers.size() * repetitions;
}

void set_bench_option(BenchConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "experiment") {
    auto e = parse_experiment(value);
    if (!e) throw std::invalid_argument("unknown experiment '" + std::string(value) + "'");
    c.experiment = *e;
  } else if (key == "n_txns") {
    c.n_txns = parse_list<std::size_t>(value, key);
  } else if (key == "dependency_pct") {
    c.dependency_pct = parse_list<double>(value, key);
  } else if (key == "schedulers") {
    c.schedulers.clear();
    for (std::string_view item : split(value, ',')) {
      auto s = parse_scheduler(trim(item));
      if (!s) throw std::invalid_argument("unknown scheduler '" + std::string(item) + "'");
      c.schedulers.push_back(*s);
    }
  } else if (key == "threads") {
    c.num_threads = parse_number<std::size_t>(value, key);
  } else if (key == "delayed_pct") {
    c.delayed_pct = parse_list<double>(value, key);
  } else if (key == "delay_ms") {
    c.delay = std::chrono::microseconds(
        std::llround(parse_number<double>(value, key) * 1000.0));
  } else if (key == "crashed_pct") {
    c.crashed_pct = parse_list<double>(value, key);
  } else if (key == "crash_point") {
    auto p = parse_crash_point(value);
    if (!p) throw std::invalid_argument("unknown crash point '" + std::string(value) + "'");
    c.crash_point = *p;
  } else if (key == "repetitions") {
    c.repetitions = parse_number<std::size_t>(value, key);
  } else if (key == "per_txn_work_ms") {
    c.per_txn_work = std::chrono::microseconds(
        std::llround(parse_number<double>(value, key) * 1000.0));
  } else if (key == "n_accounts") {
    c.n_accounts = parse_number<std::size_t>(value, key);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(value, key);
  } else if (key == "fault_seed") {
    c.fault_seed = parse_number<std::uint64_t>(value, key);
  } else if (key == "watchdog_secs") {
    c.watchdog = std::chrono::milliseconds(
        std::llround(parse_number<double>(value, key) * 1000.0));
  } else if (key == "check") {
    if (value == "true" || value == "1") {
      c.check = true;
    } else if (value == "false" || value == "0") {
      c.check = false;
    } else {
      throw std::invalid_argument("check must be true or false");
    }
  } else {
    throw std::invalid_argument("unknown option '" + std::string(key) + "'");
  }
}

BenchConfig parse_bench_config(std::string_view text, BenchConfig base) {
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_bench_option(base, line.substr(0, eq), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::vector<BenchRow> run_benchmark(const BenchConfig& config, const RowSink& sink) {
  config.validate();
  std::vector<BenchRow> rows;
  rows.reserve(config.expected_rows());
  for (std::size_t n : config.n_txns) {
    for (double dep : config.dependency_pct) {
      for (double delayed : config.delayed_pct) {
        for (double crashed : config.crashed_pct) {
          SweepPoint point{n, dep, delayed, crashed};
          for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            WorkloadSpec spec{.n_txns = n,
                              .n_accounts = config.n_accounts,
                              .dependency_pct = dep,
                              .seed = config.seed + rep};
            std::vector<Transaction> txns = generate_workload(spec);
            ConflictParams cp = compute_conflict_params(txns);
            for (SchedulerKind kind : config.schedulers) {
              rows.push_back(measure(config, point, kind, rep, txns, cp, spec.seed));
              if (sink) sink(rows.back());
            }
          }
        }
      }
    }
  }
  return rows;
}

std::string format_csv_row(const BenchRow& r) {
  std::ostringstream out;
  out << r.scheduler << ',' << r.n_txns << ',' << format_double(r.dependency_pct) << ','
      << format_double(r.cp1) << ',' << format_double(r.cp2) << ','
      << format_double(r.cp3) << ',' << r.num_threads << ','
      << format_double(r.delayed_pct) << ',' << format_double(r.crashed_pct) << ','
      << format_double(r.exec_time_s) << ',' << format_double(r.throughput_tps) << ','
      << r.num_bins << ',' << format_double(r.phase1_s) << ','
      << format_double(r.phase2_s) << ',' << format_double(r.exec_stage_s) << ','
      << r.seed << ',' << r.rep << ',' << r.flags;
  return out.str();
}

std::string to_csv(std::span<const BenchRow> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const BenchRow& r : rows) {
    out += format_csv_row(r);
    out += '\n';
  }
  return out;
}

std::vector<BenchRow> parse_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (lines.empty() || trim(lines[0]) != kCsvHeader) {
    throw std::invalid_argument("CSV header does not match");
  }
  std::vector<BenchRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    std::string_view line = lines[li];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    std::vector<std::string_view> f = split(line, ',');
    if (f.size() != 18) {
      throw std::invalid_argument("CSV line " + std::to_string(li + 1) + ": expected 18 fields");
    }
    BenchRow r;
    r.scheduler = std::string(f[0]);
    r.n_txns = parse_number<std::size_t>(f[1], "n_txns");
    r.dependency_pct = parse_number<double>(f[2], "dependency_pct");
    r.cp1 = parse_number<double>(f[3], "cp1");
    r.cp2 = parse_number<double>(f[4], "cp2");
    r.cp3 = parse_number<double>(f[5], "cp3");
    r.num_threads = parse_number<std::size_t>(f[6], "num_threads");
    r.delayed_pct = parse_number<double>(f[7], "delayed_pct");
    r.crashed_pct = parse_number<double>(f[8], "crashed_pct");
    r.exec_time_s = parse_number<double>(f[9], "exec_time_s");
    r.throughput_tps = parse_number<double>(f[10], "throughput_tps");
    r.num_bins = parse_number<std::size_t>(f[11], "num_bins");
    r.phase1_s = parse_number<double>(f[12], "phase1_s");
    r.phase2_s = parse_number<double>(f[13], "phase2_s");
    r.exec_stage_s = parse_number<double>(f[14], "exec_stage_s");
    r.seed = parse_number<std::uint64_t>(f[15], "seed");
    r.rep = parse_number<std::size_t>(f[16], "rep");
    r.flags = std::string(f[17]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "gnuplot") return ReportFormat::kGnuplot;
  return std::nullopt;
}

std::vector<BenchRow> aggregate(std::span<const BenchRow> rows) {
  using Key = std::tuple<std::string, std::size_t, double, std::size_t, double, double>;
  std::vector<std::string> scheduler_order;
  std::vector<Key> key_order;
  std::map<Key, std::vector<const BenchRow*>> groups;
  for (const BenchRow& r : rows) {
    Key key{r.scheduler, r.n_txns, r.dependency_pct, r.num_threads, r.delayed_pct, r.crashed_pct};
    if (std::find(scheduler_order.begin(), scheduler_order.end(), r.scheduler) ==
        scheduler_order.end()) {
      scheduler_order.push_back(r.scheduler);
    }
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) key_order.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<BenchRow> out;
  for (const std::string& scheduler : scheduler_order) {
    for (const Key& key : key_order) {
      if (std::get<0>(key) != scheduler) continue;
      const auto& members = groups.at(key);
      std::vector<const BenchRow*> good;
      std::map<std::string, std::size_t> flagged;
      for (const BenchRow* r : members) {
        if (r->flags.empty()) {
          good.push_back(r);
        } else {
          ++flagged[r->flags];
        }
      }
      auto med = [&](double BenchRow::*field) {
        std::vector<double> v;
        for (const BenchRow* r : good) v.push_back(r->*field);
        return median(std::move(v));
      };
      BenchRow agg = *members.front();
      agg.cp1 = med(&BenchRow::cp1);
      agg.cp2 = med(&BenchRow::cp2);
      agg.cp3 = med(&BenchRow::cp3);
      agg.exec_time_s = med(&BenchRow::exec_time_s);
      agg.throughput_tps = good.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : throughput(agg.n_txns, agg.exec_time_s);
      agg.phase1_s = med(&BenchRow::phase1_s);
      agg.phase2_s = med(&BenchRow::phase2_s);
      agg.exec_stage_s = med(&BenchRow::exec_stage_s);
      std::vector<double> bins;
      for (const BenchRow* r : good) bins.push_back(static_cast<double>(r->num_bins));
      agg.num_bins = good.empty() ? 0 : static_cast<std::size_t>(std::llround(median(bins)));
      agg.rep = good.size();
      agg.flags.clear();
      for (const auto& [flag, count] : flagged) {
        if (!agg.flags.empty()) agg.flags += ';';
        agg.flags += flag + "=" + std::to_string(count) + "/" + std::to_string(members.size());
      }
      out.push_back(std::move(agg));
    }
  }
  return out;
}

std::string report(std::span<const BenchRow> rows, ReportFormat format) {
  if (rows.empty()) throw std::invalid_argument("no rows to report");
  std::vector<BenchRow> agg = aggregate(rows);
  switch (format) {
    case ReportFormat::kCsv:
      return to_csv(agg);
    case ReportFormat::kJson: {
      nlohmann::json arr = nlohmann::json::array();
      for (const BenchRow& r : agg) {
        arr.push_back({{"scheduler", r.scheduler},
                       {"n_txns", r.n_txns},
                       {"dependency_pct", r.dependency_pct},
                       {"cp1", r.cp1},
                       {"cp2", r.cp2},
                       {"cp3", r.cp3},
                       {"num_threads", r.num_threads},
                       {"delayed_pct", r.delayed_pct},
                       {"crashed_pct", r.crashed_pct},
                       {"exec_time_s", r.exec_time_s},
                       {"throughput_tps", r.throughput_tps},
                       {"num_bins", r.num_bins},
                       {"phase1_s", r.phase1_s},
                       {"phase2_s", r.phase2_s},
                       {"exec_stage_s", r.exec_stage_s},
                       {"seed", r.seed},
                       {"rep", r.rep},
                       {"flags", r.flags}});
      }
      return arr.dump(2) + "\n";
    }
    case ReportFormat::kGnuplot: {
      // One data block per scheduler; select with `index N` in gnuplot.
      std::ostringstream out;
      std::string current;
      for (const BenchRow& r : agg) {
        if (r.scheduler != current) {
          if (!current.empty()) out << "\n\n";
          current = r.scheduler;
          out << "# " << current << "\n"
              << "# n_txns dependency_pct delayed_pct crashed_pct exec_time_s "
                 "throughput_tps num_bins flags\n";
        }
        out << r.n_txns << ' ' << format_double(r.dependency_pct) << ' '
            << format_double(r.delayed_pct) << ' ' << format_double(r.crashed_pct) << ' '
            << format_double(r.exec_time_s) << ' ' << format_double(r.throughput_tps) << ' '
            << r.num_bins << ' ' << (r.flags.empty() ? "-" : r.flags) << '\n';
      }
      return out.str();
    }
  }
  return {};
}

}  // namespace mbps
