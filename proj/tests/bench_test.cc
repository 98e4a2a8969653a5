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

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>
#include <json.hpp>

namespace mbps {
namespace {

using namespace std::chrono_literals;

BenchConfig tiny(Experiment e) {
  BenchConfig c = BenchConfig::defaults_for(e);
  c.n_txns = {40};
  c.repetitions = 2;
  c.per_txn_work = 0us;
  c.delay = 100us;
  c.num_threads = 4;
  return c;
}

BenchRow row(std::string scheduler, double exec, std::string flags = {}) {
  BenchRow r;
  r.scheduler = std::move(scheduler);
  r.n_txns = 100;
  r.dependency_pct = 40;
  r.num_threads = 8;
  r.exec_time_s = exec;
  r.throughput_tps = 100 / exec;
  r.flags = std::move(flags);
  return r;
}

TEST(BenchConfigTest, ParsesKeyValueText) {
  BenchConfig c = parse_bench_config(R"(
    # comment line
    experiment = LATENCY
    n_txns = 100, 200   # trailing comment
    dependency_pct = 10,40
    schedulers = SERIAL,LOCKFREE
    threads = 6
    delayed_pct = 0,50
    delay_ms = 2.5
    repetitions = 3
    per_txn_work_ms = 0
    crash_point = INTER_PHASE
    watchdog_secs = 1.5
    check = false
  )", BenchConfig{});
  EXPECT_EQ(c.experiment, Experiment::kLatency);
  EXPECT_EQ(c.n_txns, (std::vector<std::size_t>{100, 200}));
  EXPECT_EQ(c.dependency_pct, (std::vector<double>{10, 40}));
  EXPECT_EQ(c.schedulers, (std::vector<SchedulerKind>{SchedulerKind::kSerial,
                                                       SchedulerKind::kLockfree}));
  EXPECT_EQ(c.num_threads, 6u);
  EXPECT_EQ(c.delay, 2500us);
  EXPECT_EQ(c.crash_point, CrashPoint::kInterPhase);
  EXPECT_EQ(c.watchdog, 1500ms);
  EXPECT_FALSE(c.check);
  EXPECT_EQ(c.expected_rows(), 2u * 2u * 2u * 1u * 2u * 3u);
}

TEST(BenchConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse_bench_config("threads 4", {}), std::invalid_argument);
  EXPECT_THROW(parse_bench_config("colour = blue", {}), std::invalid_argument);
  EXPECT_THROW(parse_bench_config("n_txns = 10,x", {}), std::invalid_argument);
  EXPECT_THROW(parse_bench_config("schedulers = FAST", {}), std::invalid_argument);
  EXPECT_THROW(parse_bench_config("check = maybe", {}), std::invalid_argument);
}

TEST(BenchConfigTest, ExperimentRules) {
  BenchConfig base = tiny(Experiment::kBaseline);
  EXPECT_NO_THROW(base.validate());
  base.delayed_pct = {20};
  EXPECT_THROW(base.validate(), std::invalid_argument);

  BenchConfig latency = tiny(Experiment::kLatency);
  EXPECT_NO_THROW(latency.validate());
  latency.crashed_pct = {20};
  EXPECT_THROW(latency.validate(), std::invalid_argument);

  BenchConfig crash = tiny(Experiment::kCrash);
  EXPECT_NO_THROW(crash.validate());
  crash.schedulers = {SchedulerKind::kAssisted};
  EXPECT_THROW(crash.validate(), std::invalid_argument);

  BenchConfig zero = tiny(Experiment::kBaseline);
  zero.repetitions = 0;
  EXPECT_THROW(zero.validate(), std::invalid_argument);
}

TEST(RunBenchmarkTest, BaselineRowsAreCompleteAndClean) {
  BenchConfig c = tiny(Experiment::kBaseline);
  std::size_t streamed = 0;
  auto rows = run_benchmark(c, [&](const BenchRow&) { ++streamed; });
  ASSERT_EQ(rows.size(), c.expected_rows());
  EXPECT_EQ(streamed, rows.size());
  for (const BenchRow& r : rows) {
    EXPECT_TRUE(r.flags.empty()) << r.scheduler;
    EXPECT_EQ(r.cp1 + r.cp3, 100.0);
    EXPECT_EQ(r.seed, c.seed + r.rep);
    if (r.scheduler == "SERIAL") {
      EXPECT_EQ(r.num_threads, 1u);
      EXPECT_EQ(r.num_bins, 0u);
    } else {
      EXPECT_EQ(r.num_threads, 4u);
      EXPECT_GT(r.num_bins, 0u);
    }
  }
}

TEST(RunBenchmarkTest, CrashSweepOnLockfreeCompletes) {
  BenchConfig c = tiny(Experiment::kCrash);
  c.crashed_pct = {0, 50, 99};
  auto rows = run_benchmark(c);
  ASSERT_EQ(rows.size(), 6u);
  for (const BenchRow& r : rows) EXPECT_TRUE(r.flags.empty());
}

TEST(RunBenchmarkTest, LatencySweepWithDelaysStaysCorrect) {
  BenchConfig c = tiny(Experiment::kLatency);
  c.delayed_pct = {0, 50};
  c.repetitions = 1;
  auto rows = run_benchmark(c);
  ASSERT_EQ(rows.size(), 8u);
  for (const BenchRow& r : rows) EXPECT_TRUE(r.flags.empty()) << r.scheduler;
}

TEST(CsvTest, RoundTripIsExact) {
  BenchConfig c = tiny(Experiment::kBaseline);
  c.repetitions = 1;
  auto rows = run_benchmark(c);
  std::string text = to_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kCsvHeader);
  EXPECT_EQ(parse_csv(text), rows);
}

TEST(CsvTest, RejectsForeignFiles) {
  EXPECT_THROW(parse_csv("a,b,c\n1,2,3\n"), std::invalid_argument);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\nSERIAL,1\n"), std::invalid_argument);
}

TEST(AggregateTest, MediansAndFlagCounts) {
  std::vector<BenchRow> rows{row("LOCKFREE", 3), row("LOCKFREE", 1), row("LOCKFREE", 2),
                             row("LOCKFREE", 30, std::string(kNonTermination)),
                             row("SERIAL", 4), row("SERIAL", 6)};
  auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_EQ(agg[0].scheduler, "LOCKFREE");
  EXPECT_EQ(agg[0].exec_time_s, 2.0);
  EXPECT_EQ(agg[0].throughput_tps, 50.0);
  EXPECT_EQ(agg[0].rep, 3u);
  EXPECT_EQ(agg[0].flags, "NON_TERMINATION=1/4");
  EXPECT_EQ(agg[1].scheduler, "SERIAL");
  EXPECT_EQ(agg[1].exec_time_s, 5.0);
  EXPECT_TRUE(agg[1].flags.empty());
}

TEST(AggregateTest, AllFlaggedGivesNan) {
  std::vector<BenchRow> rows{row("STANDARD", 30, std::string(kNonTermination))};
  auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_TRUE(std::isnan(agg[0].exec_time_s));
  EXPECT_EQ(agg[0].rep, 0u);
  // NaN survives the CSV round trip.
  auto back = parse_csv(to_csv(agg));
  EXPECT_TRUE(std::isnan(back[0].exec_time_s));
}

TEST(ReportTest, FormatsAndSeriesOrder) {
  std::vector<BenchRow> rows{row("SERIAL", 1), row("LOCKFREE", 2), row("SERIAL", 3)};
  EXPECT_THROW(report(std::vector<BenchRow>{}, ReportFormat::kCsv), std::invalid_argument);
  auto csv = parse_csv(report(rows, ReportFormat::kCsv));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].scheduler, "SERIAL");
  EXPECT_EQ(csv[1].scheduler, "LOCKFREE");
  auto json = nlohmann::json::parse(report(rows, ReportFormat::kJson));
  ASSERT_EQ(json.size(), 2u);
  EXPECT_EQ(json[0]["exec_time_s"], 2.0);
  std::string gp = report(rows, ReportFormat::kGnuplot);
  EXPECT_NE(gp.find("# SERIAL"), std::string::npos);
  EXPECT_LT(gp.find("# SERIAL"), gp.find("# LOCKFREE"));
  EXPECT_EQ(parse_report_format("xml"), std::nullopt);
}

}  // namespace
}  // namespace mbps
