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

#include "mbps/faults.h"

#include <stdexcept>

#include <gtest/gtest.h>

#include "mbps/worker.h"

namespace mbps {
namespace {

using std::chrono::microseconds;

TEST(FaultsTest, PercentagesRoundToNearestWithFloorOfOne) {
  EXPECT_EQ(workers_for_percentage(9, 33.33), 3u);
  EXPECT_EQ(workers_for_percentage(8, 0), 0u);
  EXPECT_EQ(workers_for_percentage(8, 1), 1u);
  EXPECT_EQ(workers_for_percentage(8, 40), 3u);
  EXPECT_EQ(workers_for_percentage(8, 99), 8u);
  EXPECT_THROW(workers_for_percentage(8, 120), std::invalid_argument);
  EXPECT_THROW(workers_for_percentage(8, -1), std::invalid_argument);
}

TEST(FaultsTest, EmptyPlan) {
  FaultPlan plan = make_fault_plan(8, 0, microseconds(5000), 0, CrashPoint::kPhase1PrePublish, 1);
  EXPECT_TRUE(plan.empty());
  EXPECT_EQ(plan.delay_per_claim.count(), 0);
}

TEST(FaultsTest, NinetyNinePercentLeavesOneSurvivor) {
  FaultPlan plan = make_fault_plan(8, 0, {}, 99, CrashPoint::kInterPhase, 3);
  EXPECT_EQ(plan.crashed_workers.size(), 7u);
  EXPECT_EQ(plan.crash_point, CrashPoint::kInterPhase);
  EXPECT_EQ(make_fault_plan(8, 0, {}, 100, CrashPoint::kInterPhase, 3).crashed_workers.size(), 8u);
}

TEST(FaultsTest, SelectionIsDeterministicAndDisjoint) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FaultPlan a = make_fault_plan(8, 40, microseconds(10), 40, CrashPoint::kPhase2PreCas, seed);
    FaultPlan b = make_fault_plan(8, 40, microseconds(10), 40, CrashPoint::kPhase2PreCas, seed);
    EXPECT_EQ(a.delayed_workers, b.delayed_workers);
    EXPECT_EQ(a.crashed_workers, b.crashed_workers);
    EXPECT_EQ(a.delayed_workers.size(), 3u);
    EXPECT_EQ(a.crashed_workers.size(), 3u);
    EXPECT_NO_THROW(a.validate(8));
  }
}

TEST(FaultsTest, RejectsImpossiblePlans) {
  EXPECT_THROW(make_fault_plan(8, 80, {}, 80, CrashPoint::kInterPhase, 0), std::invalid_argument);
  EXPECT_THROW(make_fault_plan(1, 0, {}, 50, CrashPoint::kInterPhase, 0), std::invalid_argument);
  FaultPlan overlap;
  overlap.delayed_workers = {1};
  overlap.crashed_workers = {1};
  EXPECT_THROW(overlap.validate(4), std::invalid_argument);
  FaultPlan out_of_range;
  out_of_range.crashed_workers = {4};
  EXPECT_THROW(out_of_range.validate(4), std::invalid_argument);
}

TEST(FaultsTest, ApplyFaultExamples) {
  FaultPlan plan;
  plan.delayed_workers = {1};
  plan.delay_per_claim = microseconds(5000);
  plan.crashed_workers = {2};
  plan.crash_point = CrashPoint::kPhase1PrePublish;
  using Kind = FaultAction::Kind;
  EXPECT_EQ(apply_fault(plan, 2, FaultSite::kPhase1PrePublish).kind, Kind::kTerminateWorker);
  EXPECT_EQ(apply_fault(plan, 2, FaultSite::kPhase1PostClaim).kind, Kind::kContinue);
  EXPECT_EQ(apply_fault(plan, 1, FaultSite::kPhase1PostClaim),
            (FaultAction{Kind::kSleep, microseconds(5000)}));
  EXPECT_EQ(apply_fault(plan, 1, FaultSite::kPhase2PostClaim).kind, Kind::kSleep);
  EXPECT_EQ(apply_fault(plan, 1, FaultSite::kPhase1PrePublish).kind, Kind::kContinue);
  EXPECT_EQ(apply_fault(plan, 0, FaultSite::kPhase2PreCas).kind, Kind::kContinue);
}

TEST(FaultsTest, CrashPointNamesRoundTrip) {
  for (CrashPoint p : {CrashPoint::kPhase1PostClaim, CrashPoint::kPhase1PrePublish,
                       CrashPoint::kInterPhase, CrashPoint::kPhase2PreCas}) {
    EXPECT_EQ(parse_crash_point(to_string(p)), p);
  }
  EXPECT_FALSE(parse_crash_point("SOMEWHERE").has_value());
}

TEST(WorkerContextTest, CrashThrowsAndLatches) {
  FaultPlan plan;
  plan.crashed_workers = {0};
  plan.crash_point = CrashPoint::kInterPhase;
  WorkerContext ctx(0, &plan, nullptr);
  EXPECT_NO_THROW(ctx.at(FaultSite::kPhase1PostClaim));
  EXPECT_FALSE(ctx.crashed());
  EXPECT_THROW(ctx.at(FaultSite::kInterPhase), WorkerCrashed);
  EXPECT_TRUE(ctx.crashed());
}

TEST(WorkerContextTest, UnreachedCrashSiteFiresAtPhaseEnd) {
  FaultPlan plan;
  plan.crashed_workers = {1};
  plan.crash_point = CrashPoint::kPhase2PreCas;
  WorkerContext spared(0, &plan, nullptr);
  EXPECT_NO_THROW(spared.end_of_phase(2));
  WorkerContext doomed(1, &plan, nullptr);
  EXPECT_NO_THROW(doomed.end_of_phase(1));
  EXPECT_THROW(doomed.end_of_phase(2), WorkerCrashed);
  EXPECT_TRUE(doomed.crashed());
}

TEST(WorkerContextTest, CancelFlagStopsWorker) {
  std::atomic<bool> cancel{false};
  WorkerContext ctx(0, nullptr, &cancel);
  EXPECT_NO_THROW(ctx.at(FaultSite::kPhase2PostClaim));
  cancel = true;
  EXPECT_THROW(ctx.at(FaultSite::kPhase2PostClaim), WorkerCancelled);
  EXPECT_THROW(ctx.poll_cancel(), WorkerCancelled);
}

}  // namespace
}  // namespace mbps
