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

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace mbps {

// Instrumented locations inside the scheduling worker loops.
enum class FaultSite {
  kPhase1PostClaim,   // right after a conflict-phase index is claimed
  kPhase1PrePublish,  // conflict set computed, not yet installed
  kInterPhase,        // conflict loop exited, bin loop not entered
  kPhase2PostClaim,   // right after a bin-phase index is claimed
  kPhase2PreCas,      // bin membership updated, bin number not yet published
};

// Where a crashed worker stops. Each value is also a FaultSite.
enum class CrashPoint {
  kPhase1PostClaim,
  kPhase1PrePublish,
  kInterPhase,
  kPhase2PreCas,
};

FaultSite to_site(CrashPoint point);
std::string_view to_string(CrashPoint point);
std::optional<CrashPoint> parse_crash_point(std::string_view text);

// Immutable description of which workers misbehave and how. Shared
// read-only by every worker of a schedule run.
struct FaultPlan {
  std::set<std::size_t> delayed_workers;
  std::chrono::microseconds delay_per_claim{0};
  std::set<std::size_t> crashed_workers;
  CrashPoint crash_point = CrashPoint::kPhase1PrePublish;
  std::uint64_t seed = 0;

  bool empty() const { return delayed_workers.empty() && crashed_workers.empty(); }
  bool has_crashes() const { return !crashed_workers.empty(); }

  // Throws std::invalid_argument when the plan cannot apply to a pool of
  // `num_threads` workers (out-of-range ids, overlapping sets).
  void validate(std::size_t num_threads) const;
};

// Number of workers selected by a percentage: rounded to nearest, at least
// one when pct > 0.
std::size_t workers_for_percentage(std::size_t num_threads, double pct);

// Seeded selection of delayed and crashed workers. A crashed percentage
// below 100 never selects every worker (99% of 8 is 7). Throws
// std::invalid_argument when the two selections cannot be disjoint or a
// nonzero crash percentage would leave no worker to select from.
FaultPlan make_fault_plan(std::size_t num_threads, double delayed_pct,
                          std::chrono::microseconds delay, double crashed_pct,
                          CrashPoint crash_point, std::uint64_t seed);

struct FaultAction {
  enum class Kind { kContinue, kSleep, kTerminateWorker };
  Kind kind = Kind::kContinue;
  std::chrono::microseconds delay{0};

  friend bool operator==(const FaultAction&, const FaultAction&) = default;
};

// Pure lookup: what `worker_id` must do on reaching `site`.
FaultAction apply_fault(const FaultPlan& plan, std::size_t worker_id,
                        FaultSite site);

}  // namespace mbps
