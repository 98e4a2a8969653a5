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

// End-to-end scheduling over a fixed worker pool.
//
//   STANDARD  non-helping conflict and bin loops, barrier between phases
//   ASSISTED  helping loops, barrier between phases
//   LOCKFREE  helping loops, each worker moves to the bin phase as soon as
//             its own conflict loop ends; no barrier, no lock
//
// The barrier variants also rendezvous once more after the bin phase
// before the plan is handed out, so a worker that never arrives keeps the
// block from ever becoming executable.

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mbps/binning.h"
#include "mbps/conflict.h"
#include "mbps/executor.h"
#include "mbps/faults.h"
#include "mbps/txn_model.h"
#include "mbps/worker.h"

namespace mbps {

enum class Variant { kStandard, kAssisted, kLockfree };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

inline bool uses_barrier(Variant v) { return v != Variant::kLockfree; }
inline bool uses_helpers(Variant v) { return v != Variant::kStandard; }

struct ScheduleOptions {
  // Wall-clock budget before the run is abandoned as NON_TERMINATION.
  std::chrono::milliseconds watchdog{30'000};
  // Barrier variants cannot survive a crash. Runs that demonstrate exactly
  // that must opt in; otherwise such a plan is a configuration error.
  bool allow_crash_on_barrier_variant = false;
};

// MBPS_WATCHDOG_SECS if set and valid, otherwise `fallback`.
std::chrono::milliseconds watchdog_from_env(std::chrono::milliseconds fallback);

enum class ScheduleStatus { kCompleted, kNonTermination };

struct ScheduleTiming {
  std::chrono::duration<double> phase1{0};
  std::chrono::duration<double> phase2{0};
  std::chrono::duration<double> total{0};
};

struct WorkerReport {
  WorkerStats stats;
  bool crashed = false;
};

struct ScheduleResult {
  ScheduleStatus status = ScheduleStatus::kCompleted;
  std::unique_ptr<ConflictTable> conflicts;
  std::unique_ptr<BinAssignment> assignment;
  ExecutionPlan plan;  // empty unless completed
  ScheduleTiming timing;
  std::vector<WorkerReport> workers;

  bool completed() const { return status == ScheduleStatus::kCompleted; }
  std::uint64_t cas_retries() const;
  std::uint64_t not_ready_skips() const;
  std::size_t crashed_workers() const;
};

// Runs one variant over `txns` with `num_threads` workers. Throws
// std::invalid_argument on configuration errors before any worker starts:
// zero threads, a fault plan that does not fit the pool, every worker
// crashed, or crashes on a barrier variant without the opt-in. Throws
// std::logic_error if a run finishes with an incomplete assignment.
ScheduleResult schedule(std::span<const Transaction> txns, Variant variant,
                        std::size_t num_threads, const FaultPlan& faults = {},
                        const ScheduleOptions& options = {});

}  // namespace mbps
