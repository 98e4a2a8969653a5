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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <thread>

#include "mbps/faults.h"

namespace mbps {

// Thrown at an instrumented site when the fault plan says the worker
// crashes. Caught only by the worker's entry point, so nothing after the
// site runs.
struct WorkerCrashed {};

// Thrown from wait loops once the watchdog has given up on a run.
struct WorkerCancelled {};

struct WorkerStats {
  std::uint64_t claims = 0;
  std::uint64_t publications = 0;        // successful installs of shared state
  std::uint64_t lost_publications = 0;   // computed but another worker won
  std::uint64_t cas_retries = 0;         // bin-membership CAS failures
  std::uint64_t not_ready_skips = 0;     // bin calculation hit an unassigned dependency
  std::uint64_t sweeps = 0;              // completion sweeps before a termination store
};

// Per-worker view of a scheduling run: identity, fault plan, cancellation
// and counters. Owned by the thread that spawns the worker and read after
// the worker has been joined.
class WorkerContext {
 public:
  WorkerContext() = default;
  WorkerContext(std::size_t worker_id, const FaultPlan* faults,
                const std::atomic<bool>* cancel)
      : worker_id_(worker_id), faults_(faults), cancel_(cancel) {}

  WorkerContext(const WorkerContext&) = delete;
  WorkerContext& operator=(const WorkerContext&) = delete;

  std::size_t worker_id() const { return worker_id_; }
  bool crashed() const { return crashed_.load(std::memory_order_acquire); }
  bool cancelled() const {
    return cancel_ != nullptr && cancel_->load(std::memory_order_relaxed);
  }

  // Applies the fault plan at `site`: sleeps, throws WorkerCrashed, or
  // returns. Also throws WorkerCancelled if the run was abandoned.
  void at(FaultSite site);

  // A planned crash whose site was never reached (peers drained the work
  // first) fires when the worker leaves the phase holding that site.
  void end_of_phase(int phase);

  void poll_cancel() const {
    if (cancelled()) throw WorkerCancelled{};
  }

  WorkerStats stats;

 private:
  std::size_t worker_id_ = 0;
  const FaultPlan* faults_ = nullptr;
  const std::atomic<bool>* cancel_ = nullptr;
  std::atomic<bool> crashed_{false};
};

// Spin a little, then yield. Wait loops on an oversubscribed machine must
// give the CPU back to the worker they are waiting for.
class SpinBackoff {
 public:
  void pause() {
    if (++spins_ < kSpinLimit) return;
    std::this_thread::yield();
  }
  void reset() { spins_ = 0; }

 private:
  static constexpr int kSpinLimit = 64;
  int spins_ = 0;
};

}  // namespace mbps
