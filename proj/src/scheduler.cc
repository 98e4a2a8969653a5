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

#include "mbps/scheduler.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <latch>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace mbps {

namespace {

using Clock = std::chrono::steady_clock;

// Rendezvous for a fixed party count that the watchdog can break. Waiters
// of a cancelled barrier throw WorkerCancelled.
class CancellableBarrier {
 public:
  explicit CancellableBarrier(std::size_t parties) : parties_(parties) {}

  // Returns true for the arrival that released the barrier.
  bool arrive_and_wait() {
    std::unique_lock<std::mutex> lock(mu_);
    if (cancelled_) throw WorkerCancelled{};
    std::size_t gen = generation_;
    if (++waiting_ == parties_) {
      waiting_ = 0;
      ++generation_;
      cv_.notify_all();
      return true;
    }
    cv_.wait(lock, [&] { return generation_ != gen || cancelled_; });
    if (generation_ == gen) throw WorkerCancelled{};
    return false;
  }

  void cancel() {
    std::lock_guard<std::mutex> lock(mu_);
    cancelled_ = true;
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  const std::size_t parties_;
  std::size_t waiting_ = 0;
  std::size_t generation_ = 0;
  bool cancelled_ = false;
};

struct PhaseClock {
  std::vector<std::optional<Clock::time_point>> phase1_exit;
  std::vector<std::optional<Clock::time_point>> phase2_exit;
};

std::optional<Clock::time_point> pick(
    const std::vector<std::optional<Clock::time_point>>& stamps, bool earliest) {
  std::optional<Clock::time_point> out;
  for (const auto& s : stamps) {
    if (!s) continue;
    if (!out || (earliest ? *s < *out : *s > *out)) out = s;
  }
  return out;
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kStandard:
      return "STANDARD";
    case Variant::kAssisted:
      return "ASSISTED";
    case Variant::kLockfree:
      return "LOCKFREE";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view text) {
  for (Variant v : {Variant::kStandard, Variant::kAssisted, Variant::kLockfree}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

std::chrono::milliseconds watchdog_from_env(std::chrono::milliseconds fallback) {
  const char* raw = std::getenv("MBPS_WATCHDOG_SECS");
  if (raw == nullptr || *raw == '\0') return fallback;
  try {
    std::size_t used = 0;
    double secs = std::stod(raw, &used);
    if (used != std::string(raw).size() || !(secs > 0.0)) return fallback;
    return std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000.0));
  } catch (const std::exception&) {
    return fallback;
  }
}

std::uint64_t ScheduleResult::cas_retries() const {
  std::uint64_t sum = 0;
  for (const auto& w : workers) sum += w.stats.cas_retries;
  return sum;
}

std::uint64_t ScheduleResult::not_ready_skips() const {
  std::uint64_t sum = 0;
  for (const auto& w : workers) sum += w.stats.not_ready_skips;
  return sum;
}

std::size_t ScheduleResult::crashed_workers() const {
  return static_cast<std::size_t>(
      std::count_if(workers.begin(), workers.end(), [](const auto& w) { return w.crashed; }));
}

ScheduleResult schedule(std::span<const Transaction> txns, Variant variant,
                        std::size_t num_threads, const FaultPlan& faults,
                        const ScheduleOptions& options) {
  if (num_threads == 0) throw std::invalid_argument("num_threads must be >= 1");
  faults.validate(num_threads);
  if (faults.has_crashes()) {
    if (uses_barrier(variant) && !options.allow_crash_on_barrier_variant) {
      throw std::invalid_argument(std::string(to_string(variant)) +
                                  " is not crash tolerant; crash plan rejected");
    }
    if (variant == Variant::kLockfree && faults.crashed_workers.size() >= num_threads) {
      throw std::invalid_argument("crash plan leaves no live worker");
    }
  }
  for (TxnId i = 0; i < txns.size(); ++i) {
    if (txns[i].id != i) throw std::invalid_argument("transaction id differs from its position");
  }

  const std::size_t n = txns.size();
  ScheduleResult result;
  result.conflicts = std::make_unique<ConflictTable>(n);
  result.assignment = std::make_unique<BinAssignment>(n);
  ConflictTable& table = *result.conflicts;
  BinAssignment& bins = *result.assignment;

  SchedulerState state(num_threads);
  std::atomic<bool> cancel{false};
  CancellableBarrier after_conflicts(num_threads);
  CancellableBarrier after_bins(num_threads);

  std::vector<std::unique_ptr<WorkerContext>> contexts;
  contexts.reserve(num_threads);
  for (std::size_t w = 0; w < num_threads; ++w) {
    contexts.push_back(std::make_unique<WorkerContext>(w, &faults, &cancel));
  }
  PhaseClock clock{std::vector<std::optional<Clock::time_point>>(num_threads),
                   std::vector<std::optional<Clock::time_point>>(num_threads)};

  std::mutex exit_mu;
  std::condition_variable exit_cv;
  std::size_t exited = 0;
  std::exception_ptr failure;
  std::latch start(1);

  auto body = [&](std::size_t w) {
    WorkerContext& ctx = *contexts[w];
    if (uses_helpers(variant)) {
      build_conflict_sets_helper(txns, table, state, ctx);
    } else {
      build_conflict_sets_standard(txns, table, state, ctx);
    }
    ctx.end_of_phase(1);
    clock.phase1_exit[w] = Clock::now();
    ctx.at(FaultSite::kInterPhase);
    if (uses_barrier(variant)) after_conflicts.arrive_and_wait();

    if (uses_helpers(variant)) {
      assign_bins_helper(txns, table, bins, state, ctx);
    } else {
      assign_bins_standard(txns, table, bins, state, ctx);
    }
    ctx.end_of_phase(2);
    clock.phase2_exit[w] = Clock::now();
    if (uses_barrier(variant)) after_bins.arrive_and_wait();
  };

  auto entry = [&](std::size_t w) {
    start.wait();
    try {
      body(w);
    } catch (const WorkerCrashed&) {
    } catch (const WorkerCancelled&) {
    } catch (...) {
      std::lock_guard<std::mutex> lock(exit_mu);
      if (!failure) failure = std::current_exception();
    }
    std::lock_guard<std::mutex> lock(exit_mu);
    ++exited;
    exit_cv.notify_all();
  };

  std::vector<std::thread> pool;
  pool.reserve(num_threads);
  for (std::size_t w = 0; w < num_threads; ++w) pool.emplace_back(entry, w);

  const Clock::time_point started = Clock::now();
  start.count_down();
  {
    std::unique_lock<std::mutex> lock(exit_mu);
    bool finished = exit_cv.wait_until(lock, started + options.watchdog,
                                       [&] { return exited == num_threads; });
    if (!finished) {
      result.status = ScheduleStatus::kNonTermination;
      cancel.store(true, std::memory_order_relaxed);
      lock.unlock();
      after_conflicts.cancel();
      after_bins.cancel();
    }
  }
  for (auto& t : pool) t.join();
  const Clock::time_point finished_at = Clock::now();

  for (const auto& ctx : contexts) {
    result.workers.push_back(WorkerReport{ctx->stats, ctx->crashed()});
  }
  if (failure) std::rethrow_exception(failure);

  result.timing.total = finished_at - started;
  // Barrier variants: a phase lasts until its last worker leaves it.
  // LOCKFREE: until the first worker observes the phase complete.
  bool earliest = !uses_barrier(variant);
  auto p1 = pick(clock.phase1_exit, earliest);
  auto p2 = pick(clock.phase2_exit, earliest);
  if (p1) result.timing.phase1 = *p1 - started;
  if (p1 && p2) result.timing.phase2 = *p2 - *p1;

  if (result.completed()) {
    if (!bins.complete()) throw std::logic_error("schedule finished with unassigned transactions");
    result.plan = build_execution_plan(bins);
  }
  return result;
}

}  // namespace mbps
