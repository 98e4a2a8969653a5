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

// Conflict detection: the pairwise predicate and the two concurrent
// procedures that fill the per-transaction table of lower-index conflicts.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mbps/txn_model.h"
#include "mbps/worker.h"

namespace mbps {

// True on a write-write, read-write or write-read overlap. Read-read
// overlap alone is not a conflict. Symmetric.
bool check_conflicts(const Transaction& a, const Transaction& b);

// Ids j < i that conflict with transaction i, ascending.
using LowerConflicts = std::vector<TxnId>;

// Serial computation of one slot's contents.
LowerConflicts compute_lower_conflicts(std::span<const Transaction> txns, TxnId i);

// One publish-once slot per transaction. A slot is UNSET (null) until a
// worker installs an immutable LowerConflicts with a CAS; an installed
// empty set is distinct from UNSET.
class ConflictTable {
 public:
  explicit ConflictTable(std::size_t n);
  ~ConflictTable();

  ConflictTable(const ConflictTable&) = delete;
  ConflictTable& operator=(const ConflictTable&) = delete;

  std::size_t size() const { return n_; }

  // nullptr while UNSET.
  const LowerConflicts* slot(TxnId i) const {
    return slots_[i].load(std::memory_order_acquire);
  }
  bool is_published(TxnId i) const { return slot(i) != nullptr; }

  // Installs `candidate` if slot i is still UNSET. On failure the candidate
  // is discarded and the existing contents stay untouched.
  bool publish(TxnId i, std::unique_ptr<LowerConflicts> candidate);

  bool complete() const;

  // Copy of every slot; throws std::logic_error if any slot is UNSET.
  std::vector<LowerConflicts> snapshot() const;

 private:
  std::size_t n_;
  std::unique_ptr<std::atomic<const LowerConflicts*>[]> slots_;
};

// Shared counters of one scheduling run (claim cursors, completion
// counters and stuck-worker counters of both phases).
struct SchedulerState {
  explicit SchedulerState(std::size_t threads) : num_threads(threads) {}

  std::atomic<std::uint64_t> claim_counter_phase1{0};
  std::atomic<std::uint64_t> claim_counter_phase2{0};
  std::atomic<std::uint64_t> conflict_txns_done{0};
  std::atomic<std::uint64_t> processed_txns_done{0};
  std::atomic<std::int64_t> stuck_threads_phase1{0};
  std::atomic<std::int64_t> stuck_threads_phase2{0};
  const std::size_t num_threads;
};

// Increments `counter` unless it already reached `limit`.
void saturating_increment(std::atomic<std::uint64_t>& counter, std::uint64_t limit);

// Claim loop without helping: every index is taken exactly once through
// claim_counter_phase1 and the worker leaves once the cursor passes the
// end. A worker that stops early leaves its claimed slot UNSET.
void build_conflict_sets_standard(std::span<const Transaction> txns,
                                  ConflictTable& table, SchedulerState& state,
                                  WorkerContext& ctx);

// Claim loop with helping. Claims wrap around modulo n, so any slot left
// UNSET by a slow or stopped worker is recomputed by whoever claims it
// next. The loop ends when conflict_txns_done reaches n; a worker that saw
// a full pass of published slots (or all workers stuck) first sweeps the
// table, publishing anything still UNSET, then stores n.
void build_conflict_sets_helper(std::span<const Transaction> txns,
                                ConflictTable& table, SchedulerState& state,
                                WorkerContext& ctx);

}  // namespace mbps
