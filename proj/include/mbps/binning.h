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

// Bin assignment: transaction i goes to 1 + max(bin of its lower
// conflicts), bin 0 when it has none.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "mbps/conflict.h"
#include "mbps/txn_model.h"
#include "mbps/worker.h"

namespace mbps {

inline constexpr std::int64_t kUnassigned = -1;
inline constexpr std::int64_t kNotReady = -1;

// Per-transaction bin numbers plus per-bin membership snapshots.
//
// Bin numbers are publish-once. Each bin's membership is an immutable
// sorted id list replaced wholesale by CAS; replaced lists are parked on a
// retire list and freed with the assignment, so a reader holding an old
// snapshot never sees it freed mid-phase. The bin table has n entries, the
// most a block of n transactions can need.
class BinAssignment {
 public:
  explicit BinAssignment(std::size_t n);
  ~BinAssignment();

  BinAssignment(const BinAssignment&) = delete;
  BinAssignment& operator=(const BinAssignment&) = delete;

  std::size_t size() const { return n_; }

  std::int64_t bin_of(TxnId i) const {
    return initial_bin_[i].load(std::memory_order_acquire);
  }

  // CAS from kUnassigned; false if the entry was already set.
  bool publish_bin(TxnId i, std::int64_t bin);

  // Unconditional store, for the non-helping procedure where each index
  // has a single owner.
  void store_bin(TxnId i, std::int64_t bin) {
    initial_bin_[i].store(bin, std::memory_order_release);
  }

  // Null until the first member is inserted.
  const std::vector<TxnId>* members(std::size_t bin) const;

  struct InsertResult {
    bool installed = false;     // this call replaced the snapshot
    std::uint64_t retries = 0;  // CAS attempts lost to other writers
  };

  // Copy-on-write insertion of `i` into bin `bin`: read the snapshot, stop
  // if it already holds i, otherwise copy, insert and CAS-install.
  InsertResult insert_member(std::size_t bin, TxnId i);

  bool complete() const;
  std::vector<std::int64_t> initial_bins() const;

  // Membership rows 0..max_bin; a bin with no snapshot yields an empty row.
  std::vector<std::vector<TxnId>> bin_rows() const;

 private:
  struct Snapshot {
    std::vector<TxnId> ids;
    Snapshot* next_retired = nullptr;
  };

  void retire(Snapshot* s);

  std::size_t n_;
  std::unique_ptr<std::atomic<std::int64_t>[]> initial_bin_;
  std::unique_ptr<std::atomic<Snapshot*>[]> bin_array_;
  std::atomic<Snapshot*> retired_{nullptr};
};

// Bin for transaction i, waiting (spin, then yield) on every dependency
// whose bin is still unassigned. Never returns if a dependency is never
// assigned, unless `ctx` is given and its run gets cancelled.
std::int64_t calculate_bin(TxnId i, const ConflictTable& table,
                           const BinAssignment& bins, WorkerContext* ctx = nullptr);

// Same value as calculate_bin, or kNotReady as soon as any dependency is
// unassigned. Never waits.
std::int64_t calculate_bin_helper(TxnId i, const ConflictTable& table,
                                  const BinAssignment& bins);

// Non-helping bin loop: claim via claim_counter_phase2 until the cursor
// passes the end. Requires a complete conflict table.
void assign_bins_standard(std::span<const Transaction> txns,
                          const ConflictTable& table, BinAssignment& bins,
                          SchedulerState& state, WorkerContext& ctx);

// Helping bin loop: wraparound claims, NOT_READY indices skipped, bin
// numbers published by CAS with processed_txns_done counted once per
// transaction. Termination mirrors build_conflict_sets_helper, including
// the completion sweep (which runs in index order, so every dependency is
// already assigned when its dependents are visited).
void assign_bins_helper(std::span<const Transaction> txns,
                        ConflictTable& table, BinAssignment& bins,
                        SchedulerState& state, WorkerContext& ctx);

// Serial reference: oracle[i] = 1 + max(oracle[j]) over conflicting j < i,
// 0 when there is none. Computed directly from the transactions.
std::vector<std::int64_t> bin_oracle(std::span<const Transaction> txns);

}  // namespace mbps
