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

#include "mbps/conflict.h"

#include <stdexcept>

namespace mbps {

namespace {

// Both inputs sorted.
bool intersects(const AddressSet& a, const AddressSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      return true;
    }
  }
  return false;
}

void publish_slot(std::span<const Transaction> txns, ConflictTable& table,
                  SchedulerState& state, WorkerContext& ctx, TxnId i) {
  auto candidate =
      std::make_unique<LowerConflicts>(compute_lower_conflicts(txns, i));
  ctx.at(FaultSite::kPhase1PrePublish);
  if (table.publish(i, std::move(candidate))) {
    saturating_increment(state.conflict_txns_done, txns.size());
    ++ctx.stats.publications;
  } else {
    ++ctx.stats.lost_publications;
  }
}

// Publishes every slot still UNSET, in index order, then lets all workers
// out of the phase. Runs only after a termination condition fired.
void finish_conflict_phase(std::span<const Transaction> txns,
                           ConflictTable& table, SchedulerState& state,
                           WorkerContext& ctx) {
  ++ctx.stats.sweeps;
  for (TxnId i = 0; i < txns.size(); ++i) {
    ctx.poll_cancel();
    if (!table.is_published(i)) publish_slot(txns, table, state, ctx, i);
  }
  state.conflict_txns_done.store(txns.size(), std::memory_order_release);
}

}  // namespace

bool check_conflicts(const Transaction& a, const Transaction& b) {
  if (intersects(a.write_set, b.write_set)) return true;
  if (intersects(a.read_set, b.write_set)) return true;
  if (intersects(a.write_set, b.read_set)) return true;
  return false;
}

LowerConflicts compute_lower_conflicts(std::span<const Transaction> txns, TxnId i) {
  LowerConflicts lower;
  const Transaction& txn = txns[i];
  for (TxnId j = 0; j < i; ++j) {
    if (check_conflicts(txn, txns[j])) lower.push_back(j);
  }
  return lower;
}

ConflictTable::ConflictTable(std::size_t n)
    : n_(n), slots_(std::make_unique<std::atomic<const LowerConflicts*>[]>(n)) {
  for (std::size_t i = 0; i < n_; ++i) {
    slots_[i].store(nullptr, std::memory_order_relaxed);
  }
}

ConflictTable::~ConflictTable() {
  for (std::size_t i = 0; i < n_; ++i) {
    delete slots_[i].load(std::memory_order_relaxed);
  }
}

bool ConflictTable::publish(TxnId i, std::unique_ptr<LowerConflicts> candidate) {
  const LowerConflicts* expected = nullptr;
  if (slots_[i].compare_exchange_strong(expected, candidate.get(),
                                        std::memory_order_acq_rel,
                                        std::memory_order_acquire)) {
    candidate.release();
    return true;
  }
  return false;
}

bool ConflictTable::complete() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (!is_published(i)) return false;
  }
  return true;
}

std::vector<LowerConflicts> ConflictTable::snapshot() const {
  std::vector<LowerConflicts> out;
  out.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const LowerConflicts* s = slot(i);
    if (s == nullptr) throw std::logic_error("conflict table slot still UNSET");
    out.push_back(*s);
  }
  return out;
}

void saturating_increment(std::atomic<std::uint64_t>& counter, std::uint64_t limit) {
  std::uint64_t current = counter.load(std::memory_order_acquire);
  while (current < limit &&
         !counter.compare_exchange_weak(current, current + 1,
                                        std::memory_order_acq_rel,
                                        std::memory_order_acquire)) {
  }
}

void build_conflict_sets_standard(std::span<const Transaction> txns,
                                  ConflictTable& table, SchedulerState& state,
                                  WorkerContext& ctx) {
  const std::uint64_t n = txns.size();
  for (;;) {
    std::uint64_t i = state.claim_counter_phase1.fetch_add(1, std::memory_order_acq_rel);
    if (i >= n) return;
    ++ctx.stats.claims;
    ctx.at(FaultSite::kPhase1PostClaim);
    if (!table.is_published(i)) publish_slot(txns, table, state, ctx, i);
  }
}

void build_conflict_sets_helper(std::span<const Transaction> txns,
                                ConflictTable& table, SchedulerState& state,
                                WorkerContext& ctx) {
  const std::uint64_t n = txns.size();
  if (n == 0) return;
  const auto num_threads = static_cast<std::int64_t>(state.num_threads);

  std::uint64_t local_count = 0;
  bool stuck = false;
  while (state.conflict_txns_done.load(std::memory_order_acquire) < n) {
    TxnId i = state.claim_counter_phase1.fetch_add(1, std::memory_order_acq_rel) % n;
    ++ctx.stats.claims;
    ctx.at(FaultSite::kPhase1PostClaim);

    if (!table.is_published(i)) {
      local_count = 0;
      if (stuck) {
        state.stuck_threads_phase1.fetch_sub(1, std::memory_order_acq_rel);
        stuck = false;
      }
      publish_slot(txns, table, state, ctx, i);
    } else {
      ++local_count;
      if (local_count == n && !stuck) {
        stuck = true;
        state.stuck_threads_phase1.fetch_add(1, std::memory_order_acq_rel);
      }
    }

    if (state.stuck_threads_phase1.load(std::memory_order_acquire) >= num_threads ||
        local_count >= n) {
      finish_conflict_phase(txns, table, state, ctx);
    }
  }
}

}  // namespace mbps
