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

#include "mbps/binning.h"

#include <algorithm>
#include <stdexcept>

namespace mbps {

BinAssignment::BinAssignment(std::size_t n)
    : n_(n),
      initial_bin_(std::make_unique<std::atomic<std::int64_t>[]>(n)),
      bin_array_(std::make_unique<std::atomic<Snapshot*>[]>(n)) {
  for (std::size_t i = 0; i < n_; ++i) {
    initial_bin_[i].store(kUnassigned, std::memory_order_relaxed);
    bin_array_[i].store(nullptr, std::memory_order_relaxed);
  }
}

BinAssignment::~BinAssignment() {
  for (std::size_t b = 0; b < n_; ++b) {
    delete bin_array_[b].load(std::memory_order_relaxed);
  }
  Snapshot* s = retired_.load(std::memory_order_relaxed);
  while (s != nullptr) {
    Snapshot* next = s->next_retired;
    delete s;
    s = next;
  }
}

bool BinAssignment::publish_bin(TxnId i, std::int64_t bin) {
  std::int64_t expected = kUnassigned;
  return initial_bin_[i].compare_exchange_strong(expected, bin,
                                                 std::memory_order_acq_rel,
                                                 std::memory_order_acquire);
}

const std::vector<TxnId>* BinAssignment::members(std::size_t bin) const {
  const Snapshot* s = bin_array_[bin].load(std::memory_order_acquire);
  return s == nullptr ? nullptr : &s->ids;
}

BinAssignment::InsertResult BinAssignment::insert_member(std::size_t bin, TxnId i) {
  if (bin >= n_) throw std::out_of_range("bin index beyond block size");
  InsertResult result;
  for (;;) {
    Snapshot* current = bin_array_[bin].load(std::memory_order_acquire);
    auto next = std::make_unique<Snapshot>();
    if (current != nullptr) {
      if (std::binary_search(current->ids.begin(), current->ids.end(), i)) break;
      next->ids.reserve(current->ids.size() + 1);
      next->ids = current->ids;
    }
    next->ids.insert(std::upper_bound(next->ids.begin(), next->ids.end(), i), i);
    if (bin_array_[bin].compare_exchange_strong(current, next.get(),
                                                std::memory_order_acq_rel,
                                                std::memory_order_acquire)) {
      next.release();
      if (current != nullptr) retire(current);
      result.installed = true;
      break;
    }
    ++result.retries;
  }
  return result;
}

void BinAssignment::retire(Snapshot* s) {
  Snapshot* head = retired_.load(std::memory_order_relaxed);
  do {
    s->next_retired = head;
  } while (!retired_.compare_exchange_weak(head, s, std::memory_order_release,
                                           std::memory_order_relaxed));
}

bool BinAssignment::complete() const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (bin_of(i) == kUnassigned) return false;
  }
  return true;
}

std::vector<std::int64_t> BinAssignment::initial_bins() const {
  std::vector<std::int64_t> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = bin_of(i);
  return out;
}

std::vector<std::vector<TxnId>> BinAssignment::bin_rows() const {
  std::size_t used = 0;
  for (std::size_t b = 0; b < n_; ++b) {
    if (members(b) != nullptr) used = b + 1;
  }
  std::vector<std::vector<TxnId>> rows(used);
  for (std::size_t b = 0; b < used; ++b) {
    if (const auto* m = members(b)) rows[b] = *m;
  }
  return rows;
}

std::int64_t calculate_bin(TxnId i, const ConflictTable& table,
                           const BinAssignment& bins, WorkerContext* ctx) {
  const LowerConflicts* deps = table.slot(i);
  if (deps == nullptr) throw std::logic_error("conflict set not published");
  std::int64_t current = -1;
  for (TxnId dep : *deps) {
    SpinBackoff backoff;
    std::int64_t dep_bin;
    while ((dep_bin = bins.bin_of(dep)) == kUnassigned) {
      if (ctx != nullptr) ctx->poll_cancel();
      backoff.pause();
    }
    current = std::max(current, dep_bin);
  }
  return current + 1;
}

std::int64_t calculate_bin_helper(TxnId i, const ConflictTable& table,
                                  const BinAssignment& bins) {
  const LowerConflicts* deps = table.slot(i);
  if (deps == nullptr) return kNotReady;
  std::int64_t current = -1;
  for (TxnId dep : *deps) {
    std::int64_t dep_bin = bins.bin_of(dep);
    if (dep_bin == kUnassigned) return kNotReady;
    current = std::max(current, dep_bin);
  }
  return current + 1;
}

namespace {

// A conflict slot left UNSET by a worker that died in the first phase.
void help_publish_conflicts(std::span<const Transaction> txns, ConflictTable& table,
                            SchedulerState& state, WorkerContext& ctx, TxnId i) {
  if (table.publish(i, std::make_unique<LowerConflicts>(compute_lower_conflicts(txns, i)))) {
    saturating_increment(state.conflict_txns_done, txns.size());
    ++ctx.stats.publications;
  }
}

void publish_assignment(BinAssignment& bins, SchedulerState& state,
                        WorkerContext& ctx, TxnId i, std::int64_t bin) {
  auto inserted = bins.insert_member(static_cast<std::size_t>(bin), i);
  ctx.stats.cas_retries += inserted.retries;
  if (inserted.installed) ++ctx.stats.publications;
  ctx.at(FaultSite::kPhase2PreCas);
  if (bins.publish_bin(i, bin)) {
    saturating_increment(state.processed_txns_done, bins.size());
    ++ctx.stats.publications;
  } else {
    ++ctx.stats.lost_publications;
  }
}

void finish_bin_phase(std::span<const Transaction> txns, ConflictTable& table,
                      BinAssignment& bins, SchedulerState& state,
                      WorkerContext& ctx) {
  ++ctx.stats.sweeps;
  for (TxnId i = 0; i < bins.size(); ++i) {
    ctx.poll_cancel();
    if (bins.bin_of(i) != kUnassigned) continue;
    if (!table.is_published(i)) help_publish_conflicts(txns, table, state, ctx, i);
    std::int64_t bin = calculate_bin_helper(i, table, bins);
    if (bin == kNotReady) {
      throw std::logic_error("dependency unassigned during in-order sweep");
    }
    publish_assignment(bins, state, ctx, i, bin);
  }
  state.processed_txns_done.store(bins.size(), std::memory_order_release);
}

}  // namespace

void assign_bins_standard(std::span<const Transaction> txns,
                          const ConflictTable& table, BinAssignment& bins,
                          SchedulerState& state, WorkerContext& ctx) {
  const std::uint64_t n = txns.size();
  for (;;) {
    std::uint64_t i = state.claim_counter_phase2.fetch_add(1, std::memory_order_acq_rel);
    if (i >= n) return;
    ++ctx.stats.claims;
    ctx.at(FaultSite::kPhase2PostClaim);
    std::int64_t bin = calculate_bin(i, table, bins, &ctx);
    auto inserted = bins.insert_member(static_cast<std::size_t>(bin), i);
    ctx.stats.cas_retries += inserted.retries;
    if (inserted.installed) ++ctx.stats.publications;
    ctx.at(FaultSite::kPhase2PreCas);
    bins.store_bin(i, bin);
    saturating_increment(state.processed_txns_done, n);
    ++ctx.stats.publications;
  }
}

void assign_bins_helper(std::span<const Transaction> txns,
                        ConflictTable& table, BinAssignment& bins,
                        SchedulerState& state, WorkerContext& ctx) {
  const std::uint64_t n = txns.size();
  if (n == 0) return;
  const auto num_threads = static_cast<std::int64_t>(state.num_threads);

  std::uint64_t local_count = 0;
  bool stuck = false;
  while (state.processed_txns_done.load(std::memory_order_acquire) < n) {
    TxnId i = state.claim_counter_phase2.fetch_add(1, std::memory_order_acq_rel) % n;
    ++ctx.stats.claims;
    ctx.at(FaultSite::kPhase2PostClaim);

    if (bins.bin_of(i) == kUnassigned) {
      local_count = 0;
      if (stuck) {
        state.stuck_threads_phase2.fetch_sub(1, std::memory_order_acq_rel);
        stuck = false;
      }
      if (!table.is_published(i)) help_publish_conflicts(txns, table, state, ctx, i);
      std::int64_t bin = calculate_bin_helper(i, table, bins);
      if (bin == kNotReady) {
        ++ctx.stats.not_ready_skips;
        continue;
      }
      publish_assignment(bins, state, ctx, i, bin);
    } else {
      ++local_count;
      if (local_count == n && !stuck) {
        stuck = true;
        state.stuck_threads_phase2.fetch_add(1, std::memory_order_acq_rel);
      }
    }

    if (state.stuck_threads_phase2.load(std::memory_order_acquire) >= num_threads ||
        local_count >= n) {
      finish_bin_phase(txns, table, bins, state, ctx);
    }
  }
}

std::vector<std::int64_t> bin_oracle(std::span<const Transaction> txns) {
  std::vector<std::int64_t> oracle(txns.size(), 0);
  for (TxnId i = 0; i < txns.size(); ++i) {
    std::int64_t deepest = -1;
    for (TxnId j = 0; j < i; ++j) {
      if (check_conflicts(txns[i], txns[j])) deepest = std::max(deepest, oracle[j]);
    }
    oracle[i] = deepest + 1;
  }
  return oracle;
}

}  // namespace mbps
