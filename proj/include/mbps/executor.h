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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "mbps/binning.h"
#include "mbps/txn_model.h"

namespace mbps {

// Dense bin-by-bin layout walked by the executor. Rows partition the block
// and ids ascend within a row.
struct ExecutionPlan {
  std::vector<std::vector<TxnId>> bin_matrix;
  std::vector<std::size_t> total_trans_bin;
  std::int64_t glb_ptr = -1;  // highest ready bin, -1 while nothing is ready
  std::size_t num_bins = 0;

  friend bool operator==(const ExecutionPlan&, const ExecutionPlan&) = default;
};

// Throws std::invalid_argument if any transaction is still unassigned or
// the membership snapshots disagree with the bin numbers.
ExecutionPlan build_execution_plan(const BinAssignment& assignment);

// Same, from plain bin numbers (one entry per transaction).
ExecutionPlan build_execution_plan(std::span<const std::int64_t> initial_bin);

// Lookup of the transaction at (curr_bin, curr_trans); nullopt where the
// plan has nothing there or is not ready.
std::optional<TxnId> next_transaction(const ExecutionPlan& plan,
                                      std::int64_t curr_bin,
                                      std::int64_t curr_trans);

using Balance = std::int64_t;

struct WalletState {
  std::map<Address, Balance> balances;

  Balance total() const;
  friend bool operator==(const WalletState&, const WalletState&) = default;
};

// Debit `from`, credit `to`, no funds check. Accounts not yet present start
// at zero. Payload-less transactions have no effect.
void apply_transfer(WalletState& state, const Transaction& txn);

// Reference semantics: apply in ascending id order on one thread.
// `per_txn_work` is slept once per transaction to model contract cost.
WalletState execute_serial(std::span<const Transaction> txns,
                           const WalletState& initial,
                           std::chrono::microseconds per_txn_work = {});

// Bins run in order with a rendezvous between consecutive bins; within a
// bin, `num_threads` workers pull transactions through next_transaction.
// Accounts are materialized as fixed cells before any worker starts, so no
// container is mutated concurrently.
WalletState execute_plan(const ExecutionPlan& plan,
                         std::span<const Transaction> txns,
                         const WalletState& initial, std::size_t num_threads,
                         std::chrono::microseconds per_txn_work = {});

}  // namespace mbps
