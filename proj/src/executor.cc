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

#include "mbps/executor.h"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <stdexcept>
#include <thread>

namespace mbps {

ExecutionPlan build_execution_plan(std::span<const std::int64_t> initial_bin) {
  ExecutionPlan plan;
  std::int64_t max_bin = -1;
  for (std::int64_t b : initial_bin) {
    if (b < 0) throw std::invalid_argument("incomplete bin assignment");
    max_bin = std::max(max_bin, b);
  }
  plan.num_bins = static_cast<std::size_t>(max_bin + 1);
  plan.bin_matrix.resize(plan.num_bins);
  for (TxnId i = 0; i < initial_bin.size(); ++i) {
    plan.bin_matrix[static_cast<std::size_t>(initial_bin[i])].push_back(i);
  }
  plan.total_trans_bin.reserve(plan.num_bins);
  for (const auto& row : plan.bin_matrix) {
    if (row.empty()) throw std::invalid_argument("bin numbers leave a gap");
    plan.total_trans_bin.push_back(row.size());
  }
  plan.glb_ptr = static_cast<std::int64_t>(plan.num_bins) - 1;
  return plan;
}

ExecutionPlan build_execution_plan(const BinAssignment& assignment) {
  std::vector<std::int64_t> bins = assignment.initial_bins();
  ExecutionPlan plan = build_execution_plan(bins);
  std::vector<std::vector<TxnId>> rows = assignment.bin_rows();
  if (rows != plan.bin_matrix) {
    throw std::invalid_argument("bin membership disagrees with bin numbers");
  }
  return plan;
}

std::optional<TxnId> next_transaction(const ExecutionPlan& plan,
                                      std::int64_t curr_bin,
                                      std::int64_t curr_trans) {
  if (plan.glb_ptr < 0) return std::nullopt;
  if (curr_bin < 0 || curr_bin > plan.glb_ptr) return std::nullopt;
  auto bin = static_cast<std::size_t>(curr_bin);
  auto count = static_cast<std::int64_t>(plan.total_trans_bin[bin]);
  if (curr_trans < 0 || curr_trans >= count) return std::nullopt;
  return plan.bin_matrix[bin][static_cast<std::size_t>(curr_trans)];
}

Balance WalletState::total() const {
  Balance sum = 0;
  for (const auto& [_, balance] : balances) sum += balance;
  return sum;
}

void apply_transfer(WalletState& state, const Transaction& txn) {
  if (!txn.payload) return;
  state.balances[txn.payload->from] -= txn.payload->amount;
  state.balances[txn.payload->to] += txn.payload->amount;
}

WalletState execute_serial(std::span<const Transaction> txns,
                           const WalletState& initial,
                           std::chrono::microseconds per_txn_work) {
  WalletState state = initial;
  for (const Transaction& txn : txns) {
    if (per_txn_work.count() > 0) std::this_thread::sleep_for(per_txn_work);
    apply_transfer(state, txn);
  }
  return state;
}

namespace {

struct Cells {
  std::vector<Address> accounts;
  std::vector<Balance> balances;
  // Per transaction: (from cell, to cell), or none for payload-less ones.
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> routes;
};

Cells materialize(std::span<const Transaction> txns, const WalletState& initial) {
  std::map<Address, std::size_t> index;
  Cells cells;
  auto cell_of = [&](const Address& a) {
    auto [it, inserted] = index.emplace(a, cells.accounts.size());
    if (inserted) {
      cells.accounts.push_back(a);
      cells.balances.push_back(0);
    }
    return it->second;
  };
  for (const auto& [address, balance] : initial.balances) {
    cells.balances[cell_of(address)] = balance;
  }
  cells.routes.reserve(txns.size());
  for (const Transaction& txn : txns) {
    if (txn.payload) {
      cells.routes.emplace_back(
          std::pair{cell_of(txn.payload->from), cell_of(txn.payload->to)});
    } else {
      cells.routes.emplace_back(std::nullopt);
    }
  }
  return cells;
}

}  // namespace

WalletState execute_plan(const ExecutionPlan& plan,
                         std::span<const Transaction> txns,
                         const WalletState& initial, std::size_t num_threads,
                         std::chrono::microseconds per_txn_work) {
  if (num_threads == 0) throw std::invalid_argument("num_threads must be >= 1");
  std::size_t planned = 0;
  for (const auto& row : plan.bin_matrix) {
    for (TxnId id : row) {
      if (id >= txns.size()) throw std::invalid_argument("plan references unknown transaction");
    }
    planned += row.size();
  }
  if (planned != txns.size()) throw std::invalid_argument("plan does not cover the block");

  Cells cells = materialize(txns, initial);

  if (plan.num_bins > 0) {
    std::vector<std::atomic<std::int64_t>> cursors(plan.num_bins);
    for (auto& c : cursors) c.store(0, std::memory_order_relaxed);
    std::barrier rendezvous(static_cast<std::ptrdiff_t>(num_threads));

    auto worker = [&] {
      for (std::size_t b = 0; b < plan.num_bins; ++b) {
        auto bin = static_cast<std::int64_t>(b);
        for (;;) {
          std::int64_t k = cursors[b].fetch_add(1, std::memory_order_relaxed);
          std::optional<TxnId> id = next_transaction(plan, bin, k);
          if (!id) break;
          if (per_txn_work.count() > 0) std::this_thread::sleep_for(per_txn_work);
          // Transactions of one bin touch disjoint cells.
          if (const auto& route = cells.routes[*id]) {
            Balance amount = txns[*id].payload->amount;
            cells.balances[route->first] -= amount;
            cells.balances[route->second] += amount;
          }
        }
        rendezvous.arrive_and_wait();
      }
    };

    std::vector<std::jthread> pool;
    pool.reserve(num_threads);
    for (std::size_t t = 0; t < num_threads; ++t) pool.emplace_back(worker);
  }

  WalletState result;
  for (std::size_t c = 0; c < cells.accounts.size(); ++c) {
    result.balances.emplace(cells.accounts[c], cells.balances[c]);
  }
  return result;
}

}  // namespace mbps
