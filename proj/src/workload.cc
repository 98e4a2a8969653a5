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

#include "mbps/workload.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mbps/conflict.h"

namespace mbps {

void WorkloadSpec::validate() const {
  if (n_accounts < 2) throw std::invalid_argument("n_accounts must be >= 2");
  if (!(dependency_pct >= 0.0 && dependency_pct <= 100.0)) {
    throw std::invalid_argument("dependency_pct outside [0, 100]");
  }
  if (amount_min < 0 || amount_max < amount_min) {
    throw std::invalid_argument("amount range must be a non-negative interval");
  }
}

std::size_t hot_pool_size(std::size_t hot_txns, std::size_t n_accounts) {
  std::size_t pool = (hot_txns + 3) / 4;
  return std::clamp<std::size_t>(pool, 2, std::max<std::size_t>(n_accounts, 2));
}

std::vector<Transaction> generate_workload(const WorkloadSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_txns;
  const auto hot_txns = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * spec.dependency_pct / 100.0));
  const std::size_t pool = hot_pool_size(hot_txns, spec.n_accounts);

  std::mt19937_64 rng(spec.seed);
  std::vector<char> is_hot(n, 0);
  std::fill(is_hot.begin(), is_hot.begin() + static_cast<std::ptrdiff_t>(hot_txns), 1);
  std::shuffle(is_hot.begin(), is_hot.end(), rng);

  std::uniform_int_distribution<std::size_t> pick_account(0, pool - 1);
  std::uniform_int_distribution<std::int64_t> pick_amount(spec.amount_min, spec.amount_max);

  std::vector<Transaction> block;
  block.reserve(n);
  for (TxnId i = 0; i < n; ++i) {
    std::string from;
    std::string to;
    if (is_hot[i]) {
      std::size_t a = pick_account(rng);
      std::size_t b = pick_account(rng);
      while (b == a) b = pick_account(rng);
      from = "H" + std::to_string(a);
      to = "H" + std::to_string(b);
    } else {
      from = "F" + std::to_string(2 * i);
      to = "F" + std::to_string(2 * i + 1);
      if (rng() & 1) std::swap(from, to);
    }
    block.push_back(make_transaction(i, transfer(from, to, pick_amount(rng))));
  }
  return block;
}

ConflictParams compute_conflict_params(std::span<const Transaction> txns) {
  const std::size_t n = txns.size();
  if (n == 0) return {};
  std::vector<char> dependent(n, 0);
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (check_conflicts(txns[i], txns[j])) {
        ++pairs;
        dependent[i] = dependent[j] = 1;
      }
    }
  }
  auto dependent_count =
      static_cast<double>(std::count(dependent.begin(), dependent.end(), 1));
  ConflictParams cp;
  cp.cp1 = 100.0 * dependent_count / static_cast<double>(n);
  cp.cp3 = 100.0 * (static_cast<double>(n) - dependent_count) / static_cast<double>(n);
  cp.cp2 = 100.0 * static_cast<double>(pairs) / static_cast<double>(n);
  return cp;
}

WalletState initial_state_for(std::span<const Transaction> txns, Balance balance) {
  WalletState state;
  for (const Transaction& txn : txns) {
    if (!txn.payload) continue;
    state.balances.emplace(txn.payload->from, balance);
    state.balances.emplace(txn.payload->to, balance);
  }
  return state;
}

std::string workload_to_json(std::span<const Transaction> txns) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Transaction& txn : txns) arr.push_back(to_json(txn));
  return arr.dump();
}

std::vector<Transaction> workload_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("workload is not valid JSON: ") + e.what());
  }
  if (!arr.is_array()) throw std::invalid_argument("workload must be a JSON array");
  std::vector<Transaction> block;
  block.reserve(arr.size());
  for (const auto& item : arr) {
    Transaction txn = transaction_from_json(item);
    if (txn.id != block.size()) {
      throw std::invalid_argument("transaction ids must equal their position in the block");
    }
    block.push_back(std::move(txn));
  }
  return block;
}

void write_workload_file(const std::filesystem::path& path,
                         std::span<const Transaction> txns) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << workload_to_json(txns) << '\n';
}

std::vector<Transaction> read_workload_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return workload_from_json(buf.str());
}

}  // namespace mbps
