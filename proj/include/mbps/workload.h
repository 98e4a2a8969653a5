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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mbps/executor.h"
#include "mbps/txn_model.h"

namespace mbps {

struct WorkloadSpec {
  std::size_t n_txns = 0;
  // Upper bound on the shared ("hot") account pool.
  std::size_t n_accounts = 1000;
  double dependency_pct = 0.0;
  std::int64_t amount_min = 1;
  std::int64_t amount_max = 100;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument.
  void validate() const;
};

// Conflict parameters of a block, all in percent:
//   cp1  transactions with at least one conflicting peer
//   cp2  unordered conflicting pairs per transaction (can exceed 100)
//   cp3  transactions with no conflicting peer (100 - cp1)
struct ConflictParams {
  double cp1 = 0.0;
  double cp2 = 0.0;
  double cp3 = 0.0;
};

// Hot-pool size for `hot_txns` dependent transactions: large enough to keep
// chains shallow, small enough that a hot transaction almost never ends up
// without a conflicting peer (about eight touches per hot account).
std::size_t hot_pool_size(std::size_t hot_txns, std::size_t n_accounts);

// Seeded block of wallet transfers. round(n * pct / 100) randomly placed
// transactions move funds between two accounts of the hot pool "H<k>"; every
// other transaction gets its own fresh pair "F<2i>"/"F<2i+1>" and so
// conflicts with nothing.
std::vector<Transaction> generate_workload(const WorkloadSpec& spec);

ConflictParams compute_conflict_params(std::span<const Transaction> txns);

// Balance given to every account a block touches before execution. Large
// enough that no generated block drives a balance negative.
inline constexpr Balance kInitialBalance = 1'000'000'000;
WalletState initial_state_for(std::span<const Transaction> txns,
                              Balance balance = kInitialBalance);

// JSON array of {"id","from","to","amount"} objects.
std::string workload_to_json(std::span<const Transaction> txns);
std::vector<Transaction> workload_from_json(const std::string& text);
void write_workload_file(const std::filesystem::path& path,
                         std::span<const Transaction> txns);
std::vector<Transaction> read_workload_file(const std::filesystem::path& path);

}  // namespace mbps
