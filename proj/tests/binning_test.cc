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

#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "mbps/workload.h"
#include "oracles.h"

namespace mbps {
namespace {

std::vector<Transaction> block_of(std::initializer_list<TransferPayload> transfers) {
  std::vector<Transaction> out;
  for (const auto& t : transfers) out.push_back(make_transaction(out.size(), t));
  return out;
}

// Fills a table from the brute-force oracle so phase two can be tested on
// its own.
std::unique_ptr<ConflictTable> oracle_table(std::span<const Transaction> txns) {
  auto table = std::make_unique<ConflictTable>(txns.size());
  auto rows = testing::naive_conflict_table(txns);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table->publish(i, std::make_unique<LowerConflicts>(rows[i]));
  }
  return table;
}

void run_bins(bool helper, std::span<const Transaction> txns, ConflictTable& table,
              BinAssignment& bins, std::size_t threads, const FaultPlan* faults = nullptr) {
  SchedulerState state(threads);
  state.conflict_txns_done.store(txns.size());
  std::vector<std::unique_ptr<WorkerContext>> ctx;
  for (std::size_t w = 0; w < threads; ++w) {
    ctx.push_back(std::make_unique<WorkerContext>(w, faults, nullptr));
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        if (helper) {
          assign_bins_helper(txns, table, bins, state, *ctx[w]);
        } else {
          assign_bins_standard(txns, table, bins, state, *ctx[w]);
        }
      } catch (const WorkerCrashed&) {
      }
    });
  }
  for (auto& t : pool) t.join();
  EXPECT_EQ(state.processed_txns_done.load(), txns.size());
}

// Property checks against the brute-force conflict relation.
void expect_valid_binning(std::span<const Transaction> txns, const BinAssignment& bins) {
  ASSERT_TRUE(bins.complete());
  auto adj = testing::naive_lower_matrix(txns);
  auto depth = testing::longest_chain_ending_at(txns);
  auto initial = bins.initial_bins();
  auto rows = bins.bin_rows();
  std::vector<int> seen(txns.size(), 0);
  for (std::size_t b = 0; b < rows.size(); ++b) {
    ASSERT_FALSE(rows[b].empty()) << "gap at bin " << b;
    ASSERT_TRUE(std::is_sorted(rows[b].begin(), rows[b].end()));
    for (TxnId i : rows[b]) {
      ++seen[i];
      ASSERT_EQ(initial[i], static_cast<std::int64_t>(b));
    }
    // No two members of one bin conflict.
    for (std::size_t x = 0; x < rows[b].size(); ++x) {
      for (std::size_t y = 0; y < x; ++y) {
        ASSERT_FALSE(adj[rows[b][x]][rows[b][y]]);
      }
    }
  }
  for (std::size_t i = 0; i < txns.size(); ++i) {
    ASSERT_EQ(seen[i], 1) << "txn " << i;
    ASSERT_EQ(initial[i] + 1, depth[i]) << "txn " << i;
    for (std::size_t j = 0; j < i; ++j) {
      if (adj[i][j]) {
        ASSERT_LT(initial[j], initial[i]);
      }
    }
  }
}

TEST(CalculateBinTest, Examples) {
  ConflictTable table(6);
  BinAssignment bins(6);
  table.publish(0, std::make_unique<LowerConflicts>());
  EXPECT_EQ(calculate_bin(0, table, bins), 0);

  bins.store_bin(0, 0);
  bins.store_bin(2, 2);
  bins.store_bin(4, 4);
  table.publish(3, std::make_unique<LowerConflicts>(LowerConflicts{2}));
  EXPECT_EQ(calculate_bin(3, table, bins), 3);
  table.publish(5, std::make_unique<LowerConflicts>(LowerConflicts{0, 4}));
  EXPECT_EQ(calculate_bin(5, table, bins), 5);

  EXPECT_THROW(calculate_bin(1, table, bins), std::logic_error);
}

TEST(CalculateBinTest, HelperReportsNotReady) {
  ConflictTable table(3);
  BinAssignment bins(3);
  EXPECT_EQ(calculate_bin_helper(2, table, bins), kNotReady);  // slot unset
  table.publish(2, std::make_unique<LowerConflicts>(LowerConflicts{0, 1}));
  EXPECT_EQ(calculate_bin_helper(2, table, bins), kNotReady);
  bins.store_bin(0, 0);
  EXPECT_EQ(calculate_bin_helper(2, table, bins), kNotReady);
  bins.store_bin(1, 1);
  EXPECT_EQ(calculate_bin_helper(2, table, bins), 2);
}

TEST(BinAssignmentTest, InsertIsIdempotentAndSorted) {
  BinAssignment bins(4);
  EXPECT_EQ(bins.members(0), nullptr);
  EXPECT_TRUE(bins.insert_member(0, 3).installed);
  EXPECT_TRUE(bins.insert_member(0, 1).installed);
  EXPECT_FALSE(bins.insert_member(0, 3).installed);
  EXPECT_EQ(*bins.members(0), (std::vector<TxnId>{1, 3}));
  EXPECT_THROW(bins.insert_member(4, 0), std::out_of_range);
}

TEST(BinAssignmentTest, PublishBinOnce) {
  BinAssignment bins(1);
  EXPECT_TRUE(bins.publish_bin(0, 2));
  EXPECT_FALSE(bins.publish_bin(0, 5));
  EXPECT_EQ(bins.bin_of(0), 2);
}

TEST(BinAssignmentTest, ConcurrentInsertsLoseNothing) {
  constexpr std::size_t kThreads = 8;
  constexpr std::size_t kPer = 200;
  BinAssignment bins(kThreads * kPer);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < kThreads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = 0; k < kPer; ++k) bins.insert_member(0, w * kPer + k);
    });
  }
  for (auto& t : pool) t.join();
  ASSERT_EQ(bins.members(0)->size(), kThreads * kPer);
}

TEST(AssignBinsTest, SmallBlocks) {
  struct Case {
    std::vector<Transaction> block;
    std::vector<std::int64_t> bins;
  };
  std::vector<Case> cases{
      {block_of({transfer("A", "B", 1), transfer("C", "D", 1), transfer("B", "E", 1)}), {0, 0, 1}},
      {block_of({transfer("A", "B", 1), transfer("B", "C", 1), transfer("C", "D", 1)}), {0, 1, 2}},
      {block_of({transfer("A", "B", 1), transfer("A", "B", 1), transfer("B", "A", 1),
                 transfer("A", "B", 1)}),
       {0, 1, 2, 3}},
  };
  for (const Case& c : cases) {
    EXPECT_EQ(bin_oracle(c.block), c.bins);
    for (bool helper : {false, true}) {
      for (std::size_t threads : {1u, 2u, 5u}) {
        auto table = oracle_table(c.block);
        BinAssignment bins(c.block.size());
        run_bins(helper, c.block, *table, bins, threads);
        EXPECT_EQ(bins.initial_bins(), c.bins) << "helper=" << helper << " threads=" << threads;
        expect_valid_binning(c.block, bins);
      }
    }
  }
}

TEST(AssignBinsTest, EmptyBlock) {
  std::vector<Transaction> none;
  for (bool helper : {false, true}) {
    ConflictTable table(0);
    BinAssignment bins(0);
    run_bins(helper, none, table, bins, 3);
    EXPECT_TRUE(bins.complete());
    EXPECT_TRUE(bins.bin_rows().empty());
  }
}

TEST(AssignBinsTest, RandomBlocksSatisfyProperties) {
  std::mt19937_64 rng(1234);
  for (int round = 0; round < 30; ++round) {
    std::size_t n = 1 + rng() % 200;
    auto block = round % 3 == 0
                     ? testing::random_access_block(rng, n, 15)
                     : generate_workload(WorkloadSpec{.n_txns = n,
                                                      .dependency_pct = double(rng() % 101),
                                                      .seed = rng()});
    auto expected = bin_oracle(block);
    for (bool helper : {false, true}) {
      for (std::size_t threads : {1u, 4u, 8u}) {
        auto table = oracle_table(block);
        BinAssignment bins(n);
        run_bins(helper, block, *table, bins, threads);
        ASSERT_EQ(bins.initial_bins(), expected);
        expect_valid_binning(block, bins);
      }
    }
  }
}

TEST(AssignBinsTest, HelperSurvivesSevenOfEightCrashed) {
  auto block = generate_workload(WorkloadSpec{.n_txns = 500, .dependency_pct = 40, .seed = 17});
  auto expected = bin_oracle(block);
  for (CrashPoint point : {CrashPoint::kPhase2PreCas}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      FaultPlan plan = make_fault_plan(8, 0, {}, 99, point, seed);
      ASSERT_EQ(plan.crashed_workers.size(), 7u);
      auto table = oracle_table(block);
      BinAssignment bins(block.size());
      run_bins(true, block, *table, bins, 8, &plan);
      ASSERT_EQ(bins.initial_bins(), expected);
      expect_valid_binning(block, bins);
    }
  }
}

TEST(AssignBinsTest, HelperFinishesUnpublishedConflictSlots) {
  // A phase-one crash can leave slots UNSET; the bin phase sweep fills them.
  auto block = generate_workload(WorkloadSpec{.n_txns = 80, .dependency_pct = 50, .seed = 8});
  ConflictTable table(block.size());
  for (std::size_t i = 0; i < block.size(); i += 2) {
    table.publish(i, std::make_unique<LowerConflicts>(compute_lower_conflicts(block, i)));
  }
  BinAssignment bins(block.size());
  run_bins(true, block, table, bins, 3);
  EXPECT_TRUE(table.complete());
  EXPECT_EQ(bins.initial_bins(), bin_oracle(block));
}

TEST(BinOracleTest, DepthEqualsLongestChain) {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 20; ++round) {
    auto block = testing::random_access_block(rng, 60, 10);
    auto depth = testing::longest_chain_ending_at(block);
    auto oracle = bin_oracle(block);
    for (std::size_t i = 0; i < block.size(); ++i) ASSERT_EQ(oracle[i] + 1, depth[i]);
  }
}

}  // namespace
}  // namespace mbps
