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

#include "mbps/faults.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace mbps {

FaultSite to_site(CrashPoint point) {
  switch (point) {
    case CrashPoint::kPhase1PostClaim:
      return FaultSite::kPhase1PostClaim;
    case CrashPoint::kPhase1PrePublish:
      return FaultSite::kPhase1PrePublish;
    case CrashPoint::kInterPhase:
      return FaultSite::kInterPhase;
    case CrashPoint::kPhase2PreCas:
      return FaultSite::kPhase2PreCas;
  }
  return FaultSite::kPhase1PrePublish;
}

std::string_view to_string(CrashPoint point) {
  switch (point) {
    case CrashPoint::kPhase1PostClaim:
      return "PHASE1_POST_CLAIM";
    case CrashPoint::kPhase1PrePublish:
      return "PHASE1_PRE_PUBLISH";
    case CrashPoint::kInterPhase:
      return "INTER_PHASE";
    case CrashPoint::kPhase2PreCas:
      return "PHASE2_PRE_CAS";
  }
  return "?";
}

std::optional<CrashPoint> parse_crash_point(std::string_view text) {
  for (CrashPoint p : {CrashPoint::kPhase1PostClaim, CrashPoint::kPhase1PrePublish,
                       CrashPoint::kInterPhase, CrashPoint::kPhase2PreCas}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

void FaultPlan::validate(std::size_t num_threads) const {
  for (std::size_t w : delayed_workers) {
    if (w >= num_threads) throw std::invalid_argument("delayed worker out of range");
    if (crashed_workers.count(w)) {
      throw std::invalid_argument("worker both delayed and crashed");
    }
  }
  for (std::size_t w : crashed_workers) {
    if (w >= num_threads) throw std::invalid_argument("crashed worker out of range");
  }
  if (delay_per_claim.count() < 0) throw std::invalid_argument("negative delay");
}

std::size_t workers_for_percentage(std::size_t num_threads, double pct) {
  if (pct < 0.0 || pct > 100.0 || std::isnan(pct)) {
    throw std::invalid_argument("percentage outside [0, 100]");
  }
  if (pct == 0.0) return 0;
  auto count = static_cast<std::size_t>(
      std::llround(static_cast<double>(num_threads) * pct / 100.0));
  return std::max<std::size_t>(count, 1);
}

FaultPlan make_fault_plan(std::size_t num_threads, double delayed_pct,
                          std::chrono::microseconds delay, double crashed_pct,
                          CrashPoint crash_point, std::uint64_t seed) {
  std::size_t n_crashed = workers_for_percentage(num_threads, crashed_pct);
  std::size_t n_delayed = workers_for_percentage(num_threads, delayed_pct);
  if (crashed_pct < 100.0 && n_crashed >= num_threads) {
    n_crashed = num_threads > 0 ? num_threads - 1 : 0;
    if (n_crashed == 0 && crashed_pct > 0.0) {
      throw std::invalid_argument("crash plan needs at least two workers");
    }
  }
  if (n_crashed + n_delayed > num_threads) {
    throw std::invalid_argument("delayed and crashed selections overlap");
  }

  std::vector<std::size_t> order(num_threads);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FaultPlan plan;
  plan.crash_point = crash_point;
  plan.seed = seed;
  plan.delay_per_claim = n_delayed > 0 ? delay : std::chrono::microseconds{0};
  plan.crashed_workers.insert(order.begin(), order.begin() + n_crashed);
  plan.delayed_workers.insert(order.begin() + n_crashed,
                              order.begin() + n_crashed + n_delayed);
  return plan;
}

FaultAction apply_fault(const FaultPlan& plan, std::size_t worker_id,
                        FaultSite site) {
  if (plan.crashed_workers.count(worker_id) && to_site(plan.crash_point) == site) {
    return {FaultAction::Kind::kTerminateWorker, {}};
  }
  bool claim_site =
      site == FaultSite::kPhase1PostClaim || site == FaultSite::kPhase2PostClaim;
  if (claim_site && plan.delayed_workers.count(worker_id) &&
      plan.delay_per_claim.count() > 0) {
    return {FaultAction::Kind::kSleep, plan.delay_per_claim};
  }
  return {};
}

}  // namespace mbps
