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

#include "mbps/worker.h"

#include <thread>

namespace mbps {

void WorkerContext::at(FaultSite site) {
  poll_cancel();
  // Claim sites double as preemption points so that an oversubscribed pool
  // interleaves workers instead of letting the first one drain the block.
  if (site == FaultSite::kPhase1PostClaim || site == FaultSite::kPhase2PostClaim) {
    std::this_thread::yield();
  }
  if (faults_ == nullptr) return;
  FaultAction action = apply_fault(*faults_, worker_id_, site);
  switch (action.kind) {
    case FaultAction::Kind::kContinue:
      return;
    case FaultAction::Kind::kSleep:
      std::this_thread::sleep_for(action.delay);
      return;
    case FaultAction::Kind::kTerminateWorker:
      // First arrival latches; a crashed worker never reaches a site again.
      crashed_.store(true, std::memory_order_release);
      throw WorkerCrashed{};
  }
}

void WorkerContext::end_of_phase(int phase) {
  if (faults_ == nullptr || crashed() || !faults_->crashed_workers.count(worker_id_)) return;
  int planned = 0;
  switch (faults_->crash_point) {
    case CrashPoint::kPhase1PostClaim:
    case CrashPoint::kPhase1PrePublish:
      planned = 1;
      break;
    case CrashPoint::kPhase2PreCas:
      planned = 2;
      break;
    case CrashPoint::kInterPhase:
      return;  // unconditionally reached
  }
  if (planned != phase) return;
  crashed_.store(true, std::memory_order_release);
  throw WorkerCrashed{};
}

}  // namespace mbps
