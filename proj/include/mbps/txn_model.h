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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mbps {

using TxnId = std::size_t;

// Opaque account key. Only equality, ordering and hashing matter to the
// scheduler; the contents are never interpreted.
class Address {
 public:
  Address() = default;
  explicit Address(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;

 private:
  std::string value_;
};

// Sorted, duplicate-free list of addresses.
using AddressSet = std::vector<Address>;

AddressSet make_address_set(std::vector<Address> addresses);

struct TransferPayload {
  Address from;
  Address to;
  std::int64_t amount = 0;

  friend bool operator==(const TransferPayload&, const TransferPayload&) = default;
};

// A unit of scheduling. `id` is the position of the transaction inside its
// block. Wallet transfers carry a payload; generic access-only transactions
// (used to exercise read-only or write-only footprints) do not.
struct Transaction {
  TxnId id = 0;
  AddressSet read_set;
  AddressSet write_set;
  std::optional<TransferPayload> payload;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

// Throws std::invalid_argument on a self-transfer or a negative amount.
Transaction make_transaction(TxnId id, TransferPayload payload);

// Transaction with an explicit footprint and no state effect.
Transaction make_access_transaction(TxnId id, std::vector<Address> reads,
                                    std::vector<Address> writes);

inline TransferPayload transfer(std::string from, std::string to,
                                std::int64_t amount) {
  return TransferPayload{Address(std::move(from)), Address(std::move(to)),
                         amount};
}

// {"id":0,"from":"A","to":"B","amount":10}, keys in that order.
nlohmann::ordered_json to_json(const Transaction& txn);
Transaction transaction_from_json(const nlohmann::json& j);

}  // namespace mbps

template <>
struct std::hash<mbps::Address> {
  std::size_t operator()(const mbps::Address& a) const noexcept {
    return std::hash<std::string>{}(a.str());
  }
};
