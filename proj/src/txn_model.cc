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

#include "mbps/txn_model.h"

#include <algorithm>
#include <stdexcept>

namespace mbps {

AddressSet make_address_set(std::vector<Address> addresses) {
  std::sort(addresses.begin(), addresses.end());
  addresses.erase(std::unique(addresses.begin(), addresses.end()),
                  addresses.end());
  return addresses;
}

Transaction make_transaction(TxnId id, TransferPayload payload) {
  if (payload.from == payload.to) {
    throw std::invalid_argument("self-transfer from account '" +
                                payload.from.str() + "'");
  }
  if (payload.amount < 0) {
    throw std::invalid_argument("negative transfer amount");
  }
  AddressSet footprint = make_address_set({payload.from, payload.to});
  return Transaction{id, footprint, footprint, std::move(payload)};
}

Transaction make_access_transaction(TxnId id, std::vector<Address> reads,
                                    std::vector<Address> writes) {
  return Transaction{id, make_address_set(std::move(reads)),
                     make_address_set(std::move(writes)), std::nullopt};
}

nlohmann::ordered_json to_json(const Transaction& txn) {
  if (!txn.payload) {
    throw std::invalid_argument("only wallet transfers have a JSON form");
  }
  return nlohmann::ordered_json{{"id", txn.id},
                                 {"from", txn.payload->from.str()},
                                 {"to", txn.payload->to.str()},
                                 {"amount", txn.payload->amount}};
}

Transaction transaction_from_json(const nlohmann::json& j) {
  try {
    if (!j.at("id").is_number_unsigned()) {
      throw std::invalid_argument("transaction id must be a non-negative integer");
    }
    return make_transaction(
        j.at("id").get<TxnId>(),
        TransferPayload{Address(j.at("from").get<std::string>()),
                        Address(j.at("to").get<std::string>()),
                        j.at("amount").get<std::int64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed transaction: ") +
                                e.what());
  }
}

}  // namespace mbps
