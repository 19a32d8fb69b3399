// Copyright 2026 The Credlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON form of a market instance:
//
//   {"n": 2,
//    "nu": {"": 0, "1": 1, "2": 1, "1,2": 1.5},
//    "bids": [0.9, 0.4], "delta_rep": 1.0, "gamma": 0.1}
//
// Subset keys list 1-based agent indices separated by commas; "" is the
// empty set. Every subset must appear exactly once. "v_bar" and
// "allow_ties" are optional.

#ifndef CREDLAB_MARKET_IO_H_
#define CREDLAB_MARKET_IO_H_

#include <string>

#include "credlab/market.h"
#include "json.hpp"

namespace credlab::market {

// Throws ParameterError naming the offending field.
MarketInstance ParseMarketInstance(const nlohmann::json& doc);

// Capacity table only ("n" and "nu").
SubmodularCapacity ParseCapacity(const nlohmann::json& doc);

nlohmann::json ToJson(const MarketInstance& instance);

// "1,3" for agents {0, 2}.
std::string SubsetKey(Subset s);
Subset ParseSubsetKey(const std::string& key, int n);

}  // namespace credlab::market

#endif  // CREDLAB_MARKET_IO_H_
