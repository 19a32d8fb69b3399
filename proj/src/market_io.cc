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

#include "credlab/market_io.h"

#include <set>
#include <sstream>
#include <vector>

#include "credlab/errors.h"

namespace credlab::market {

namespace {

using nlohmann::json;

const json& Field(const json& doc, const char* name) {
  if (!doc.contains(name)) {
    throw ParameterError(std::string("market instance: missing field '") +
                         name + "'");
  }
  return doc.at(name);
}

double Number(const json& doc, const char* name) {
  const json& v = Field(doc, name);
  if (!v.is_number()) {
    throw ParameterError(std::string("market instance: field '") + name +
                         "' must be a number");
  }
  return v.get<double>();
}

}  // namespace

std::string SubsetKey(Subset s) {
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < kMaxAgents; ++i) {
    if (s & (Subset{1} << i)) {
      out << (first ? "" : ",") << i + 1;
      first = false;
    }
  }
  return out.str();
}

Subset ParseSubsetKey(const std::string& key, int n) {
  Subset s = 0;
  if (key.empty()) return s;
  std::stringstream in(key);
  std::string token;
  while (std::getline(in, token, ',')) {
    std::size_t used = 0;
    int agent = 0;
    try {
      agent = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size() || agent < 1 || agent > n) {
      throw ParameterError("market instance: bad subset key \"" + key +
                           "\" (expected 1-based agent indices 1.." +
                           std::to_string(n) + ")");
    }
    const Subset bit = Subset{1} << (agent - 1);
    if (s & bit) {
      throw ParameterError("market instance: repeated agent in subset key \"" +
                           key + "\"");
    }
    s |= bit;
  }
  return s;
}

SubmodularCapacity ParseCapacity(const json& doc) {
  const json& n_field = Field(doc, "n");
  if (!n_field.is_number_integer()) {
    throw ParameterError("market instance: field 'n' must be an integer");
  }
  const int n = n_field.get<int>();
  if (n < 2 || n > kMaxAgents) {
    throw ParameterError("market instance: 'n' must lie in [2, 12]");
  }
  const json& nu = Field(doc, "nu");
  if (!nu.is_object()) {
    throw ParameterError("market instance: 'nu' must be an object");
  }
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> table(size, 0.0);
  std::vector<bool> seen(size, false);
  for (const auto& [key, value] : nu.items()) {
    const Subset s = ParseSubsetKey(key, n);
    if (seen[s]) {
      throw ParameterError("market instance: subset {" + SubsetKey(s) +
                           "} listed twice in 'nu'");
    }
    if (!value.is_number()) {
      throw ParameterError("market instance: nu[\"" + key +
                           "\"] must be a number");
    }
    seen[s] = true;
    table[s] = value.get<double>();
  }
  for (Subset s = 0; s < size; ++s) {
    if (!seen[s]) {
      throw ParameterError("market instance: 'nu' is missing subset \"" +
                           SubsetKey(s) + "\"");
    }
  }
  return SubmodularCapacity(n, std::move(table));
}

MarketInstance ParseMarketInstance(const json& doc) {
  if (!doc.is_object()) {
    throw ParameterError("market instance must be a JSON object");
  }
  static const std::set<std::string> kKnown = {
      "n", "nu", "bids", "delta_rep", "gamma", "v_bar", "allow_ties"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.contains(key)) {
      throw ParameterError("market instance: unknown field '" + key + "'");
    }
  }
  SubmodularCapacity capacity = ParseCapacity(doc);
  const json& bids = Field(doc, "bids");
  if (!bids.is_array()) {
    throw ParameterError("market instance: 'bids' must be an array");
  }
  std::vector<double> bid_values;
  for (const json& b : bids) {
    if (!b.is_number()) {
      throw ParameterError("market instance: 'bids' entries must be numbers");
    }
    bid_values.push_back(b.get<double>());
  }
  MarketInstance instance{std::move(capacity), std::move(bid_values),
                          Number(doc, "delta_rep"), Number(doc, "gamma")};
  if (doc.contains("v_bar")) instance.v_bar = Number(doc, "v_bar");
  if (doc.contains("allow_ties")) {
    if (!doc.at("allow_ties").is_boolean()) {
      throw ParameterError("market instance: 'allow_ties' must be a boolean");
    }
    instance.allow_ties = doc.at("allow_ties").get<bool>();
  }
  ValidateInstance(instance);
  return instance;
}

json ToJson(const MarketInstance& instance) {
  json nu = json::object();
  const auto& table = instance.capacity.table();
  for (Subset s = 0; s < table.size(); ++s) nu[SubsetKey(s)] = table[s];
  json doc = {{"n", instance.capacity.n()},
              {"nu", nu},
              {"bids", instance.bids},
              {"delta_rep", instance.delta_rep},
              {"gamma", instance.gamma}};
  if (instance.v_bar != 1.0) doc["v_bar"] = instance.v_bar;
  if (instance.allow_ties) doc["allow_ties"] = true;
  return doc;
}

}  // namespace credlab::market
