// Copyright 2026 The fsgr Authors.
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

#include "fsgr/prompt.h"

#include <stdexcept>

#include "fsgr/errors.h"

namespace fsgr {

PromptTemplate PromptTemplate::docid_default() {
  return PromptTemplate({
      {"Provide list of the olympic games?", "olympic-games-list"},
      {"What is minority interest in accounting?",
       "subsidiary-corporation-parent"},
      {"How does photosynthesis work in plants?",
       "photosynthesis-plant-process"},
  });
}

PromptTemplate PromptTemplate::from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("demonstrations") ||
      !doc.at("demonstrations").is_array()) {
    throw ConfigError("prompt template needs a \"demonstrations\" list");
  }
  std::vector<Demonstration> demos;
  for (const auto& d : doc.at("demonstrations")) {
    if (!d.is_object() || !d.contains("query") || !d.contains("identifier")) {
      throw ConfigError("each demonstration needs a query and an identifier");
    }
    demos.push_back({d.at("query").get<std::string>(),
                     d.at("identifier").get<std::string>()});
  }
  return PromptTemplate(std::move(demos));
}

std::string PromptTemplate::render(std::string_view query) const {
  if (query.empty()) throw std::invalid_argument("query must not be empty");
  std::string out;
  std::size_t n = 0;
  for (const auto& demo : demonstrations_) {
    ++n;
    out += "Example" + std::to_string(n) + ":\n";
    out += "Query: " + demo.query + "\n";
    out += "Identifier: " + demo.identifier + "\n\n";
  }
  out += "Example" + std::to_string(n + 1) + ":\n";
  out += "Query: ";
  out += query;
  out += "\nIdentifier:";
  return out;
}

}  // namespace fsgr
