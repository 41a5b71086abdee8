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

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace fsgr {

struct Demonstration {
  std::string query;
  std::string identifier;
};

// Few-shot prompt shared by indexing and retrieval. Renders numbered
// "ExampleN:" blocks, one per demonstration, followed by a final block for
// the new query whose "Identifier:" line is left open for the completion:
//
//   Example1:
//   Query: Provide list of the olympic games?
//   Identifier: olympic-games-list
//
//   ...
//
//   Example4:
//   Query: <new query>
//   Identifier:
class PromptTemplate {
 public:
  PromptTemplate() = default;
  explicit PromptTemplate(std::vector<Demonstration> demonstrations)
      : demonstrations_(std::move(demonstrations)) {}

  // The three demonstrations used for docid generation by default.
  static PromptTemplate docid_default();
  // {"demonstrations": [{"query": ..., "identifier": ...}, ...]}
  static PromptTemplate from_json(const nlohmann::json& doc);

  // Throws std::invalid_argument for an empty query.
  std::string render(std::string_view query) const;

  const std::vector<Demonstration>& demonstrations() const {
    return demonstrations_;
  }

 private:
  std::vector<Demonstration> demonstrations_;
};

}  // namespace fsgr
