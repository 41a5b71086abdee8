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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fsgr/docid_bank.h"
#include "fsgr/mock_lm.h"
#include "fsgr/token_space.h"

namespace fsgr::testing {

// Rules steering a mock through `path` and then `end` whenever the prompt
// contains `context`: the next path token carries probability `p`, the rest
// of the mass spreads over the vocabulary.
inline std::vector<MockLm::Rule> path_rules(const std::string& context,
                                            const TokenSequence& path,
                                            TokenId end, double p = 0.9) {
  std::vector<MockLm::Rule> rules;
  TokenSequence prefix;
  for (std::size_t i = 0; i <= path.size(); ++i) {
    const TokenId next = i == path.size() ? end : path[i];
    rules.push_back({prefix, context, {{next, std::log(p)}}});
    if (i < path.size()) prefix.push_back(path[i]);
  }
  return rules;
}

// Every token sequence reachable in the trie that ends at a terminal, found
// by walking allowed_next from the root.
inline std::set<TokenSequence> trie_language(const DocIdBank& bank) {
  std::set<TokenSequence> out;
  std::function<void(TokenSequence&)> walk = [&](TokenSequence& prefix) {
    const auto next = bank.allowed_next(prefix);
    if (next.can_terminate) out.insert(prefix);
    for (TokenId t : next.tokens) {
      prefix.push_back(t);
      walk(prefix);
      prefix.pop_back();
    }
  };
  TokenSequence root;
  walk(root);
  return out;
}

inline std::set<TokenSequence> map_language(const DocIdBank& bank) {
  std::set<TokenSequence> out;
  for (const auto& e : bank.entries()) out.insert(e.tokens);
  return out;
}

// Random distinct docids over a small slice of the character space so that
// prefixes are shared often.
inline std::vector<TokenSequence> random_docids(std::mt19937_64& rng,
                                                std::size_t count,
                                                int alphabet, int min_len,
                                                int max_len) {
  std::uniform_int_distribution<int> len_dist(min_len, max_len);
  std::uniform_int_distribution<int> tok_dist(0, alphabet - 1);
  std::set<TokenSequence> seen;
  std::vector<TokenSequence> out;
  int attempts = 0;
  while (out.size() < count && attempts++ < 100000) {
    TokenSequence s(static_cast<std::size_t>(len_dist(rng)));
    for (auto& t : s) t = static_cast<TokenId>(33 + tok_dist(rng));  // 'A'..
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

inline DocIdBank bank_from(const TokenSpace& space,
                           const std::vector<TokenSequence>& docids,
                           const std::string& doc_prefix = "doc") {
  DocIdBank bank(space.vocab_size(), space.end());
  for (std::size_t i = 0; i < docids.size(); ++i) {
    bank.insert({space.decode(docids[i]), docids[i],
                 doc_prefix + std::to_string(i), 1});
  }
  return bank;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("fsgr-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p,
                       const std::string& contents) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << contents;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fsgr::testing
