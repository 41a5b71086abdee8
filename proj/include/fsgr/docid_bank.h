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

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsgr/token_space.h"

namespace fsgr {

// One free-text docid owned by one document.
struct DocIdEntry {
  std::string docid_text;
  TokenSequence tokens;
  std::string doc_ref;
  // 1-based index of the pseudo query that produced it; 0 when unknown.
  int origin = 0;
};

enum class InsertStatus { kInserted, kDuplicateSameDoc, kCollision };

struct InsertOutcome {
  InsertStatus status;
  // Owner already holding the docid, for kCollision.
  std::string existing_doc;
};

struct CollisionReport {
  // Each removed docid with every document that claimed it (sorted).
  std::vector<std::pair<std::string, std::vector<std::string>>>
      colliding_docids;
  // Claimants left without any docid.
  std::vector<std::string> orphaned_docs;

  bool empty() const {
    return colliding_docids.empty() && orphaned_docs.empty();
  }
  nlohmann::json to_json() const;
};

struct AllowedNext {
  std::vector<TokenId> tokens;  // sorted ascending
  bool can_terminate = false;
  std::optional<std::string> terminal_doc;
};

struct BankStats {
  std::size_t documents = 0;
  std::size_t docids = 0;
  std::size_t collisions = 0;
  double mean_docids_per_doc = 0.0;
  std::size_t trie_nodes = 0;

  nlohmann::json to_json() const;
};

struct TrieNode;

// The docid bank: a trie over docid token sequences plus the docid <-> doc
// maps. Each docid belongs to exactly one document. A docid claimed by a
// second document is recorded as a collision and, on resolve_collisions(),
// dropped from every claimant.
//
// Terminals are explicit, so one docid may be a strict prefix of another.
// Docid tokens may not contain the space's end token, which the decoder
// reserves to mark completion.
//
// Not synchronized: mutate from one thread, then share const references
// freely for retrieval.
class DocIdBank {
 public:
  static constexpr std::size_t kDefaultBranchingThreshold = 16;

  DocIdBank(std::size_t vocab_size, TokenId end_token,
            std::size_t branching_threshold = kDefaultBranchingThreshold);
  ~DocIdBank();
  DocIdBank(const DocIdBank& other);
  DocIdBank& operator=(const DocIdBank& other);
  DocIdBank(DocIdBank&&) noexcept;
  DocIdBank& operator=(DocIdBank&&) noexcept;

  // Throws TokenOutOfRange for empty token lists, ids outside the vocabulary,
  // or the end token.
  InsertOutcome insert(DocIdEntry entry);

  // Drops every docid with two or more claimants, from all of them.
  CollisionReport resolve_collisions();

  // Throws PrefixNotInTrie when the prefix leaves the trie.
  AllowedNext allowed_next(std::span<const TokenId> prefix) const;

  std::optional<std::string> lookup(std::string_view docid_text) const;
  // Entry for an exact docid token sequence, if it is one.
  const DocIdEntry* find(std::span<const TokenId> tokens) const;

  std::size_t remove_document(std::string_view doc_ref);

  // Inserts every entry of `other` and re-resolves collisions.
  CollisionReport merge(const DocIdBank& other);

  void save(const std::filesystem::path& path) const;
  static DocIdBank load(const std::filesystem::path& path,
                        const TokenSpace& space);

  std::size_t vocab_size() const { return vocab_size_; }
  TokenId end_token() const { return end_token_; }
  bool empty() const { return by_docid_.empty(); }
  std::size_t docid_count() const { return by_docid_.size(); }
  std::size_t document_count() const { return by_doc_.size(); }
  std::size_t node_count() const { return node_count_; }
  std::size_t collision_count() const { return collisions_resolved_; }
  std::size_t pending_collisions() const { return pending_.size(); }
  BankStats stats() const;

  bool has_document(std::string_view doc_ref) const;
  std::vector<std::string> documents() const;
  std::vector<std::string> docids_of(std::string_view doc_ref) const;
  // All entries, ordered by docid text.
  std::vector<DocIdEntry> entries() const;

  // Same docid -> doc map and same token sequences.
  friend bool operator==(const DocIdBank& a, const DocIdBank& b);

 private:
  const TrieNode* walk(std::span<const TokenId> tokens) const;
  void erase_path(const TokenSequence& tokens);

  std::size_t vocab_size_;
  TokenId end_token_;
  std::size_t branching_threshold_;
  std::unique_ptr<TrieNode> root_;
  std::size_t node_count_ = 1;
  std::size_t collisions_resolved_ = 0;
  std::map<std::string, DocIdEntry, std::less<>> by_docid_;
  std::map<std::string, std::set<std::string>, std::less<>> by_doc_;
  // docid text -> every document that claimed it
  std::map<std::string, std::set<std::string>> pending_;
};

}  // namespace fsgr
