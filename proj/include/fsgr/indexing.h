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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsgr/docid_bank.h"
#include "fsgr/lm_provider.h"
#include "fsgr/prompt.h"
#include "fsgr/token_space.h"

namespace fsgr {

struct Document {
  std::string doc_ref;
  std::string text;
};

struct PseudoQuery {
  std::string doc_ref;
  std::string text;
  int index = 1;  // 1-based
};

struct IndexingConfig {
  int n_docids_per_doc = 10;
  int min_docid_tokens = 3;
  int max_docid_tokens = 15;
  // Extra rounds for documents that lost every docid to collisions.
  int regeneration_rounds = 1;
  // 0 = greedy. Sampling seeds derive from `seed`, the doc and the query.
  double temperature = 0.0;
  std::uint64_t seed = 0;
  bool lowercase = false;
  int workers = 1;
  // Length cap for LM-generated pseudo queries.
  int max_query_tokens = 48;

  // Throws ConfigError.
  void validate() const;
};

struct IndexingStats {
  std::size_t documents = 0;
  std::size_t docids_generated = 0;
  std::size_t within_doc_duplicates = 0;
  std::size_t generation_failures = 0;
  std::size_t collisions = 0;
  std::size_t docids_kept = 0;
  std::size_t regeneration_rounds_run = 0;
  std::size_t orphans_remaining = 0;
  std::vector<std::string> failed_docs;

  nlohmann::json to_json() const;
};

struct IndexingResult {
  DocIdBank bank;
  CollisionReport collisions;
  IndexingStats stats;
};

class PseudoQuerySource {
 public:
  virtual ~PseudoQuerySource() = default;
  // May return fewer than n queries; the indexer pads by cycling.
  virtual std::vector<PseudoQuery> queries_for(const Document& doc,
                                               int n) const = 0;
};

// Pseudo queries produced by prompting the LM with the document text. Each
// query's prompt lists the ones already generated, so greedy decoding still
// yields distinct questions from a real model.
class LmPseudoQuerySource : public PseudoQuerySource {
 public:
  LmPseudoQuerySource(const LanguageModel& lm, const TokenSpace& space,
                      int max_query_tokens = 48)
      : lm_(lm), space_(space), max_query_tokens_(max_query_tokens) {}

  std::vector<PseudoQuery> queries_for(const Document& doc,
                                       int n) const override;

 private:
  const LanguageModel& lm_;
  const TokenSpace& space_;
  int max_query_tokens_;
};

// Queries read from a file, keyed by doc_ref. Documents missing from the file
// go to `fallback` when one is given, and get no queries otherwise.
class FilePseudoQuerySource : public PseudoQuerySource {
 public:
  explicit FilePseudoQuerySource(
      std::map<std::string, std::vector<std::string>> by_doc,
      const PseudoQuerySource* fallback = nullptr)
      : by_doc_(std::move(by_doc)), fallback_(fallback) {}

  std::vector<PseudoQuery> queries_for(const Document& doc,
                                       int n) const override;

 private:
  std::map<std::string, std::vector<std::string>> by_doc_;
  const PseudoQuerySource* fallback_;
};

std::string pseudo_query_prompt(std::string_view doc_text,
                                std::span<const std::string> previous);

// Throws std::invalid_argument when n < 1.
std::vector<PseudoQuery> generate_pseudo_queries(const LanguageModel& lm,
                                                 const TokenSpace& space,
                                                 const Document& doc, int n,
                                                 int max_query_tokens = 48);

// Exactly n queries: the first n supplied, or the supplied ones cycled with an
// " (aspect k)" hint on the repeats.
std::vector<PseudoQuery> fill_pseudo_queries(std::string_view doc_ref,
                                             std::span<const PseudoQuery> supplied,
                                             int n);

// Mints docids for documents from their pseudo queries and builds the bank.
class Indexer {
 public:
  Indexer(const LanguageModel& lm, const TokenSpace& space,
          PromptTemplate prompt, IndexingConfig config);

  // One docid for one pseudo query: the one-line completion of the few-shot
  // prompt, trimmed and re-encoded. Throws GenerationError when the result
  // is empty or outside the token-length window.
  DocIdEntry generate_docid(const PseudoQuery& query) const;

  // Up to n distinct docids for a document. Throws IndexingFailed when every
  // generation fails. TransportError propagates.
  std::vector<DocIdEntry> index_document(
      const Document& doc, std::span<const PseudoQuery> queries) const;

  IndexingResult index_corpus(std::span<const Document> corpus,
                              const PseudoQuerySource& source) const;

  const IndexingConfig& config() const { return config_; }

 private:
  struct DocOutcome {
    std::vector<DocIdEntry> entries;
    std::size_t generated = 0;
    std::size_t duplicates = 0;
    std::size_t failures = 0;
    bool failed = false;
  };
  DocOutcome index_one(const Document& doc,
                       std::span<const PseudoQuery> queries) const;

  const LanguageModel& lm_;
  const TokenSpace& space_;
  PromptTemplate prompt_;
  IndexingConfig config_;
};

// JSON lines {"doc_id": ..., "text": ...}.
std::vector<Document> load_corpus(const std::filesystem::path& path);
// JSON lines {"doc_id": ..., "query": ...}, grouped in file order.
std::map<std::string, std::vector<std::string>> load_pseudo_queries(
    const std::filesystem::path& path);

}  // namespace fsgr
