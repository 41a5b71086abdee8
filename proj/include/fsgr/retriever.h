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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fsgr/decoder.h"
#include "fsgr/docid_bank.h"
#include "fsgr/lm_provider.h"
#include "fsgr/prompt.h"

namespace fsgr {

struct Query {
  std::string query_id;
  std::string text;
};

struct RankedDoc {
  std::string doc_ref;
  double score = 0.0;
  std::string best_docid;
  int rank = 0;  // 1-based
};

struct RunResult {
  std::string query_id;
  std::vector<RankedDoc> ranked;
};

// How the scores of several docids of one document combine.
enum class Aggregation {
  kMax,  // best docid's log-probability
  kSum,  // log of the summed probabilities
};

struct ScoredDocid {
  std::string doc_ref;
  std::string docid_text;
  double score = 0.0;
};

// Collapses docid hypotheses (in decoder order) to one entry per document,
// ranks by aggregated score (earlier first occurrence breaks ties), and keeps
// the top k.
std::vector<RankedDoc> aggregate_by_document(std::span<const ScoredDocid> hits,
                                             int k, Aggregation aggregation);

class Retriever {
 public:
  Retriever(const LanguageModel& lm, const DocIdBank& bank,
            PromptTemplate prompt, DecodeConfig config,
            Aggregation aggregation = Aggregation::kMax);

  // Decodes with beam width max(k, config.beam_width). Throws EmptyBank.
  RunResult retrieve(const Query& query, int k) const;

  // Queries run on `workers` threads; results keep input order.
  std::vector<RunResult> retrieve_all(std::span<const Query> queries, int k,
                                      int workers) const;

 private:
  const LanguageModel& lm_;
  const DocIdBank& bank_;
  PromptTemplate prompt_;
  DecodeConfig config_;
  Aggregation aggregation_;
};

// TREC run lines "query_id Q0 doc_ref rank score run_tag".
void write_trec_run(std::ostream& out, std::span<const RunResult> runs,
                    std::string_view run_tag);
void write_trec_run(const std::filesystem::path& path,
                    std::span<const RunResult> runs, std::string_view run_tag);
// Groups lines by query (first-appearance order), each sorted by rank.
std::vector<RunResult> read_trec_run(const std::filesystem::path& path);

// TSV "query_id TAB query_text".
std::vector<Query> load_queries(const std::filesystem::path& path);

}  // namespace fsgr
