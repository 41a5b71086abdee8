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

#include "fsgr/indexing.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

#include "fsgr/errors.h"
#include "fsgr/parallel.h"

namespace fsgr {
namespace {

std::string_view trim(std::string_view s) {
  auto blank = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
  };
  while (!s.empty() && blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && blank(s.back())) s.remove_suffix(1);
  return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view doc, int index) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : doc) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ (static_cast<std::uint64_t>(index) * 0x9e3779b97f4a7c15ULL);
}

constexpr std::string_view kQueryDemoDoc =
    "The Eiffel Tower is a wrought-iron lattice tower on the Champ de Mars "
    "in Paris. It was completed in 1889 as the entrance arch to the World's "
    "Fair.";
constexpr std::string_view kQueryDemos[] = {
    "where is the eiffel tower located",
    "when was the eiffel tower built",
    "what is the eiffel tower made of",
};

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what(), lineno);
    }
    if (!j.is_object()) {
      throw FormatError(path.string() + ": expected a JSON object", lineno);
    }
    f(j, lineno);
  }
}

std::string string_field(const nlohmann::json& j, const char* key,
                         const std::filesystem::path& path,
                         std::size_t lineno) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw FormatError(path.string() + ": missing string field \"" + key + "\"",
                      lineno);
  }
  return j.at(key).get<std::string>();
}

}  // namespace

void IndexingConfig::validate() const {
  if (n_docids_per_doc < 1) throw ConfigError("n_docids_per_doc must be >= 1");
  if (min_docid_tokens < 1 || min_docid_tokens > max_docid_tokens) {
    throw ConfigError("docid token bounds need 1 <= min <= max");
  }
  if (regeneration_rounds < 0) {
    throw ConfigError("regeneration_rounds must be >= 0");
  }
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (max_query_tokens < 1) throw ConfigError("max_query_tokens must be >= 1");
}

nlohmann::json IndexingStats::to_json() const {
  return {{"documents", documents},
          {"docids_generated", docids_generated},
          {"within_doc_duplicates", within_doc_duplicates},
          {"generation_failures", generation_failures},
          {"collisions", collisions},
          {"docids_kept", docids_kept},
          {"regeneration_rounds_run", regeneration_rounds_run},
          {"orphans_remaining", orphans_remaining},
          {"failed_docs", failed_docs}};
}

std::string pseudo_query_prompt(std::string_view doc_text,
                                std::span<const std::string> previous) {
  std::string out = "Document: ";
  out += kQueryDemoDoc;
  out += "\nQuestions answered by the document:\n";
  int n = 0;
  for (auto q : kQueryDemos) {
    out += std::to_string(++n) + ". ";
    out += q;
    out += '\n';
  }
  out += "\nDocument: ";
  out += doc_text;
  out += "\nQuestions answered by the document:\n";
  n = 0;
  for (const auto& q : previous) out += std::to_string(++n) + ". " + q + "\n";
  out += std::to_string(n + 1) + ".";
  return out;
}

std::vector<PseudoQuery> generate_pseudo_queries(const LanguageModel& lm,
                                                 const TokenSpace& space,
                                                 const Document& doc, int n,
                                                 int max_query_tokens) {
  if (n < 1) throw std::invalid_argument("pseudo query count must be >= 1");
  std::vector<std::string> texts;
  std::vector<PseudoQuery> out;
  for (int j = 1; j <= n; ++j) {
    PromptContext ctx{pseudo_query_prompt(doc.text, texts), {}};
    GenerationOptions opts;
    opts.min_tokens = 1;
    opts.max_tokens = max_query_tokens;
    opts.stop_token = space.end();
    const auto tokens = generate_greedy(lm, ctx, opts);
    std::string text(trim(space.decode(tokens)));
    if (text.empty()) {
      throw GenerationError("empty pseudo query for document " + doc.doc_ref);
    }
    texts.push_back(text);
    out.push_back({doc.doc_ref, std::move(text), j});
  }
  return out;
}

std::vector<PseudoQuery> LmPseudoQuerySource::queries_for(const Document& doc,
                                                          int n) const {
  return generate_pseudo_queries(lm_, space_, doc, n, max_query_tokens_);
}

std::vector<PseudoQuery> FilePseudoQuerySource::queries_for(
    const Document& doc, int n) const {
  auto it = by_doc_.find(doc.doc_ref);
  if (it == by_doc_.end()) {
    return fallback_ != nullptr ? fallback_->queries_for(doc, n)
                                : std::vector<PseudoQuery>{};
  }
  std::vector<PseudoQuery> out;
  int index = 0;
  for (const auto& text : it->second) {
    out.push_back({doc.doc_ref, text, ++index});
  }
  return out;
}

std::vector<PseudoQuery> fill_pseudo_queries(
    std::string_view doc_ref, std::span<const PseudoQuery> supplied, int n) {
  std::vector<PseudoQuery> out;
  if (supplied.empty() || n < 1) return out;
  out.reserve(static_cast<std::size_t>(n));
  const auto m = static_cast<int>(supplied.size());
  for (int j = 0; j < n; ++j) {
    std::string text = supplied[static_cast<std::size_t>(j % m)].text;
    if (j >= m) text += " (aspect " + std::to_string(j + 1) + ")";
    out.push_back({std::string(doc_ref), std::move(text), j + 1});
  }
  return out;
}

Indexer::Indexer(const LanguageModel& lm, const TokenSpace& space,
                 PromptTemplate prompt, IndexingConfig config)
    : lm_(lm), space_(space), prompt_(std::move(prompt)), config_(config) {
  config_.validate();
  if (lm_.vocab_size() != space_.vocab_size()) {
    throw ConfigError("LM vocabulary size " + std::to_string(lm_.vocab_size()) +
                      " does not match the token space (" +
                      std::to_string(space_.vocab_size()) + ")");
  }
}

DocIdEntry Indexer::generate_docid(const PseudoQuery& query) const {
  PromptContext ctx{prompt_.render(query.text), {}};
  GenerationOptions opts;
  opts.min_tokens = config_.min_docid_tokens;
  opts.max_tokens = config_.max_docid_tokens;
  opts.stop_token = space_.end();
  opts.temperature = config_.temperature;
  opts.seed = mix_seed(config_.seed, query.doc_ref, query.index);
  const auto generated = generate_greedy(lm_, ctx, opts);

  std::string text(trim(space_.decode(generated)));
  if (config_.lowercase) {
    std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
  }
  if (text.empty()) {
    throw GenerationError("docid generation produced only whitespace");
  }
  DocIdEntry entry;
  entry.tokens = space_.encode(text);
  entry.docid_text = space_.decode(entry.tokens);
  entry.doc_ref = query.doc_ref;
  entry.origin = query.index;
  const auto len = static_cast<int>(entry.tokens.size());
  if (std::find(entry.tokens.begin(), entry.tokens.end(), space_.end()) !=
      entry.tokens.end()) {
    throw GenerationError("docid spans more than one line");
  }
  if (len < config_.min_docid_tokens || len > config_.max_docid_tokens) {
    throw GenerationError("docid '" + entry.docid_text + "' has " +
                          std::to_string(len) + " tokens, outside [" +
                          std::to_string(config_.min_docid_tokens) + ", " +
                          std::to_string(config_.max_docid_tokens) + "]");
  }
  return entry;
}

Indexer::DocOutcome Indexer::index_one(
    const Document& doc, std::span<const PseudoQuery> queries) const {
  DocOutcome out;
  const auto filled =
      fill_pseudo_queries(doc.doc_ref, queries, config_.n_docids_per_doc);
  std::set<std::string> seen;
  for (const auto& q : filled) {
    try {
      auto entry = generate_docid(q);
      ++out.generated;
      if (seen.insert(entry.docid_text).second) {
        out.entries.push_back(std::move(entry));
      } else {
        ++out.duplicates;
      }
    } catch (const GenerationError&) {
      ++out.failures;
    } catch (const ProtocolError&) {
      ++out.failures;
    }
  }
  out.failed = out.generated == 0;
  return out;
}

std::vector<DocIdEntry> Indexer::index_document(
    const Document& doc, std::span<const PseudoQuery> queries) const {
  for (const auto& q : queries) {
    if (q.doc_ref != doc.doc_ref) {
      throw std::invalid_argument("pseudo query for '" + q.doc_ref +
                                  "' passed with document '" + doc.doc_ref +
                                  "'");
    }
  }
  auto outcome = index_one(doc, queries);
  if (outcome.failed) {
    throw IndexingFailed("every docid generation failed for document '" +
                         doc.doc_ref + "'");
  }
  return std::move(outcome.entries);
}

IndexingResult Indexer::index_corpus(std::span<const Document> corpus,
                                     const PseudoQuerySource& source) const {
  std::map<std::string, const Document*> by_ref;
  for (const auto& doc : corpus) {
    if (!by_ref.emplace(doc.doc_ref, &doc).second) {
      throw std::invalid_argument("duplicate document id '" + doc.doc_ref +
                                  "'");
    }
  }

  IndexingResult result{DocIdBank(space_.vocab_size(), space_.end()), {}, {}};
  IndexingStats& stats = result.stats;
  stats.documents = corpus.size();

  // Generation runs in parallel; results are applied to the bank in corpus
  // order so the outcome does not depend on scheduling.
  auto run_round = [&](const std::vector<const Document*>& docs,
                       int retry_round) {
    std::vector<DocOutcome> outcomes(docs.size());
    parallel_for(docs.size(), config_.workers, [&](std::size_t i) {
      std::vector<PseudoQuery> queries;
      try {
        queries = source.queries_for(*docs[i], config_.n_docids_per_doc);
      } catch (const GenerationError&) {
        // no queries: the document is recorded as failed below
      } catch (const ProtocolError&) {
      }
      if (retry_round > 0) {
        for (auto& q : queries) {
          q.text += " (retry " + std::to_string(retry_round) + ")";
        }
      }
      outcomes[i] = index_one(*docs[i], queries);
    });
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto& o = outcomes[i];
      stats.docids_generated += o.generated;
      stats.within_doc_duplicates += o.duplicates;
      stats.generation_failures += o.failures;
      if (o.failed && retry_round == 0) {
        stats.failed_docs.push_back(docs[i]->doc_ref);
      }
      for (auto& e : o.entries) result.bank.insert(std::move(e));
    }
    auto report = result.bank.resolve_collisions();
    stats.collisions += report.colliding_docids.size();
    for (auto& c : report.colliding_docids) {
      result.collisions.colliding_docids.push_back(std::move(c));
    }
    return report.orphaned_docs;
  };

  std::vector<const Document*> all;
  for (const auto& doc : corpus) all.push_back(&doc);
  std::set<std::string> orphans;
  for (auto& d : run_round(all, 0)) orphans.insert(std::move(d));

  for (int round = 1; round <= config_.regeneration_rounds && !orphans.empty();
       ++round) {
    std::vector<const Document*> retry;
    for (const auto& ref : orphans) retry.push_back(by_ref.at(ref));
    ++stats.regeneration_rounds_run;
    auto fresh = run_round(retry, round);
    orphans.insert(fresh.begin(), fresh.end());
    std::erase_if(orphans, [&](const std::string& ref) {
      return result.bank.has_document(ref);
    });
  }

  result.collisions.orphaned_docs.assign(orphans.begin(), orphans.end());
  stats.orphans_remaining = orphans.size();
  stats.docids_kept = result.bank.docid_count();
  return result;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t lineno) {
    Document d{string_field(j, "doc_id", path, lineno),
               string_field(j, "text", path, lineno)};
    if (d.doc_ref.empty() || d.text.empty()) {
      throw FormatError(path.string() + ": empty doc_id or text", lineno);
    }
    if (!seen.insert(d.doc_ref).second) {
      throw FormatError(path.string() + ": duplicate doc_id '" + d.doc_ref +
                        "'", lineno);
    }
    docs.push_back(std::move(d));
  });
  return docs;
}

std::map<std::string, std::vector<std::string>> load_pseudo_queries(
    const std::filesystem::path& path) {
  std::map<std::string, std::vector<std::string>> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t lineno) {
    auto doc = string_field(j, "doc_id", path, lineno);
    auto query = string_field(j, "query", path, lineno);
    if (trim(query).empty()) {
      throw FormatError(path.string() + ": empty query", lineno);
    }
    out[doc].push_back(std::move(query));
  });
  return out;
}

}  // namespace fsgr
