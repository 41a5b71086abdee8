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

#include "fsgr/retriever.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fsgr/errors.h"
#include "fsgr/parallel.h"

namespace fsgr {

std::vector<RankedDoc> aggregate_by_document(std::span<const ScoredDocid> hits,
                                             int k, Aggregation aggregation) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  struct Acc {
    std::size_t first_seen;
    double best;
    std::string best_docid;
    std::vector<double> scores;
  };
  std::map<std::string, Acc> by_doc;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    auto [it, fresh] =
        by_doc.try_emplace(h.doc_ref, Acc{i, h.score, h.docid_text, {}});
    if (!fresh && h.score > it->second.best) {
      it->second.best = h.score;
      it->second.best_docid = h.docid_text;
    }
    it->second.scores.push_back(h.score);
  }

  struct Row {
    std::size_t first_seen;
    RankedDoc doc;
  };
  std::vector<Row> rows;
  rows.reserve(by_doc.size());
  for (auto& [doc, acc] : by_doc) {
    double score = acc.best;
    if (aggregation == Aggregation::kSum) score = log_sum_exp(acc.scores);
    rows.push_back({acc.first_seen, RankedDoc{doc, score, acc.best_docid, 0}});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.doc.score != b.doc.score) return a.doc.score > b.doc.score;
    return a.first_seen < b.first_seen;
  });
  if (rows.size() > static_cast<std::size_t>(k)) {
    rows.resize(static_cast<std::size_t>(k));
  }
  std::vector<RankedDoc> out;
  out.reserve(rows.size());
  for (auto& r : rows) {
    r.doc.rank = static_cast<int>(out.size()) + 1;
    out.push_back(std::move(r.doc));
  }
  return out;
}

Retriever::Retriever(const LanguageModel& lm, const DocIdBank& bank,
                     PromptTemplate prompt, DecodeConfig config,
                     Aggregation aggregation)
    : lm_(lm),
      bank_(bank),
      prompt_(std::move(prompt)),
      config_(config),
      aggregation_(aggregation) {
  config_.validate();
}

RunResult Retriever::retrieve(const Query& query, int k) const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  DecodeConfig cfg = config_;
  cfg.beam_width = std::max(k, config_.beam_width);
  const auto hyps =
      constrained_beam_search(lm_, bank_, prompt_, query.text, cfg);

  std::vector<ScoredDocid> hits;
  hits.reserve(hyps.size());
  for (const auto& h : hyps) {
    const DocIdEntry* entry = bank_.find(h.tokens);
    if (entry == nullptr) {
      throw std::logic_error("decoder returned a sequence outside the bank");
    }
    hits.push_back({entry->doc_ref, entry->docid_text, h.score});
  }
  return RunResult{query.query_id, aggregate_by_document(hits, k, aggregation_)};
}

std::vector<RunResult> Retriever::retrieve_all(std::span<const Query> queries,
                                               int k, int workers) const {
  std::vector<RunResult> out(queries.size());
  parallel_for(queries.size(), workers,
               [&](std::size_t i) { out[i] = retrieve(queries[i], k); });
  return out;
}

void write_trec_run(std::ostream& out, std::span<const RunResult> runs,
                    std::string_view run_tag) {
  for (const auto& run : runs) {
    for (const auto& d : run.ranked) {
      std::ostringstream score;
      score << std::fixed << std::setprecision(6) << d.score;
      out << run.query_id << " Q0 " << d.doc_ref << ' ' << d.rank << ' '
          << score.str() << ' ' << run_tag << '\n';
    }
  }
}

void write_trec_run(const std::filesystem::path& path,
                    std::span<const RunResult> runs, std::string_view run_tag) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write run file: " + path.string());
  write_trec_run(out, runs, run_tag);
  out.flush();
  if (!out) throw IoError("failed writing run file: " + path.string());
}

std::vector<RunResult> read_trec_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run file: " + path.string());
  std::vector<RunResult> runs;
  std::map<std::string, std::size_t> index;
  std::map<std::string, std::set<std::string>> seen_docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string qid, q0, doc, tag;
    int rank;
    double score;
    if (!(fields >> qid)) continue;  // blank line
    if (!(fields >> q0 >> doc >> rank >> score >> tag)) {
      throw FormatError("run file " + path.string() +
                        ": expected 'qid Q0 doc rank score tag'", lineno);
    }
    if (!seen_docs[qid].insert(doc).second) {
      throw FormatError("run file " + path.string() + ": document '" + doc +
                        "' repeated for query '" + qid + "'", lineno);
    }
    auto [it, fresh] = index.try_emplace(qid, runs.size());
    if (fresh) runs.push_back({qid, {}});
    runs[it->second].ranked.push_back({doc, score, {}, rank});
  }
  for (auto& run : runs) {
    std::stable_sort(run.ranked.begin(), run.ranked.end(),
                     [](const RankedDoc& a, const RankedDoc& b) {
                       return a.rank < b.rank;
                     });
  }
  return runs;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open queries file: " + path.string());
  std::vector<Query> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw FormatError("queries file " + path.string() +
                        ": expected 'query_id<TAB>query_text'", lineno);
    }
    Query q{line.substr(0, tab), line.substr(tab + 1)};
    if (!seen.insert(q.query_id).second) {
      throw FormatError("queries file " + path.string() +
                        ": duplicate query id '" + q.query_id + "'", lineno);
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace fsgr
