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

#include "fsgr/eval.h"

#include <fstream>
#include <stdexcept>

#include "fsgr/errors.h"

namespace fsgr {
namespace {

// Rank of the first relevant document within the top k, or 0.
int first_relevant_rank(const RunResult& run, const std::set<std::string>& rel,
                        int k) {
  const auto limit = std::min(run.ranked.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < limit; ++i) {
    if (rel.contains(run.ranked[i].doc_ref)) return static_cast<int>(i) + 1;
  }
  return 0;
}

template <typename PerQuery>
double mean_over_qrels(std::span<const RunResult> run, const Qrels& qrels,
                       PerQuery&& per_query) {
  if (qrels.empty()) throw std::invalid_argument("qrels are empty");
  std::map<std::string, const RunResult*> by_id;
  for (const auto& r : run) {
    if (!qrels.contains(r.query_id)) throw MissingQrels(r.query_id);
    if (!by_id.emplace(r.query_id, &r).second) {
      throw FormatError("query '" + r.query_id + "' appears twice in the run");
    }
  }
  double total = 0.0;
  for (const auto& [qid, rel] : qrels) {
    auto it = by_id.find(qid);
    if (it != by_id.end()) total += per_query(*it->second, rel);
  }
  return total / static_cast<double>(qrels.size());
}

}  // namespace

nlohmann::json MetricsReport::to_json() const {
  return {{"recall@1", recall_at_1},
          {"recall@10", recall_at_10},
          {"mrr@100", mrr_at_100},
          {"n_queries", n_queries}};
}

double recall_at_k(std::span<const RunResult> run, const Qrels& qrels, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  return mean_over_qrels(run, qrels, [k](const RunResult& r, const auto& rel) {
    return first_relevant_rank(r, rel, k) > 0 ? 1.0 : 0.0;
  });
}

double mrr_at_k(std::span<const RunResult> run, const Qrels& qrels, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  return mean_over_qrels(run, qrels, [k](const RunResult& r, const auto& rel) {
    const int rank = first_relevant_rank(r, rel, k);
    return rank > 0 ? 1.0 / rank : 0.0;
  });
}

MetricsReport evaluate(std::span<const RunResult> run, const Qrels& qrels) {
  MetricsReport report;
  report.recall_at_1 = recall_at_k(run, qrels, 1);
  report.recall_at_10 = recall_at_k(run, qrels, 10);
  report.mrr_at_100 = mrr_at_k(run, qrels, 100);
  report.n_queries = static_cast<int>(qrels.size());
  return report;
}

MetricsReport evaluate_run(const std::filesystem::path& run_path,
                           const std::filesystem::path& qrels_path) {
  const auto qrels = load_qrels(qrels_path);
  const auto run = read_trec_run(run_path);
  return evaluate(run, qrels);
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open qrels file: " + path.string());
  Qrels qrels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("qrels file " + path.string() +
                        ": expected 'query_id<TAB>doc_ref'", lineno);
    }
    qrels[line.substr(0, tab)].insert(line.substr(tab + 1));
  }
  if (qrels.empty()) {
    throw FormatError("qrels file " + path.string() + " has no judgments");
  }
  return qrels;
}

}  // namespace fsgr
