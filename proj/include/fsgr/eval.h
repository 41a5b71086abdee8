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
#include <map>
#include <set>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "fsgr/retriever.h"

namespace fsgr {

// query_id -> relevant doc_refs (binary relevance).
using Qrels = std::map<std::string, std::set<std::string>>;

struct MetricsReport {
  double recall_at_1 = 0.0;
  double recall_at_10 = 0.0;
  double mrr_at_100 = 0.0;
  int n_queries = 0;

  nlohmann::json to_json() const;
};

// All metrics average over every query in `qrels`; a judged query missing
// from the run scores 0. A run query absent from qrels throws MissingQrels.
double recall_at_k(std::span<const RunResult> run, const Qrels& qrels, int k);
double mrr_at_k(std::span<const RunResult> run, const Qrels& qrels,
                int k = 100);
MetricsReport evaluate(std::span<const RunResult> run, const Qrels& qrels);
MetricsReport evaluate_run(const std::filesystem::path& run_path,
                           const std::filesystem::path& qrels_path);

// TSV "query_id TAB doc_ref".
Qrels load_qrels(const std::filesystem::path& path);

}  // namespace fsgr
