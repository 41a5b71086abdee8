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

#include <optional>
#include <string_view>
#include <vector>

#include "fsgr/docid_bank.h"
#include "fsgr/lm_provider.h"
#include "fsgr/prompt.h"

namespace fsgr {

struct DecodeConfig {
  int beam_width = 100;
  int max_tokens = 15;
  int min_tokens = 3;
  // Renormalize each step's log-probs over the admissible candidates.
  bool renormalize = true;
  // Completed scores are divided by length^length_penalty. 0 keeps raw
  // cumulative log-probabilities.
  double length_penalty = 0.0;

  // Throws ConfigError.
  void validate() const;
};

struct Hypothesis {
  TokenSequence tokens;  // docid tokens, without the end token
  double score = 0.0;
  bool completed = false;
};

// Ranking order: higher score first, then lexicographically smaller tokens.
bool ranks_before(const Hypothesis& a, const Hypothesis& b);

// Beam search over the docid trie. At every step a hypothesis may only extend
// with a child token of its trie node, or finish by taking the bank's end
// token when its prefix is a complete docid of at least min_tokens tokens.
// Every returned hypothesis is therefore a docid in the bank.
//
// Finished hypotheses leave the beam; search stops once beam_width of them
// score strictly above every live hypothesis (log-probs never increase a
// score), or when no live hypothesis remains. Returns at most beam_width
// completed hypotheses in ranking order.
//
// Throws EmptyBank; provider errors propagate.
std::vector<Hypothesis> constrained_beam_search(const LanguageModel& lm,
                                                const DocIdBank& bank,
                                                std::string_view prompt,
                                                const DecodeConfig& config);

std::vector<Hypothesis> constrained_beam_search(const LanguageModel& lm,
                                                const DocIdBank& bank,
                                                const PromptTemplate& tmpl,
                                                std::string_view query,
                                                const DecodeConfig& config);

// Beam width 1. Empty when no docid is reachable under the length bounds.
std::optional<Hypothesis> greedy_constrained(const LanguageModel& lm,
                                             const DocIdBank& bank,
                                             const PromptTemplate& tmpl,
                                             std::string_view query,
                                             DecodeConfig config);

}  // namespace fsgr
