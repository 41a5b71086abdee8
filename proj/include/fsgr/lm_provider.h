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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsgr/token_space.h"

namespace fsgr {

// LM input: the full prompt text plus the tokens generated so far. Providers
// are stateless, so the whole context travels with every call.
struct PromptContext {
  std::string prompt_text;
  TokenSequence generated_prefix;
};

// Log-probabilities for a set of candidate next tokens. `normalized` is set
// when the values come from a distribution over the full vocabulary (so they
// log-sum-exp to zero over it); top-k HTTP responses are not normalized.
struct NextTokenDistribution {
  std::map<TokenId, double> entries;
  bool normalized = false;

  // Log-probability of `token`, or `missing` when it has no entry.
  double logprob(TokenId token, double missing) const;
};

double log_sum_exp(std::span<const double> values);

// Next-token log-probability oracle. Implementations must be safe to call
// from several threads at once.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::size_t vocab_size() const = 0;

  // Returns log-probs covering at least every token of `restrict_to` when
  // given (which must then be non-empty and in range). Without a restriction
  // the provider returns whatever candidates it has: the full vocabulary for
  // the mock, the top-k list for HTTP.
  NextTokenDistribution next_token_logprobs(
      const PromptContext& ctx,
      std::optional<std::span<const TokenId>> restrict_to =
          std::nullopt) const;

 protected:
  virtual NextTokenDistribution do_next_token_logprobs(
      const PromptContext& ctx,
      std::optional<std::span<const TokenId>> restrict_to) const = 0;
};

struct GenerationOptions {
  int min_tokens = 1;
  int max_tokens = 15;
  TokenId stop_token = 0;
  // 0 selects greedy decoding; otherwise tokens are sampled from the
  // temperature-scaled candidate distribution with `seed`.
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

// Generates after ctx.generated_prefix until the stop token or max_tokens.
// The stop token is masked while fewer than min_tokens have been produced.
// The returned sequence excludes the stop token and never includes the
// starting prefix.
TokenSequence generate_greedy(const LanguageModel& lm,
                              const PromptContext& ctx,
                              const GenerationOptions& options);

}  // namespace fsgr
