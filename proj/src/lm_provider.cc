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

#include "fsgr/lm_provider.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "fsgr/errors.h"

namespace fsgr {

double NextTokenDistribution::logprob(TokenId token, double missing) const {
  auto it = entries.find(token);
  return it == entries.end() ? missing : it->second;
}

double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

NextTokenDistribution LanguageModel::next_token_logprobs(
    const PromptContext& ctx,
    std::optional<std::span<const TokenId>> restrict_to) const {
  if (ctx.prompt_text.empty()) {
    throw std::invalid_argument("prompt text must not be empty");
  }
  const auto vocab = static_cast<TokenId>(vocab_size());
  auto in_range = [vocab](TokenId t) { return t >= 0 && t < vocab; };
  if (!std::all_of(ctx.generated_prefix.begin(), ctx.generated_prefix.end(),
                   in_range)) {
    throw InvalidToken("generated prefix holds a token outside the vocabulary");
  }
  if (restrict_to) {
    if (restrict_to->empty()) {
      throw std::invalid_argument("restrict_to must not be empty");
    }
    if (!std::all_of(restrict_to->begin(), restrict_to->end(), in_range)) {
      throw InvalidToken("restrict_to holds a token outside the vocabulary");
    }
  }
  return do_next_token_logprobs(ctx, restrict_to);
}

TokenSequence generate_greedy(const LanguageModel& lm,
                              const PromptContext& ctx,
                              const GenerationOptions& options) {
  if (options.min_tokens < 1 || options.min_tokens > options.max_tokens) {
    throw std::invalid_argument(
        "generation needs 1 <= min_tokens <= max_tokens");
  }
  std::mt19937_64 rng(options.seed);
  PromptContext step = ctx;
  TokenSequence out;
  while (static_cast<int>(out.size()) < options.max_tokens) {
    const bool stop_allowed =
        static_cast<int>(out.size()) >= options.min_tokens;
    auto dist = lm.next_token_logprobs(step);

    std::vector<std::pair<TokenId, double>> candidates;
    for (const auto& [token, lp] : dist.entries) {
      if (token == options.stop_token && !stop_allowed) continue;
      if (std::isnan(lp) || lp == -std::numeric_limits<double>::infinity()) {
        continue;
      }
      candidates.emplace_back(token, lp);
    }
    if (candidates.empty()) {
      throw GenerationError("provider offered no admissible next token");
    }

    TokenId chosen;
    if (options.temperature <= 0.0) {
      // entries are ordered by id, so the first maximum is the smallest id
      auto best = std::max_element(
          candidates.begin(), candidates.end(),
          [](const auto& a, const auto& b) { return a.second < b.second; });
      chosen = best->first;
    } else {
      std::vector<double> weights;
      weights.reserve(candidates.size());
      double peak = -std::numeric_limits<double>::infinity();
      for (const auto& c : candidates) peak = std::max(peak, c.second);
      for (const auto& c : candidates) {
        weights.push_back(std::exp((c.second - peak) / options.temperature));
      }
      std::discrete_distribution<std::size_t> pick(weights.begin(),
                                                   weights.end());
      chosen = candidates[pick(rng)].first;
    }

    if (chosen == options.stop_token) break;
    out.push_back(chosen);
    step.generated_prefix.push_back(chosen);
  }
  return out;
}

}  // namespace fsgr
