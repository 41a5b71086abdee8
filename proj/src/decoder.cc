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

#include "fsgr/decoder.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsgr/errors.h"

namespace fsgr {

void DecodeConfig::validate() const {
  if (beam_width < 1) throw ConfigError("beam_width must be >= 1");
  if (min_tokens < 1 || min_tokens > max_tokens) {
    throw ConfigError("decode token bounds need 1 <= min <= max");
  }
  if (length_penalty < 0.0) throw ConfigError("length_penalty must be >= 0");
}

bool ranks_before(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tokens < b.tokens;
}

std::vector<Hypothesis> constrained_beam_search(const LanguageModel& lm,
                                                const DocIdBank& bank,
                                                std::string_view prompt,
                                                const DecodeConfig& config) {
  config.validate();
  if (bank.empty()) throw EmptyBank();
  const auto width = static_cast<std::size_t>(config.beam_width);
  const TokenId end = bank.end_token();

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> finished;
  PromptContext ctx{std::string(prompt), {}};
  std::vector<TokenId> candidates;
  std::vector<double> logprobs;

  while (!live.empty()) {
    std::vector<Hypothesis> expanded;
    for (const auto& hyp : live) {
      const auto len = static_cast<int>(hyp.tokens.size());
      auto allowed = bank.allowed_next(hyp.tokens);
      candidates.clear();
      if (len < config.max_tokens) candidates = std::move(allowed.tokens);
      if (allowed.can_terminate && len >= config.min_tokens) {
        candidates.push_back(end);
      }
      if (candidates.empty()) continue;

      ctx.generated_prefix = hyp.tokens;
      const auto dist = lm.next_token_logprobs(ctx, candidates);
      logprobs.clear();
      for (TokenId t : candidates) {
        logprobs.push_back(
            dist.logprob(t, -std::numeric_limits<double>::infinity()));
      }
      if (config.renormalize) {
        const double z = log_sum_exp(logprobs);
        if (!std::isfinite(z)) continue;
        for (double& lp : logprobs) lp -= z;
      }
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!std::isfinite(logprobs[i])) continue;
        const double score = hyp.score + logprobs[i];
        if (candidates[i] == end) {
          finished.push_back({hyp.tokens, score, true});
        } else {
          Hypothesis next{hyp.tokens, score, false};
          next.tokens.push_back(candidates[i]);
          expanded.push_back(std::move(next));
        }
      }
    }

    std::sort(expanded.begin(), expanded.end(), ranks_before);
    if (expanded.size() > width) expanded.resize(width);
    live = std::move(expanded);

    if (config.length_penalty == 0.0 && finished.size() >= width) {
      std::nth_element(finished.begin(),
                       finished.begin() + static_cast<std::ptrdiff_t>(width - 1),
                       finished.end(), ranks_before);
      const double kth = finished[width - 1].score;
      if (live.empty() || kth > live.front().score) break;
    }
  }

  if (config.length_penalty > 0.0) {
    for (auto& h : finished) {
      h.score /= std::pow(static_cast<double>(h.tokens.size()),
                          config.length_penalty);
    }
  }
  std::sort(finished.begin(), finished.end(), ranks_before);
  if (finished.size() > width) finished.resize(width);
  return finished;
}

std::vector<Hypothesis> constrained_beam_search(const LanguageModel& lm,
                                                const DocIdBank& bank,
                                                const PromptTemplate& tmpl,
                                                std::string_view query,
                                                const DecodeConfig& config) {
  return constrained_beam_search(lm, bank, tmpl.render(query), config);
}

std::optional<Hypothesis> greedy_constrained(const LanguageModel& lm,
                                             const DocIdBank& bank,
                                             const PromptTemplate& tmpl,
                                             std::string_view query,
                                             DecodeConfig config) {
  config.beam_width = 1;
  auto out = constrained_beam_search(lm, bank, tmpl, query, config);
  if (out.empty()) return std::nullopt;
  return std::move(out.front());
}

}  // namespace fsgr
