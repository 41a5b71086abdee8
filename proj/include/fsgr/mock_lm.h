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
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsgr/lm_provider.h"

namespace fsgr {

// Deterministic table-driven LanguageModel for tests and offline runs.
//
// A lookup picks the rule whose prefix equals the generated prefix and whose
// context string occurs in the prompt; among several, the longest context
// wins, then file order. A rule with an empty context matches any prompt.
// Unmatched lookups fall back to the default distribution.
//
// Listed log-probs need not cover the vocabulary: leftover probability mass
// is spread evenly over the unlisted tokens, so every distribution handed out
// is normalized over the full vocabulary.
//
// File format (JSON):
//   {
//     "vocab_size": 97,                           // optional cross-check
//     "default": "uniform"
//              | {"hashed": {"seed": 7, "scale": 4.0}}
//              | {"logprobs": {"5": -0.1}},
//     "entries": [{"prefix": [1, 2], "context": "...",
//                  "logprobs": {"7": -0.105}}]
//   }
// A bare array is accepted as the "entries" list with a uniform default.
class MockLm : public LanguageModel {
 public:
  struct Uniform {};
  // Pseudo-random logits derived from a hash of (seed, prompt, prefix,
  // token), soft-maxed. Pure, but different for every context.
  struct Hashed {
    std::uint64_t seed = 0;
    double scale = 4.0;
  };
  struct Table {
    std::map<TokenId, double> logprobs;
  };
  using Default = std::variant<Uniform, Hashed, Table>;

  struct Rule {
    TokenSequence prefix;
    std::string context;
    std::map<TokenId, double> logprobs;
  };

  explicit MockLm(std::size_t vocab_size, Default fallback = Uniform{},
                  std::vector<Rule> rules = {});

  static MockLm from_json(const nlohmann::json& doc, std::size_t vocab_size);
  static MockLm load(const std::filesystem::path& path,
                     std::size_t vocab_size);
  nlohmann::json to_json() const;

  std::size_t vocab_size() const override { return vocab_size_; }

  // Dense log-probabilities over the whole vocabulary for `ctx`.
  std::vector<double> full_distribution(const PromptContext& ctx) const;

 protected:
  NextTokenDistribution do_next_token_logprobs(
      const PromptContext& ctx,
      std::optional<std::span<const TokenId>> restrict_to) const override;

 private:
  std::vector<double> complete(const std::map<TokenId, double>& listed) const;
  std::vector<double> hashed(const Hashed& h, const PromptContext& ctx) const;

  std::size_t vocab_size_;
  Default fallback_;
  std::vector<double> fallback_dense_;
  std::vector<Rule> rules_;
  std::vector<std::vector<double>> rule_dense_;
  std::map<TokenSequence, std::vector<std::size_t>> rules_by_prefix_;
};

}  // namespace fsgr
