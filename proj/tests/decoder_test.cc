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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fsgr/errors.h"
#include "fsgr/mock_lm.h"
#include "testing/fixtures.h"
#include "testing/oracle.h"

namespace fsgr {
namespace {

constexpr TokenId kEnd = 5;

DocIdBank three_docid_bank() {
  DocIdBank bank(6, kEnd);
  bank.insert({"12", {1, 2}, "d12", 1});
  bank.insert({"13", {1, 3}, "d13", 1});
  bank.insert({"4", {4}, "d4", 1});
  return bank;
}

DecodeConfig config(int beam, int min_tokens = 1, int max_tokens = 15) {
  DecodeConfig c;
  c.beam_width = beam;
  c.min_tokens = min_tokens;
  c.max_tokens = max_tokens;
  return c;
}

const TokenSpace& chars() {
  static const TokenSpace space = TokenSpace::character();
  return space;
}

TEST(DecoderTest, UniformFixtureBeamTwo) {
  MockLm lm(6);
  auto out = constrained_beam_search(lm, three_docid_bank(), "q", config(2));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].tokens, (TokenSequence{4}));
  EXPECT_NEAR(out[0].score, std::log(0.5), 1e-9);
  EXPECT_EQ(out[1].tokens, (TokenSequence{1, 2}));
  EXPECT_NEAR(out[1].score, std::log(0.25), 1e-9);
  EXPECT_TRUE(out[0].completed);
}

TEST(DecoderTest, UniformFixtureBeamThree) {
  MockLm lm(6);
  auto out = constrained_beam_search(lm, three_docid_bank(), "q", config(3));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].tokens, (TokenSequence{4}));
  EXPECT_EQ(out[1].tokens, (TokenSequence{1, 2}));
  EXPECT_EQ(out[2].tokens, (TokenSequence{1, 3}));
  EXPECT_NEAR(out[2].score, std::log(0.25), 1e-9);
}

TEST(DecoderTest, OutOfBankMassIsMasked) {
  MockLm lm(6, MockLm::Table{{{0, std::log(0.99)}}});
  for (bool renorm : {true, false}) {
    auto cfg = config(3);
    cfg.renormalize = renorm;
    auto bank = three_docid_bank();
    for (const auto& h : constrained_beam_search(lm, bank, "q", cfg)) {
      EXPECT_NE(bank.find(h.tokens), nullptr);
    }
  }
}

TEST(DecoderTest, RawModeSumsUnnormalizedLogprobs) {
  MockLm lm(6);
  auto cfg = config(3);
  cfg.renormalize = false;
  auto out = constrained_beam_search(lm, three_docid_bank(), "q", cfg);
  ASSERT_EQ(out.size(), 3u);
  // [4]: P(4) P(end); [1,2]: P(1) P(2) P(end), all 1/6.
  EXPECT_NEAR(out[0].score, 2 * std::log(1.0 / 6), 1e-9);
  EXPECT_NEAR(out[1].score, 3 * std::log(1.0 / 6), 1e-9);
}

TEST(DecoderTest, EmptyBankAndBadConfig) {
  MockLm lm(6);
  EXPECT_THROW(constrained_beam_search(lm, DocIdBank(6, kEnd), "q", config(2)),
               EmptyBank);
  EXPECT_THROW(constrained_beam_search(lm, three_docid_bank(), "q", config(0)),
               ConfigError);
  EXPECT_THROW(
      constrained_beam_search(lm, three_docid_bank(), "q", config(2, 4, 3)),
      ConfigError);
}

TEST(DecoderTest, LengthBoundsRespected) {
  DocIdBank bank(6, kEnd);
  bank.insert({"1", {1}, "short", 1});
  bank.insert({"123", {1, 2, 3}, "mid", 1});
  bank.insert({"12341", {1, 2, 3, 4, 1}, "long", 1});
  MockLm lm(6);
  auto out = constrained_beam_search(lm, bank, "q", config(10, 2, 4));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tokens, (TokenSequence{1, 2, 3}));
}

TEST(DecoderTest, DocidThatPrefixesAnotherIsReachable) {
  DocIdBank bank(6, kEnd);
  bank.insert({"1", {1}, "a", 1});
  bank.insert({"12", {1, 2}, "b", 1});
  MockLm lm(6);
  auto out = constrained_beam_search(lm, bank, "q", config(5));
  ASSERT_EQ(out.size(), 2u);
  // At [1] the candidates are {2, end}, each log 1/2.
  EXPECT_NEAR(out[0].score, std::log(0.5), 1e-9);
  EXPECT_NEAR(out[1].score, std::log(0.5), 1e-9);
  EXPECT_EQ(out[0].tokens, (TokenSequence{1}));
}

TEST(DecoderTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 25), alphabet(2, 6);
  for (int trial = 0; trial < 300; ++trial) {
    auto ids = testing::random_docids(rng, static_cast<std::size_t>(size(rng)),
                                      alphabet(rng), 1, 6);
    auto bank = testing::bank_from(chars(), ids);
    MockLm lm(chars().vocab_size(),
              MockLm::Hashed{static_cast<std::uint64_t>(trial), 4.0});
    auto cfg = config(25 + trial % 10, 1 + trial % 3, 4 + trial % 3);
    cfg.renormalize = trial % 4 != 0;
    const std::string prompt = "query " + std::to_string(trial);
    auto got = constrained_beam_search(lm, bank, prompt, cfg);
    auto want = testing::brute_force_ranking(lm, ids, chars().end(), prompt,
                                             cfg.min_tokens, cfg.max_tokens,
                                             cfg.renormalize);
    ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].tokens, want[i].tokens) << "trial " << trial;
      EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
    }
  }
}

TEST(DecoderTest, NarrowBeamWithoutPruningIsPrefixOfFullRanking) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    auto ids = testing::random_docids(rng, 20, 4, 2, 5);
    auto bank = testing::bank_from(chars(), ids);
    // Widest layer of the trie: beyond this no live hypothesis is pruned.
    std::size_t widest = 0;
    for (std::size_t depth = 1; depth <= 5; ++depth) {
      std::set<TokenSequence> layer;
      for (const auto& s : ids) {
        if (s.size() >= depth) layer.emplace(s.begin(), s.begin() + depth);
      }
      widest = std::max(widest, layer.size());
    }
    MockLm lm(chars().vocab_size(),
              MockLm::Hashed{static_cast<std::uint64_t>(trial), 3.0});
    auto full = constrained_beam_search(lm, bank, "q", config(100, 2, 5));
    for (std::size_t w = widest; w <= ids.size(); ++w) {
      auto narrow =
          constrained_beam_search(lm, bank, "q", config(static_cast<int>(w), 2, 5));
      ASSERT_EQ(narrow.size(), std::min(w, full.size()));
      for (std::size_t i = 0; i < narrow.size(); ++i) {
        EXPECT_EQ(narrow[i].tokens, full[i].tokens);
        EXPECT_EQ(narrow[i].score, full[i].score);
      }
    }
  }
}

TEST(DecoderTest, OutputsAreAlwaysBankMembers) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto ids = testing::random_docids(rng, 50, 5, 1, 8);
    auto bank = testing::bank_from(chars(), ids);
    MockLm lm(chars().vocab_size(),
              MockLm::Hashed{static_cast<std::uint64_t>(trial), 8.0});
    auto out = constrained_beam_search(lm, bank, "q", config(1 + trial % 12));
    EXPECT_FALSE(out.empty());
    for (const auto& h : out) EXPECT_NE(bank.find(h.tokens), nullptr);
    for (std::size_t i = 1; i < out.size(); ++i) {
      EXPECT_TRUE(ranks_before(out[i - 1], out[i]));
    }
  }
}

TEST(DecoderTest, GreedyIsBeamOfOne) {
  MockLm uniform(6);
  auto g = greedy_constrained(uniform, three_docid_bank(), PromptTemplate(),
                              "q", config(7));
  ASSERT_TRUE(g.has_value());
  // [1] and [4] tie at the root and the tie goes to [1]; a single beam then
  // cannot come back for [4].
  EXPECT_EQ(g->tokens, (TokenSequence{1, 2}));
  EXPECT_NEAR(g->score, std::log(0.25), 1e-9);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto bank = testing::bank_from(chars(), testing::random_docids(rng, 15, 4, 1, 5));
    MockLm lm(chars().vocab_size(),
              MockLm::Hashed{static_cast<std::uint64_t>(trial), 4.0});
    auto one = constrained_beam_search(lm, bank, PromptTemplate(), "q", config(1));
    auto greedy = greedy_constrained(lm, bank, PromptTemplate(), "q", config(9));
    ASSERT_TRUE(greedy.has_value());
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(greedy->tokens, one[0].tokens);
    EXPECT_EQ(greedy->score, one[0].score);
  }
}

TEST(DecoderTest, SingleDocidBankWinsRegardlessOfLm) {
  DocIdBank bank(chars().vocab_size(), chars().end());
  const auto only = chars().encode("only-one");
  bank.insert({"only-one", only, "D", 1});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    MockLm lm(chars().vocab_size(), MockLm::Hashed{seed, 10.0});
    auto g = greedy_constrained(lm, bank, PromptTemplate::docid_default(),
                                "anything", {});
    ASSERT_TRUE(g.has_value());
    EXPECT_EQ(g->tokens, only);
    EXPECT_NEAR(g->score, 0.0, 1e-12);
  }
}

TEST(DecoderTest, Deterministic) {
  std::mt19937_64 rng(6);
  auto bank = testing::bank_from(chars(), testing::random_docids(rng, 40, 3, 1, 6));
  MockLm lm(chars().vocab_size(), MockLm::Hashed{1, 4.0});
  auto a = constrained_beam_search(lm, bank, "q", config(10));
  auto b = constrained_beam_search(lm, bank, "q", config(10));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].tokens, b[i].tokens);
    EXPECT_EQ(a[i].score, b[i].score);
  }
}

}  // namespace
}  // namespace fsgr
