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

#include "fsgr/config.h"

#include <cstdlib>

#include <gtest/gtest.h>

#include "fsgr/errors.h"
#include "testing/fixtures.h"

namespace fsgr {
namespace {

TEST(ConfigTest, DefaultsMatchPaperConstants) {
  AppConfig cfg;
  EXPECT_EQ(cfg.indexing.n_docids_per_doc, 10);
  EXPECT_EQ(cfg.indexing.min_docid_tokens, 3);
  EXPECT_EQ(cfg.indexing.max_docid_tokens, 15);
  EXPECT_EQ(cfg.decode.min_tokens, 3);
  EXPECT_EQ(cfg.decode.max_tokens, 15);
  EXPECT_EQ(cfg.decode.beam_width, 100);
  EXPECT_EQ(cfg.lm.floor_logprob, -30.0);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(ConfigTest, LoadResolvesRelativePaths) {
  testing::TempDir dir;
  testing::write_file(dir / "c.json", R"({
    "lm": {"endpoint": "http://h:1/v1/completions", "top_logprobs": 5},
    "indexing": {"n_docids_per_doc": 4},
    "decode": {"beam_width": 7, "renormalize": false},
    "retrieval": {"k": 9, "aggregation": "sum", "run_tag": "x"},
    "mock_lm": "m.json",
    "paths": {"bank": "out/bank.tsv", "qrels": "/abs/q.tsv"}
  })");
  auto cfg = AppConfig::load(dir / "c.json");
  EXPECT_EQ(cfg.lm.top_logprobs, 5);
  EXPECT_EQ(cfg.indexing.n_docids_per_doc, 4);
  EXPECT_EQ(cfg.decode.beam_width, 7);
  EXPECT_FALSE(cfg.decode.renormalize);
  EXPECT_EQ(cfg.k, 9);
  EXPECT_EQ(cfg.aggregation, Aggregation::kSum);
  EXPECT_EQ(cfg.mock_lm, dir / "m.json");
  EXPECT_EQ(cfg.paths.bank, dir / "out/bank.tsv");
  EXPECT_EQ(cfg.paths.qrels, "/abs/q.tsv");
}

TEST(ConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"lm": {"url": "x"}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(nlohmann::json::parse(R"({"extra": 1})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(
                   nlohmann::json::parse(R"({"retrieval": {"aggregation": "mean"}})")),
               ConfigError);
  EXPECT_THROW(AppConfig::from_json(
                   nlohmann::json::parse(R"({"decode": {"beam_width": "wide"}})")),
               ConfigError);
  auto cfg = AppConfig::from_json(
      nlohmann::json::parse(R"({"indexing": {"min_docid_tokens": 0}})"));
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(AppConfig::load("/nonexistent/config.json"), IoError);
}

TEST(ConfigTest, EnvironmentOverridesFile) {
  auto cfg = AppConfig::from_json(
      nlohmann::json::parse(R"({"lm": {"endpoint": "http://file:1/"}})"));
  ::setenv("LM_ENDPOINT", "http://env:2/v1/completions", 1);
  ::setenv("LM_API_KEY", "k", 1);
  cfg.apply_environment();
  ::unsetenv("LM_ENDPOINT");
  ::unsetenv("LM_API_KEY");
  EXPECT_EQ(cfg.lm.endpoint, "http://env:2/v1/completions");
  EXPECT_EQ(cfg.lm.api_key, "k");
}

TEST(ConfigTest, FactoriesBuildSpaceAndModel) {
  testing::TempDir dir;
  TokenizerConfig tc;
  auto chars = make_token_space(tc);
  EXPECT_EQ(chars->vocab_size(), 97u);

  testing::write_file(dir / "v.txt", "a\nb\n");
  tc.kind = TokenizerKind::kWhitespace;
  tc.vocab = dir / "v.txt";
  EXPECT_EQ(make_token_space(tc)->vocab_size(), 4u);
  tc.vocab.clear();
  EXPECT_THROW(make_token_space(tc), ConfigError);

  AppConfig cfg;
  EXPECT_THROW(make_language_model(cfg, chars), ConfigError);
  testing::write_file(dir / "m.json", R"({"default": "uniform"})");
  cfg.mock_lm = dir / "m.json";
  EXPECT_EQ(make_language_model(cfg, chars)->vocab_size(), 97u);
  cfg.mock_lm.clear();
  cfg.lm.endpoint = "http://127.0.0.1:9/v1/completions";
  EXPECT_NO_THROW(make_language_model(cfg, chars));
}

}  // namespace
}  // namespace fsgr
