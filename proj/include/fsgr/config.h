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
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "fsgr/decoder.h"
#include "fsgr/http_lm.h"
#include "fsgr/indexing.h"
#include "fsgr/lm_provider.h"
#include "fsgr/prompt.h"
#include "fsgr/retriever.h"
#include "fsgr/token_space.h"

namespace fsgr {

struct TokenizerConfig {
  TokenizerKind kind = TokenizerKind::kCharacter;
  std::filesystem::path vocab;  // whitespace and external kinds
};

struct PathsConfig {
  std::filesystem::path corpus;
  std::filesystem::path pseudo_queries;
  std::filesystem::path bank;
  std::filesystem::path queries;
  std::filesystem::path run;
  std::filesystem::path qrels;
};

// Everything a CLI invocation needs. Sources, lowest precedence first: the
// built-in defaults, the JSON config file, LM_ENDPOINT / LM_API_KEY from the
// environment, command-line flags.
struct AppConfig {
  HttpLmConfig lm;
  TokenizerConfig tokenizer;
  PromptTemplate prompt = PromptTemplate::docid_default();
  IndexingConfig indexing;
  DecodeConfig decode;
  int k = 100;
  Aggregation aggregation = Aggregation::kMax;
  std::string run_tag = "fsgr";
  std::filesystem::path mock_lm;
  int workers = 1;
  PathsConfig paths;

  // Relative paths in the file resolve against the file's directory.
  static AppConfig load(const std::filesystem::path& path);
  static AppConfig from_json(const nlohmann::json& doc,
                             const std::filesystem::path& base_dir = {});
  void apply_environment();
  // Throws ConfigError.
  void validate() const;
};

std::shared_ptr<const TokenSpace> make_token_space(const TokenizerConfig& cfg);
// Mock when cfg.mock_lm is set, HTTP otherwise.
std::unique_ptr<LanguageModel> make_language_model(
    const AppConfig& cfg, std::shared_ptr<const TokenSpace> space);

}  // namespace fsgr
