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
#include <fstream>
#include <set>

#include "fsgr/errors.h"
#include "fsgr/mock_lm.h"

namespace fsgr {
namespace {

void check_keys(const nlohmann::json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) {
      throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void read_path(const nlohmann::json& obj, const char* key,
               const std::filesystem::path& base, std::filesystem::path& out) {
  if (!obj.contains(key)) return;
  std::filesystem::path p = obj.at(key).get<std::string>();
  out = (p.is_relative() && !base.empty()) ? base / p : p;
}

TokenizerKind parse_kind(const std::string& s) {
  if (s == "whitespace") return TokenizerKind::kWhitespace;
  if (s == "character") return TokenizerKind::kCharacter;
  if (s == "external") return TokenizerKind::kExternal;
  throw ConfigError("unknown tokenizer kind '" + s + "'");
}

}  // namespace

AppConfig AppConfig::from_json(const nlohmann::json& doc,
                               const std::filesystem::path& base_dir) {
  AppConfig cfg;
  try {
    check_keys(doc, "config",
               {"lm", "tokenizer", "prompt", "indexing", "decode",
                "retrieval", "workers", "mock_lm", "paths"});
    if (doc.contains("lm")) {
      const auto& j = doc.at("lm");
      check_keys(j, "lm",
                 {"endpoint", "model", "top_logprobs", "floor_logprob",
                  "timeout_ms", "max_retries", "retry_backoff_ms",
                  "max_in_flight"});
      read(j, "endpoint", cfg.lm.endpoint);
      read(j, "model", cfg.lm.model);
      read(j, "top_logprobs", cfg.lm.top_logprobs);
      read(j, "floor_logprob", cfg.lm.floor_logprob);
      if (j.contains("timeout_ms")) {
        cfg.lm.timeout = std::chrono::milliseconds(j.at("timeout_ms").get<long>());
      }
      read(j, "max_retries", cfg.lm.max_retries);
      if (j.contains("retry_backoff_ms")) {
        cfg.lm.retry_backoff =
            std::chrono::milliseconds(j.at("retry_backoff_ms").get<long>());
      }
      read(j, "max_in_flight", cfg.lm.max_in_flight);
    }
    if (doc.contains("tokenizer")) {
      const auto& j = doc.at("tokenizer");
      check_keys(j, "tokenizer", {"kind", "vocab"});
      if (j.contains("kind")) {
        cfg.tokenizer.kind = parse_kind(j.at("kind").get<std::string>());
      }
      read_path(j, "vocab", base_dir, cfg.tokenizer.vocab);
    }
    if (doc.contains("prompt")) {
      cfg.prompt = PromptTemplate::from_json(doc.at("prompt"));
    }
    if (doc.contains("indexing")) {
      const auto& j = doc.at("indexing");
      check_keys(j, "indexing",
                 {"n_docids_per_doc", "min_docid_tokens", "max_docid_tokens",
                  "regeneration_rounds", "temperature", "seed", "lowercase",
                  "max_query_tokens"});
      auto& ix = cfg.indexing;
      read(j, "n_docids_per_doc", ix.n_docids_per_doc);
      read(j, "min_docid_tokens", ix.min_docid_tokens);
      read(j, "max_docid_tokens", ix.max_docid_tokens);
      read(j, "regeneration_rounds", ix.regeneration_rounds);
      read(j, "temperature", ix.temperature);
      read(j, "seed", ix.seed);
      read(j, "lowercase", ix.lowercase);
      read(j, "max_query_tokens", ix.max_query_tokens);
    }
    if (doc.contains("decode")) {
      const auto& j = doc.at("decode");
      check_keys(j, "decode",
                 {"beam_width", "min_tokens", "max_tokens", "renormalize",
                  "length_penalty"});
      read(j, "beam_width", cfg.decode.beam_width);
      read(j, "min_tokens", cfg.decode.min_tokens);
      read(j, "max_tokens", cfg.decode.max_tokens);
      read(j, "renormalize", cfg.decode.renormalize);
      read(j, "length_penalty", cfg.decode.length_penalty);
    }
    if (doc.contains("retrieval")) {
      const auto& j = doc.at("retrieval");
      check_keys(j, "retrieval", {"k", "aggregation", "run_tag"});
      read(j, "k", cfg.k);
      read(j, "run_tag", cfg.run_tag);
      if (j.contains("aggregation")) {
        const auto a = j.at("aggregation").get<std::string>();
        if (a == "max") {
          cfg.aggregation = Aggregation::kMax;
        } else if (a == "sum") {
          cfg.aggregation = Aggregation::kSum;
        } else {
          throw ConfigError("aggregation must be \"max\" or \"sum\"");
        }
      }
    }
    read(doc, "workers", cfg.workers);
    read_path(doc, "mock_lm", base_dir, cfg.mock_lm);
    if (doc.contains("paths")) {
      const auto& j = doc.at("paths");
      check_keys(j, "paths",
                 {"corpus", "pseudo_queries", "bank", "queries", "run",
                  "qrels"});
      read_path(j, "corpus", base_dir, cfg.paths.corpus);
      read_path(j, "pseudo_queries", base_dir, cfg.paths.pseudo_queries);
      read_path(j, "bank", base_dir, cfg.paths.bank);
      read_path(j, "queries", base_dir, cfg.paths.queries);
      read_path(j, "run", base_dir, cfg.paths.run);
      read_path(j, "qrels", base_dir, cfg.paths.qrels);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return from_json(doc, path.parent_path());
}

void AppConfig::apply_environment() {
  if (const char* endpoint = std::getenv("LM_ENDPOINT");
      endpoint != nullptr && *endpoint != '\0') {
    lm.endpoint = endpoint;
  }
  if (const char* key = std::getenv("LM_API_KEY"); key != nullptr) {
    lm.api_key = key;
  }
}

void AppConfig::validate() const {
  indexing.validate();
  decode.validate();
  if (k < 1) throw ConfigError("k must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (lm.top_logprobs < 1) throw ConfigError("lm.top_logprobs must be >= 1");
  if (lm.max_in_flight < 1) throw ConfigError("lm.max_in_flight must be >= 1");
  if (lm.max_retries < 0) throw ConfigError("lm.max_retries must be >= 0");
  if (tokenizer.kind != TokenizerKind::kCharacter && tokenizer.vocab.empty()) {
    throw ConfigError("tokenizer.vocab is required for this tokenizer kind");
  }
}

std::shared_ptr<const TokenSpace> make_token_space(const TokenizerConfig& cfg) {
  if (cfg.kind != TokenizerKind::kCharacter && cfg.vocab.empty()) {
    throw ConfigError("tokenizer kind needs a vocab file");
  }
  switch (cfg.kind) {
    case TokenizerKind::kCharacter:
      return std::make_shared<const TokenSpace>(TokenSpace::character());
    case TokenizerKind::kWhitespace:
      return std::make_shared<const TokenSpace>(
          TokenSpace::whitespace_from_file(cfg.vocab));
    case TokenizerKind::kExternal:
      return std::make_shared<const TokenSpace>(
          TokenSpace::external_from_file(cfg.vocab));
  }
  throw ConfigError("unknown tokenizer kind");
}

std::unique_ptr<LanguageModel> make_language_model(
    const AppConfig& cfg, std::shared_ptr<const TokenSpace> space) {
  if (!cfg.mock_lm.empty()) {
    return std::make_unique<MockLm>(
        MockLm::load(cfg.mock_lm, space->vocab_size()));
  }
  if (cfg.lm.endpoint.empty()) {
    throw ConfigError(
        "no LM configured: set lm.endpoint, LM_ENDPOINT, or --mock-lm");
  }
  return std::make_unique<HttpLm>(cfg.lm, std::move(space));
}

}  // namespace fsgr
