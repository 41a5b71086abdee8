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

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "fsgr/lm_provider.h"

namespace fsgr {

struct HttpLmConfig {
  // Full URL of a completion endpoint, e.g. http://127.0.0.1:8080/v1/completions
  std::string endpoint;
  std::string model;
  std::string api_key;
  int top_logprobs = 20;
  double floor_logprob = -30.0;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;
  std::chrono::milliseconds retry_backoff{250};
  int max_in_flight = 4;
};

// LanguageModel backed by a completion endpoint. Each call sends
// {model, prompt, max_tokens: 1, logprobs: K, temperature: 0} with the
// decoded prefix appended to the prompt, and reads the top-K log-probs of the
// first generated position. Token strings are mapped to ids through the token
// space; strings it does not know are dropped. Tokens requested through
// restrict_to but absent from the top-K list get floor_logprob.
//
// Connection failures, timeouts, HTTP 429 and 5xx are retried with
// exponential backoff, then surface as TransportError. Other HTTP errors and
// responses without log-probs raise ProtocolError.
class HttpLm : public LanguageModel {
 public:
  HttpLm(HttpLmConfig config, std::shared_ptr<const TokenSpace> space);

  std::size_t vocab_size() const override { return space_->vocab_size(); }
  const HttpLmConfig& config() const { return config_; }

 protected:
  NextTokenDistribution do_next_token_logprobs(
      const PromptContext& ctx,
      std::optional<std::span<const TokenId>> restrict_to) const override;

 private:
  std::string post(const std::string& body) const;

  HttpLmConfig config_;
  std::shared_ptr<const TokenSpace> space_;
  std::string host_;  // scheme://host:port
  std::string path_;
  mutable std::counting_semaphore<> in_flight_;
};

}  // namespace fsgr
