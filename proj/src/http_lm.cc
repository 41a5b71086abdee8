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

#include "fsgr/http_lm.h"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fsgr/errors.h"

namespace fsgr {
namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& sem) : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

bool retryable(int status) { return status == 429 || status >= 500; }

// Accepts both {"tok": lp, ...} and [{"token": "tok", "logprob": lp}, ...].
std::vector<std::pair<std::string, double>> top_entries(
    const nlohmann::json& top) {
  std::vector<std::pair<std::string, double>> out;
  if (top.is_object()) {
    for (const auto& [tok, lp] : top.items()) {
      out.emplace_back(tok, lp.get<double>());
    }
  } else if (top.is_array()) {
    for (const auto& e : top) {
      out.emplace_back(e.at("token").get<std::string>(),
                       e.at("logprob").get<double>());
    }
  } else {
    throw ProtocolError("top_logprobs has an unexpected shape");
  }
  return out;
}

const nlohmann::json& first_position(const nlohmann::json& response) {
  const auto& choices = response.at("choices");
  if (!choices.is_array() || choices.empty()) {
    throw ProtocolError("completion response has no choices");
  }
  const auto& lp = choices.at(0).at("logprobs");
  if (lp.is_null()) throw ProtocolError("completion response has no logprobs");
  if (lp.contains("top_logprobs")) {
    const auto& top = lp.at("top_logprobs");
    if (!top.is_array() || top.empty() || top.at(0).is_null()) {
      throw ProtocolError("completion response has empty top_logprobs");
    }
    return top.at(0);
  }
  if (lp.contains("content")) {
    const auto& content = lp.at("content");
    if (!content.is_array() || content.empty()) {
      throw ProtocolError("completion response has empty logprobs content");
    }
    return content.at(0).at("top_logprobs");
  }
  throw ProtocolError("completion response lacks top_logprobs");
}

}  // namespace

HttpLm::HttpLm(HttpLmConfig config, std::shared_ptr<const TokenSpace> space)
    : config_(std::move(config)),
      space_(std::move(space)),
      in_flight_(std::max(1, config_.max_in_flight)) {
  if (!space_) throw ConfigError("HTTP LM needs a token space");
  if (config_.top_logprobs < 1) throw ConfigError("top_logprobs must be >= 1");
  const std::string& url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    throw ConfigError("LM endpoint must be an http:// URL, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (host_.size() <= scheme_end + 3) {
    throw ConfigError("LM endpoint has no host: '" + url + "'");
  }
}

std::string HttpLm::post(const std::string& body) const {
  SlotGuard slot(in_flight_);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
      config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - secs);

  std::string last_error;
  const int attempts = std::max(0, config_.max_retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.retry_backoff * (1 << (attempt - 1)));
    }
    httplib::Client client(host_);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable(res->status)) {
      throw ProtocolError("LM endpoint " + config_.endpoint + " answered " +
                          last_error);
    }
  }
  throw TransportError("LM endpoint " + config_.endpoint + " failed after " +
                       std::to_string(attempts) + " attempt(s): " +
                       last_error);
}

NextTokenDistribution HttpLm::do_next_token_logprobs(
    const PromptContext& ctx,
    std::optional<std::span<const TokenId>> restrict_to) const {
  nlohmann::json request = {
      {"model", config_.model},
      {"prompt", ctx.prompt_text + space_->decode(ctx.generated_prefix)},
      {"max_tokens", 1},
      {"logprobs", config_.top_logprobs},
      {"temperature", 0},
  };
  const std::string body = post(request.dump());

  std::map<TokenId, double> reported;
  try {
    const auto response = nlohmann::json::parse(body);
    for (const auto& [tok, lp] : top_entries(first_position(response))) {
      if (auto id = space_->find(tok)) {
        // the same id can surface twice through equivalent strings
        auto [it, fresh] = reported.emplace(*id, lp);
        if (!fresh) it->second = std::max(it->second, lp);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed completion response: ") +
                        e.what());
  }

  NextTokenDistribution out;
  out.normalized = false;
  if (restrict_to) {
    for (TokenId t : *restrict_to) {
      auto it = reported.find(t);
      out.entries[t] = it == reported.end() ? config_.floor_logprob
                                            : it->second;
    }
  } else {
    if (reported.empty()) {
      throw ProtocolError("no reported token belongs to the token space");
    }
    out.entries = std::move(reported);
  }
  return out;
}

}  // namespace fsgr
