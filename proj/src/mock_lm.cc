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

#include "fsgr/mock_lm.h"

#include <cmath>
#include <fstream>
#include <limits>

#include "fsgr/errors.h"

namespace fsgr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// FNV-1a, so hashed distributions are stable across platforms and builds.
class Fnv {
 public:
  explicit Fnv(std::uint64_t seed) { mix(&seed, sizeof seed); }
  void mix(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::map<TokenId, double> parse_logprobs(const nlohmann::json& j,
                                         std::size_t vocab_size) {
  if (!j.is_object()) throw FormatError("mock logprobs must be an object");
  std::map<TokenId, double> out;
  for (const auto& [key, value] : j.items()) {
    TokenId id;
    try {
      std::size_t used = 0;
      id = static_cast<TokenId>(std::stol(key, &used));
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw FormatError("mock logprobs key '" + key + "' is not a token id");
    }
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
      throw FormatError("mock logprobs token " + key + " outside vocabulary");
    }
    if (!value.is_number()) {
      throw FormatError("mock logprob for token " + key + " is not a number");
    }
    out[id] = value.get<double>();
  }
  return out;
}

nlohmann::json logprobs_json(const std::map<TokenId, double>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, lp] : m) j[std::to_string(id)] = lp;
  return j;
}

}  // namespace

MockLm::MockLm(std::size_t vocab_size, Default fallback,
               std::vector<Rule> rules)
    : vocab_size_(vocab_size),
      fallback_(std::move(fallback)),
      rules_(std::move(rules)) {
  if (vocab_size_ == 0) throw ConfigError("mock vocabulary must be non-empty");
  if (const auto* table = std::get_if<Table>(&fallback_)) {
    fallback_dense_ = complete(table->logprobs);
  } else if (std::holds_alternative<Uniform>(fallback_)) {
    fallback_dense_ = complete({});
  }
  rule_dense_.reserve(rules_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    for (TokenId t : rules_[i].prefix) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
        throw FormatError("mock rule prefix token outside vocabulary", i + 1);
      }
    }
    rule_dense_.push_back(complete(rules_[i].logprobs));
    rules_by_prefix_[rules_[i].prefix].push_back(i);
  }
}

std::vector<double> MockLm::complete(
    const std::map<TokenId, double>& listed) const {
  double mass = 0.0;
  for (const auto& [id, lp] : listed) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size_) {
      throw FormatError("mock log-prob token outside vocabulary");
    }
    if (std::isnan(lp) || lp > 1e-12) {
      throw FormatError("mock log-probs must be <= 0");
    }
    mass += std::exp(lp);
  }
  if (mass > 1.0 + 1e-9) {
    throw FormatError("mock distribution carries more than unit mass");
  }
  const std::size_t unlisted = vocab_size_ - listed.size();
  const double leftover = std::max(0.0, 1.0 - mass);
  if (unlisted == 0 && leftover > 1e-6) {
    throw FormatError("mock distribution over the full vocabulary must sum to 1");
  }
  const double rest = (unlisted == 0 || leftover <= 1e-15)
                          ? kNegInf
                          : std::log(leftover / static_cast<double>(unlisted));
  std::vector<double> dense(vocab_size_, rest);
  for (const auto& [id, lp] : listed) dense[static_cast<std::size_t>(id)] = lp;
  return dense;
}

std::vector<double> MockLm::hashed(const Hashed& h,
                                   const PromptContext& ctx) const {
  Fnv fnv(h.seed);
  fnv.mix(ctx.prompt_text.data(), ctx.prompt_text.size());
  for (TokenId t : ctx.generated_prefix) fnv.mix(&t, sizeof t);
  const std::uint64_t base = fnv.value();
  std::vector<double> dense(vocab_size_);
  for (std::size_t t = 0; t < vocab_size_; ++t) {
    const std::uint64_t bits = splitmix(base ^ splitmix(t));
    const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
    dense[t] = h.scale * u;
  }
  const double z = log_sum_exp(dense);
  for (double& v : dense) v -= z;
  return dense;
}

std::vector<double> MockLm::full_distribution(const PromptContext& ctx) const {
  if (auto it = rules_by_prefix_.find(ctx.generated_prefix);
      it != rules_by_prefix_.end()) {
    const std::vector<double>* best = nullptr;
    std::size_t best_len = 0;
    for (std::size_t idx : it->second) {
      const auto& ctx_str = rules_[idx].context;
      if (!ctx_str.empty() &&
          ctx.prompt_text.find(ctx_str) == std::string::npos) {
        continue;
      }
      if (best == nullptr || ctx_str.size() > best_len) {
        best = &rule_dense_[idx];
        best_len = ctx_str.size();
      }
    }
    if (best != nullptr) return *best;
  }
  if (const auto* h = std::get_if<Hashed>(&fallback_)) return hashed(*h, ctx);
  return fallback_dense_;
}

NextTokenDistribution MockLm::do_next_token_logprobs(
    const PromptContext& ctx,
    std::optional<std::span<const TokenId>> restrict_to) const {
  const auto dense = full_distribution(ctx);
  NextTokenDistribution out;
  out.normalized = true;
  if (restrict_to) {
    for (TokenId t : *restrict_to) {
      out.entries[t] = dense[static_cast<std::size_t>(t)];
    }
  } else {
    for (std::size_t t = 0; t < dense.size(); ++t) {
      out.entries.emplace_hint(out.entries.end(), static_cast<TokenId>(t),
                               dense[t]);
    }
  }
  return out;
}

MockLm MockLm::from_json(const nlohmann::json& doc, std::size_t vocab_size) {
  const nlohmann::json* entries = nullptr;
  Default fallback = Uniform{};
  if (doc.is_array()) {
    entries = &doc;
  } else if (doc.is_object()) {
    if (doc.contains("vocab_size") &&
        doc.at("vocab_size").get<std::size_t>() != vocab_size) {
      throw FormatError("mock table vocab_size " +
                        doc.at("vocab_size").dump() +
                        " does not match the token space (" +
                        std::to_string(vocab_size) + ")");
    }
    if (doc.contains("default")) {
      const auto& d = doc.at("default");
      if (d.is_string() && d.get<std::string>() == "uniform") {
        fallback = Uniform{};
      } else if (d.is_object() && d.contains("hashed")) {
        const auto& h = d.at("hashed");
        fallback = Hashed{h.value("seed", std::uint64_t{0}),
                          h.value("scale", 4.0)};
      } else if (d.is_object() && d.contains("logprobs")) {
        fallback = Table{parse_logprobs(d.at("logprobs"), vocab_size)};
      } else {
        throw FormatError("unrecognised mock default distribution");
      }
    }
    if (doc.contains("entries")) entries = &doc.at("entries");
  } else {
    throw FormatError("mock table must be a JSON object or array");
  }

  std::vector<Rule> rules;
  if (entries != nullptr) {
    if (!entries->is_array()) throw FormatError("mock entries must be a list");
    for (const auto& e : *entries) {
      if (!e.is_object() || !e.contains("logprobs")) {
        throw FormatError("mock entry needs a logprobs object");
      }
      Rule r;
      if (e.contains("prefix")) {
        r.prefix = e.at("prefix").get<TokenSequence>();
      }
      r.context = e.value("context", std::string{});
      r.logprobs = parse_logprobs(e.at("logprobs"), vocab_size);
      rules.push_back(std::move(r));
    }
  }
  return MockLm(vocab_size, std::move(fallback), std::move(rules));
}

MockLm MockLm::load(const std::filesystem::path& path,
                    std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock LM table: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("mock LM table " + path.string() + ": " + e.what());
  }
  try {
    return from_json(doc, vocab_size);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("mock LM table " + path.string() + ": " + e.what());
  }
}

nlohmann::json MockLm::to_json() const {
  nlohmann::json doc;
  doc["vocab_size"] = vocab_size_;
  std::visit(
      [&doc](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Uniform>) {
          doc["default"] = "uniform";
        } else if constexpr (std::is_same_v<T, Hashed>) {
          doc["default"] = {{"hashed", {{"seed", d.seed}, {"scale", d.scale}}}};
        } else {
          doc["default"] = {{"logprobs", logprobs_json(d.logprobs)}};
        }
      },
      fallback_);
  doc["entries"] = nlohmann::json::array();
  for (const auto& r : rules_) {
    nlohmann::json e;
    e["prefix"] = r.prefix;
    if (!r.context.empty()) e["context"] = r.context;
    e["logprobs"] = logprobs_json(r.logprobs);
    doc["entries"].push_back(std::move(e));
  }
  return doc;
}

}  // namespace fsgr
