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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fsgr {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

enum class TokenizerKind { kWhitespace, kCharacter, kExternal };

// The token alphabet shared by the LM provider, the docid trie, and the
// decoder. Immutable after construction.
//
// Every space reserves two special ids:
//   * end(): the "\n" piece, which terminates a one-line completion and marks
//     docid completion during constrained decoding;
//   * unk(): produced by encode() for text that has no piece.
//
// Kinds:
//   * whitespace: words split on whitespace; decode joins with one space.
//   * character: one token per printable ASCII byte.
//   * external: a piece vocabulary (e.g. dumped from the serving LLM's
//     tokenizer) matched greedily, longest piece first. Token strings returned
//     by an HTTP backend are mapped back to ids through find().
class TokenSpace {
 public:
  static TokenSpace whitespace(std::vector<std::string> words);
  // One token per line; line number (0-based) is the TokenId.
  static TokenSpace whitespace_from_file(const std::filesystem::path& path);
  static TokenSpace character();
  static TokenSpace external(std::vector<std::string> pieces);
  // JSON array of piece strings; array index is the TokenId.
  static TokenSpace external_from_file(const std::filesystem::path& path);

  TokenizerKind kind() const noexcept { return kind_; }
  std::size_t vocab_size() const noexcept { return pieces_.size(); }
  TokenId unk() const noexcept { return unk_; }
  TokenId end() const noexcept { return end_; }
  bool contains(TokenId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < pieces_.size();
  }

  TokenSequence encode(std::string_view text) const;
  // Throws InvalidToken for ids outside the vocabulary.
  std::string decode(std::span<const TokenId> tokens) const;
  // What decode(encode(text)) yields for in-vocabulary text.
  std::string canonical(std::string_view text) const;

  const std::string& piece(TokenId id) const;
  std::optional<TokenId> find(std::string_view piece) const;

 private:
  TokenSpace(TokenizerKind kind, std::vector<std::string> pieces);

  TokenSequence encode_words(std::string_view text) const;
  TokenSequence encode_pieces(std::string_view text) const;

  TokenizerKind kind_;
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, TokenId> ids_;
  std::size_t longest_piece_ = 1;
  TokenId unk_ = 0;
  TokenId end_ = 0;
};

}  // namespace fsgr
