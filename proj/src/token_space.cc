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

#include "fsgr/token_space.h"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "fsgr/errors.h"

namespace fsgr {
namespace {

constexpr std::string_view kEndPiece = "\n";
constexpr std::string_view kUnkPiece = "<unk>";

bool is_blank(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

TokenSpace::TokenSpace(TokenizerKind kind, std::vector<std::string> pieces)
    : kind_(kind), pieces_(std::move(pieces)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].empty()) {
      throw FormatError("empty token piece", i + 1);
    }
    if (!ids_.emplace(pieces_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate token piece '" + pieces_[i] + "'", i + 1);
    }
    longest_piece_ = std::max(longest_piece_, pieces_[i].size());
  }
  auto reserve = [this](std::string_view piece) {
    if (auto it = ids_.find(std::string(piece)); it != ids_.end()) {
      return it->second;
    }
    auto id = static_cast<TokenId>(pieces_.size());
    pieces_.emplace_back(piece);
    ids_.emplace(std::string(piece), id);
    return id;
  };
  end_ = reserve(kEndPiece);
  unk_ = reserve(kUnkPiece);
}

TokenSpace TokenSpace::whitespace(std::vector<std::string> words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (std::any_of(words[i].begin(), words[i].end(),
                    [](char c) { return is_blank(c) || c == '\n'; })) {
      throw FormatError("whitespace vocabulary entry contains a space",
                        i + 1);
    }
  }
  return TokenSpace(TokenizerKind::kWhitespace, std::move(words));
}

TokenSpace TokenSpace::whitespace_from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    words.push_back(line);
  }
  return whitespace(std::move(words));
}

TokenSpace TokenSpace::character() {
  std::vector<std::string> pieces;
  for (char c = 0x20; c < 0x7F; ++c) pieces.emplace_back(1, c);
  return TokenSpace(TokenizerKind::kCharacter, std::move(pieces));
}

TokenSpace TokenSpace::external(std::vector<std::string> pieces) {
  return TokenSpace(TokenizerKind::kExternal, std::move(pieces));
}

TokenSpace TokenSpace::external_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("vocabulary file " + path.string() + ": " + e.what());
  }
  if (!doc.is_array()) {
    throw FormatError("vocabulary file must hold a JSON array of strings");
  }
  std::vector<std::string> pieces;
  for (const auto& p : doc) {
    if (!p.is_string()) throw FormatError("non-string vocabulary entry");
    pieces.push_back(p.get<std::string>());
  }
  return external(std::move(pieces));
}

TokenSequence TokenSpace::encode(std::string_view text) const {
  return kind_ == TokenizerKind::kWhitespace ? encode_words(text)
                                             : encode_pieces(text);
}

TokenSequence TokenSpace::encode_words(std::string_view text) const {
  TokenSequence out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\n') {
      out.push_back(end_);
      ++i;
      continue;
    }
    if (is_blank(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !is_blank(text[j]) && text[j] != '\n') ++j;
    auto it = ids_.find(std::string(text.substr(i, j - i)));
    out.push_back(it == ids_.end() || it->second == end_ ? unk_ : it->second);
    i = j;
  }
  return out;
}

TokenSequence TokenSpace::encode_pieces(std::string_view text) const {
  TokenSequence out;
  std::size_t i = 0;
  std::string key;
  while (i < text.size()) {
    std::size_t len = std::min(longest_piece_, text.size() - i);
    bool matched = false;
    for (; len > 0; --len) {
      key.assign(text.substr(i, len));
      if (auto it = ids_.find(key); it != ids_.end()) {
        out.push_back(it->second);
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(unk_);
      i += std::min(utf8_length(static_cast<unsigned char>(text[i])),
                    text.size() - i);
    }
  }
  return out;
}

std::string TokenSpace::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (!contains(t)) {
      throw InvalidToken("token id " + std::to_string(t) +
                         " outside vocabulary of size " +
                         std::to_string(pieces_.size()));
    }
    if (kind_ == TokenizerKind::kWhitespace && t != end_ && !out.empty() &&
        out.back() != '\n') {
      out.push_back(' ');
    }
    out += pieces_[static_cast<std::size_t>(t)];
  }
  return out;
}

std::string TokenSpace::canonical(std::string_view text) const {
  return decode(encode(text));
}

const std::string& TokenSpace::piece(TokenId id) const {
  if (!contains(id)) {
    throw InvalidToken("token id " + std::to_string(id) + " out of range");
  }
  return pieces_[static_cast<std::size_t>(id)];
}

std::optional<TokenId> TokenSpace::find(std::string_view piece) const {
  if (auto it = ids_.find(std::string(piece)); it != ids_.end()) {
    return it->second;
  }
  return std::nullopt;
}

}  // namespace fsgr
