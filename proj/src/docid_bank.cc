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

#include "fsgr/docid_bank.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fsgr/errors.h"

namespace fsgr {

// Children live in a sorted vector while the fan-out is small and move to a
// hash map once it exceeds the branching threshold.
class ChildMap {
 public:
  TrieNode* find(TokenId t) const;
  // Returns the child for `t`, creating it if needed; second is true when
  // created.
  std::pair<TrieNode*, bool> emplace(TokenId t, std::size_t threshold);
  void erase(TokenId t, std::size_t threshold);
  std::size_t size() const { return large_ ? large_->size() : small_.size(); }
  bool empty() const { return size() == 0; }
  std::vector<TokenId> keys() const;

 private:
  using Small = std::vector<std::pair<TokenId, std::unique_ptr<TrieNode>>>;
  using Large = std::unordered_map<TokenId, std::unique_ptr<TrieNode>>;
  Small small_;
  std::unique_ptr<Large> large_;
};

struct TrieNode {
  ChildMap children;
  // Points into DocIdBank::by_docid_ when the root-to-here path is a docid.
  const DocIdEntry* terminal = nullptr;
};

TrieNode* ChildMap::find(TokenId t) const {
  if (large_) {
    auto it = large_->find(t);
    return it == large_->end() ? nullptr : it->second.get();
  }
  auto it = std::lower_bound(
      small_.begin(), small_.end(), t,
      [](const auto& child, TokenId key) { return child.first < key; });
  return it != small_.end() && it->first == t ? it->second.get() : nullptr;
}

std::pair<TrieNode*, bool> ChildMap::emplace(TokenId t,
                                             std::size_t threshold) {
  if (TrieNode* existing = find(t)) return {existing, false};
  auto node = std::make_unique<TrieNode>();
  TrieNode* raw = node.get();
  if (large_) {
    large_->emplace(t, std::move(node));
    return {raw, true};
  }
  auto it = std::lower_bound(
      small_.begin(), small_.end(), t,
      [](const auto& child, TokenId key) { return child.first < key; });
  small_.emplace(it, t, std::move(node));
  if (small_.size() > threshold) {
    large_ = std::make_unique<Large>();
    for (auto& [key, child] : small_) large_->emplace(key, std::move(child));
    small_.clear();
  }
  return {raw, true};
}

void ChildMap::erase(TokenId t, std::size_t threshold) {
  if (large_) {
    large_->erase(t);
    if (large_->size() <= threshold) {
      for (auto& [key, child] : *large_) small_.emplace_back(key, std::move(child));
      std::sort(small_.begin(), small_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      large_.reset();
    }
    return;
  }
  auto it = std::lower_bound(
      small_.begin(), small_.end(), t,
      [](const auto& child, TokenId key) { return child.first < key; });
  if (it != small_.end() && it->first == t) small_.erase(it);
}

std::vector<TokenId> ChildMap::keys() const {
  std::vector<TokenId> out;
  out.reserve(size());
  if (large_) {
    for (const auto& [key, child] : *large_) out.push_back(key);
    std::sort(out.begin(), out.end());
  } else {
    for (const auto& [key, child] : small_) out.push_back(key);
  }
  return out;
}

namespace {

constexpr std::string_view kMagic = "#fsgr-docid-bank";
constexpr std::string_view kVersion = "v1";

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s, std::size_t line) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw FormatError("dangling escape", line);
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw FormatError("unknown escape", line);
    }
  }
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Header value for "key=value".
template <typename T>
T header_value(std::string_view field, std::string_view key) {
  T value{};
  if (field.substr(0, key.size()) != key || field.size() <= key.size() ||
      field[key.size()] != '=' ||
      !parse_number(field.substr(key.size() + 1), value)) {
    throw FormatError("bank header: expected " + std::string(key) + "=<n>", 1);
  }
  return value;
}

}  // namespace

nlohmann::json CollisionReport::to_json() const {
  nlohmann::json j;
  j["colliding_docids"] = nlohmann::json::array();
  for (const auto& [docid, docs] : colliding_docids) {
    j["colliding_docids"].push_back({{"docid", docid}, {"doc_ids", docs}});
  }
  j["orphaned_docs"] = orphaned_docs;
  return j;
}

nlohmann::json BankStats::to_json() const {
  return {{"documents", documents},
          {"docids", docids},
          {"collisions", collisions},
          {"mean_docids_per_doc", mean_docids_per_doc},
          {"trie_nodes", trie_nodes}};
}

DocIdBank::DocIdBank(std::size_t vocab_size, TokenId end_token,
                     std::size_t branching_threshold)
    : vocab_size_(vocab_size),
      end_token_(end_token),
      branching_threshold_(std::max<std::size_t>(1, branching_threshold)),
      root_(std::make_unique<TrieNode>()) {}

DocIdBank::~DocIdBank() = default;
DocIdBank::DocIdBank(DocIdBank&&) noexcept = default;
DocIdBank& DocIdBank::operator=(DocIdBank&&) noexcept = default;

DocIdBank::DocIdBank(const DocIdBank& other)
    : DocIdBank(other.vocab_size_, other.end_token_,
                other.branching_threshold_) {
  for (const auto& [text, entry] : other.by_docid_) insert(entry);
  pending_ = other.pending_;
  collisions_resolved_ = other.collisions_resolved_;
}

DocIdBank& DocIdBank::operator=(const DocIdBank& other) {
  if (this != &other) *this = DocIdBank(other);
  return *this;
}

const TrieNode* DocIdBank::walk(std::span<const TokenId> tokens) const {
  const TrieNode* node = root_.get();
  for (TokenId t : tokens) {
    node = node->children.find(t);
    if (node == nullptr) return nullptr;
  }
  return node;
}

InsertOutcome DocIdBank::insert(DocIdEntry entry) {
  if (entry.tokens.empty()) throw TokenOutOfRange("docid has no tokens");
  for (TokenId t : entry.tokens) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size_) {
      throw TokenOutOfRange("docid token " + std::to_string(t) +
                            " outside vocabulary of size " +
                            std::to_string(vocab_size_));
    }
    if (t == end_token_) {
      throw TokenOutOfRange("docid contains the reserved end token");
    }
  }
  if (entry.docid_text.empty() || entry.doc_ref.empty()) {
    throw std::invalid_argument("docid entry needs a docid text and doc ref");
  }

  auto claim = [this, &entry](const DocIdEntry& owner) {
    if (owner.doc_ref == entry.doc_ref) {
      return InsertOutcome{InsertStatus::kDuplicateSameDoc, owner.doc_ref};
    }
    auto& claimants = pending_[owner.docid_text];
    claimants.insert(owner.doc_ref);
    claimants.insert(entry.doc_ref);
    return InsertOutcome{InsertStatus::kCollision, owner.doc_ref};
  };
  if (auto it = by_docid_.find(entry.docid_text); it != by_docid_.end()) {
    return claim(it->second);
  }
  if (const TrieNode* node = walk(entry.tokens);
      node != nullptr && node->terminal != nullptr) {
    return claim(*node->terminal);
  }

  TrieNode* node = root_.get();
  for (TokenId t : entry.tokens) {
    auto [child, created] = node->children.emplace(t, branching_threshold_);
    if (created) ++node_count_;
    node = child;
  }
  by_doc_[entry.doc_ref].insert(entry.docid_text);
  auto [it, inserted] = by_docid_.emplace(entry.docid_text, std::move(entry));
  node->terminal = &it->second;
  return InsertOutcome{InsertStatus::kInserted, {}};
}

void DocIdBank::erase_path(const TokenSequence& tokens) {
  std::vector<TrieNode*> path{root_.get()};
  for (TokenId t : tokens) {
    TrieNode* next = path.back()->children.find(t);
    if (next == nullptr) return;
    path.push_back(next);
  }
  path.back()->terminal = nullptr;
  for (std::size_t depth = tokens.size(); depth > 0; --depth) {
    TrieNode* node = path[depth];
    if (node->terminal != nullptr || !node->children.empty()) break;
    path[depth - 1]->children.erase(tokens[depth - 1], branching_threshold_);
    --node_count_;
  }
}

CollisionReport DocIdBank::resolve_collisions() {
  CollisionReport report;
  std::set<std::string> claimants_seen;
  for (const auto& [text, claimants] : pending_) {
    if (auto it = by_docid_.find(text); it != by_docid_.end()) {
      const std::string owner = it->second.doc_ref;
      erase_path(it->second.tokens);
      by_docid_.erase(it);
      auto doc_it = by_doc_.find(owner);
      doc_it->second.erase(text);
      if (doc_it->second.empty()) by_doc_.erase(doc_it);
    }
    report.colliding_docids.emplace_back(
        text, std::vector<std::string>(claimants.begin(), claimants.end()));
    claimants_seen.insert(claimants.begin(), claimants.end());
  }
  collisions_resolved_ += pending_.size();
  pending_.clear();
  for (const auto& doc : claimants_seen) {
    if (!by_doc_.contains(doc)) report.orphaned_docs.push_back(doc);
  }
  return report;
}

AllowedNext DocIdBank::allowed_next(std::span<const TokenId> prefix) const {
  const TrieNode* node = walk(prefix);
  if (node == nullptr) {
    throw PrefixNotInTrie("prefix of length " + std::to_string(prefix.size()) +
                          " is not a path in the docid trie");
  }
  AllowedNext out;
  out.tokens = node->children.keys();
  if (node->terminal != nullptr) {
    out.can_terminate = true;
    out.terminal_doc = node->terminal->doc_ref;
  }
  return out;
}

std::optional<std::string> DocIdBank::lookup(
    std::string_view docid_text) const {
  auto it = by_docid_.find(docid_text);
  if (it == by_docid_.end()) return std::nullopt;
  return it->second.doc_ref;
}

const DocIdEntry* DocIdBank::find(std::span<const TokenId> tokens) const {
  const TrieNode* node = walk(tokens);
  return node == nullptr ? nullptr : node->terminal;
}

std::size_t DocIdBank::remove_document(std::string_view doc_ref) {
  std::size_t removed = 0;
  if (auto doc_it = by_doc_.find(doc_ref); doc_it != by_doc_.end()) {
    for (const auto& text : doc_it->second) {
      auto it = by_docid_.find(text);
      erase_path(it->second.tokens);
      by_docid_.erase(it);
      ++removed;
    }
    by_doc_.erase(doc_it);
  }
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (auto c = it->second.find(std::string(doc_ref)); c != it->second.end()) {
      it->second.erase(c);
    }
    it = it->second.size() < 2 ? pending_.erase(it) : std::next(it);
  }
  return removed;
}

CollisionReport DocIdBank::merge(const DocIdBank& other) {
  if (other.vocab_size_ != vocab_size_ || other.end_token_ != end_token_) {
    throw ConfigError("cannot merge banks built over different token spaces");
  }
  for (const auto& [text, entry] : other.by_docid_) insert(entry);
  for (const auto& [text, claimants] : other.pending_) {
    pending_[text].insert(claimants.begin(), claimants.end());
  }
  return resolve_collisions();
}

void DocIdBank::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write bank file: " + path.string());
  out << kMagic << '\t' << kVersion << "\tvocab_size=" << vocab_size_
      << "\tend_token=" << end_token_ << "\tdocids=" << by_docid_.size()
      << "\tcollisions=" << collisions_resolved_ << '\n';
  for (const auto& [text, entry] : by_docid_) {
    out << escape_field(entry.doc_ref) << '\t' << escape_field(text) << '\t';
    for (std::size_t i = 0; i < entry.tokens.size(); ++i) {
      if (i > 0) out << ' ';
      out << entry.tokens[i];
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing bank file: " + path.string());
}

DocIdBank DocIdBank::load(const std::filesystem::path& path,
                          const TokenSpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bank file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("bank file is empty", 1);
  const auto header = split(line, '\t');
  if (header.size() != 6 || header[0] != kMagic) {
    throw FormatError("not a docid bank file", 1);
  }
  if (header[1] != kVersion) {
    throw FormatError("unsupported bank version '" + std::string(header[1]) +
                      "'", 1);
  }
  const auto vocab = header_value<std::size_t>(header[2], "vocab_size");
  const auto end = header_value<TokenId>(header[3], "end_token");
  const auto expected = header_value<std::size_t>(header[4], "docids");
  const auto collisions = header_value<std::size_t>(header[5], "collisions");
  if (vocab != space.vocab_size() || end != space.end()) {
    throw FormatError("bank was built over a different token space (vocab " +
                      std::to_string(vocab) + ", end " + std::to_string(end) +
                      ")", 1);
  }

  DocIdBank bank(vocab, end);
  std::size_t lineno = 1;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw FormatError("bank record needs 3 tab-separated fields", lineno);
    }
    DocIdEntry entry;
    entry.doc_ref = unescape_field(fields[0], lineno);
    entry.docid_text = unescape_field(fields[1], lineno);
    for (auto tok : split(fields[2], ' ')) {
      TokenId id;
      if (!parse_number(tok, id)) {
        throw FormatError("bad token id '" + std::string(tok) + "'", lineno);
      }
      entry.tokens.push_back(id);
    }
    try {
      if (space.decode(entry.tokens) != entry.docid_text) {
        throw FormatError("docid text does not match its tokens", lineno);
      }
      if (bank.insert(std::move(entry)).status != InsertStatus::kInserted) {
        throw FormatError("duplicate docid", lineno);
      }
    } catch (const InvalidToken& e) {
      throw FormatError(e.what(), lineno);
    } catch (const TokenOutOfRange& e) {
      throw FormatError(e.what(), lineno);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what(), lineno);
    }
    ++records;
  }
  if (records != expected) {
    throw FormatError("bank file truncated: header promises " +
                      std::to_string(expected) + " docids, found " +
                      std::to_string(records));
  }
  bank.collisions_resolved_ = collisions;
  return bank;
}

BankStats DocIdBank::stats() const {
  BankStats s;
  s.documents = by_doc_.size();
  s.docids = by_docid_.size();
  s.collisions = collisions_resolved_;
  s.mean_docids_per_doc =
      s.documents == 0 ? 0.0
                       : static_cast<double>(s.docids) /
                             static_cast<double>(s.documents);
  s.trie_nodes = node_count_;
  return s;
}

bool DocIdBank::has_document(std::string_view doc_ref) const {
  return by_doc_.find(doc_ref) != by_doc_.end();
}

std::vector<std::string> DocIdBank::documents() const {
  std::vector<std::string> out;
  out.reserve(by_doc_.size());
  for (const auto& [doc, ids] : by_doc_) out.push_back(doc);
  return out;
}

std::vector<std::string> DocIdBank::docids_of(std::string_view doc_ref) const {
  auto it = by_doc_.find(doc_ref);
  if (it == by_doc_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<DocIdEntry> DocIdBank::entries() const {
  std::vector<DocIdEntry> out;
  out.reserve(by_docid_.size());
  for (const auto& [text, entry] : by_docid_) out.push_back(entry);
  return out;
}

bool operator==(const DocIdBank& a, const DocIdBank& b) {
  if (a.vocab_size_ != b.vocab_size_ || a.end_token_ != b.end_token_ ||
      a.by_docid_.size() != b.by_docid_.size()) {
    return false;
  }
  return std::equal(a.by_docid_.begin(), a.by_docid_.end(),
                    b.by_docid_.begin(), [](const auto& x, const auto& y) {
                      return x.first == y.first &&
                             x.second.doc_ref == y.second.doc_ref &&
                             x.second.tokens == y.second.tokens;
                    });
}

}  // namespace fsgr
