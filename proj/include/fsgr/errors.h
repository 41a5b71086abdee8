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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsgr {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes, so new error kinds should derive from the closest class below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments supplied by the operator.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. Carries the 1-based line number when known (0 if not).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidToken : public Error {
 public:
  using Error::Error;
};

class TokenOutOfRange : public Error {
 public:
  using Error::Error;
};

class PrefixNotInTrie : public Error {
 public:
  using Error::Error;
};

class EmptyBank : public Error {
 public:
  EmptyBank() : Error("docid bank is empty") {}
};

// LM backend unreachable, timed out, or kept failing after retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// LM backend answered, but the response lacks what we asked for.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// A single docid or pseudo-query generation produced nothing usable.
class GenerationError : public Error {
 public:
  using Error::Error;
};

class IndexingFailed : public Error {
 public:
  using Error::Error;
};

class MissingQrels : public Error {
 public:
  explicit MissingQrels(const std::string& query_id)
      : Error("no relevance judgments for query '" + query_id + "'"),
        query_id_(query_id) {}
  const std::string& query_id() const noexcept { return query_id_; }

 private:
  std::string query_id_;
};

}  // namespace fsgr
