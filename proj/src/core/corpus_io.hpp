/*
 * Copyright (c) 2026, The trdec Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace trdec {

using Sentence = std::vector<std::string>;

struct ParallelCorpus {
  std::string name;
  std::vector<std::pair<Sentence, Sentence>> pairs;

  std::size_t size() const { return pairs.size(); }
};

/// Splits on runs of ASCII whitespace.
Sentence split_tokens(std::string_view line);
std::string join_tokens(const Sentence& tokens);

/// Reads a UTF-8 text file line by line; a trailing '\r' is dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

/// Reads one tokenized sentence per line. Empty lines are an error.
std::vector<Sentence> read_sentences(const std::filesystem::path& path);

/// Pairs line i of both files. Line counts must match and no line may be
/// empty.
ParallelCorpus read_parallel(const std::filesystem::path& src_path,
                             const std::filesystem::path& tgt_path);

// Splits a UTF-8 string into code points. Invalid bytes become one-byte
// pieces so nothing is lost.
std::vector<std::string> utf8_chars(std::string_view s);

using TokenId = std::int32_t;

class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kSos = 2;
  static constexpr TokenId kEos = 3;
  static constexpr TokenId kEop = 4;
  static constexpr std::size_t kNumReserved = 5;

  static const std::vector<std::string>& reserved_tokens();

  /// A vocabulary holding only the reserved tokens.
  Vocab();

  /// Appends a token if absent; returns its id either way.
  TokenId add(const std::string& token);

  TokenId id(const std::string& token) const;  // kUnk when absent
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const Sentence& s) const;
  Sentence decode(const std::vector<TokenId>& ids) const;

  /// One token per line, id = line index. The first lines must be the
  /// reserved tokens in order.
  std::string serialize() const;
  static Vocab deserialize(std::string_view text);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// Keeps the max_size - kNumReserved most frequent tokens; frequency ties
/// are broken lexicographically.
Vocab build_vocab(const std::vector<Sentence>& corpus, std::size_t max_size);

}  // namespace trdec
