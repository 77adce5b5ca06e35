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

#include "core/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "core/error.hpp"

namespace trdec {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

Sentence split_tokens(std::string_view line) {
  Sentence out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const Sentence& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Sentence> read_sentences(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::vector<Sentence> out;
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto toks = split_tokens(lines[i]);
    if (toks.empty()) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(i + 1) +
                                 ": empty sentence");
    }
    out.push_back(std::move(toks));
  }
  return out;
}

ParallelCorpus read_parallel(const std::filesystem::path& src_path,
                             const std::filesystem::path& tgt_path) {
  auto src = read_lines(src_path);
  auto tgt = read_lines(tgt_path);
  if (src.size() != tgt.size()) {
    fail(ErrorCode::Parse, "line count mismatch: " + src_path.string() +
                               " has " + std::to_string(src.size()) +
                               " lines, " + tgt_path.string() + " has " +
                               std::to_string(tgt.size()));
  }
  ParallelCorpus corpus;
  corpus.name = src_path.stem().string();
  corpus.pairs.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto s = split_tokens(src[i]);
    auto t = split_tokens(tgt[i]);
    if (s.empty() || t.empty()) {
      const auto& which = s.empty() ? src_path : tgt_path;
      fail(ErrorCode::Parse, which.string() + ":" + std::to_string(i + 1) +
                                 ": empty sentence");
    }
    corpus.pairs.emplace_back(std::move(s), std::move(t));
  }
  return corpus;
}

std::vector<std::string> utf8_chars(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto lead = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > s.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      auto cont = static_cast<unsigned char>(s[i + k]);
      if ((cont & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(s.substr(i, len));
    i += len;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vocab

const std::vector<std::string>& Vocab::reserved_tokens() {
  static const std::vector<std::string> kTokens = {"<pad>", "<unk>", "<sos>",
                                                   "<eos>", "<eop>"};
  return kTokens;
}

Vocab::Vocab() {
  for (const auto& t : reserved_tokens()) add(t);
}

TokenId Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) > 0;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    fail(ErrorCode::InvalidArgument,
         "token id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocab::encode(const Sentence& s) const {
  std::vector<TokenId> out;
  out.reserve(s.size());
  for (const auto& t : s) out.push_back(id(t));
  return out;
}

Sentence Vocab::decode(const std::vector<TokenId>& ids) const {
  Sentence out;
  out.reserve(ids.size());
  for (auto i : ids) out.push_back(token(i));
  return out;
}

std::string Vocab::serialize() const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out += '\n';
  }
  return out;
}

Vocab Vocab::deserialize(std::string_view text) {
  Vocab v;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string tok(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line_no < kNumReserved) {
      if (tok != reserved_tokens()[line_no]) {
        fail(ErrorCode::Parse, "vocab line " + std::to_string(line_no + 1) +
                                   ": expected reserved token " +
                                   reserved_tokens()[line_no]);
      }
    } else {
      if (tok.empty() || v.contains(tok)) {
        fail(ErrorCode::Parse, "vocab line " + std::to_string(line_no + 1) +
                                   ": empty or duplicate token");
      }
      v.add(tok);
    }
    ++line_no;
  }
  return v;
}

Vocab build_vocab(const std::vector<Sentence>& corpus, std::size_t max_size) {
  if (max_size <= Vocab::kNumReserved) {
    fail(ErrorCode::InvalidArgument,
         "vocabulary size must exceed the " +
             std::to_string(Vocab::kNumReserved) + " reserved tokens");
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus)
    for (const auto& t : s) ++counts[t];

  Vocab vocab;
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (!vocab.contains(tok)) ranked.emplace_back(tok, n);
  // std::map iteration already gives lexicographic order, so a stable sort on
  // count keeps ties lexicographic.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (const auto& [tok, n] : ranked) {
    if (vocab.size() >= max_size) break;
    vocab.add(tok);
  }
  return vocab;
}

}  // namespace trdec
