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

#include "core/dependency.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace trdec {

std::size_t DependencyTree::root() const {
  for (std::size_t i = 0; i < heads.size(); ++i)
    if (heads[i] == 0) return i + 1;
  fail(ErrorCode::Parse, "dependency tree has no root");
}

void DependencyTree::validate() const {
  const std::size_t n = tokens.size();
  if (n == 0) fail(ErrorCode::Parse, "empty dependency tree");
  if (heads.size() != n) fail(ErrorCode::Parse, "head count differs from token count");
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (heads[i] > n) {
      fail(ErrorCode::Parse, "token " + std::to_string(i + 1) + ": head " +
                                 std::to_string(heads[i]) + " out of range 0.." +
                                 std::to_string(n));
    }
    if (heads[i] == i + 1)
      fail(ErrorCode::Parse, "token " + std::to_string(i + 1) + " is its own head (cycle)");
    roots += heads[i] == 0;
  }
  if (roots != 1) {
    fail(ErrorCode::Parse, roots == 0 ? "no root token (cycle)"
                                      : std::to_string(roots) + " root tokens, expected 1");
  }
  // With one root and in-range heads, the structure is a tree iff every token
  // reaches the root within n hops.
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t cur = i;
    std::size_t hops = 0;
    while (cur != 0 && hops <= n) {
      cur = heads[cur - 1];
      ++hops;
    }
    if (cur != 0) {
      fail(ErrorCode::Parse, "cycle through token " + std::to_string(i));
    }
  }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::stringstream ss(line);
  std::string col;
  while (std::getline(ss, col, '\t')) cols.push_back(col);
  return cols;
}

bool parse_index(const std::string& s, std::size_t& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

}  // namespace

std::vector<DependencyTree> parse_conll_deps(const std::string& text,
                                             const std::string& source) {
  std::vector<DependencyTree> out;
  DependencyTree cur;
  std::size_t sentence_no = 1;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (cur.tokens.empty()) return;
    try {
      cur.validate();
    } catch (const Error& e) {
      fail(ErrorCode::Parse,
           source + ": sentence " + std::to_string(sentence_no) + ": " + e.what());
    }
    out.push_back(std::move(cur));
    cur = DependencyTree{};
    ++sentence_no;
  };

  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    auto cols = split_tabs(line);
    auto where = [&] {
      return source + ":" + std::to_string(line_no) + " (sentence " +
             std::to_string(sentence_no) + ")";
    };
    if (cols.size() != 3 && cols.size() < 7)
      fail(ErrorCode::Parse, where() + ": expected 3 or at least 7 tab-separated columns");
    if (cols[0].find_first_of("-.") != std::string::npos) continue;
    std::size_t index = 0;
    std::size_t head = 0;
    const std::string& head_col = cols.size() == 3 ? cols[2] : cols[6];
    if (!parse_index(cols[0], index) || !parse_index(head_col, head))
      fail(ErrorCode::Parse, where() + ": malformed index or head");
    if (index != cur.tokens.size() + 1)
      fail(ErrorCode::Parse, where() + ": token index " + std::to_string(index) +
                                 " out of sequence");
    cur.tokens.push_back(cols[1]);
    cur.heads.push_back(head);
  }
  flush();
  return out;
}

std::vector<DependencyTree> read_conll_deps(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_conll_deps(ss.str(), path.string());
}

}  // namespace trdec
