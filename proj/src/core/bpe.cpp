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

#include "core/bpe.hpp"

#include <fstream>
#include <set>

#include "core/error.hpp"

namespace trdec {

std::string escape_word(const std::string& word) {
  std::string out;
  out.reserve(word.size());
  for (char c : word) {
    if (c == '&') {
      out += "&amp;";
    } else if (c == '_') {
      out += "&#95;";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape_word(const std::string& word) {
  std::string out;
  out.reserve(word.size());
  for (std::size_t i = 0; i < word.size();) {
    if (word.compare(i, 5, "&amp;") == 0) {
      out += '&';
      i += 5;
    } else if (word.compare(i, 5, "&#95;") == 0) {
      out += '_';
      i += 5;
    } else {
      out += word[i++];
    }
  }
  return out;
}

std::vector<std::string> initial_symbols(const std::string& word) {
  auto syms = utf8_chars(escape_word(word));
  if (!syms.empty()) syms.front().insert(0, BpeModel::kMarker);
  return syms;
}

BpeModel::BpeModel(std::vector<Merge> merges) : merges_(std::move(merges)) {
  for (std::size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], i);
}

BpeModel::BpeModel(const BpeModel& other)
    : merges_(other.merges_), rank_(other.rank_), word_level_(other.word_level_) {}

BpeModel& BpeModel::operator=(const BpeModel& other) {
  if (this != &other) {
    merges_ = other.merges_;
    rank_ = other.rank_;
    word_level_ = other.word_level_;
    std::lock_guard lock(cache_mu_);
    cache_.clear();
  }
  return *this;
}

BpeModel BpeModel::word_level() {
  BpeModel m;
  m.word_level_ = true;
  return m;
}

std::vector<std::string> BpeModel::segment_word(const std::string& word) const {
  if (word.empty()) return {};
  if (word_level_) return {std::string(kMarker) + escape_word(word)};
  {
    std::lock_guard lock(cache_mu_);
    auto it = cache_.find(word);
    if (it != cache_.end()) return it->second;
  }

  auto syms = initial_symbols(word);
  while (syms.size() > 1) {
    std::size_t best_rank = merges_.size();
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = rank_.find({syms[i], syms[i + 1]});
      if (it != rank_.end() && it->second < best_rank) best_rank = it->second;
    }
    if (best_rank == merges_.size()) break;
    const auto& [left, right] = merges_[best_rank];
    std::vector<std::string> next;
    next.reserve(syms.size());
    for (std::size_t i = 0; i < syms.size();) {
      if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
        next.push_back(left + right);
        i += 2;
      } else {
        next.push_back(syms[i++]);
      }
    }
    syms = std::move(next);
  }

  std::lock_guard lock(cache_mu_);
  cache_.emplace(word, syms);
  return syms;
}

Sentence BpeModel::apply(const Sentence& words) const {
  Sentence out;
  for (const auto& w : words) {
    auto pieces = segment_word(w);
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

void BpeModel::save(const std::filesystem::path& path) const {
  std::vector<std::string> lines;
  lines.reserve(merges_.size());
  for (const auto& [l, r] : merges_) lines.push_back(l + " " + r);
  write_lines(path, lines);
}

BpeModel BpeModel::load(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::vector<Merge> merges;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto toks = split_tokens(lines[i]);
    if (toks.empty()) continue;
    if (toks.size() != 2) {
      fail(ErrorCode::Parse, path.string() + ":" + std::to_string(i + 1) +
                                 ": expected 'left right'");
    }
    merges.emplace_back(toks[0], toks[1]);
  }
  return BpeModel(std::move(merges));
}

namespace {

using Pair = BpeModel::Merge;

struct WordEntry {
  std::vector<std::string> syms;
  std::size_t count = 0;
};

class PairTable {
 public:
  void add(const Pair& p, long delta, std::size_t word) {
    auto& n = counts_[p];
    if (n > 0) order_.erase({-n, p});
    n += delta;
    if (n > 0) order_.insert({-n, p});
    if (delta > 0) where_[p].insert(word);
  }

  bool empty() const { return order_.empty(); }
  const Pair& best() const { return order_.begin()->second; }
  const std::set<std::size_t>& words(const Pair& p) { return where_[p]; }

 private:
  std::map<Pair, long> counts_;
  // Ordered by descending count, then by the pair itself.
  std::set<std::pair<long, Pair>> order_;
  std::map<Pair, std::set<std::size_t>> where_;
};

void count_pairs(PairTable& table, const WordEntry& w, std::size_t id, long sign) {
  for (std::size_t i = 0; i + 1 < w.syms.size(); ++i) {
    table.add({w.syms[i], w.syms[i + 1]}, sign * static_cast<long>(w.count), id);
  }
}

}  // namespace

BpeModel bpe_learn(const std::vector<Sentence>& corpus, std::size_t num_merges) {
  std::map<std::string, std::size_t> word_counts;
  for (const auto& s : corpus)
    for (const auto& w : s) ++word_counts[w];
  if (word_counts.empty()) fail(ErrorCode::InvalidArgument, "bpe_learn: empty corpus");

  std::vector<WordEntry> words;
  words.reserve(word_counts.size());
  for (const auto& [w, n] : word_counts) words.push_back({initial_symbols(w), n});

  PairTable table;
  for (std::size_t i = 0; i < words.size(); ++i) count_pairs(table, words[i], i, +1);

  std::vector<Pair> merges;
  while (merges.size() < num_merges && !table.empty()) {
    Pair best = table.best();
    merges.push_back(best);
    const std::string joined = best.first + best.second;
    // Copy: the set is modified while we re-count.
    auto affected = table.words(best);
    for (auto id : affected) {
      auto& w = words[id];
      count_pairs(table, w, id, -1);
      std::vector<std::string> next;
      next.reserve(w.syms.size());
      for (std::size_t i = 0; i < w.syms.size();) {
        if (i + 1 < w.syms.size() && w.syms[i] == best.first &&
            w.syms[i + 1] == best.second) {
          next.push_back(joined);
          i += 2;
        } else {
          next.push_back(w.syms[i++]);
        }
      }
      w.syms = std::move(next);
      count_pairs(table, w, id, +1);
    }
  }
  return BpeModel(std::move(merges));
}

Sentence bpe_join(const Sentence& pieces) {
  const std::string marker = BpeModel::kMarker;
  Sentence raw;
  for (const auto& p : pieces) {
    if (p.compare(0, marker.size(), marker) == 0 || raw.empty()) {
      raw.push_back(p.compare(0, marker.size(), marker) == 0 ? p.substr(marker.size()) : p);
    } else {
      raw.back() += p;
    }
  }
  for (auto& w : raw) w = unescape_word(w);
  return raw;
}

}  // namespace trdec
