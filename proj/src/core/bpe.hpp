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

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "core/corpus_io.hpp"

namespace trdec {

// Byte-pair encoding over UTF-8 code points.
//
// Word-initial pieces carry a leading "_" marker; word-internal pieces carry
// none, so "The cat eats" can come out as "_The _cat _eat s". Literal '_' and
// '&' inside input words are escaped ("&#95;", "&amp;") before segmentation
// so joining pieces is always unambiguous.
class BpeModel {
 public:
  using Merge = std::pair<std::string, std::string>;

  static constexpr const char* kMarker = "_";

  BpeModel() = default;
  explicit BpeModel(std::vector<Merge> merges);

  /// A degenerate model that keeps every word as a single marked piece.
  static BpeModel word_level();

  const std::vector<Merge>& merges() const { return merges_; }
  bool is_word_level() const { return word_level_; }

  std::vector<std::string> segment_word(const std::string& word) const;
  Sentence apply(const Sentence& words) const;

  /// "left right" per line, in learned order.
  void save(const std::filesystem::path& path) const;
  static BpeModel load(const std::filesystem::path& path);

  BpeModel(const BpeModel& other);
  BpeModel& operator=(const BpeModel& other);

 private:
  std::vector<Merge> merges_;
  std::map<Merge, std::size_t> rank_;
  bool word_level_ = false;

  // Segmentation cache; guarded so a shared model stays usable across threads.
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<std::string, std::vector<std::string>> cache_;
};

std::string escape_word(const std::string& word);
std::string unescape_word(const std::string& word);

/// Initial symbol sequence of a word before any merge.
std::vector<std::string> initial_symbols(const std::string& word);

/// Learns at most num_merges merges. Each merge takes the most frequent
/// adjacent pair; ties go to the lexicographically smallest pair.
BpeModel bpe_learn(const std::vector<Sentence>& corpus, std::size_t num_merges);

/// Inverse of BpeModel::apply: joins pieces into words and strips markers.
Sentence bpe_join(const Sentence& pieces);

}  // namespace trdec
