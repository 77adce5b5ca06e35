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

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/corpus_io.hpp"

namespace trdec {

/// Sufficient statistics of corpus BLEU-4; adding two sets gives the stats
/// of the concatenated corpora.
struct BleuStats {
  std::array<std::size_t, 4> matches{};  // clipped n-gram matches
  std::array<std::size_t, 4> totals{};   // hypothesis n-grams
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& o);
};

struct BleuReport {
  double bleu = 0;  // 0..100
  std::array<double, 4> precisions{};
  double brevity_penalty = 0;
  double ratio = 0;  // hypothesis / reference length
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
};

BleuStats sentence_stats(const Sentence& hyp, const Sentence& ref);
BleuReport bleu_from_stats(const BleuStats& s);

/// Case-sensitive, whitespace-tokenized corpus BLEU-4 against a single
/// reference, no smoothing. Throws on empty input or a count mismatch.
BleuReport bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs);
BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs);

struct LengthBucket {
  std::size_t lo = 0;
  std::optional<std::size_t> hi;  // inclusive; open-ended when absent
  std::size_t count = 0;
  BleuStats stats;
  BleuReport report;

  std::string label() const;  // "11-20", "41+"
};

/// Default reference-length bucket lower bounds: 1-10, 11-20, 21-30, 31-40, 41+.
std::vector<std::size_t> default_bucket_edges();
/// Parses "1,11,21" style lower bounds; they must be strictly increasing.
std::vector<std::size_t> parse_bucket_edges(const std::string& text);

/// Groups sentence pairs by reference token count and scores each group.
/// References shorter than the first bound land in the first bucket.
std::vector<LengthBucket> bleu_by_length(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                                         const std::vector<std::size_t>& edges);

/// (hypothesis length - reference length) -> number of sentences.
std::map<long, std::size_t> length_diff_histogram(const std::vector<Sentence>& hyps,
                                                  const std::vector<Sentence>& refs);

/// "key\tvalue" lines.
std::string format_report(const BleuReport& r);

}  // namespace trdec
