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

#include "core/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"

namespace trdec {

namespace {

void check_counts(std::size_t hyps, std::size_t refs) {
  if (hyps == 0) fail(ErrorCode::InvalidArgument, "no hypotheses to score");
  if (hyps != refs)
    fail(ErrorCode::InvalidArgument, std::to_string(hyps) + " hypotheses but " + std::to_string(refs) + " references");
}

std::map<std::vector<std::string>, std::size_t> ngrams(const Sentence& s, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[Sentence(s.begin() + static_cast<std::ptrdiff_t>(i),
                                                                s.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats sentence_stats(const Sentence& hyp, const Sentence& ref) {
  BleuStats s;
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    auto h = ngrams(hyp, n);
    auto r = ngrams(ref, n);
    for (const auto& [gram, count] : h) {
      s.totals[n - 1] += count;
      auto it = r.find(gram);
      if (it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  return s;
}

BleuReport bleu_from_stats(const BleuStats& s) {
  BleuReport r;
  r.hyp_len = s.hyp_len;
  r.ref_len = s.ref_len;
  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] = s.totals[n] ? static_cast<double>(s.matches[n]) / static_cast<double>(s.totals[n]) : 0.0;
    if (r.precisions[n] == 0) zero = true;
    else log_sum += std::log(r.precisions[n]);
  }
  r.ratio = s.ref_len ? static_cast<double>(s.hyp_len) / static_cast<double>(s.ref_len) : 0.0;
  if (s.hyp_len == 0) r.brevity_penalty = 0;
  else if (s.hyp_len >= s.ref_len) r.brevity_penalty = 1;
  else r.brevity_penalty = std::exp(1.0 - static_cast<double>(s.ref_len) / static_cast<double>(s.hyp_len));
  r.bleu = zero ? 0.0 : 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

BleuReport bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  check_counts(hyps.size(), refs.size());
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += sentence_stats(hyps[i], refs[i]);
  return bleu_from_stats(total);
}

BleuReport bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  std::vector<Sentence> h, r;
  for (const auto& s : hyps) h.push_back(split_tokens(s));
  for (const auto& s : refs) r.push_back(split_tokens(s));
  return bleu(h, r);
}

std::string LengthBucket::label() const {
  return hi ? std::to_string(lo) + "-" + std::to_string(*hi) : std::to_string(lo) + "+";
}

std::vector<std::size_t> default_bucket_edges() { return {1, 11, 21, 31, 41}; }

std::vector<std::size_t> parse_bucket_edges(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t pos = 0;
      long v = std::stol(item, &pos);
      if (pos != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad bucket bound '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no bucket bounds given");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1]) fail(ErrorCode::InvalidArgument, "bucket bounds must be strictly increasing");
  return out;
}

std::vector<LengthBucket> bleu_by_length(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                                         const std::vector<std::size_t>& edges) {
  check_counts(hyps.size(), refs.size());
  if (edges.empty()) fail(ErrorCode::InvalidArgument, "no bucket bounds given");
  std::vector<LengthBucket> buckets(edges.size());
  for (std::size_t b = 0; b < edges.size(); ++b) {
    buckets[b].lo = edges[b];
    if (b + 1 < edges.size()) buckets[b].hi = edges[b + 1] - 1;
  }
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    std::size_t b = 0;
    while (b + 1 < edges.size() && refs[i].size() >= edges[b + 1]) ++b;
    buckets[b].count += 1;
    buckets[b].stats += sentence_stats(hyps[i], refs[i]);
  }
  for (auto& bk : buckets) bk.report = bleu_from_stats(bk.stats);
  return buckets;
}

std::map<long, std::size_t> length_diff_histogram(const std::vector<Sentence>& hyps,
                                                  const std::vector<Sentence>& refs) {
  check_counts(hyps.size(), refs.size());
  std::map<long, std::size_t> out;
  for (std::size_t i = 0; i < hyps.size(); ++i)
    ++out[static_cast<long>(hyps[i].size()) - static_cast<long>(refs[i].size())];
  return out;
}

std::string format_report(const BleuReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "bleu\t%.2f\np1\t%.4f\np2\t%.4f\np3\t%.4f\np4\t%.4f\nbrevity_penalty\t%.4f\nratio\t%.4f\n"
                "hyp_len\t%zu\nref_len\t%zu\n",
                r.bleu, r.precisions[0], r.precisions[1], r.precisions[2], r.precisions[3], r.brevity_penalty,
                r.ratio, r.hyp_len, r.ref_len);
  return buf;
}

}  // namespace trdec
