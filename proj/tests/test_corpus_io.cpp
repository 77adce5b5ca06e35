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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>

#include "core/bpe.hpp"
#include "core/corpus_io.hpp"
#include "core/dependency.hpp"
#include "core/error.hpp"
#include "support.hpp"

using namespace trdec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  fs::path dir = fs::temp_directory_path() / "trdec_corpus_test";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

// Straightforward BPE: recount every pair from scratch before each merge.
std::vector<BpeModel::Merge> naive_bpe(const std::vector<Sentence>& corpus, std::size_t merges) {
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus)
    for (const auto& w : s) ++freq[w];
  std::vector<std::pair<std::vector<std::string>, std::size_t>> words;
  for (const auto& [w, n] : freq) words.push_back({initial_symbols(w), n});
  std::vector<BpeModel::Merge> out;
  while (out.size() < merges) {
    std::map<BpeModel::Merge, std::size_t> counts;
    for (const auto& [syms, n] : words)
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += n;
    if (counts.empty()) break;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
      if (it->second > best->second) best = it;  // map order keeps the smallest pair on ties
    out.push_back(best->first);
    for (auto& [syms, n] : words) {
      std::vector<std::string> next;
      for (std::size_t i = 0; i < syms.size();) {
        if (i + 1 < syms.size() && syms[i] == best->first.first && syms[i + 1] == best->first.second) {
          next.push_back(syms[i] + syms[i + 1]);
          i += 2;
        } else {
          next.push_back(syms[i++]);
        }
      }
      syms = std::move(next);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("tokens split on whitespace runs and join with single spaces") {
  CHECK(split_tokens("  a  b\tc ") == Sentence{"a", "b", "c"});
  CHECK(join_tokens({"a", "b"}) == "a b");
}

TEST_CASE("read_parallel pairs lines") {
  auto src = temp_file("p.src", "a b\nc\nd e f\n");
  auto tgt = temp_file("p.tgt", "x\ny z\nw\n");
  auto c = read_parallel(src, tgt);
  REQUIRE(c.size() == 3);
  CHECK(c.pairs[1].first == Sentence{"c"});
  CHECK(c.pairs[1].second == Sentence{"y", "z"});
}

TEST_CASE("read_parallel reports a line-count mismatch with both counts") {
  auto src = temp_file("m.src", "a\nb\nc\n");
  auto tgt = temp_file("m.tgt", "a\nb\n");
  auto msg = message_of([&] { read_parallel(src, tgt); });
  CHECK(msg.find('3') != std::string::npos);
  CHECK(msg.find('2') != std::string::npos);
  CHECK(code_of([&] { read_parallel(src, tgt); }) == ErrorCode::Parse);
}

TEST_CASE("an empty line is an error naming its line number") {
  auto src = temp_file("e.src", "a\n\nc\n");
  auto tgt = temp_file("e.tgt", "a\nb\nc\n");
  auto msg = message_of([&] { read_parallel(src, tgt); });
  CHECK(msg.find(":2") != std::string::npos);
}

TEST_CASE("missing files are I/O errors") {
  CHECK(code_of([] { read_lines("/nonexistent/trdec/file"); }) == ErrorCode::Io);
}

TEST_CASE("vocab reserves fixed ids") {
  Vocab v;
  CHECK(v.size() == Vocab::kNumReserved);
  CHECK(v.token(Vocab::kPad) == "<pad>");
  CHECK(v.token(Vocab::kUnk) == "<unk>");
  CHECK(v.token(Vocab::kSos) == "<sos>");
  CHECK(v.token(Vocab::kEos) == "<eos>");
  CHECK(v.token(Vocab::kEop) == "<eop>");
  CHECK(v.id("missing") == Vocab::kUnk);
}

TEST_CASE("build_vocab keeps frequent tokens and breaks ties lexicographically") {
  auto v = build_vocab({{"a", "a", "b"}}, 7);
  CHECK(v.size() == 7);
  CHECK(v.contains("a"));
  CHECK(v.contains("b"));

  auto small = build_vocab({{"a", "a", "b"}}, 6);
  CHECK(small.contains("a"));
  CHECK_FALSE(small.contains("b"));
  CHECK(small.encode({"b"}) == std::vector<TokenId>{Vocab::kUnk});

  auto tie = build_vocab({{"b", "a"}}, 6);
  CHECK(tie.contains("a"));
  CHECK_FALSE(tie.contains("b"));

  CHECK_THROWS_AS(build_vocab({{"a"}}, 5), Error);
}

TEST_CASE("vocab encode/decode and serialization round trip") {
  Rng rng(3);
  std::vector<Sentence> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(testing::random_sentence(rng));
  auto v = build_vocab(corpus, 1000);
  for (const auto& s : corpus) CHECK(v.decode(v.encode(s)) == s);
  CHECK(Vocab::deserialize(v.serialize()) == v);
}

TEST_CASE("bpe with no merges yields marked characters") {
  auto m = bpe_learn({{"low", "lowest"}}, 0);
  CHECK(m.merges().empty());
  CHECK(m.apply({"low"}) == Sentence{"_l", "o", "w"});
}

TEST_CASE("bpe_learn on 'low low lowest' matches a hand count of pair frequencies") {
  // Pairs: (_l,o) x3, (o,w) x3, (w,e) x1, (e,s) x1, (s,t) x1. The top count
  // ties between (_l,o) and (o,w); "_l" < "o" so (_l,o) goes first, then
  // (_lo,w) with count 3.
  auto m = bpe_learn({{"low", "low", "lowest"}}, 2);
  REQUIRE(m.merges().size() == 2);
  CHECK(m.merges()[0] == BpeModel::Merge{"_l", "o"});
  CHECK(m.merges()[1] == BpeModel::Merge{"_lo", "w"});
  CHECK(m.merges() == naive_bpe({{"low", "low", "lowest"}}, 2));
}

TEST_CASE("bpe_learn agrees with the naive recount on random corpora") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Sentence> corpus;
    for (int i = 0; i < 15; ++i) corpus.push_back(testing::random_sentence(rng));
    const std::size_t merges = rng.below(40);
    CHECK(bpe_learn(corpus, merges).merges() == naive_bpe(corpus, merges));
  }
}

TEST_CASE("bpe learning stops when no pair is left") {
  auto m = bpe_learn({{"a", "a", "a"}}, 10);
  CHECK(m.merges().empty());
  auto m2 = bpe_learn({{"ab", "ab"}}, 10);
  CHECK(m2.merges().size() == 1);
  CHECK_THROWS_AS(bpe_learn({}, 3), Error);
}

TEST_CASE("the cat sentence segments as in the worked example") {
  CHECK(testing::cat_bpe().apply(split_tokens("The cat eats fish .")) ==
        split_tokens("_The _cat _eat s _fi sh _."));
}

TEST_CASE("bpe apply then join is the identity") {
  Rng rng(5);
  std::vector<Sentence> corpus;
  for (int i = 0; i < 100; ++i) corpus.push_back(testing::random_sentence(rng));
  corpus.push_back({"snake_case", "a&b", "&#95;", "_", "&amp;", "ü_ñ"});
  auto m = bpe_learn(corpus, 60);
  for (const auto& s : corpus) CHECK(bpe_join(m.apply(s)) == s);
}

TEST_CASE("unknown characters pass through as single pieces") {
  auto m = bpe_learn({{"abc", "abc"}}, 5);
  CHECK(m.apply({"xyz"}) == Sentence{"_x", "y", "z"});
}

TEST_CASE("bpe_learn is deterministic and models survive save/load") {
  Rng rng(8);
  std::vector<Sentence> corpus;
  for (int i = 0; i < 30; ++i) corpus.push_back(testing::random_sentence(rng));
  auto a = bpe_learn(corpus, 25);
  auto b = bpe_learn(corpus, 25);
  CHECK(a.merges() == b.merges());
  auto path = fs::temp_directory_path() / "trdec_corpus_test" / "m.bpe";
  a.save(path);
  CHECK(BpeModel::load(path).merges() == a.merges());
}

TEST_CASE("word-level segmentation keeps whole words") {
  auto m = BpeModel::word_level();
  CHECK(m.apply({"cats", "eat"}) == Sentence{"_cats", "_eat"});
  CHECK(bpe_join(m.apply({"cats", "eat"})) == Sentence{"cats", "eat"});
}

TEST_CASE("conll: single token rooted at 0") {
  auto d = parse_conll_deps("1\teats\t0\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].root() == 1);
}

TEST_CASE("conll: heads [2,3,0,3] root at eats") {
  auto d = parse_conll_deps("1\tThe\t2\n2\tcat\t3\n3\teats\t0\n4\tfish\t3\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].tokens[d[0].root() - 1] == "eats");
  CHECK(d[0].heads == std::vector<std::size_t>{2, 3, 0, 3});
}

TEST_CASE("conll: structural errors carry the sentence number") {
  auto ok = "1\ta\t0\n\n";
  CHECK(message_of([&] { parse_conll_deps(std::string(ok) + "1\ta\t2\n2\tb\t1\n"); }).find("sentence 2") !=
        std::string::npos);
  CHECK(message_of([] { parse_conll_deps("1\ta\t2\n2\tb\t1\n"); }).find("cycle") != std::string::npos);
  CHECK(code_of([] { parse_conll_deps("1\ta\t0\n2\tb\t0\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_conll_deps("1\ta\t5\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_conll_deps("1\ta\t3\n2\tb\t0\n3\tc\t1\n"); }) == ErrorCode::Parse);
}

TEST_CASE("conll: accepts exactly the single-rooted arborescences") {
  // Every head assignment over 4 tokens, checked against a direct
  // reachability test.
  const std::size_t n = 4;
  std::vector<std::size_t> heads(n, 0);
  std::size_t accepted = 0;
  for (std::size_t code = 0; code < 625; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      heads[i] = c % 5;
      c /= 5;
    }
    bool valid = true;
    std::size_t roots = 0;
    for (std::size_t i = 0; i < n; ++i) roots += heads[i] == 0;
    if (roots != 1) valid = false;
    for (std::size_t i = 0; i < n && valid; ++i) {
      std::size_t cur = i + 1, hops = 0;
      while (cur != 0 && hops <= n) {
        cur = heads[cur - 1];
        ++hops;
      }
      if (cur != 0) valid = false;
    }
    DependencyTree d{{"a", "b", "c", "d"}, heads};
    bool parsed = true;
    try {
      d.validate();
    } catch (const Error&) {
      parsed = false;
    }
    CHECK(parsed == valid);
    accepted += valid;
  }
  CHECK(accepted == 64);  // Cayley: n^(n-1) rooted labelled trees
}
