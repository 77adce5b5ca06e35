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

#include <cmath>

#include "core/error.hpp"
#include "core/grammar.hpp"
#include "core/tree_builders.hpp"
#include "support.hpp"

using namespace trdec;

namespace {

// Bracket string of the halving tree, written straight from its definition.
std::string halving_reference(const Sentence& w, std::size_t l, std::size_t r) {
  if (l == r) return w[l];
  const std::size_t m = (l + r) / 2;
  return "(X " + halving_reference(w, l, m) + " " + halving_reference(w, m + 1, r) + ")";
}

Sentence letters(std::size_t n) {
  Sentence s;
  for (std::size_t i = 0; i < n; ++i) s.push_back("w" + std::to_string(i));
  return s;
}

// Crossing-arc test with the root arc hanging off position 0.
bool projective(const std::vector<std::size_t>& heads) {
  const std::size_t n = heads.size();
  for (std::size_t a = 1; a <= n; ++a)
    for (std::size_t b = 1; b <= n; ++b) {
      const std::size_t l1 = std::min(a, heads[a - 1]), r1 = std::max(a, heads[a - 1]);
      const std::size_t l2 = std::min(b, heads[b - 1]), r2 = std::max(b, heads[b - 1]);
      if (l1 < l2 && l2 < r1 && r1 < r2) return false;
    }
  return true;
}

bool valid_heads(const std::vector<std::size_t>& heads) {
  DependencyTree d{Sentence(heads.size(), "w"), heads};
  try {
    d.validate();
    return true;
  } catch (const Error&) {
    return false;
  }
}

// The word each null node owns, via its one direct preterminal child.
std::size_t owned_word(const Tree& t, NodeId id, const Sentence& tokens) {
  for (NodeId c : t.node(id).children)
    if (t.node(c).kind == NodeKind::Preterminal) {
      const std::string& w = t.node(t.node(c).children.at(0)).label;
      return static_cast<std::size_t>(std::find(tokens.begin(), tokens.end(), w) - tokens.begin()) + 1;
    }
  return 0;
}

}  // namespace

TEST_CASE("variant names") {
  for (const char* name : {"con", "con-null", "dep", "binary"})
    CHECK(tree_variant_name(parse_tree_variant(name)) == name);
  CHECK_THROWS_AS(parse_tree_variant("tree"), Error);
}

TEST_CASE("halving tree matches the recursive reference") {
  for (std::size_t n = 1; n <= 64; ++n) {
    Sentence w = letters(n);
    Tree t = make_tree_v1(w, 0, n - 1);
    CHECK(to_bracketed(t) == halving_reference(w, 0, n - 1));
    CHECK(t.leaves() == w);
    CHECK(t.depth() == static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))));
    CHECK(t.count(NodeKind::Nonterminal) == n - 1);
  }
  Sentence w = letters(6);
  CHECK(make_tree_v1(w, 2, 4).leaves() == Sentence{"w2", "w3", "w4"});
  CHECK_THROWS_AS(make_tree_v1(w, 3, 2), Error);
  CHECK_THROWS_AS(make_tree_v1(w, 0, 6), Error);
}

TEST_CASE("pairing tree examples") {
  CHECK(to_bracketed(make_tree_v2({"a", "b", "c", "d", "e"})) == "(X (X (X a b) (X c d)) e)");
  CHECK(to_bracketed(make_tree_v2({"a"})) == "a");
  CHECK(to_bracketed(make_tree_v2({"a", "b"})) == "(X a b)");
  CHECK(to_bracketed(make_tree_v1({"a", "b", "c", "d", "e"}, 0, 4)) == "(X (X (X a b) c) (X d e))");
  CHECK_THROWS_AS(make_tree_v2({}), Error);
  for (std::size_t n = 1; n <= 40; ++n) {
    Tree t = make_tree_v2(letters(n));
    CHECK(t.leaves() == letters(n));
    CHECK(t.count(NodeKind::Nonterminal) == n - 1);
  }
}

TEST_CASE("the two binary versions agree up to four words") {
  for (std::size_t n = 1; n <= 4; ++n)
    CHECK(make_tree_v1(letters(n), 0, n - 1) == make_tree_v2(letters(n)));
  CHECK_FALSE(make_tree_v1(letters(5), 0, 4) == make_tree_v2(letters(5)));
}

TEST_CASE("preterminal formation on the cat parse") {
  Tree t = testing::cat_tree();
  CHECK(to_bracketed(t) ==
        "(ROOT (S (NP (pre _The _cat)) (VP (pre _eat s) (NP (pre _fi sh))) (PUNC (pre _.))))");
  CHECK(to_bracketed(strip_tags(t)) ==
        "(ROOT (X (X (pre _The _cat)) (X (pre _eat s) (X (pre _fi sh))) (X (pre _.))))");
}

TEST_CASE("preterminal formation merges runs beside phrases") {
  Tree t = form_preterminals(parse_bracketed("(S (DT a) (JJ b) (NP (NN c)) (VB d))"), BpeModel::word_level());
  CHECK(to_bracketed(t) == "(S (pre _a _b) (NP (pre _c)) (pre _d))");
  CHECK(to_bracketed(wrap_root(t)) == "(ROOT (S (pre _a _b) (NP (pre _c)) (pre _d)))");
  CHECK(wrap_root(wrap_root(t)) == wrap_root(t));
}

TEST_CASE("strip_tags keeps ROOT and is idempotent") {
  Rng rng(3);
  auto bpe = BpeModel::word_level();
  for (int i = 0; i < 200; ++i) {
    Tree t = wrap_root(form_preterminals(testing::random_parse(rng), bpe));
    Tree s = strip_tags(t);
    CHECK(strip_tags(s) == s);
    CHECK(s.node(s.root()).label == "ROOT");
    CHECK(s.leaves() == t.leaves());
    for (NodeId id : s.preorder()) {
      const Node& n = s.node(id);
      if (n.kind == NodeKind::Nonterminal && id != s.root()) CHECK(n.label == "X");
    }
  }
}

TEST_CASE("dependency conversion examples") {
  DependencyTree d{{"The", "cat", "eats"}, {2, 3, 0}};
  CHECK(to_bracketed(dep_to_constituency(d)) == "(X (X (X (pre The)) (pre cat)) (pre eats))");

  DependencyTree flat{{"a", "b", "c"}, {2, 0, 2}};
  CHECK(to_bracketed(dep_to_constituency(flat)) == "(X (X (pre a)) (pre b) (X (pre c)))");

  DependencyTree single{{"a"}, {0}};
  CHECK(to_bracketed(dep_to_constituency(single)) == "(X (pre a))");
}

TEST_CASE("non-projective dependencies are rejected with the crossing arcs") {
  DependencyTree d{{"a", "b", "c", "d"}, {3, 4, 0, 3}};
  try {
    dep_to_constituency(d);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("3->1") != std::string::npos);
    CHECK(std::string(e.what()).find("4->2") != std::string::npos);
  }
}

TEST_CASE("dependency conversion succeeds exactly on projective trees") {
  for (std::size_t n = 1; n <= 5; ++n) {
    std::vector<std::size_t> heads(n, 0);
    std::size_t valid = 0, accepted = 0;
    std::function<void(std::size_t)> enumerate = [&](std::size_t i) {
      if (i == n) {
        if (!valid_heads(heads)) return;
        ++valid;
        DependencyTree d{letters(n), heads};
        bool ok = true;
        try {
          dep_to_constituency(d);
        } catch (const Error&) {
          ok = false;
        }
        CHECK(ok == projective(heads));
        accepted += ok;
        return;
      }
      for (std::size_t h = 0; h <= n; ++h) {
        if (h == i + 1) continue;
        heads[i] = h;
        enumerate(i + 1);
      }
    };
    enumerate(0);
    CHECK(valid == static_cast<std::size_t>(std::pow(n, n - 1)));  // rooted labelled trees
    CHECK(accepted > 0);
  }
}

TEST_CASE("dependency conversion recovers every head") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    DependencyTree d = testing::random_projective_deps(rng, 1 + rng.below(12));
    Tree t = dep_to_constituency(d);
    CHECK(t.leaves() == d.tokens);
    CHECK(t.count(NodeKind::Nonterminal) == d.tokens.size());
    CHECK(t.count(NodeKind::Preterminal) == d.tokens.size());
    // Random words may repeat; only check heads when the tokens are distinct.
    Sentence sorted = d.tokens;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    CHECK(owned_word(t, t.root(), d.tokens) == d.root());
    for (NodeId id : t.preorder()) {
      if (t.node(id).kind != NodeKind::Nonterminal) continue;
      const std::size_t head = owned_word(t, id, d.tokens);
      for (NodeId c : t.node(id).children)
        if (t.node(c).kind == NodeKind::Nonterminal) CHECK(d.heads[owned_word(t, c, d.tokens) - 1] == head);
    }
  }
}

TEST_CASE("binary targets come in pairs over subwords") {
  auto bpe = testing::cat_bpe();
  BuildOptions opts;
  std::vector<Sentence> words{{"The", "cat", "eats", "fish", "."}, {"The", "cat"}};
  auto trees = build_targets(words, {}, {}, bpe, opts);
  REQUIRE(trees.size() == 4);
  CHECK(to_bracketed(trees[0]) ==
        "(ROOT (X (X (X (pre _The) (pre _cat)) (pre _eat s)) (X (pre _fi sh) (pre _.))))");
  CHECK(to_bracketed(trees[1]) ==
        "(ROOT (X (X (X (pre _The) (pre _cat)) (X (pre _eat s) (pre _fi sh))) (pre _.)))");
  CHECK(trees[2] == trees[3]);
  for (const auto& t : trees) CHECK_NOTHROW(t.validate());

  opts.binary_over_subwords = true;
  auto sub = build_targets({{"The", "cat"}}, {}, {}, bpe, opts);
  CHECK(to_bracketed(sub[0]) == "(ROOT (X (pre _The) (pre _cat)))");
}

TEST_CASE("every variant yields valid ROOT trees whose leaves are the segmented words") {
  Rng rng(5);
  auto bpe = bpe_learn({{"abc", "bcd", "cde", "abcdef", "fed", "dab"}}, 8);
  for (int i = 0; i < 100; ++i) {
    Tree parse = testing::random_parse(rng);
    DependencyTree dep = testing::random_projective_deps(rng, 1 + rng.below(8));
    Sentence s = testing::random_sentence(rng);
    BuildOptions opts;
    for (TreeVariant v : {TreeVariant::ConstituencyFull, TreeVariant::ConstituencyNull}) {
      opts.variant = v;
      Tree t = build_targets({parse.leaves()}, {parse}, {}, bpe, opts).at(0);
      CHECK(t.leaves() == bpe.apply(parse.leaves()));
      CHECK(t.node(t.root()).label == "ROOT");
    }
    opts.variant = TreeVariant::Dependency;
    Tree t = build_targets({dep.tokens}, {}, {dep}, bpe, opts).at(0);
    CHECK(t.leaves() == bpe.apply(dep.tokens));
    opts.variant = TreeVariant::BinaryConcat;
    auto pair = build_targets({s}, {}, {}, bpe, opts);
    REQUIRE(pair.size() == 2);
    for (const auto& b : pair) {
      CHECK(b.leaves() == bpe.apply(s));
      CHECK(b.count(NodeKind::Preterminal) == s.size());
    }
  }
}

TEST_CASE("misaligned inputs are rejected") {
  auto bpe = BpeModel::word_level();
  BuildOptions opts;
  opts.variant = TreeVariant::ConstituencyFull;
  Tree p = parse_bracketed("(S (NN a))");
  CHECK_THROWS_AS(build_targets({{"b"}}, {p}, {}, bpe, opts), Error);
  CHECK_THROWS_AS(build_targets({{"a"}, {"b"}}, {p}, {}, bpe, opts), Error);
  CHECK_THROWS_AS(build_targets({{"a"}}, {}, {}, bpe, opts), Error);
  opts.variant = TreeVariant::BinaryConcat;
  CHECK_THROWS_AS(build_targets({{}}, {}, {}, bpe, opts), Error);
}
