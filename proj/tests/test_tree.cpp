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

#include "core/error.hpp"
#include "core/grammar.hpp"
#include "core/tree.hpp"
#include "support.hpp"

using namespace trdec;
using testing::cat_tree;
using testing::vocab_of;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::vector<std::string> stack_names(const ExpansionState& s, const Grammar& g) {
  std::vector<std::string> out;  // top first
  for (auto it = s.stack().rbegin(); it != s.stack().rend(); ++it) out.push_back(g.symbol_name(it->symbol));
  return out;
}

const TreeVariant kVariants[] = {TreeVariant::ConstituencyFull, TreeVariant::ConstituencyNull,
                                 TreeVariant::Dependency, TreeVariant::BinaryConcat};

}  // namespace

TEST_CASE("bracket parsing") {
  Tree x = parse_bracketed("(X a)");
  CHECK(x.node(x.root()).label == "X");
  CHECK(x.node(x.root()).kind == NodeKind::Nonterminal);
  REQUIRE(x.node(x.root()).children.size() == 1);
  CHECK(x.node(x.node(x.root()).children[0]).kind == NodeKind::Terminal);

  Tree s = parse_bracketed("(S (NP (DT The) (NN cat)) (VP (VBZ eats)))");
  CHECK(s.leaves() == Sentence{"The", "cat", "eats"});
  CHECK(s.count(NodeKind::Terminal) == 3);

  Tree pre = parse_bracketed("(ROOT (pre _a b))");
  CHECK(pre.node(pre.node(pre.root()).children[0]).kind == NodeKind::Preterminal);

  Tree unlabeled = parse_bracketed("( (S (NN a)))");
  CHECK(unlabeled.node(unlabeled.root()).label == "ROOT");
}

TEST_CASE("malformed brackets are parse errors with a position") {
  CHECK(code_of([] { parse_bracketed("(S (NP a)"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_bracketed("()"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_bracketed(""); }) == ErrorCode::Parse);
  try {
    parse_bracketed("(S (NP a)) x", 7);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    CHECK(std::string(e.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("read and write are inverse on canonical bracket strings") {
  Rng rng(1);
  auto bpe = BpeModel::word_level();
  for (int i = 0; i < 200; ++i) {
    Tree t = testing::random_generation_tree(rng, kVariants[i % 4], bpe);
    const std::string text = to_bracketed(t);
    CHECK(to_bracketed(parse_bracketed(text)) == text);
    CHECK(parse_bracketed(text) == t);
  }
  Tree lrb = parse_bracketed("(ROOT (pre -LRB- a -RRB-))");
  CHECK(lrb.leaves() == Sentence{"(", "a", ")"});
  CHECK(to_bracketed(lrb) == "(ROOT (pre -LRB- a -RRB-))");
}

TEST_CASE("tree validation") {
  CHECK_NOTHROW(cat_tree().validate());
  CHECK_THROWS_AS(parse_bracketed("(ROOT a)").validate(), Error);
  CHECK_THROWS_AS(parse_bracketed("(ROOT (pre (X a)))").validate(), Error);
}

TEST_CASE("the cat tree yields the expected grammar") {
  Grammar g = extract_grammar({cat_tree()});
  REQUIRE(g.size() == 6);
  CHECK(g.rule_string(0) == "<eos>");
  CHECK(g.rule_string(1) == "ROOT -> S");
  CHECK(g.rule_string(2) == "S -> NP VP PUNC");
  CHECK(g.rule_string(3) == "NP -> pre");
  CHECK(g.rule_string(4) == "VP -> pre NP");
  CHECK(g.rule_string(5) == "PUNC -> pre");
}

TEST_CASE("grammar extraction edge cases") {
  CHECK(extract_grammar({}).size() == 1);
  CHECK(extract_grammar({cat_tree(), cat_tree()}) == extract_grammar({cat_tree()}));
  CHECK_THROWS_AS(Grammar().add(Rule{"X", {}}), Error);
  CHECK_THROWS_AS(Grammar().add(Rule{"pre", {"X"}}), Error);
}

TEST_CASE("grammar masks and serialization") {
  Grammar g = extract_grammar({cat_tree()});
  auto root = g.mask(Grammar::kRoot);
  CHECK(root == std::vector<std::uint8_t>{0, 1, 0, 0, 0, 0});
  CHECK(g.mask(std::nullopt) == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 0});
  CHECK(g.mask(*g.symbol("NP")) == std::vector<std::uint8_t>{0, 0, 0, 1, 0, 0});
  Grammar back = Grammar::deserialize(g.serialize());
  CHECK(back == g);
  CHECK(g.serialize().rfind("# start=ROOT eos=0\n<eos>\nROOT -> S\n", 0) == 0);
  CHECK_THROWS_AS(Grammar::deserialize("ROOT -> S\n"), Error);
}

TEST_CASE("the cat tree has the 18-step derivation") {
  Tree t = cat_tree();
  Grammar g = extract_grammar({t});
  Vocab v = vocab_of({t});
  Derivation d = canonical_derivation(t, g, v);
  const std::vector<std::pair<std::string, std::uint32_t>> expected{
      {"ROOT -> S", 0}, {"S -> NP VP PUNC", 1}, {"NP -> pre", 2}, {"_The", 3},     {"_cat", 3},
      {"<eop>", 3},     {"VP -> pre NP", 2},    {"_eat", 7},      {"s", 7},        {"<eop>", 7},
      {"NP -> pre", 7}, {"_fi", 11},            {"sh", 11},       {"<eop>", 11},   {"PUNC -> pre", 2},
      {"_.", 15},       {"<eop>", 15},          {"<eos>", 0}};
  REQUIRE(d.size() == expected.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Step& s = d.steps[i];
    const std::string sym = s.kind == StepKind::Rule ? g.rule_string(s.id) : v.token(s.id);
    CHECK(sym == expected[i].first);
    CHECK(s.parent == expected[i].second);
  }
  CHECK(replay_derivation(d, g, v) == t);
  CHECK(d.count(StepKind::Rule) == 7);
  CHECK(d.count(StepKind::Word) == 11);
}

TEST_CASE("derivation of a minimal tree") {
  Tree t = parse_bracketed("(ROOT (X (pre w)))");
  Grammar g = extract_grammar({t});
  Vocab v = vocab_of({t});
  Derivation d = canonical_derivation(t, g, v);
  REQUIRE(d.size() == 5);
  CHECK(g.rule_string(d.steps[0].id) == "ROOT -> X");
  CHECK(g.rule_string(d.steps[1].id) == "X -> pre");
  CHECK(v.token(d.steps[2].id) == "w");
  CHECK(d.steps[3].id == Vocab::kEop);
  CHECK(d.steps[4] == Step{StepKind::Rule, Grammar::kEos, 0});
  CHECK(dump_derivation(d, g, v) ==
        "1\tRULE\tROOT -> X\t0\n2\tRULE\tX -> pre\t1\n3\tWORD\tw\t2\n4\tWORD\t<eop>\t2\n5\tRULE\t<eos>\t0\n");
}

TEST_CASE("a missing expansion names the rule") {
  Grammar g = extract_grammar({parse_bracketed("(ROOT (X (pre w)))")});
  Tree other = parse_bracketed("(ROOT (Y (pre w)))");
  try {
    canonical_derivation(other, g, vocab_of({other}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Grammar);
    CHECK(std::string(e.what()).find("ROOT -> Y") != std::string::npos);
  }
}

TEST_CASE("expansion automaton pushes the leftmost symbol on top") {
  Tree t = cat_tree();
  Grammar g = extract_grammar({t});
  ExpansionState s;
  s.apply_rule(g, 1);  // ROOT -> S
  CHECK(stack_names(s, g) == std::vector<std::string>{"S"});
  s.apply_rule(g, 2);  // S -> NP VP PUNC
  CHECK(stack_names(s, g) == std::vector<std::string>{"NP", "VP", "PUNC"});
  s.apply_rule(g, 3);  // NP -> pre
  CHECK(stack_names(s, g) == std::vector<std::string>{"pre", "VP", "PUNC"});
  CHECK(s.expects_word());
  CHECK(code_of([&] { s.apply_rule(g, 4); }) == ErrorCode::Grammar);

  ExpansionState wrong;
  CHECK(code_of([&] { wrong.apply_rule(g, 2); }) == ErrorCode::Grammar);

  ExpansionState early;
  CHECK(code_of([&] { early.apply_rule(g, Grammar::kEos); }) == ErrorCode::Derivation);
}

TEST_CASE("replay rejects malformed derivations") {
  Tree t = parse_bracketed("(ROOT (X (pre w)))");
  Grammar g = extract_grammar({t});
  Vocab v = vocab_of({t});
  Derivation d = canonical_derivation(t, g, v);

  Derivation no_eos = d;
  no_eos.steps.pop_back();
  CHECK(code_of([&] { replay_derivation(no_eos, g, v); }) == ErrorCode::Derivation);

  Derivation extra = d;
  extra.steps.insert(extra.steps.end() - 1, Step{StepKind::Rule, 1, 0});
  CHECK(code_of([&] { replay_derivation(extra, g, v); }) == ErrorCode::Derivation);

  Derivation bad_parent = d;
  bad_parent.steps[1].parent = 0;
  CHECK(code_of([&] { replay_derivation(bad_parent, g, v); }) == ErrorCode::Derivation);

  Tree partial = replay_derivation(Derivation{{d.steps[0]}}, g, v, true);
  CHECK(partial.count(NodeKind::Nonterminal) == 2);
}

TEST_CASE("derivation properties over random trees of every variant") {
  Rng rng(42);
  auto bpe = bpe_learn({{"abc", "bcd", "cde", "abcdef", "fed"}}, 6);
  for (TreeVariant variant : kVariants) {
    std::vector<Tree> trees;
    for (int i = 0; i < 250; ++i) trees.push_back(testing::random_generation_tree(rng, variant, bpe));
    Grammar g = extract_grammar(trees);
    Vocab v = vocab_of(trees);
    std::vector<Tree> replayed;
    for (const auto& t : trees) {
      Derivation d = canonical_derivation(t, g, v);
      Tree back = replay_derivation(d, g, v);
      CHECK(back == t);
      replayed.push_back(back);

      Sentence words;
      for (const auto& s : d.steps)
        if (s.kind == StepKind::Word && s.id != Vocab::kEop) words.push_back(v.token(s.id));
      CHECK(words == t.leaves());
      CHECK(d.count(StepKind::Rule) == t.count(NodeKind::Nonterminal) + 1);
      CHECK(d.count(StepKind::Word) == t.count(NodeKind::Terminal) + t.count(NodeKind::Preterminal));
      for (std::size_t i = 0; i < d.size(); ++i)
        if (d.steps[i].parent != 0) CHECK(d.steps[i].parent < i + 1);
      CHECK(d.steps.back() == Step{StepKind::Rule, Grammar::kEos, 0});
    }
    CHECK(extract_grammar(replayed) == g);
  }
}

TEST_CASE("linearization") {
  Tree t = parse_bracketed("(X (pre a))");
  CHECK(linearize(t) == Sentence{"(X", "(pre", "a", ")", ")"});
  CHECK(delinearize(linearize(t)) == t);

  Rng rng(9);
  auto bpe = BpeModel::word_level();
  for (int i = 0; i < 200; ++i) {
    Tree r = testing::random_generation_tree(rng, kVariants[i % 4], bpe);
    Sentence lin = linearize(r);
    CHECK(delinearize(lin) == r);
    Sentence leaves;
    for (const auto& tok : lin)
      if (!is_bracket_token(tok)) leaves.push_back(tok);
    CHECK(leaves == r.leaves());
  }
  CHECK_THROWS_AS(delinearize({"(X", "a"}), Error);
  CHECK_THROWS_AS(delinearize({")"}), Error);
}
