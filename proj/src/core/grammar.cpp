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

#include "core/grammar.hpp"

#include <algorithm>
#include <functional>

#include "core/error.hpp"

namespace trdec {

namespace {

constexpr std::string_view kEosName = "<eos>";

std::string rule_key(const Rule& r) {
  std::string key = r.lhs;
  for (const auto& s : r.rhs) {
    key += '\x1f';
    key += s;
  }
  return key;
}

}  // namespace

std::string Rule::to_string() const {
  std::string out = lhs + " ->";
  for (const auto& s : rhs) out += " " + s;
  return out;
}

Grammar::Grammar() {
  intern(std::string(kRootTag));
  intern(std::string(kPreTag));
  rules_.push_back(Rule{std::string(kEosName), {}});
  lhs_.push_back(-1);
  rhs_.emplace_back();
  masks_.resize(symbols_.size() + 1);
  for (auto& m : masks_) m.push_back(0);
  masks_.back()[kEos] = 1;
}

SymbolId Grammar::intern(const std::string& tag) {
  auto it = symbol_index_.find(tag);
  if (it != symbol_index_.end()) return it->second;
  auto id = static_cast<SymbolId>(symbols_.size());
  symbols_.push_back(tag);
  symbol_index_.emplace(tag, id);
  lhs_index_.emplace_back();
  if (!masks_.empty()) {
    // Keep the <eos> mask last.
    masks_.insert(masks_.end() - 1, std::vector<std::uint8_t>(rules_.size(), 0));
  }
  return id;
}

RuleId Grammar::add(const Rule& rule) {
  if (rule.rhs.empty()) fail(ErrorCode::InvalidArgument, "rule with empty RHS: " + rule.lhs);
  if (rule.lhs == kPreTag) fail(ErrorCode::InvalidArgument, "'pre' cannot be a rule LHS");
  auto key = rule_key(rule);
  auto it = rule_index_.find(key);
  if (it != rule_index_.end()) return it->second;

  auto id = static_cast<RuleId>(rules_.size());
  SymbolId l = intern(rule.lhs);
  std::vector<SymbolId> r;
  r.reserve(rule.rhs.size());
  for (const auto& s : rule.rhs) r.push_back(intern(s));
  rules_.push_back(rule);
  lhs_.push_back(l);
  rhs_.push_back(std::move(r));
  rule_index_.emplace(std::move(key), id);
  lhs_index_[static_cast<std::size_t>(l)].push_back(id);
  for (auto& m : masks_) m.push_back(0);
  masks_[static_cast<std::size_t>(l)].back() = 1;
  return id;
}

std::optional<RuleId> Grammar::find(const Rule& rule) const {
  auto it = rule_index_.find(rule_key(rule));
  if (it == rule_index_.end()) return std::nullopt;
  return it->second;
}

const Rule& Grammar::rule(RuleId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= rules_.size())
    fail(ErrorCode::InvalidArgument, "rule id " + std::to_string(id) + " out of range");
  return rules_[static_cast<std::size_t>(id)];
}

std::string Grammar::rule_string(RuleId id) const {
  return id == kEos ? std::string(kEosName) : rule(id).to_string();
}

std::optional<SymbolId> Grammar::symbol(std::string_view tag) const {
  auto it = symbol_index_.find(std::string(tag));
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<RuleId>& Grammar::rules_for(SymbolId lhs) const {
  return lhs_index_.at(static_cast<std::size_t>(lhs));
}

const std::vector<std::uint8_t>& Grammar::mask(std::optional<SymbolId> open) const {
  if (!open) return masks_.back();
  return masks_.at(static_cast<std::size_t>(*open));
}

std::string Grammar::serialize() const {
  std::string out = "# start=" + std::string(kRootTag) + " eos=" + std::to_string(kEos) + "\n";
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    out += rule_string(static_cast<RuleId>(i));
    out += '\n';
  }
  return out;
}

Grammar Grammar::deserialize(std::string_view text) {
  Grammar g;
  auto lines = std::vector<std::string>{};
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty() || lines[0].rfind("# start=ROOT", 0) != 0)
    fail(ErrorCode::Parse, "grammar: missing '# start=ROOT eos=0' header");
  if (lines.size() < 2 || lines[1] != kEosName)
    fail(ErrorCode::Parse, "grammar: first entry must be <eos>");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto toks = split_tokens(lines[i]);
    if (toks.size() < 3 || toks[1] != "->")
      fail(ErrorCode::Parse, "grammar line " + std::to_string(i + 1) + ": expected 'LHS -> RHS...'");
    Rule r{toks[0], Sentence(toks.begin() + 2, toks.end())};
    if (g.find(r)) fail(ErrorCode::Parse, "grammar line " + std::to_string(i + 1) + ": duplicate rule");
    if (g.add(r) != static_cast<RuleId>(i - 1))
      fail(ErrorCode::Internal, "grammar: id mismatch on line " + std::to_string(i + 1));
  }
  return g;
}

namespace {

Rule expansion_of(const Tree& tree, NodeId id) {
  const Node& n = tree.node(id);
  Rule r{n.label, {}};
  for (NodeId c : n.children) {
    const Node& child = tree.node(c);
    if (child.kind == NodeKind::Terminal)
      fail(ErrorCode::InvalidArgument, "terminal '" + child.label + "' directly under nonterminal " + n.label);
    r.rhs.push_back(child.kind == NodeKind::Preterminal ? std::string(kPreTag) : child.label);
  }
  return r;
}

}  // namespace

Grammar extract_grammar(const std::vector<Tree>& trees) {
  Grammar g;
  for (const auto& t : trees) {
    t.validate();
    for (NodeId id : t.preorder())
      if (t.node(id).kind == NodeKind::Nonterminal) g.add(expansion_of(t, id));
  }
  return g;
}

std::size_t Derivation::count(StepKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [kind](const Step& s) { return s.kind == kind; }));
}

// ---------------------------------------------------------------------------
// Expansion automaton

ExpansionState::ExpansionState() { stack_.push_back(OpenSymbol{Grammar::kRoot, 0, 0}); }

const OpenSymbol& ExpansionState::top() const {
  if (stack_.empty()) fail(ErrorCode::Derivation, "no open symbol");
  return stack_.back();
}

bool ExpansionState::expects_word() const {
  return !stack_.empty() && stack_.back().symbol == Grammar::kPre;
}

Step ExpansionState::apply_rule(const Grammar& g, RuleId rule) {
  if (finished_) fail(ErrorCode::Derivation, "step after <eos>");
  if (rule < 0 || static_cast<std::size_t>(rule) >= g.size())
    fail(ErrorCode::InvalidArgument, "rule id " + std::to_string(rule) + " out of range");
  const std::uint32_t t = ++t_;
  if (rule == Grammar::kEos) {
    if (!stack_.empty())
      fail(ErrorCode::Derivation, "<eos> at step " + std::to_string(t) + " with " +
                                      std::to_string(stack_.size()) + " open symbols");
    finished_ = true;
    return Step{StepKind::Rule, rule, 0};
  }
  if (stack_.empty())
    fail(ErrorCode::Derivation, "rule at step " + std::to_string(t) + " after the derivation closed without <eos>");
  OpenSymbol open = stack_.back();
  if (open.symbol == Grammar::kPre)
    fail(ErrorCode::Grammar, "rule " + g.rule_string(rule) + " applied to a preterminal at step " + std::to_string(t));
  if (g.lhs(rule) != open.symbol)
    fail(ErrorCode::Grammar, "rule " + g.rule_string(rule) + " cannot expand open symbol " +
                                 g.symbol_name(open.symbol) + " at step " + std::to_string(t));
  stack_.pop_back();
  const auto& rhs = g.rhs(rule);
  for (auto it = rhs.rbegin(); it != rhs.rend(); ++it)
    stack_.push_back(OpenSymbol{*it, t, open.depth + 1});
  return Step{StepKind::Rule, rule, open.parent};
}

Step ExpansionState::apply_word(TokenId word) {
  if (finished_) fail(ErrorCode::Derivation, "step after <eos>");
  const std::uint32_t t = ++t_;
  if (!expects_word())
    fail(ErrorCode::Derivation, "word at step " + std::to_string(t) + " without an open preterminal");
  Step s{StepKind::Word, word, stack_.back().parent};
  if (word == Vocab::kEop) stack_.pop_back();
  return s;
}

// ---------------------------------------------------------------------------

Derivation canonical_derivation(const Tree& tree, const Grammar& g, const Vocab& vocab) {
  const Node& root = tree.node(tree.root());
  if (root.kind != NodeKind::Nonterminal || root.label != kRootTag)
    fail(ErrorCode::InvalidArgument, "derivation needs a ROOT-headed tree, got " + root.label);

  Derivation d;
  std::function<void(NodeId, std::uint32_t)> visit = [&](NodeId id, std::uint32_t parent) {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Preterminal) {
      for (NodeId c : n.children) {
        const Node& leaf = tree.node(c);
        if (leaf.kind != NodeKind::Terminal)
          fail(ErrorCode::InvalidArgument, "preterminal with a non-terminal child");
        d.steps.push_back(Step{StepKind::Word, vocab.id(leaf.label), parent});
      }
      d.steps.push_back(Step{StepKind::Word, Vocab::kEop, parent});
      return;
    }
    if (n.kind == NodeKind::Terminal)
      fail(ErrorCode::InvalidArgument, "terminal '" + n.label + "' outside a preterminal");
    Rule r = expansion_of(tree, id);
    auto rid = g.find(r);
    if (!rid) fail(ErrorCode::Grammar, "rule not in grammar: " + r.to_string());
    d.steps.push_back(Step{StepKind::Rule, *rid, parent});
    const auto self = static_cast<std::uint32_t>(d.steps.size());
    for (NodeId c : n.children) visit(c, self);
  };
  visit(tree.root(), 0);
  d.steps.push_back(Step{StepKind::Rule, Grammar::kEos, 0});
  return d;
}

Tree replay_derivation(const Derivation& deriv, const Grammar& g, const Vocab& vocab,
                       bool allow_partial) {
  Tree tree;
  ExpansionState state;
  // Mirrors state.stack(): the tree node waiting for each open symbol.
  std::vector<NodeId> open_nodes;
  NodeId root = tree.add_node(NodeKind::Nonterminal, std::string(kRootTag));
  tree.set_root(root);
  open_nodes.push_back(root);

  for (std::size_t i = 0; i < deriv.steps.size(); ++i) {
    const Step& s = deriv.steps[i];
    Step expected;
    if (s.kind == StepKind::Rule) {
      expected = state.apply_rule(g, s.id);
      if (s.id != Grammar::kEos) {
        NodeId node = open_nodes.back();
        open_nodes.pop_back();
        const auto& rhs = g.rhs(s.id);
        std::vector<NodeId> kids;
        for (SymbolId sym : rhs) {
          NodeKind kind = sym == Grammar::kPre ? NodeKind::Preterminal : NodeKind::Nonterminal;
          NodeId k = tree.add_node(kind, g.symbol_name(sym));
          tree.add_child(node, k);
          kids.push_back(k);
        }
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) open_nodes.push_back(*it);
      }
    } else {
      expected = state.apply_word(s.id);
      if (s.id == Vocab::kEop) {
        open_nodes.pop_back();
      } else {
        NodeId leaf = tree.add_node(NodeKind::Terminal, vocab.token(s.id));
        tree.add_child(open_nodes.back(), leaf);
      }
    }
    if (expected.parent != s.parent)
      fail(ErrorCode::Derivation, "step " + std::to_string(i + 1) + ": parent " + std::to_string(s.parent) +
                                      " disagrees with the expansion order (expected " +
                                      std::to_string(expected.parent) + ")");
  }
  if (!state.finished() && !allow_partial)
    fail(ErrorCode::Derivation, "derivation ends without <eos> (" + std::to_string(state.stack().size()) +
                                    " open symbols)");
  return tree;
}

std::string dump_derivation(const Derivation& deriv, const Grammar& g, const Vocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < deriv.steps.size(); ++i) {
    const Step& s = deriv.steps[i];
    out += std::to_string(i + 1);
    out += s.kind == StepKind::Rule ? "\tRULE\t" : "\tWORD\t";
    out += s.kind == StepKind::Rule ? g.rule_string(s.id) : vocab.token(s.id);
    out += '\t' + std::to_string(s.parent) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

bool is_bracket_token(const std::string& token) {
  return token == ")" || (token.size() > 1 && token[0] == '(');
}

Sentence linearize(const Tree& tree) {
  Sentence out;
  std::function<void(NodeId)> emit = [&](NodeId id) {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Terminal) {
      out.push_back(escape_leaf(n.label));
      return;
    }
    out.push_back("(" + n.label);
    for (NodeId c : n.children) emit(c);
    out.push_back(")");
  };
  emit(tree.root());
  return out;
}

Tree delinearize(const Sentence& tokens) {
  Tree tree;
  std::vector<NodeId> open;
  bool closed = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    auto where = [&] { return "linearized tree, token " + std::to_string(i + 1) + ": "; };
    if (closed) fail(ErrorCode::Parse, where() + "input after the root closed");
    if (tok == ")") {
      if (open.empty()) fail(ErrorCode::Parse, where() + "unbalanced ')'");
      open.pop_back();
      closed = open.empty();
    } else if (is_bracket_token(tok)) {
      std::string label = tok.substr(1);
      NodeKind kind = label == kPreTag ? NodeKind::Preterminal : NodeKind::Nonterminal;
      NodeId id = tree.add_node(kind, label);
      if (open.empty()) {
        tree.set_root(id);
      } else {
        tree.add_child(open.back(), id);
      }
      open.push_back(id);
    } else {
      if (open.empty()) fail(ErrorCode::Parse, where() + "leaf outside any bracket");
      tree.add_child(open.back(), tree.add_node(NodeKind::Terminal, unescape_leaf(tok)));
    }
  }
  if (!closed) fail(ErrorCode::Parse, "linearized tree: unbalanced brackets");
  return tree;
}

}  // namespace trdec
