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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/corpus_io.hpp"
#include "core/tree.hpp"

namespace trdec {

using RuleId = std::int32_t;
using SymbolId = std::int32_t;

/// A CFG production. RHS symbols are nonterminal tags or "pre"; words never
/// appear in rules.
struct Rule {
  std::string lhs;
  std::vector<std::string> rhs;

  std::string to_string() const;  // "S -> NP VP PUNC"
  bool operator==(const Rule&) const = default;
};

/// Rules extracted from training trees plus the distinguished <eos> entry.
///
/// Rule id 0 is always <eos>; productions follow in first-seen order. Symbol
/// id 0 is ROOT and 1 is "pre".
class Grammar {
 public:
  static constexpr RuleId kEos = 0;
  static constexpr SymbolId kRoot = 0;
  static constexpr SymbolId kPre = 1;

  Grammar();

  /// Adds a production if new; returns its id. The RHS must be non-empty.
  RuleId add(const Rule& rule);
  std::optional<RuleId> find(const Rule& rule) const;

  std::size_t size() const { return rules_.size(); }  // includes <eos>
  const Rule& rule(RuleId id) const;
  std::string rule_string(RuleId id) const;

  std::size_t num_symbols() const { return symbols_.size(); }
  std::optional<SymbolId> symbol(std::string_view tag) const;
  const std::string& symbol_name(SymbolId id) const { return symbols_.at(id); }

  SymbolId lhs(RuleId id) const { return lhs_.at(id); }
  const std::vector<SymbolId>& rhs(RuleId id) const { return rhs_.at(id); }
  const std::vector<RuleId>& rules_for(SymbolId lhs) const;

  /// Legal-rule mask over all rule ids. With no open symbol only <eos> is
  /// legal; otherwise exactly the rules whose LHS is the symbol.
  const std::vector<std::uint8_t>& mask(std::optional<SymbolId> open) const;

  /// "# start=ROOT eos=0" header, then one entry per line in id order:
  /// "<eos>" for id 0, "LHS -> RHS1 RHS2 ..." for the rest.
  std::string serialize() const;
  static Grammar deserialize(std::string_view text);

  bool operator==(const Grammar& other) const { return rules_ == other.rules_; }

 private:
  SymbolId intern(const std::string& tag);

  std::vector<Rule> rules_;
  std::vector<SymbolId> lhs_;
  std::vector<std::vector<SymbolId>> rhs_;
  std::unordered_map<std::string, RuleId> rule_index_;
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::vector<std::vector<RuleId>> lhs_index_;
  std::vector<std::vector<std::uint8_t>> masks_;  // one per symbol, then <eos>
};

/// One production per distinct expansion of a nonterminal node, first-seen
/// order. Trees must pass Tree::validate().
Grammar extract_grammar(const std::vector<Tree>& trees);

// ---------------------------------------------------------------------------
// Derivations

enum class StepKind : std::uint8_t { Rule, Word };

/// One decision on the generation timeline. Steps are numbered from 1;
/// `parent` is the number of the rule step that introduced the node being
/// expanded (or, for word steps, the governing preterminal), and 0 stands for
/// the initial state before any step.
struct Step {
  StepKind kind = StepKind::Rule;
  std::int32_t id = 0;  // RuleId or TokenId
  std::uint32_t parent = 0;

  bool operator==(const Step&) const = default;
};

struct Derivation {
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  std::size_t count(StepKind kind) const;
  bool operator==(const Derivation&) const = default;
};

struct OpenSymbol {
  SymbolId symbol = Grammar::kRoot;
  std::uint32_t parent = 0;
  std::uint32_t depth = 0;
};

/// The top-down, leftmost expansion automaton. Open symbols live on a stack
/// whose back is the leftmost unexpanded symbol.
class ExpansionState {
 public:
  ExpansionState();

  bool finished() const { return finished_; }
  bool stack_empty() const { return stack_.empty(); }
  const OpenSymbol& top() const;
  const std::vector<OpenSymbol>& stack() const { return stack_; }
  std::uint32_t steps_taken() const { return t_; }

  /// True when the next decision is a word (top is "pre").
  bool expects_word() const;

  /// Records the next rule step, returning it. Throws ErrorCode::Grammar on
  /// an LHS mismatch and ErrorCode::Derivation on misplaced <eos>.
  Step apply_rule(const Grammar& g, RuleId rule);
  /// Records the next word step; <eop> closes the open preterminal.
  Step apply_word(TokenId word);

 private:
  std::vector<OpenSymbol> stack_;
  std::uint32_t t_ = 0;
  bool finished_ = false;
};

/// Pre-order leftmost derivation of a ROOT-headed tree. Terminals map to ids
/// through `vocab`. Throws ErrorCode::Grammar naming the first expansion that
/// is missing from the grammar.
Derivation canonical_derivation(const Tree& tree, const Grammar& g, const Vocab& vocab);

/// Runs the expansion automaton over `deriv` and builds the tree. Parent
/// fields must agree with the automaton. With `allow_partial`, a derivation
/// that stops early yields the partial tree (unexpanded symbols become
/// childless nodes).
Tree replay_derivation(const Derivation& deriv, const Grammar& g, const Vocab& vocab,
                       bool allow_partial = false);

/// "t\tRULE|WORD\tsymbol\tparent" per step.
std::string dump_derivation(const Derivation& deriv, const Grammar& g, const Vocab& vocab);

// ---------------------------------------------------------------------------
// Linearization

/// Depth-first bracket tokens: "(X", "(pre", leaves, ")".
Sentence linearize(const Tree& tree);
Tree delinearize(const Sentence& tokens);
bool is_bracket_token(const std::string& token);

}  // namespace trdec
