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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/corpus_io.hpp"

namespace trdec {

enum class NodeKind : std::uint8_t { Terminal, Nonterminal, Preterminal };

using NodeId = std::uint32_t;

// Reserved tags.
inline constexpr std::string_view kRootTag = "ROOT";
inline constexpr std::string_view kPreTag = "pre";
inline constexpr std::string_view kNullTag = "X";

struct Node {
  NodeKind kind = NodeKind::Terminal;
  std::string label;  // tag for (pre)terminals' parents, subword for terminals
  std::vector<NodeId> children;
  std::optional<NodeId> parent;
};

/// Ordered rooted tree stored as a node arena.
///
/// Equality is structural: two trees are equal when their root subtrees match
/// in kind, label and child order, regardless of arena layout.
class Tree {
 public:
  Tree() = default;

  NodeId add_node(NodeKind kind, std::string label);
  void add_child(NodeId parent, NodeId child);
  void set_root(NodeId id) { root_ = id; }

  bool empty() const { return !root_.has_value(); }
  NodeId root() const;
  const Node& node(NodeId id) const { return nodes_.at(id); }
  Node& node(NodeId id) { return nodes_.at(id); }
  std::size_t size() const { return nodes_.size(); }

  /// Copies the subtree of `other` rooted at `at` into this arena.
  NodeId graft(const Tree& other, NodeId at);

  /// Node ids reachable from the root in pre-order.
  std::vector<NodeId> preorder() const;
  Sentence leaves() const;
  std::size_t count(NodeKind kind) const;
  std::size_t depth() const;  // edges on the longest root-to-leaf path

  /// Throws ErrorCode::InvalidArgument when the generation invariants fail:
  /// terminals only under preterminals, preterminals hold only terminals,
  /// nonterminals have at least one child.
  void validate() const;

  bool operator==(const Tree& other) const;

 private:
  std::vector<Node> nodes_;
  std::optional<NodeId> root_;
};

/// Penn-style bracket string, single spaces, e.g. "(S (NP (pre _The)))".
/// Literal parentheses in leaves are written as -LRB- / -RRB-.
std::string to_bracketed(const Tree& tree);

/// Parses one bracketed tree. Nodes labelled "pre" become preterminals, bare
/// tokens become terminals, everything else a nonterminal. An unlabelled
/// outermost bracket, as some parsers emit, is read as ROOT. `line` is only
/// used in error messages.
Tree parse_bracketed(std::string_view text, std::size_t line = 1);

/// One tree per non-empty line.
std::vector<Tree> read_bracketed_trees(const std::filesystem::path& path);
void write_bracketed_trees(const std::filesystem::path& path,
                           const std::vector<Tree>& trees);

std::string escape_leaf(const std::string& leaf);
std::string unescape_leaf(const std::string& leaf);

}  // namespace trdec
