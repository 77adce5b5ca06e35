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

#include "core/tree.hpp"

#include <algorithm>
#include <functional>

#include "core/error.hpp"

namespace trdec {

NodeId Tree::add_node(NodeKind kind, std::string label) {
  nodes_.push_back(Node{kind, std::move(label), {}, std::nullopt});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tree::add_child(NodeId parent, NodeId child) {
  nodes_.at(parent).children.push_back(child);
  nodes_.at(child).parent = parent;
}

NodeId Tree::root() const {
  if (!root_) fail(ErrorCode::InvalidArgument, "tree has no root");
  return *root_;
}

NodeId Tree::graft(const Tree& other, NodeId at) {
  const Node& src = other.node(at);
  NodeId id = add_node(src.kind, src.label);
  for (NodeId c : src.children) add_child(id, graft(other, c));
  return id;
}

std::vector<NodeId> Tree::preorder() const {
  std::vector<NodeId> order;
  if (!root_) return order;
  std::vector<NodeId> stack{*root_};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& ch = nodes_[id].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

Sentence Tree::leaves() const {
  Sentence out;
  for (NodeId id : preorder())
    if (nodes_[id].kind == NodeKind::Terminal) out.push_back(nodes_[id].label);
  return out;
}

std::size_t Tree::count(NodeKind kind) const {
  std::size_t n = 0;
  for (NodeId id : preorder()) n += nodes_[id].kind == kind;
  return n;
}

std::size_t Tree::depth() const {
  if (!root_) return 0;
  std::function<std::size_t(NodeId)> rec = [&](NodeId id) -> std::size_t {
    std::size_t d = 0;
    for (NodeId c : nodes_[id].children) d = std::max(d, 1 + rec(c));
    return d;
  };
  return rec(*root_);
}

void Tree::validate() const {
  auto bad = [](const std::string& what) {
    fail(ErrorCode::InvalidArgument, "invalid tree: " + what);
  };
  if (!root_) bad("no root");
  if (nodes_[*root_].parent) bad("root has a parent");
  for (NodeId id : preorder()) {
    const Node& n = nodes_[id];
    switch (n.kind) {
      case NodeKind::Terminal:
        if (!n.children.empty()) bad("terminal '" + n.label + "' has children");
        if (n.parent && nodes_[*n.parent].kind != NodeKind::Preterminal)
          bad("terminal '" + n.label + "' outside a preterminal");
        break;
      case NodeKind::Preterminal:
        for (NodeId c : n.children)
          if (nodes_[c].kind != NodeKind::Terminal)
            bad("preterminal with a non-terminal child");
        break;
      case NodeKind::Nonterminal:
        if (n.children.empty()) bad("nonterminal '" + n.label + "' has no children");
        break;
    }
  }
}

bool Tree::operator==(const Tree& other) const {
  if (empty() || other.empty()) return empty() == other.empty();
  std::function<bool(NodeId, NodeId)> eq = [&](NodeId a, NodeId b) {
    const Node& x = nodes_[a];
    const Node& y = other.nodes_[b];
    if (x.kind != y.kind || x.label != y.label ||
        x.children.size() != y.children.size())
      return false;
    for (std::size_t i = 0; i < x.children.size(); ++i)
      if (!eq(x.children[i], y.children[i])) return false;
    return true;
  };
  return eq(*root_, *other.root_);
}

// ---------------------------------------------------------------------------
// Bracketed format

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace

std::string escape_leaf(const std::string& leaf) {
  return replace_all(replace_all(leaf, "(", "-LRB-"), ")", "-RRB-");
}

std::string unescape_leaf(const std::string& leaf) {
  return replace_all(replace_all(leaf, "-LRB-", "("), "-RRB-", ")");
}

std::string to_bracketed(const Tree& tree) {
  std::string out;
  std::function<void(NodeId)> emit = [&](NodeId id) {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Terminal) {
      out += escape_leaf(n.label);
      return;
    }
    out += '(';
    out += n.label;
    for (NodeId c : n.children) {
      out += ' ';
      emit(c);
    }
    out += ')';
  };
  emit(tree.root());
  return out;
}

namespace {

class BracketParser {
 public:
  BracketParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  Tree parse() {
    skip_space();
    if (pos_ >= text_.size()) error("empty tree", pos_);
    if (text_[pos_] != '(') error("expected '('", pos_);
    NodeId root = parse_node(/*outermost=*/true);
    skip_space();
    if (pos_ < text_.size()) {
      error(text_[pos_] == ')' ? "unbalanced ')'" : "trailing input after tree", pos_);
    }
    tree_.set_root(root);
    return std::move(tree_);
  }

 private:
  [[noreturn]] void error(const std::string& what, std::size_t at) const {
    fail(ErrorCode::Parse, "line " + std::to_string(line_) + ", column " +
                               std::to_string(at + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  std::string_view atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           text_[pos_] != ' ' && text_[pos_] != '\t')
      ++pos_;
    return text_.substr(start, pos_ - start);
  }

  NodeId parse_node(bool outermost) {
    std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    std::string label;
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') {
      label = std::string(atom());
    } else if (outermost) {
      label = std::string(kRootTag);
    } else {
      error("missing label", pos_);
    }
    NodeKind kind = label == kPreTag ? NodeKind::Preterminal : NodeKind::Nonterminal;
    NodeId id = tree_.add_node(kind, label);
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) error("unbalanced parentheses: '(' never closed", open);
      char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        tree_.add_child(id, parse_node(false));
      } else {
        NodeId leaf = tree_.add_node(NodeKind::Terminal, unescape_leaf(std::string(atom())));
        tree_.add_child(id, leaf);
      }
    }
    // Preterminals may be empty: decoding can close a phrase immediately.
    if (tree_.node(id).children.empty() && kind != NodeKind::Preterminal)
      error("empty constituent '" + label + "'", open);
    return id;
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
  Tree tree_;
};

}  // namespace

Tree parse_bracketed(std::string_view text, std::size_t line) {
  return BracketParser(text, line).parse();
}

std::vector<Tree> read_bracketed_trees(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  std::vector<Tree> trees;
  trees.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      trees.push_back(parse_bracketed(lines[i], i + 1));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ": " + e.what());
    }
  }
  return trees;
}

void write_bracketed_trees(const std::filesystem::path& path,
                           const std::vector<Tree>& trees) {
  std::vector<std::string> lines;
  lines.reserve(trees.size());
  for (const auto& t : trees) lines.push_back(to_bracketed(t));
  write_lines(path, lines);
}

}  // namespace trdec
