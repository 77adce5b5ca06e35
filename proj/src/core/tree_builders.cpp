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

#include "core/tree_builders.hpp"

#include <algorithm>
#include <functional>

#include "core/error.hpp"

namespace trdec {

TreeVariant parse_tree_variant(std::string_view name) {
  if (name == "con") return TreeVariant::ConstituencyFull;
  if (name == "con-null") return TreeVariant::ConstituencyNull;
  if (name == "dep") return TreeVariant::Dependency;
  if (name == "binary") return TreeVariant::BinaryConcat;
  fail(ErrorCode::InvalidArgument,
       "unknown tree variant '" + std::string(name) + "' (con, con-null, dep, binary)");
}

std::string_view tree_variant_name(TreeVariant v) {
  switch (v) {
    case TreeVariant::ConstituencyFull: return "con";
    case TreeVariant::ConstituencyNull: return "con-null";
    case TreeVariant::Dependency: return "dep";
    case TreeVariant::BinaryConcat: return "binary";
  }
  return "?";
}

namespace {

// A bare word, or a nonterminal directly over words only (a POS node).
bool word_only(const Tree& t, NodeId id) {
  const Node& n = t.node(id);
  if (n.kind == NodeKind::Terminal) return true;
  if (n.kind != NodeKind::Nonterminal) return false;
  return std::all_of(n.children.begin(), n.children.end(),
                     [&](NodeId c) { return t.node(c).kind == NodeKind::Terminal; });
}

void collect_words(const Tree& t, NodeId id, Sentence& out) {
  const Node& n = t.node(id);
  if (n.kind == NodeKind::Terminal) {
    out.push_back(n.label);
    return;
  }
  for (NodeId c : n.children) collect_words(t, c, out);
}

NodeId make_pre(Tree& out, const Sentence& words, const BpeModel& bpe) {
  NodeId pre = out.add_node(NodeKind::Preterminal, std::string(kPreTag));
  for (const auto& piece : bpe.apply(words))
    out.add_child(pre, out.add_node(NodeKind::Terminal, piece));
  return pre;
}

template <typename Fn>
Tree map_tree(const Tree& in, Fn&& convert) {
  Tree out;
  out.set_root(convert(out, in.root()));
  return out;
}

}  // namespace

Tree form_preterminals(const Tree& tree, const BpeModel& bpe) {
  std::function<NodeId(Tree&, NodeId)> convert = [&](Tree& out, NodeId id) -> NodeId {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Preterminal) return out.graft(tree, id);
    if (n.kind == NodeKind::Terminal) return make_pre(out, {n.label}, bpe);

    NodeId self = out.add_node(NodeKind::Nonterminal, n.label);
    Sentence run;
    auto flush = [&] {
      if (run.empty()) return;
      out.add_child(self, make_pre(out, run, bpe));
      run.clear();
    };
    for (NodeId c : n.children) {
      if (word_only(tree, c)) {
        collect_words(tree, c, run);
      } else {
        flush();
        out.add_child(self, convert(out, c));
      }
    }
    flush();
    return self;
  };
  return map_tree(tree, convert);
}

Tree wrap_root(const Tree& tree) {
  const Node& r = tree.node(tree.root());
  if (r.kind == NodeKind::Nonterminal && r.label == kRootTag) return tree;
  Tree out;
  NodeId root = out.add_node(NodeKind::Nonterminal, std::string(kRootTag));
  out.add_child(root, out.graft(tree, tree.root()));
  out.set_root(root);
  return out;
}

Tree strip_tags(const Tree& tree) {
  Tree out = tree;
  for (NodeId id : out.preorder()) {
    Node& n = out.node(id);
    if (n.kind == NodeKind::Nonterminal && n.label != kRootTag) n.label = std::string(kNullTag);
  }
  return out;
}

Tree dep_to_constituency(const DependencyTree& dep) {
  dep.validate();
  const std::size_t n = dep.tokens.size();
  std::vector<std::vector<std::size_t>> dependents(n + 1);
  for (std::size_t i = 1; i <= n; ++i) dependents[dep.heads[i - 1]].push_back(i);

  Tree out;
  std::function<NodeId(std::size_t)> build = [&](std::size_t word) -> NodeId {
    NodeId self = out.add_node(NodeKind::Nonterminal, std::string(kNullTag));
    // Own slot plus dependents, by sentence position.
    std::vector<std::size_t> order = dependents[word];
    order.push_back(word);
    std::sort(order.begin(), order.end());
    for (std::size_t pos : order) {
      if (pos == word) {
        NodeId pre = out.add_node(NodeKind::Preterminal, std::string(kPreTag));
        out.add_child(pre, out.add_node(NodeKind::Terminal, dep.tokens[word - 1]));
        out.add_child(self, pre);
      } else {
        out.add_child(self, build(pos));
      }
    }
    return self;
  };
  out.set_root(build(dep.root()));

  if (out.leaves() != dep.tokens) {
    // Arcs as spans, with the root hanging off virtual position 0.
    for (std::size_t a = 1; a <= n; ++a) {
      for (std::size_t b = 1; b <= n; ++b) {
        std::size_t l1 = std::min(a, dep.heads[a - 1]), r1 = std::max(a, dep.heads[a - 1]);
        std::size_t l2 = std::min(b, dep.heads[b - 1]), r2 = std::max(b, dep.heads[b - 1]);
        if (l1 < l2 && l2 < r1 && r1 < r2) {
          fail(ErrorCode::Parse, "non-projective dependency tree: arc " +
                                     std::to_string(dep.heads[a - 1]) + "->" + std::to_string(a) +
                                     " crosses arc " + std::to_string(dep.heads[b - 1]) + "->" +
                                     std::to_string(b));
        }
      }
    }
    fail(ErrorCode::Parse, "non-projective dependency tree: word order not preserved");
  }
  return out;
}

namespace {

// Algorithm 1 over an arbitrary list of already-built subtrees.
NodeId halve(Tree& out, const std::vector<NodeId>& items, std::size_t l, std::size_t r) {
  if (l == r) return items[l];
  std::size_t m = (l + r) / 2;
  NodeId left = halve(out, items, l, m);
  NodeId right = halve(out, items, m + 1, r);
  NodeId self = out.add_node(NodeKind::Nonterminal, std::string(kNullTag));
  out.add_child(self, left);
  out.add_child(self, right);
  return self;
}

}  // namespace

Tree make_tree_v1(const Sentence& words, std::size_t l, std::size_t r) {
  if (l > r || r >= words.size())
    fail(ErrorCode::InvalidArgument, "make_tree_v1: bad range [" + std::to_string(l) + ", " +
                                         std::to_string(r) + "] over " + std::to_string(words.size()) +
                                         " words");
  Tree out;
  std::vector<NodeId> leaves;
  for (std::size_t i = l; i <= r; ++i) leaves.push_back(out.add_node(NodeKind::Terminal, words[i]));
  // `halve` indexes from zero.
  out.set_root(halve(out, leaves, 0, leaves.size() - 1));
  return out;
}

Tree make_tree_v2(const Sentence& words) {
  if (words.empty()) fail(ErrorCode::InvalidArgument, "make_tree_v2: empty word list");
  Tree out;
  std::vector<NodeId> nodes;
  std::size_t i = 0;
  for (; i + 1 < words.size(); i += 2) {
    NodeId n = out.add_node(NodeKind::Nonterminal, std::string(kNullTag));
    out.add_child(n, out.add_node(NodeKind::Terminal, words[i]));
    out.add_child(n, out.add_node(NodeKind::Terminal, words[i + 1]));
    nodes.push_back(n);
  }
  if (i != words.size()) nodes.push_back(out.add_node(NodeKind::Terminal, words[i]));
  out.set_root(halve(out, nodes, 0, nodes.size() - 1));
  return out;
}

Tree wrap_leaf_words(const Tree& tree) {
  std::function<NodeId(Tree&, NodeId)> convert = [&](Tree& out, NodeId id) -> NodeId {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Preterminal) return out.graft(tree, id);
    if (n.kind == NodeKind::Terminal) {
      NodeId pre = out.add_node(NodeKind::Preterminal, std::string(kPreTag));
      out.add_child(pre, out.add_node(NodeKind::Terminal, n.label));
      return pre;
    }
    NodeId self = out.add_node(n.kind, n.label);
    for (NodeId c : n.children) out.add_child(self, convert(out, c));
    return self;
  };
  return map_tree(tree, convert);
}

Tree segment_preterminals(const Tree& tree, const BpeModel& bpe) {
  std::function<NodeId(Tree&, NodeId)> convert = [&](Tree& out, NodeId id) -> NodeId {
    const Node& n = tree.node(id);
    if (n.kind == NodeKind::Preterminal) {
      Sentence words;
      collect_words(tree, id, words);
      return make_pre(out, words, bpe);
    }
    NodeId self = out.add_node(n.kind, n.label);
    for (NodeId c : n.children) out.add_child(self, convert(out, c));
    return self;
  };
  return map_tree(tree, convert);
}

std::vector<Tree> build_targets(const std::vector<Sentence>& words,
                                const std::vector<Tree>& parses,
                                const std::vector<DependencyTree>& deps,
                                const BpeModel& bpe, const BuildOptions& opts) {
  auto check_aligned = [&](std::size_t n, const char* what) {
    if (!words.empty() && words.size() != n)
      fail(ErrorCode::InvalidArgument, std::string("alignment mismatch: ") + std::to_string(words.size()) +
                                           " sentences vs " + std::to_string(n) + " " + what);
  };
  auto check_sentence = [&](std::size_t i, const Sentence& got) {
    if (!words.empty() && got != words[i])
      fail(ErrorCode::InvalidArgument, "alignment mismatch at sentence " + std::to_string(i + 1) +
                                           ": tree leaves '" + join_tokens(got) + "' vs '" +
                                           join_tokens(words[i]) + "'");
  };

  std::vector<Tree> out;
  switch (opts.variant) {
    case TreeVariant::ConstituencyFull:
    case TreeVariant::ConstituencyNull: {
      if (parses.empty() && !words.empty())
        fail(ErrorCode::InvalidArgument, "constituency variants need parsed trees");
      check_aligned(parses.size(), "parsed trees");
      for (std::size_t i = 0; i < parses.size(); ++i) {
        check_sentence(i, parses[i].leaves());
        Tree t = wrap_root(form_preterminals(parses[i], bpe));
        if (opts.variant == TreeVariant::ConstituencyNull) t = strip_tags(t);
        t.validate();
        out.push_back(std::move(t));
      }
      break;
    }
    case TreeVariant::Dependency: {
      if (deps.empty() && !words.empty())
        fail(ErrorCode::InvalidArgument, "dependency variant needs dependency trees");
      check_aligned(deps.size(), "dependency trees");
      for (std::size_t i = 0; i < deps.size(); ++i) {
        check_sentence(i, deps[i].tokens);
        Tree t = wrap_root(segment_preterminals(dep_to_constituency(deps[i]), bpe));
        t.validate();
        out.push_back(std::move(t));
      }
      break;
    }
    case TreeVariant::BinaryConcat: {
      for (const auto& s : words) {
        if (s.empty()) fail(ErrorCode::InvalidArgument, "empty target sentence");
        if (opts.binary_over_subwords) {
          Sentence pieces = bpe.apply(s);
          for (Tree t : {make_tree_v1(pieces, 0, pieces.size() - 1), make_tree_v2(pieces)}) {
            t = wrap_root(wrap_leaf_words(t));
            t.validate();
            out.push_back(std::move(t));
          }
        } else {
          for (Tree t : {make_tree_v1(s, 0, s.size() - 1), make_tree_v2(s)}) {
            t = wrap_root(segment_preterminals(wrap_leaf_words(t), bpe));
            t.validate();
            out.push_back(std::move(t));
          }
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace trdec
