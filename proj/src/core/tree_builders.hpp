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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/bpe.hpp"
#include "core/dependency.hpp"
#include "core/tree.hpp"

namespace trdec {

enum class TreeVariant { ConstituencyFull, ConstituencyNull, Dependency, BinaryConcat };

/// Parses the CLI names "con", "con-null", "dep", "binary".
TreeVariant parse_tree_variant(std::string_view name);
std::string_view tree_variant_name(TreeVariant v);

/// Collapses a word-level parse into generation form. A node whose children
/// are all part-of-speech nodes (or bare words) keeps its tag over one "pre"
/// spanning their subwords; elsewhere each maximal run of adjacent
/// part-of-speech children becomes one "pre". Tags above survive.
Tree form_preterminals(const Tree& tree, const BpeModel& bpe);

/// Puts a ROOT node on top unless the tree is already ROOT-headed.
Tree wrap_root(const Tree& tree);

/// Replaces every nonterminal tag except ROOT with the null tag.
Tree strip_tags(const Tree& tree);

/// One null-tag node per word; each word sits, as a one-word "pre", among the
/// nodes of its dependents in sentence order, and each node hangs under its
/// head's node. Non-projective input is rejected with ErrorCode::Parse naming
/// a crossing arc pair.
Tree dep_to_constituency(const DependencyTree& dep);

/// Recursive halving over words[l..r] (inclusive). Leaves are terminals,
/// internal nodes carry the null tag.
Tree make_tree_v1(const Sentence& words, std::size_t l, std::size_t r);

/// Pairs adjacent words under null nodes (an odd last word stays single) and
/// then applies the halving over that node list.
Tree make_tree_v2(const Sentence& words);

/// Wraps every terminal that is not already inside a preterminal into its own
/// one-word "pre".
Tree wrap_leaf_words(const Tree& tree);

/// Re-segments the whole-word terminals of every preterminal into subwords.
Tree segment_preterminals(const Tree& tree, const BpeModel& bpe);

struct BuildOptions {
  TreeVariant variant = TreeVariant::BinaryConcat;
  // Binary trees are built over whole words by default; set to build them
  // directly over subwords instead.
  bool binary_over_subwords = false;
};

/// Produces ROOT-headed generation trees. `words` holds the target sentences
/// (required for the binary variant, optional elsewhere where it is checked
/// against the tree leaves); `parses` / `deps` are required for the
/// constituency / dependency variants. The binary variant emits the two
/// versions of each sentence next to each other.
std::vector<Tree> build_targets(const std::vector<Sentence>& words,
                                const std::vector<Tree>& parses,
                                const std::vector<DependencyTree>& deps,
                                const BpeModel& bpe, const BuildOptions& opts);

}  // namespace trdec
