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

// Shared fixtures and oracles for the test binaries.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "core/bpe.hpp"
#include "core/dependency.hpp"
#include "core/grammar.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/tree.hpp"
#include "core/tree_builders.hpp"

#ifndef TRDEC_TEST_DATA
#define TRDEC_TEST_DATA "tests/data"
#endif

namespace trdec::testing {

inline std::string data_path(const std::string& name) { return std::string(TRDEC_TEST_DATA) + "/" + name; }

inline constexpr const char* kCatParse =
    "(ROOT (S (NP (DT The) (NN cat)) (VP (VBZ eats) (NP (NN fish))) (PUNC (. .))))";

// Merges under which "The cat eats fish ." segments as "_The _cat _eat s _fi sh _.".
inline BpeModel cat_bpe() {
  return BpeModel({{"_T", "h"}, {"_Th", "e"}, {"_c", "a"}, {"_ca", "t"}, {"_e", "a"}, {"_ea", "t"},
                   {"_f", "i"}, {"s", "h"}});
}

inline Tree cat_tree() { return wrap_root(form_preterminals(parse_bracketed(kCatParse), cat_bpe())); }

inline Vocab vocab_of(const std::vector<Tree>& trees) {
  Vocab v;
  for (const auto& t : trees)
    for (const auto& w : t.leaves()) v.add(w);
  return v;
}

// ---------------------------------------------------------------------------
// Random inputs

inline std::string random_word(Rng& rng, const std::string& alphabet = "abcdef", std::size_t max_len = 4) {
  std::string w;
  const std::size_t n = 1 + rng.below(max_len);
  for (std::size_t i = 0; i < n; ++i) w += alphabet[rng.below(alphabet.size())];
  return w;
}

inline Sentence random_sentence(Rng& rng, std::size_t max_len = 8) {
  Sentence s;
  const std::size_t n = 1 + rng.below(max_len);
  for (std::size_t i = 0; i < n; ++i) s.push_back(random_word(rng));
  return s;
}

// Word-level parse: phrase nodes over part-of-speech nodes and sub-phrases.
inline Tree random_parse(Rng& rng, std::size_t depth = 3) {
  static const std::vector<std::string> phrases{"S", "NP", "VP", "PP", "ADJP"};
  static const std::vector<std::string> tags{"DT", "NN", "VB", "JJ", "IN"};
  Tree t;
  std::function<NodeId(std::size_t)> build = [&](std::size_t d) {
    NodeId n = t.add_node(NodeKind::Nonterminal, phrases[rng.below(phrases.size())]);
    const std::size_t k = 1 + rng.below(3);
    for (std::size_t i = 0; i < k; ++i) {
      if (d > 0 && rng.below(3) == 0) {
        t.add_child(n, build(d - 1));
      } else {
        NodeId pos = t.add_node(NodeKind::Nonterminal, tags[rng.below(tags.size())]);
        t.add_child(pos, t.add_node(NodeKind::Terminal, random_word(rng)));
        t.add_child(n, pos);
      }
    }
    return n;
  };
  t.set_root(build(depth));
  return t;
}

// Projective dependency tree: each span picks a head, and the pieces left and
// right of it become sub-spans attached to that head.
inline DependencyTree random_projective_deps(Rng& rng, std::size_t n) {
  DependencyTree d;
  for (std::size_t i = 0; i < n; ++i) d.tokens.push_back(random_word(rng));
  d.heads.assign(n, 0);
  std::function<std::size_t(std::size_t, std::size_t)> span = [&](std::size_t l, std::size_t r) {
    const std::size_t h = l + rng.below(r - l + 1);
    std::size_t i = l;
    while (i < h) {
      std::size_t j = i + rng.below(h - i);
      d.heads[span(i, j) - 1] = h + 1;
      i = j + 1;
    }
    i = h + 1;
    while (i <= r) {
      std::size_t j = i + rng.below(r - i + 1);
      d.heads[span(i, j) - 1] = h + 1;
      i = j + 1;
    }
    return h + 1;
  };
  d.heads[span(0, n - 1) - 1] = 0;
  return d;
}

// A generation tree of the given variant over random input.
inline Tree random_generation_tree(Rng& rng, TreeVariant variant, const BpeModel& bpe) {
  BuildOptions opts;
  opts.variant = variant;
  switch (variant) {
    case TreeVariant::ConstituencyFull:
    case TreeVariant::ConstituencyNull:
      return build_targets({}, {random_parse(rng)}, {}, bpe, opts).front();
    case TreeVariant::Dependency:
      return build_targets({}, {}, {random_projective_deps(rng, 1 + rng.below(9))}, bpe, opts).front();
    case TreeVariant::BinaryConcat: {
      auto trees = build_targets({random_sentence(rng)}, {}, {}, bpe, opts);
      return trees[rng.below(trees.size())];
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Finite differences

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst;  // "param[index]"
  std::size_t checked = 0;
  std::size_t negligible = 0;  // pairs under the floor on both sides
};

// |a - n| / max(|a|, |n|); pairs where both sides are below `floor` in
// magnitude count as agreeing.
inline double relative_error(double a, double n, double floor = 1e-8) {
  const double scale = std::max(std::abs(a), std::abs(n));
  return scale < floor ? 0.0 : std::abs(a - n) / scale;
}

// Compares the gradient of `loss` with central differences over every
// parameter entry. Whole-model losses sum dozens of terms, so their central
// differences carry roundoff near 1e-10 and need a floor well above it.
inline GradCheckResult check_gradients(ad::ParameterStore<double>& params,
                                       const std::function<ad::Var<double>(ad::Graph<double>&)>& loss,
                                       double eps = 1e-4, double floor = 1e-8) {
  params.zero_grad();
  {
    ad::Graph<double> g;
    g.backward(loss(g));
  }
  GradCheckResult r;
  auto eval = [&] {
    ad::Graph<double> g(false);
    return loss(g).value().item();
  };
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& prm = params[p];
    for (std::size_t i = 0; i < prm.value.size(); ++i) {
      const double keep = prm.value[i];
      prm.value[i] = keep + eps;
      const double up = eval();
      prm.value[i] = keep - eps;
      const double down = eval();
      prm.value[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double err = relative_error(prm.grad[i], numeric, floor);
      ++r.checked;
      if (std::max(std::abs(prm.grad[i]), std::abs(numeric)) < floor) ++r.negligible;
      if (err > r.max_rel_error) {
        r.max_rel_error = err;
        char buf[96];
        std::snprintf(buf, sizeof buf, "[%zu] analytic %.6g numeric %.6g", i, prm.grad[i], numeric);
        r.worst = prm.name + buf;
      }
    }
  }
  params.zero_grad();
  return r;
}

}  // namespace trdec::testing
