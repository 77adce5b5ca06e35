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

#include "trdec/trdec.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <sstream>
#include <variant>

#include "core/bleu.hpp"
#include "core/bpe.hpp"
#include "core/config.hpp"
#include "core/dependency.hpp"
#include "core/grammar.hpp"
#include "core/model.hpp"
#include "core/trainer.hpp"
#include "core/tree_builders.hpp"

struct trdec_bpe {
  trdec::BpeModel model;
};

struct trdec_model {
  std::variant<std::unique_ptr<trdec::TrdecModel<float>>, std::unique_ptr<trdec::TrdecModel<double>>> model;
};

namespace {

thread_local std::string g_last_error;

trdec_status fail_with(trdec_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

// Runs fn, mapping exceptions onto status codes.
template <typename Fn>
trdec_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return TRDEC_OK;
  } catch (const trdec::Error& e) {
    return fail_with(static_cast<trdec_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(TRDEC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(TRDEC_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* name) {
  if (!p) trdec::fail(trdec::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

trdec::Config load_config(const trdec_train_args& a) {
  trdec::Config cfg;
  if (a.config_path) cfg = trdec::Config::load(a.config_path);
  if (a.overrides) {
    std::stringstream in(a.overrides);
    std::string item;
    while (std::getline(in, item, ';')) {
      if (item.find_first_not_of(" \t") == std::string::npos) continue;
      auto eq = item.find('=');
      if (eq == std::string::npos)
        trdec::fail(trdec::ErrorCode::InvalidArgument, "override '" + item + "' is not key=value");
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      cfg.set(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
    }
  }
  return cfg;
}

// A flat target as a one-phrase tree.
trdec::Tree flat_tree(const trdec::Sentence& words) {
  trdec::Tree t;
  auto root = t.add_node(trdec::NodeKind::Nonterminal, std::string(trdec::kRootTag));
  auto pre = t.add_node(trdec::NodeKind::Preterminal, std::string(trdec::kPreTag));
  t.add_child(root, pre);
  for (const auto& w : words) t.add_child(pre, t.add_node(trdec::NodeKind::Terminal, w));
  t.set_root(root);
  return t;
}

template <typename T>
std::unique_ptr<trdec::TrdecModel<T>> train_model(const trdec::Config& cfg, const trdec_train_args& a) {
  auto log = [&](const std::string& line) {
    if (a.log) a.log(line.c_str(), a.log_user);
  };
  auto sources = trdec::read_sentences(a.src_path);
  std::vector<trdec::Tree> trees;
  if (a.trees_path) {
    trees = trdec::read_bracketed_trees(a.trees_path);
  } else {
    if (cfg.model.mode != trdec::ModelMode::Seq2Seq)
      trdec::fail(trdec::ErrorCode::InvalidArgument, "this mode needs a tree file");
    for (const auto& s : trdec::read_sentences(a.tgt_path)) trees.push_back(flat_tree(s));
  }
  auto data = trdec::pair_targets(sources, trees);
  auto vocabs = trdec::build_vocabularies(cfg.model, data);
  auto model = std::make_unique<trdec::TrdecModel<T>>(cfg.model, std::move(vocabs.src), std::move(vocabs.tgt),
                                                      std::move(vocabs.grammar));
  auto train = trdec::make_examples(*model, data);
  std::vector<trdec::Example> dev;
  if (a.dev_src_path && a.dev_trees_path) {
    auto dev_data = trdec::pair_targets(trdec::read_sentences(a.dev_src_path),
                                        trdec::read_bracketed_trees(a.dev_trees_path));
    std::size_t skipped = 0;
    dev = trdec::make_examples(*model, dev_data, &skipped);
    if (skipped) log("# skipped " + std::to_string(skipped) + " dev pairs that need rules outside the grammar");
  }
  log("step\tloss\tdev_loss");
  trdec::Trainer<T> trainer(*model, cfg.train);
  trainer.fit(train, dev, [&](const trdec::LogEntry& e) { log(trdec::format_log(e)); });
  return model;
}

struct Translation {
  std::string sentence;
  std::string tree;
  bool truncated = false;
};

template <typename T>
Translation translate_one(const trdec::TrdecModel<T>& m, const trdec::Sentence& src, std::size_t beam) {
  Translation out;
  auto ids = m.encode_source(src);
  try {
    trdec::DecodeResult r = beam <= 1 ? m.greedy(ids) : m.beam(ids, beam).front();
    out.sentence = trdec::join_tokens(trdec::bpe_join(r.words));
    if (!r.tree.empty()) out.tree = trdec::to_bracketed(r.tree);
  } catch (const trdec::TruncatedError& e) {
    out.truncated = true;
    out.sentence = trdec::join_tokens(trdec::bpe_join(e.words()));
    if (!e.partial().empty()) out.tree = trdec::to_bracketed(e.partial());
  }
  return out;
}

template <typename Fn>
auto visit_model(const trdec_model* m, Fn&& fn) {
  return std::visit([&](const auto& p) { return fn(*p); }, m->model);
}

}  // namespace

extern "C" {

const char* trdec_version(void) { return "1.0.0"; }

const char* trdec_status_string(trdec_status status) {
  switch (status) {
    case TRDEC_OK: return "ok";
    case TRDEC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TRDEC_ERR_IO: return "i/o error";
    case TRDEC_ERR_PARSE: return "parse error";
    case TRDEC_ERR_GRAMMAR: return "grammar error";
    case TRDEC_ERR_DERIVATION: return "derivation error";
    case TRDEC_ERR_SHAPE: return "shape error";
    case TRDEC_ERR_DIVERGED: return "training diverged";
    case TRDEC_ERR_TRUNCATED: return "decoding truncated";
    case TRDEC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* trdec_last_error(void) { return g_last_error.c_str(); }

void trdec_string_free(char* s) { std::free(s); }

trdec_status trdec_bpe_learn(const char* corpus_path, size_t num_merges, trdec_bpe** out) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out, "out");
    auto corpus = trdec::read_sentences(corpus_path);
    *out = new trdec_bpe{trdec::bpe_learn(corpus, num_merges)};
  });
}

trdec_status trdec_bpe_load(const char* path, trdec_bpe** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new trdec_bpe{trdec::BpeModel::load(path)};
  });
}

trdec_status trdec_bpe_save(const trdec_bpe* bpe, const char* path) {
  return guarded([&] {
    require(bpe, "bpe");
    require(path, "path");
    bpe->model.save(path);
  });
}

trdec_status trdec_bpe_apply(const trdec_bpe* bpe, const char* line, char** out) {
  return guarded([&] {
    require(bpe, "bpe");
    require(line, "line");
    require(out, "out");
    *out = dup_string(trdec::join_tokens(bpe->model.apply(trdec::split_tokens(line))));
  });
}

trdec_status trdec_bpe_apply_file(const trdec_bpe* bpe, const char* in_path, const char* out_path) {
  return guarded([&] {
    require(bpe, "bpe");
    require(in_path, "in_path");
    require(out_path, "out_path");
    std::vector<std::string> out;
    for (const auto& line : trdec::read_lines(in_path))
      out.push_back(trdec::join_tokens(bpe->model.apply(trdec::split_tokens(line))));
    trdec::write_lines(out_path, out);
  });
}

trdec_status trdec_bpe_join_file(const char* in_path, const char* out_path) {
  return guarded([&] {
    require(in_path, "in_path");
    require(out_path, "out_path");
    std::vector<std::string> out;
    for (const auto& line : trdec::read_lines(in_path))
      out.push_back(trdec::join_tokens(trdec::bpe_join(trdec::split_tokens(line))));
    trdec::write_lines(out_path, out);
  });
}

void trdec_bpe_free(trdec_bpe* bpe) { delete bpe; }

trdec_status trdec_build_trees(const char* variant, const char* input_path, const char* text_path,
                               const trdec_bpe* bpe, const char* out_path, size_t* count) {
  return guarded([&] {
    require(variant, "variant");
    require(input_path, "input_path");
    require(out_path, "out_path");
    trdec::BuildOptions opts;
    opts.variant = trdec::parse_tree_variant(variant);
    std::vector<trdec::Sentence> words;
    std::vector<trdec::Tree> parses;
    std::vector<trdec::DependencyTree> deps;
    switch (opts.variant) {
      case trdec::TreeVariant::ConstituencyFull:
      case trdec::TreeVariant::ConstituencyNull:
        parses = trdec::read_bracketed_trees(input_path);
        break;
      case trdec::TreeVariant::Dependency:
        deps = trdec::read_conll_deps(input_path);
        break;
      case trdec::TreeVariant::BinaryConcat:
        words = trdec::read_sentences(input_path);
        break;
    }
    if (text_path) {
      auto text = trdec::read_sentences(text_path);
      if (opts.variant == trdec::TreeVariant::BinaryConcat && text != words)
        trdec::fail(trdec::ErrorCode::InvalidArgument, "binary input and text file differ");
      words = std::move(text);
    }
    const trdec::BpeModel model = bpe ? bpe->model : trdec::BpeModel::word_level();
    auto trees = trdec::build_targets(words, parses, deps, model, opts);
    trdec::write_bracketed_trees(out_path, trees);
    if (count) *count = trees.size();
  });
}

trdec_status trdec_dump_grammar(const char* trees_path, const char* out_path) {
  return guarded([&] {
    require(trees_path, "trees_path");
    require(out_path, "out_path");
    auto g = trdec::extract_grammar(trdec::read_bracketed_trees(trees_path));
    std::stringstream in(g.serialize());
    std::vector<std::string> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    trdec::write_lines(out_path, lines);
  });
}

trdec_status trdec_dump_derivations(const char* trees_path, const char* out_path) {
  return guarded([&] {
    require(trees_path, "trees_path");
    require(out_path, "out_path");
    auto trees = trdec::read_bracketed_trees(trees_path);
    auto g = trdec::extract_grammar(trees);
    trdec::Vocab vocab;
    for (const auto& t : trees)
      for (const auto& w : t.leaves()) vocab.add(w);
    std::vector<std::string> lines;
    for (const auto& t : trees) {
      std::stringstream in(trdec::dump_derivation(trdec::canonical_derivation(t, g, vocab), g, vocab));
      for (std::string l; std::getline(in, l);) lines.push_back(l);
      lines.emplace_back();
    }
    trdec::write_lines(out_path, lines);
  });
}

trdec_status trdec_train(const trdec_train_args* args, trdec_model** out) {
  return guarded([&] {
    require(args, "args");
    require(args->src_path, "src_path");
    if (!args->trees_path && !args->tgt_path)
      trdec::fail(trdec::ErrorCode::InvalidArgument, "either trees_path or tgt_path is required");
    trdec::Config cfg = load_config(*args);
    auto handle = std::make_unique<trdec_model>();
    if (cfg.train.precision == trdec::Precision::F64)
      handle->model = train_model<double>(cfg, *args);
    else
      handle->model = train_model<float>(cfg, *args);
    if (args->out_path) visit_model(handle.get(), [&](const auto& m) { m.save(args->out_path); });
    if (out) *out = handle.release();
  });
}

trdec_status trdec_model_load(const char* checkpoint_path, trdec_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    auto handle = std::make_unique<trdec_model>();
    if (trdec::checkpoint_precision(checkpoint_path) == trdec::Precision::F64)
      handle->model = std::make_unique<trdec::TrdecModel<double>>(trdec::TrdecModel<double>::load(checkpoint_path));
    else
      handle->model = std::make_unique<trdec::TrdecModel<float>>(trdec::TrdecModel<float>::load(checkpoint_path));
    *out = handle.release();
  });
}

trdec_status trdec_model_save(const trdec_model* model, const char* checkpoint_path) {
  return guarded([&] {
    require(model, "model");
    require(checkpoint_path, "checkpoint_path");
    visit_model(model, [&](const auto& m) { m.save(checkpoint_path); });
  });
}

void trdec_model_free(trdec_model* model) { delete model; }

trdec_status trdec_translate(const trdec_model* model, const char* src_line, size_t beam, char** sentence,
                             char** tree) {
  bool truncated = false;
  trdec_status s = guarded([&] {
    require(model, "model");
    require(src_line, "src_line");
    require(sentence, "sentence");
    auto src = trdec::split_tokens(src_line);
    Translation t = visit_model(model, [&](const auto& m) { return translate_one(m, src, beam); });
    *sentence = dup_string(t.sentence);
    if (tree) *tree = dup_string(t.tree);
    truncated = t.truncated;
  });
  if (s == TRDEC_OK && truncated) return fail_with(TRDEC_ERR_TRUNCATED, "decoding hit a step or depth limit");
  return s;
}

trdec_status trdec_translate_file(const trdec_model* model, const char* src_path, size_t beam,
                                  const char* out_path, const char* trees_path, size_t* truncated) {
  return guarded([&] {
    require(model, "model");
    require(src_path, "src_path");
    require(out_path, "out_path");
    std::vector<std::string> sentences, trees;
    std::size_t n_truncated = 0;
    for (const auto& src : trdec::read_sentences(src_path)) {
      Translation t = visit_model(model, [&](const auto& m) { return translate_one(m, src, beam); });
      sentences.push_back(t.sentence);
      trees.push_back(t.tree);
      n_truncated += t.truncated;
    }
    trdec::write_lines(out_path, sentences);
    if (trees_path) trdec::write_lines(trees_path, trees);
    if (truncated) *truncated = n_truncated;
  });
}

trdec_status trdec_evaluate(const char* hyp_path, const char* ref_path, char** report) {
  return guarded([&] {
    require(hyp_path, "hyp_path");
    require(ref_path, "ref_path");
    require(report, "report");
    auto r = trdec::bleu(trdec::read_lines(hyp_path), trdec::read_lines(ref_path));
    *report = dup_string(trdec::format_report(r));
  });
}

trdec_status trdec_analyze_length(const char* hyp_path, const char* ref_path, const char* baseline_path,
                                  const char* bucket_edges, char** buckets, char** histogram) {
  return guarded([&] {
    require(hyp_path, "hyp_path");
    require(ref_path, "ref_path");
    auto tokenize = [](const std::vector<std::string>& lines) {
      std::vector<trdec::Sentence> out;
      for (const auto& l : lines) out.push_back(trdec::split_tokens(l));
      return out;
    };
    auto hyps = tokenize(trdec::read_lines(hyp_path));
    auto refs = tokenize(trdec::read_lines(ref_path));
    auto edges = bucket_edges ? trdec::parse_bucket_edges(bucket_edges) : trdec::default_bucket_edges();
    auto sys = trdec::bleu_by_length(hyps, refs, edges);
    std::vector<trdec::LengthBucket> base;
    if (baseline_path) base = trdec::bleu_by_length(tokenize(trdec::read_lines(baseline_path)), refs, edges);

    char num[64];
    std::string table = baseline_path ? "bucket\tsentences\tbleu\tbaseline_bleu\tgain\n" : "bucket\tsentences\tbleu\n";
    for (std::size_t i = 0; i < sys.size(); ++i) {
      table += sys[i].label() + "\t" + std::to_string(sys[i].count);
      std::snprintf(num, sizeof(num), "\t%.2f", sys[i].report.bleu);
      table += num;
      if (baseline_path) {
        std::snprintf(num, sizeof(num), "\t%.2f\t%.2f", base[i].report.bleu, sys[i].report.bleu - base[i].report.bleu);
        table += num;
      }
      table += "\n";
    }
    std::string hist = "diff\tcount\n";
    for (const auto& [diff, n] : trdec::length_diff_histogram(hyps, refs))
      hist += std::to_string(diff) + "\t" + std::to_string(n) + "\n";
    if (buckets) *buckets = dup_string(table);
    if (histogram) *histogram = dup_string(hist);
  });
}

}  // extern "C"
