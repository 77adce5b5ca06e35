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

// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trdec/trdec.h"

namespace {

int report(trdec_status s) {
  if (s != TRDEC_OK) std::cerr << "trdec: " << trdec_status_string(s) << ": " << trdec_last_error() << "\n";
  return static_cast<int>(s);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Writes to `path`, or stdout when it is empty.
void emit(const std::string& path, const char* text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-structured decoder for neural machine translation"};
  app.require_subcommand(1);
  int rc = 0;

  // bpe-learn
  std::string bl_input, bl_out;
  std::size_t bl_merges = 8000;
  auto* bpe_learn = app.add_subcommand("bpe-learn", "Learn BPE merges from tokenized text");
  bpe_learn->add_option("--input", bl_input, "Whitespace-tokenized text")->required();
  bpe_learn->add_option("--merges", bl_merges, "Number of merges")->capture_default_str();
  bpe_learn->add_option("--out", bl_out, "Merge file to write")->required();
  bpe_learn->callback([&] {
    trdec_bpe* bpe = nullptr;
    rc = report(trdec_bpe_learn(bl_input.c_str(), bl_merges, &bpe));
    if (rc == 0) rc = report(trdec_bpe_save(bpe, bl_out.c_str()));
    trdec_bpe_free(bpe);
  });

  // bpe-apply
  std::string ba_bpe, ba_input, ba_out;
  auto* bpe_apply = app.add_subcommand("bpe-apply", "Segment text into subwords");
  bpe_apply->add_option("--bpe", ba_bpe, "Merge file")->required();
  bpe_apply->add_option("--input", ba_input, "Text to segment")->required();
  bpe_apply->add_option("--out", ba_out, "Output file")->required();
  bpe_apply->callback([&] {
    trdec_bpe* bpe = nullptr;
    rc = report(trdec_bpe_load(ba_bpe.c_str(), &bpe));
    if (rc == 0) rc = report(trdec_bpe_apply_file(bpe, ba_input.c_str(), ba_out.c_str()));
    trdec_bpe_free(bpe);
  });

  // bpe-join
  std::string bj_input, bj_out;
  auto* bpe_join = app.add_subcommand("bpe-join", "Join subwords back into words");
  bpe_join->add_option("--input", bj_input, "Subword text")->required();
  bpe_join->add_option("--out", bj_out, "Output file")->required();
  bpe_join->callback([&] { rc = report(trdec_bpe_join_file(bj_input.c_str(), bj_out.c_str())); });

  // build-trees
  std::string bt_variant = "binary", bt_trees, bt_deps, bt_text, bt_bpe, bt_out;
  auto* build = app.add_subcommand("build-trees", "Build generation trees for the target side");
  build->add_option("--variant", bt_variant, "con, con-null, dep or binary")->capture_default_str();
  build->add_option("--trees", bt_trees, "Bracketed word-level parses (con, con-null)");
  build->add_option("--deps", bt_deps, "CoNLL dependencies (dep)");
  build->add_option("--text", bt_text, "Word-level sentences; the input of binary, a leaf check otherwise");
  build->add_option("--bpe", bt_bpe, "Merge file; whole words when omitted");
  build->add_option("--out", bt_out, "Tree file to write")->required();
  build->callback([&] {
    std::string input = bt_variant == "dep" ? bt_deps : bt_variant == "binary" ? bt_text : bt_trees;
    if (input.empty()) {
      std::cerr << "trdec: build-trees --variant " << bt_variant << " needs "
                << (bt_variant == "dep" ? "--deps" : bt_variant == "binary" ? "--text" : "--trees") << "\n";
      rc = TRDEC_ERR_INVALID_ARGUMENT;
      return;
    }
    const char* check = bt_variant == "binary" ? nullptr : opt(bt_text);
    trdec_bpe* bpe = nullptr;
    if (!bt_bpe.empty()) rc = report(trdec_bpe_load(bt_bpe.c_str(), &bpe));
    std::size_t n = 0;
    if (rc == 0) rc = report(trdec_build_trees(bt_variant.c_str(), input.c_str(), check, bpe, bt_out.c_str(), &n));
    if (rc == 0) std::cerr << "wrote " << n << " trees\n";
    trdec_bpe_free(bpe);
  });

  // grammar / derivations
  std::string gr_trees, gr_out;
  auto* grammar = app.add_subcommand("grammar", "Dump the grammar of a tree file");
  grammar->add_option("--trees", gr_trees, "Tree file")->required();
  grammar->add_option("--out", gr_out, "Output file")->required();
  grammar->callback([&] { rc = report(trdec_dump_grammar(gr_trees.c_str(), gr_out.c_str())); });

  std::string dv_trees, dv_out;
  auto* derivs = app.add_subcommand("derivations", "Dump the derivation of every tree");
  derivs->add_option("--trees", dv_trees, "Tree file")->required();
  derivs->add_option("--out", dv_out, "Output file")->required();
  derivs->callback([&] { rc = report(trdec_dump_derivations(dv_trees.c_str(), dv_out.c_str())); });

  // train
  std::string tr_config, tr_src, tr_trees, tr_tgt, tr_dev_src, tr_dev_trees, tr_out;
  std::vector<std::string> tr_set;
  auto* train = app.add_subcommand("train", "Train a model; logs step, loss and dev loss");
  train->add_option("--config", tr_config, "key = value config file");
  train->add_option("--set", tr_set, "Override a config key (key=value), repeatable");
  train->add_option("--src", tr_src, "Subword source sentences")->required();
  train->add_option("--trees", tr_trees, "Target generation trees");
  train->add_option("--tgt", tr_tgt, "Flat subword targets (seq2seq mode only)");
  train->add_option("--dev-src", tr_dev_src, "Development sources");
  train->add_option("--dev-trees", tr_dev_trees, "Development trees");
  train->add_option("--out", tr_out, "Checkpoint to write")->required();
  train->callback([&] {
    std::string overrides;
    for (const auto& s : tr_set) overrides += s + ";";
    trdec_train_args args{};
    args.config_path = opt(tr_config);
    args.overrides = opt(overrides);
    args.src_path = tr_src.c_str();
    args.trees_path = opt(tr_trees);
    args.tgt_path = opt(tr_tgt);
    args.dev_src_path = opt(tr_dev_src);
    args.dev_trees_path = opt(tr_dev_trees);
    args.out_path = tr_out.c_str();
    args.log = [](const char* line, void*) {
      std::fputs(line, stdout);
      std::fputc('\n', stdout);
      std::fflush(stdout);
    };
    rc = report(trdec_train(&args, nullptr));
  });

  // translate
  std::string tl_ckpt, tl_src, tl_out, tl_trees;
  std::size_t tl_beam = 1;
  auto* translate = app.add_subcommand("translate", "Translate subword source sentences");
  translate->add_option("--checkpoint", tl_ckpt, "Trained checkpoint")->required();
  translate->add_option("--src", tl_src, "Subword source sentences")->required();
  translate->add_option("--beam", tl_beam, "Beam size; 1 decodes greedily")->capture_default_str();
  translate->add_option("--out", tl_out, "Detokenized hypotheses")->required();
  translate->add_option("--dump-trees", tl_trees, "Also write the output trees here");
  translate->callback([&] {
    trdec_model* model = nullptr;
    rc = report(trdec_model_load(tl_ckpt.c_str(), &model));
    std::size_t truncated = 0;
    if (rc == 0)
      rc = report(trdec_translate_file(model, tl_src.c_str(), tl_beam, tl_out.c_str(), opt(tl_trees), &truncated));
    if (rc == 0 && truncated) std::cerr << "warning: " << truncated << " decodes hit a step or depth limit\n";
    trdec_model_free(model);
  });

  // evaluate
  std::string ev_hyp, ev_ref;
  auto* evaluate = app.add_subcommand("evaluate", "Corpus BLEU of detokenized hypotheses");
  evaluate->add_option("--hyp", ev_hyp, "Hypotheses")->required();
  evaluate->add_option("--ref", ev_ref, "References")->required();
  evaluate->callback([&] {
    char* text = nullptr;
    rc = report(trdec_evaluate(ev_hyp.c_str(), ev_ref.c_str(), &text));
    if (rc == 0) std::cout << text;
    trdec_string_free(text);
  });

  // analyze-length
  std::string al_hyp, al_ref, al_base, al_buckets, al_out_buckets, al_out_hist;
  auto* analyze = app.add_subcommand("analyze-length", "BLEU by reference length and length-difference histogram");
  analyze->add_option("--hyp", al_hyp, "Hypotheses")->required();
  analyze->add_option("--ref", al_ref, "References")->required();
  analyze->add_option("--baseline-hyp", al_base, "Baseline hypotheses for gain columns");
  analyze->add_option("--buckets", al_buckets, "Comma separated bucket lower bounds (default 1,11,21,31,41)");
  analyze->add_option("--out-buckets", al_out_buckets, "Bucket table file (stdout when omitted)");
  analyze->add_option("--out-hist", al_out_hist, "Histogram file (stdout when omitted)");
  analyze->callback([&] {
    char* buckets = nullptr;
    char* hist = nullptr;
    rc = report(trdec_analyze_length(al_hyp.c_str(), al_ref.c_str(), opt(al_base), opt(al_buckets), &buckets, &hist));
    if (rc == 0) {
      emit(al_out_buckets, buckets);
      if (al_out_buckets.empty() && al_out_hist.empty()) std::cout << "\n";
      emit(al_out_hist, hist);
    }
    trdec_string_free(buckets);
    trdec_string_free(hist);
  });

  CLI11_PARSE(app, argc, argv);
  return rc;
}
