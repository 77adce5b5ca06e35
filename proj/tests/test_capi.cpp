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

// Exercises the shared library through its C interface only.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "trdec/trdec.h"

namespace fs = std::filesystem;

namespace {

const std::string kData = TRDEC_TEST_DATA;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("trdec_capi_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

std::string take(char* s) {
  std::string out = s ? s : "";
  trdec_string_free(s);
  return out;
}

void collect(const char* line, void* user) { static_cast<std::string*>(user)->append(line).append("\n"); }

}  // namespace

TEST_CASE("status strings and errors") {
  CHECK(std::strlen(trdec_version()) > 0);
  CHECK(std::string(trdec_status_string(TRDEC_OK)) == "ok");
  CHECK(std::string(trdec_status_string(TRDEC_ERR_TRUNCATED)).size() > 0);

  trdec_bpe* bpe = nullptr;
  CHECK(trdec_bpe_learn(nullptr, 10, &bpe) == TRDEC_ERR_INVALID_ARGUMENT);
  CHECK(std::string(trdec_last_error()).find("corpus_path") != std::string::npos);
  CHECK(trdec_bpe_learn("/nonexistent/file", 10, &bpe) == TRDEC_ERR_IO);
  CHECK(bpe == nullptr);

  TempDir tmp;
  CHECK(trdec_build_trees("forest", (kData + "/toy.parse").c_str(), nullptr, nullptr, (tmp / "x").c_str(),
                          nullptr) == TRDEC_ERR_INVALID_ARGUMENT);
  std::ofstream(tmp / "bad.parse") << "(S (NP a)\n";
  CHECK(trdec_build_trees("con", (tmp / "bad.parse").c_str(), nullptr, nullptr, (tmp / "x").c_str(), nullptr) ==
        TRDEC_ERR_PARSE);
  CHECK(std::string(trdec_last_error()).find("line 1") != std::string::npos);

  trdec_model* m = nullptr;
  std::ofstream(tmp / "junk.ckpt") << "not a checkpoint";
  CHECK(trdec_model_load((tmp / "junk.ckpt").c_str(), &m) == TRDEC_ERR_PARSE);
  CHECK(trdec_evaluate((kData + "/toy.tgt").c_str(), (kData + "/toy.src").c_str(), nullptr) ==
        TRDEC_ERR_INVALID_ARGUMENT);
}

TEST_CASE("segmentation round trip through files") {
  TempDir tmp;
  trdec_bpe* bpe = nullptr;
  REQUIRE(trdec_bpe_learn((kData + "/toy.tgt").c_str(), 30, &bpe) == TRDEC_OK);
  char* line = nullptr;
  REQUIRE(trdec_bpe_apply(bpe, "the cat sleeps .", &line) == TRDEC_OK);
  CHECK(take(line).rfind("_", 0) == 0);

  REQUIRE(trdec_bpe_save(bpe, (tmp / "merges").c_str()) == TRDEC_OK);
  trdec_bpe* again = nullptr;
  REQUIRE(trdec_bpe_load((tmp / "merges").c_str(), &again) == TRDEC_OK);
  REQUIRE(trdec_bpe_apply_file(again, (kData + "/toy.tgt").c_str(), (tmp / "tgt.bpe").c_str()) == TRDEC_OK);
  REQUIRE(trdec_bpe_join_file((tmp / "tgt.bpe").c_str(), (tmp / "tgt.joined").c_str()) == TRDEC_OK);
  CHECK(slurp(tmp / "tgt.joined") == slurp(kData + "/toy.tgt"));
  trdec_bpe_free(bpe);
  trdec_bpe_free(again);
}

TEST_CASE("trees, training, translation and scoring") {
  TempDir tmp;
  trdec_bpe* src_bpe = nullptr;
  REQUIRE(trdec_bpe_learn((kData + "/toy.src").c_str(), 0, &src_bpe) == TRDEC_OK);
  REQUIRE(trdec_bpe_apply_file(src_bpe, (kData + "/toy.src").c_str(), (tmp / "src.bpe").c_str()) == TRDEC_OK);
  trdec_bpe_free(src_bpe);

  std::size_t count = 0;
  REQUIRE(trdec_build_trees("con-null", (kData + "/toy.parse").c_str(), (kData + "/toy.tgt").c_str(), nullptr,
                            (tmp / "trees").c_str(), &count) == TRDEC_OK);
  CHECK(count == 20);
  REQUIRE(trdec_build_trees("binary", (kData + "/toy.tgt").c_str(), nullptr, nullptr, (tmp / "binary").c_str(),
                            &count) == TRDEC_OK);
  CHECK(count == 40);

  REQUIRE(trdec_dump_grammar((tmp / "trees").c_str(), (tmp / "grammar").c_str()) == TRDEC_OK);
  CHECK(slurp(tmp / "grammar").rfind("# start=ROOT eos=0\n<eos>\n", 0) == 0);
  REQUIRE(trdec_dump_derivations((tmp / "trees").c_str(), (tmp / "derivs").c_str()) == TRDEC_OK);
  CHECK(slurp(tmp / "derivs").find("1\tRULE\tROOT -> X\t0\n") != std::string::npos);

  std::string log;
  trdec_train_args args{};
  args.overrides = "hidden=16;embed=16;max_updates=40;log_every=20;precision=64;lr=0.01";
  args.src_path = (tmp / "src.bpe").c_str();
  const std::string trees = tmp / "trees", ckpt = tmp / "model.ckpt";
  args.trees_path = trees.c_str();
  args.dev_src_path = args.src_path;
  args.dev_trees_path = trees.c_str();
  args.out_path = ckpt.c_str();
  args.log = collect;
  args.log_user = &log;
  trdec_model* model = nullptr;
  REQUIRE(trdec_train(&args, &model) == TRDEC_OK);
  CHECK(log.rfind("step\tloss\tdev_loss\n", 0) == 0);
  CHECK(count_lines(log) == 3);
  CHECK(log.find("\n20\t") != std::string::npos);

  char* sentence = nullptr;
  char* tree = nullptr;
  const trdec_status st = trdec_translate(model, "_neko _wa _neru _.", 2, &sentence, &tree);
  CHECK((st == TRDEC_OK || st == TRDEC_ERR_TRUNCATED));
  std::string tree_text = take(tree);
  CHECK(tree_text.rfind("(ROOT", 0) == 0);
  take(sentence);

  trdec_model* loaded = nullptr;
  REQUIRE(trdec_model_load(ckpt.c_str(), &loaded) == TRDEC_OK);
  std::size_t truncated = 0;
  REQUIRE(trdec_translate_file(loaded, (tmp / "src.bpe").c_str(), 1, (tmp / "hyp").c_str(),
                               (tmp / "hyp.trees").c_str(), &truncated) == TRDEC_OK);
  CHECK(count_lines(slurp(tmp / "hyp")) == 20);
  CHECK(count_lines(slurp(tmp / "hyp.trees")) == 20);
  CHECK(truncated <= 20);
  REQUIRE(trdec_model_save(loaded, (tmp / "copy.ckpt").c_str()) == TRDEC_OK);
  CHECK(slurp(tmp / "copy.ckpt") == slurp(ckpt));
  trdec_model_free(loaded);
  trdec_model_free(model);

  char* report = nullptr;
  REQUIRE(trdec_evaluate((kData + "/toy.tgt").c_str(), (kData + "/toy.tgt").c_str(), &report) == TRDEC_OK);
  CHECK(take(report).rfind("bleu\t100.00\n", 0) == 0);

  char* buckets = nullptr;
  char* hist = nullptr;
  REQUIRE(trdec_analyze_length((tmp / "hyp").c_str(), (kData + "/toy.tgt").c_str(), (kData + "/toy.tgt").c_str(),
                               "1,4,6", &buckets, &hist) == TRDEC_OK);
  const std::string b = take(buckets);
  CHECK(count_lines(b) == 4);
  const std::string h = take(hist);
  CHECK(h.rfind("diff\tcount\n", 0) == 0);
}

TEST_CASE("sequence mode trains from flat targets") {
  TempDir tmp;
  trdec_train_args args{};
  args.overrides = "mode=seq2seq;hidden=8;embed=8;max_updates=5";
  const std::string src = kData + "/toy.src", tgt = kData + "/toy.tgt";
  args.src_path = src.c_str();
  args.tgt_path = tgt.c_str();
  trdec_model* model = nullptr;
  REQUIRE(trdec_train(&args, &model) == TRDEC_OK);
  char* sentence = nullptr;
  const trdec_status st = trdec_translate(model, "neko wa neru .", 1, &sentence, nullptr);
  CHECK((st == TRDEC_OK || st == TRDEC_ERR_TRUNCATED));
  take(sentence);
  trdec_model_free(model);

  args.overrides = "hidden=8;no_such_key=1";
  CHECK(trdec_train(&args, &model) == TRDEC_ERR_INVALID_ARGUMENT);
  CHECK(std::string(trdec_last_error()).find("no_such_key") != std::string::npos);
}
