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

#ifndef TRDEC_TRDEC_H_
#define TRDEC_TRDEC_H_

/*
 * C interface to the trdec tree-decoder translation toolkit.
 *
 * Every function returns a trdec_status. On failure a description of the
 * error is available from trdec_last_error() on the calling thread until
 * the next call into the library on that thread. Objects are opaque handles
 * released with their matching _free function; strings returned through
 * char** parameters are released with trdec_string_free().
 */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(TRDEC_BUILDING_LIBRARY)
#    define TRDEC_API __declspec(dllexport)
#  else
#    define TRDEC_API __declspec(dllimport)
#  endif
#else
#  define TRDEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum trdec_status {
  TRDEC_OK = 0,
  TRDEC_ERR_INVALID_ARGUMENT = 1,
  TRDEC_ERR_IO = 2,
  TRDEC_ERR_PARSE = 3,
  TRDEC_ERR_GRAMMAR = 4,
  TRDEC_ERR_DERIVATION = 5,
  TRDEC_ERR_SHAPE = 6,
  TRDEC_ERR_DIVERGED = 7,
  TRDEC_ERR_TRUNCATED = 8,
  TRDEC_ERR_INTERNAL = 9
} trdec_status;

TRDEC_API const char* trdec_version(void);
TRDEC_API const char* trdec_status_string(trdec_status status);
TRDEC_API const char* trdec_last_error(void);
TRDEC_API void trdec_string_free(char* s);

/* ---- Subword segmentation ---------------------------------------------- */

typedef struct trdec_bpe trdec_bpe;

/* Learns up to num_merges merges from a whitespace-tokenized text file. */
TRDEC_API trdec_status trdec_bpe_learn(const char* corpus_path, size_t num_merges, trdec_bpe** out);
TRDEC_API trdec_status trdec_bpe_load(const char* path, trdec_bpe** out);
TRDEC_API trdec_status trdec_bpe_save(const trdec_bpe* bpe, const char* path);
/* Segments a single line; the result is space separated. */
TRDEC_API trdec_status trdec_bpe_apply(const trdec_bpe* bpe, const char* line, char** out);
TRDEC_API trdec_status trdec_bpe_apply_file(const trdec_bpe* bpe, const char* in_path, const char* out_path);
/* Joins subwords back into words, one line at a time. */
TRDEC_API trdec_status trdec_bpe_join_file(const char* in_path, const char* out_path);
TRDEC_API void trdec_bpe_free(trdec_bpe* bpe);

/* ---- Trees --------------------------------------------------------------- */

/*
 * Builds generation trees of the given variant ("con", "con-null", "dep",
 * "binary"). input_path holds bracketed parses for con / con-null, CoNLL
 * dependencies for dep and plain sentences for binary. text_path, when not
 * NULL, holds the word-level sentences that the tree leaves must match. A
 * NULL bpe keeps whole words. The number of trees written is stored in
 * *count when count is not NULL.
 */
TRDEC_API trdec_status trdec_build_trees(const char* variant, const char* input_path, const char* text_path,
                                         const trdec_bpe* bpe, const char* out_path, size_t* count);

/* Writes the grammar extracted from a tree file. */
TRDEC_API trdec_status trdec_dump_grammar(const char* trees_path, const char* out_path);
/* Writes the derivation of every tree, blank-line separated. */
TRDEC_API trdec_status trdec_dump_derivations(const char* trees_path, const char* out_path);

/* ---- Models ---------------------------------------------------------------- */

typedef struct trdec_model trdec_model;

/* Receives one log line (no trailing newline) at a time. */
typedef void (*trdec_log_fn)(const char* line, void* user);

typedef struct trdec_train_args {
  const char* config_path;  /* key = value file, may be NULL */
  const char* overrides;    /* "key=value" pairs separated by ';', may be NULL */
  const char* src_path;     /* subword source sentences */
  const char* trees_path;   /* generation trees, one per line */
  const char* tgt_path;     /* flat subword targets; alternative to trees_path in seq2seq mode */
  const char* dev_src_path; /* may be NULL */
  const char* dev_trees_path;
  const char* out_path;     /* checkpoint */
  trdec_log_fn log;         /* may be NULL */
  void* log_user;
} trdec_train_args;

TRDEC_API trdec_status trdec_train(const trdec_train_args* args, trdec_model** out);
TRDEC_API trdec_status trdec_model_load(const char* checkpoint_path, trdec_model** out);
TRDEC_API trdec_status trdec_model_save(const trdec_model* model, const char* checkpoint_path);
TRDEC_API void trdec_model_free(trdec_model* model);

/*
 * Translates one line of subword source tokens. *sentence receives the
 * detokenized output; *tree (when tree is not NULL) the bracketed tree of
 * the tree decoder or of a well-formed linearized output, else "". A
 * truncated decode still fills both with the partial result and returns
 * TRDEC_ERR_TRUNCATED.
 */
TRDEC_API trdec_status trdec_translate(const trdec_model* model, const char* src_line, size_t beam,
                                       char** sentence, char** tree);

/*
 * Translates a file line by line. Truncated decodes are written with their
 * partial output and counted in *truncated (when not NULL) instead of
 * failing the call. trees_path may be NULL.
 */
TRDEC_API trdec_status trdec_translate_file(const trdec_model* model, const char* src_path, size_t beam,
                                            const char* out_path, const char* trees_path, size_t* truncated);

/* ---- Evaluation ------------------------------------------------------------ */

/* Corpus BLEU as "key\tvalue" lines. */
TRDEC_API trdec_status trdec_evaluate(const char* hyp_path, const char* ref_path, char** report);

/*
 * Length analysis tables. *buckets receives "bucket\tsentences\tbleu" rows,
 * with baseline BLEU and gain columns when baseline_path is not NULL;
 * *histogram receives "diff\tcount" rows. bucket_edges is a comma separated
 * list of lower bounds or NULL for the defaults.
 */
TRDEC_API trdec_status trdec_analyze_length(const char* hyp_path, const char* ref_path, const char* baseline_path,
                                            const char* bucket_edges, char** buckets, char** histogram);

#ifdef __cplusplus
}
#endif

#endif /* TRDEC_TRDEC_H_ */
