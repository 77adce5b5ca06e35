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
#include <string>
#include <string_view>

#include "core/tree_builders.hpp"

namespace trdec {

enum class ModelMode { TrDec, Seq2Seq, Lin };
enum class WordInitScope { Sentence, Phrase };
enum class Precision { F32, F64 };

struct ModelConfig {
  ModelMode mode = ModelMode::TrDec;
  std::size_t hidden = 256;  // per encoder direction and per decoder RNN
  std::size_t embed = 256;
  std::size_t src_vocab = 30000;
  std::size_t tgt_vocab = 30000;
  WordInitScope word_rnn_init = WordInitScope::Sentence;
  double max_steps_factor = 8.0;  // decode step budget per source token
  std::size_t max_depth = 64;
  std::uint64_t seed = 1;
  double init_scale = 0.1;
  // Backward encoder direction reuses the forward weights.
  bool tie_encoder = false;
};

struct TrainConfig {
  std::string optimizer = "adam";  // adam | sgd
  double lr = 1e-3;
  std::size_t epochs = 10;
  std::size_t max_updates = 0;  // 0 = no cap
  std::size_t batch_size = 1;
  double clip_norm = 5.0;       // 0 disables clipping
  std::size_t log_every = 100;  // updates between log lines
  std::uint64_t seed = 1;       // shuffling
  Precision precision = Precision::F32;
  TreeVariant variant = TreeVariant::BinaryConcat;
};

struct Config {
  ModelConfig model;
  TrainConfig train;

  /// "key = value" lines; '#' starts a comment. Unknown keys are an error.
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);
  std::string serialize() const;

  /// Applies a single key/value pair.
  void set(const std::string& key, const std::string& value);
};

std::string_view mode_name(ModelMode m);
ModelMode parse_mode(std::string_view name);

}  // namespace trdec
