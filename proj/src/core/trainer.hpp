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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "core/model.hpp"

namespace trdec {

/// Source sentences (subwords) paired with generation trees.
struct TrainingSet {
  std::vector<Sentence> sources;
  std::vector<Tree> targets;
};

/// Pairs sources with trees. A tree list twice as long as the source list
/// (the two binary versions of every sentence) repeats each source.
TrainingSet pair_targets(const std::vector<Sentence>& sources, const std::vector<Tree>& trees);

struct Vocabularies {
  Vocab src;
  Vocab tgt;
  Grammar grammar;  // empty outside the tree decoder
};

/// Vocabularies sized by the config, plus the grammar of the training trees
/// when the mode needs one.
Vocabularies build_vocabularies(const ModelConfig& cfg, const TrainingSet& data);

/// Converts pairs to id space. Pairs whose tree needs a rule missing from
/// the model's grammar are skipped and counted when `skipped` is given, and
/// are an error otherwise.
template <typename T>
std::vector<Example> make_examples(const TrdecModel<T>& model, const TrainingSet& data,
                                   std::size_t* skipped = nullptr);

struct EvalResult {
  double loss = 0;      // mean per sentence
  double accuracy = 0;  // teacher-forced per-step argmax accuracy
  std::size_t steps = 0;
};

template <typename T>
EvalResult evaluate(const TrdecModel<T>& model, const std::vector<Example>& data);

struct LogEntry {
  std::size_t step = 0;
  double loss = 0;  // mean per sentence since the previous entry
  std::optional<double> dev_loss;
};

/// "step\tloss\tdev_loss", with "-" for a missing dev loss.
std::string format_log(const LogEntry& e);

template <typename T>
class Trainer {
 public:
  Trainer(TrdecModel<T>& model, const TrainConfig& cfg);

  /// One optimizer update over the batch; returns the mean sentence loss.
  double update(const std::vector<const Example*>& batch);

  /// Epochs of shuffled minibatch updates, logging every cfg.log_every
  /// updates and after the last one.
  std::vector<LogEntry> fit(const std::vector<Example>& train, const std::vector<Example>& dev,
                            const std::function<void(const LogEntry&)>& on_log = nullptr);

  std::size_t updates() const { return updates_; }

 private:
  TrdecModel<T>& model_;
  TrainConfig cfg_;
  std::unique_ptr<ad::Optimizer<T>> opt_;
  std::size_t updates_ = 0;
};

}  // namespace trdec
