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

#include "core/trainer.hpp"

#include <cstdio>
#include <numeric>

#include "core/rng.hpp"

namespace trdec {

TrainingSet pair_targets(const std::vector<Sentence>& sources, const std::vector<Tree>& trees) {
  TrainingSet out;
  if (trees.size() == sources.size()) {
    out.sources = sources;
    out.targets = trees;
  } else if (trees.size() == 2 * sources.size()) {
    for (std::size_t i = 0; i < sources.size(); ++i) {
      out.sources.push_back(sources[i]);
      out.sources.push_back(sources[i]);
    }
    out.targets = trees;
  } else {
    fail(ErrorCode::Parse, std::to_string(sources.size()) + " source sentences but " +
                               std::to_string(trees.size()) + " trees");
  }
  return out;
}

Vocabularies build_vocabularies(const ModelConfig& cfg, const TrainingSet& data) {
  Vocabularies v;
  v.src = build_vocab(data.sources, cfg.src_vocab);
  std::vector<Sentence> tgt;
  for (const auto& t : data.targets) tgt.push_back(cfg.mode == ModelMode::Lin ? linearize(t) : t.leaves());
  v.tgt = build_vocab(tgt, cfg.tgt_vocab);
  if (cfg.mode == ModelMode::TrDec) v.grammar = extract_grammar(data.targets);
  return v;
}

template <typename T>
std::vector<Example> make_examples(const TrdecModel<T>& model, const TrainingSet& data, std::size_t* skipped) {
  if (data.sources.size() != data.targets.size())
    fail(ErrorCode::InvalidArgument, "sources and targets differ in count");
  std::vector<Example> out;
  if (skipped) *skipped = 0;
  for (std::size_t i = 0; i < data.sources.size(); ++i) {
    try {
      out.push_back(model.make_example(data.sources[i], data.targets[i]));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Grammar || !skipped) throw;
      ++*skipped;
    }
  }
  return out;
}

template <typename T>
EvalResult evaluate(const TrdecModel<T>& model, const std::vector<Example>& data) {
  EvalResult r;
  std::size_t correct = 0;
  for (const auto& ex : data) {
    ad::Graph<T> g(false);
    auto l = model.loss(g, ex);
    r.loss += static_cast<double>(l.value.value().item());
    r.steps += l.steps;
    correct += l.correct;
  }
  if (!data.empty()) r.loss /= static_cast<double>(data.size());
  if (r.steps) r.accuracy = static_cast<double>(correct) / static_cast<double>(r.steps);
  return r;
}

std::string format_log(const LogEntry& e) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t", e.step, e.loss);
  std::string out = buf;
  if (e.dev_loss) {
    std::snprintf(buf, sizeof(buf), "%.6f", *e.dev_loss);
    out += buf;
  } else {
    out += "-";
  }
  return out;
}

template <typename T>
Trainer<T>::Trainer(TrdecModel<T>& model, const TrainConfig& cfg) : model_(model), cfg_(cfg) {
  if (cfg.optimizer == "sgd")
    opt_ = std::make_unique<ad::Sgd<T>>(cfg.lr);
  else
    opt_ = std::make_unique<ad::Adam<T>>(cfg.lr);
}

template <typename T>
double Trainer<T>::update(const std::vector<const Example*>& batch) {
  double total = 0;
  for (const Example* ex : batch) {
    ad::Graph<T> g;
    auto l = model_.loss(g, *ex);
    total += static_cast<double>(l.value.value().item());
    g.backward(l.value);
  }
  if (cfg_.clip_norm > 0) ad::clip_grad_norm(model_.params(), cfg_.clip_norm);
  opt_->step(model_.params());
  ++updates_;
  return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

template <typename T>
std::vector<LogEntry> Trainer<T>::fit(const std::vector<Example>& train, const std::vector<Example>& dev,
                                      const std::function<void(const LogEntry&)>& on_log) {
  std::vector<LogEntry> log;
  if (train.empty()) fail(ErrorCode::InvalidArgument, "no training examples");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double window = 0;
  std::size_t window_n = 0;
  auto emit = [&] {
    LogEntry e{updates_, window / static_cast<double>(window_n), std::nullopt};
    if (!dev.empty()) e.dev_loss = evaluate(model_, dev).loss;
    log.push_back(e);
    if (on_log) on_log(e);
    window = 0;
    window_n = 0;
  };
  auto capped = [&] { return cfg_.max_updates > 0 && updates_ >= cfg_.max_updates; };
  for (std::size_t epoch = 0; epoch < cfg_.epochs && !capped(); ++epoch) {
    Rng rng = Rng::stream(cfg_.seed, "shuffle/" + std::to_string(epoch));
    rng.shuffle(order);
    for (std::size_t b = 0; b < order.size() && !capped(); b += cfg_.batch_size) {
      std::vector<const Example*> batch;
      for (std::size_t k = b; k < std::min(order.size(), b + cfg_.batch_size); ++k) batch.push_back(&train[order[k]]);
      window += update(batch);
      ++window_n;
      if (updates_ % cfg_.log_every == 0) emit();
    }
  }
  if (window_n > 0) emit();
  return log;
}

template std::vector<Example> make_examples(const TrdecModel<float>&, const TrainingSet&, std::size_t*);
template std::vector<Example> make_examples(const TrdecModel<double>&, const TrainingSet&, std::size_t*);
template EvalResult evaluate(const TrdecModel<float>&, const std::vector<Example>&);
template EvalResult evaluate(const TrdecModel<double>&, const std::vector<Example>&);
template class Trainer<float>;
template class Trainer<double>;

}  // namespace trdec
