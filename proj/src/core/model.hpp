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

// The tree decoder (rule RNN + word RNN over a top-down derivation) and the
// flat sequence baselines, sharing one encoder, attention and training path.

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "core/config.hpp"
#include "core/error.hpp"
#include "core/grammar.hpp"
#include "core/nn.hpp"
#include "core/tensor.hpp"

namespace trdec {

/// Decoding ran out of steps or depth. Carries what was built so far.
class TruncatedError : public Error {
 public:
  TruncatedError(const std::string& what, Tree partial, Sentence words)
      : Error(ErrorCode::Truncated, what), partial_(std::move(partial)), words_(std::move(words)) {}
  const Tree& partial() const { return partial_; }
  const Sentence& words() const { return words_; }

 private:
  Tree partial_;
  Sentence words_;
};

/// One training pair in id space. `deriv` is used by the tree decoder,
/// `flat` (ending in <eos>) by the sequence modes.
struct Example {
  std::vector<TokenId> src;
  Derivation deriv;
  std::vector<TokenId> flat;
};

struct DecodeResult {
  Tree tree;             // empty when a flat output does not form a tree
  Sentence words;        // subword leaves in order
  Derivation deriv;      // tree decoder only
  std::vector<TokenId> tokens;  // sequence modes only, without <eos>
  double logp = 0;
  std::size_t word_steps = 0;
  double score() const { return logp / static_cast<double>(word_steps == 0 ? 1 : word_steps); }
};

/// Seen by a decode observer before each decision.
struct StepProbe {
  StepKind kind;
  std::vector<double> probs;  // exp of the (masked) log-probabilities
  const ad::Mask* mask;
};
using StepObserver = std::function<void(const StepProbe&)>;

template <typename T>
struct DecoderState {
  ExpansionState expansion;
  nn::LstmState<T> rule;
  nn::LstmState<T> word;
  ad::Var<T> last_word_h;  // word RNN h of the latest word step, zero before any
  ad::Var<T> ctx;          // attention context fed into the next step
  std::vector<ad::Var<T>> step_states;  // rule RNN h after each step; [0] is initial
  StepKind prev_kind = StepKind::Rule;
  std::int32_t prev_id = -1;  // -1 before the first decision
  TokenId prev_word = Vocab::kSos;
  bool phrase_start = true;
  std::optional<StepKind> pending;  // kind of the step computed but not applied

  // Sequence modes.
  std::vector<TokenId> emitted;
  bool done = false;

  std::uint32_t steps() const;
  bool finished() const;
};

template <typename T>
class TrdecModel {
 public:
  TrdecModel(const ModelConfig& cfg, Vocab src, Vocab tgt, Grammar grammar);
  TrdecModel(const TrdecModel&) = delete;
  TrdecModel& operator=(const TrdecModel&) = delete;
  TrdecModel(TrdecModel&&) = default;
  TrdecModel& operator=(TrdecModel&&) = default;

  const ModelConfig& config() const { return cfg_; }
  ModelMode mode() const { return cfg_.mode; }
  const Vocab& src_vocab() const { return src_; }
  const Vocab& tgt_vocab() const { return tgt_; }
  const Grammar& grammar() const { return grammar_; }
  ad::ParameterStore<T>& params() { return params_; }
  const ad::ParameterStore<T>& params() const { return params_; }

  struct Context {
    nn::EncoderOutput<T> enc;
    typename nn::Attention<T>::Keys keys;
    std::size_t src_len = 0;
  };
  Context encode(ad::Graph<T>& g, const std::vector<TokenId>& src) const;
  DecoderState<T> initial_state(ad::Graph<T>& g, const Context& c) const;

  /// Advances the rule RNN and returns masked log-probabilities over rule
  /// ids. The open symbol must not be "pre".
  ad::Var<T> rule_step(ad::Graph<T>& g, const Context& c, DecoderState<T>& s) const;
  /// Advances both RNNs (the word RNN alone in the sequence modes) and
  /// returns log-probabilities over the target vocabulary.
  ad::Var<T> word_step(ad::Graph<T>& g, const Context& c, DecoderState<T>& s) const;
  /// Commit the decision for the step just computed.
  Step apply_rule(DecoderState<T>& s, RuleId rule) const;
  Step apply_word(DecoderState<T>& s, TokenId word) const;

  const ad::Mask& rule_mask(const DecoderState<T>& s) const;
  const ad::Mask& word_mask() const { return word_mask_; }

  /// Teacher-forced sum of per-step cross-entropies.
  struct Loss {
    ad::Var<T> value;
    std::size_t steps = 0;
    std::size_t correct = 0;  // argmax equals the gold decision
  };
  Loss loss(ad::Graph<T>& g, const Example& ex) const;

  /// Converts a subword source and a generation tree into ids for this mode.
  Example make_example(const Sentence& src, const Tree& target) const;
  std::vector<TokenId> encode_source(const Sentence& src) const { return src_.encode(src); }

  std::size_t step_limit(std::size_t src_len) const;

  DecodeResult greedy(const std::vector<TokenId>& src, const StepObserver& observe = nullptr) const;
  /// n-best list ordered by log-probability per word step, best first.
  std::vector<DecodeResult> beam(const std::vector<TokenId>& src, std::size_t beam_size) const;

  void save(const std::filesystem::path& path) const;
  static TrdecModel load(const std::filesystem::path& path);

 private:
  void build();
  ad::Var<T> prev_embedding(ad::Graph<T>& g, const DecoderState<T>& s) const;
  ad::Var<T> parent_state(const DecoderState<T>& s) const;
  bool is_done(const DecoderState<T>& s) const;
  DecodeResult finish(const DecoderState<T>& s, Derivation deriv, double logp) const;
  [[noreturn]] void truncated(const std::string& why, const Derivation& deriv,
                              const DecoderState<T>& s) const;

  ModelConfig cfg_;
  Vocab src_, tgt_;
  Grammar grammar_;
  ad::ParameterStore<T> params_;
  ad::Mask word_mask_;

  nn::BiLstmEncoder<T> encoder_;
  nn::Attention<T> attention_;
  nn::LstmCell<T> rule_rnn_, word_rnn_;
  ad::Parameter<T>* rule_embed_ = nullptr;  // grammar rows plus a start row
  ad::Parameter<T>* word_embed_ = nullptr;
  ad::Parameter<T>* rule_out_ = nullptr;
  ad::Parameter<T>* word_out_ = nullptr;
};

/// Element type of the parameters stored in a checkpoint.
Precision checkpoint_precision(const std::filesystem::path& path);

}  // namespace trdec
