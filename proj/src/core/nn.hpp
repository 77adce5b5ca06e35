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

// Recurrent and attention layers over the autodiff tape. Layers only hold
// pointers into a ParameterStore; all per-sentence values live on a Graph.

#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace trdec::nn {

using ad::Graph;
using ad::Parameter;
using ad::ParameterStore;
using ad::Var;

template <typename T>
struct LstmState {
  Var<T> h;
  Var<T> c;
};

/// Single-layer LSTM cell. Gate blocks in w_ih, w_hh and b are stacked in the
/// order input, forget, cell, output; the forget bias starts at 1.
template <typename T>
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterStore<T>& store, const std::string& prefix, std::size_t input,
           std::size_t hidden, std::uint64_t seed, double scale);

  std::size_t input_size() const { return input_; }
  std::size_t hidden_size() const { return hidden_; }

  LstmState<T> step(Graph<T>& g, Var<T> x, const LstmState<T>& s) const;
  LstmState<T> zero_state(Graph<T>& g) const;

 private:
  std::size_t input_ = 0, hidden_ = 0;
  Parameter<T>* w_ih_ = nullptr;
  Parameter<T>* w_hh_ = nullptr;
  Parameter<T>* b_ = nullptr;
};

template <typename T>
struct EncoderOutput {
  std::vector<Var<T>> states;  // per token, forward then backward half
  Var<T> memory;               // states stacked as {n, 2H}
  Var<T> final_state;          // tanh(W [fwd_last; bwd_first] + b), size H
};

template <typename T>
class BiLstmEncoder {
 public:
  BiLstmEncoder() = default;
  BiLstmEncoder(ParameterStore<T>& store, std::size_t vocab, std::size_t embed, std::size_t hidden,
                std::uint64_t seed, double scale, bool tied);

  /// Throws ErrorCode::InvalidArgument on an empty sentence.
  EncoderOutput<T> encode(Graph<T>& g, const std::vector<std::int32_t>& ids) const;

  std::size_t hidden_size() const { return fwd_.hidden_size(); }

 private:
  Parameter<T>* embed_ = nullptr;
  LstmCell<T> fwd_, bwd_;
  Parameter<T>* bridge_w_ = nullptr;
  Parameter<T>* bridge_b_ = nullptr;
};

template <typename T>
struct AttentionResult {
  Var<T> context;
  Var<T> weights;
};

/// Bilinear attention: score_i = q^T W m_i.
template <typename T>
class Attention {
 public:
  Attention() = default;
  Attention(ParameterStore<T>& store, const std::string& prefix, std::size_t query,
            std::size_t memory, std::uint64_t seed, double scale);

  /// Per-sentence precomputation of W m_i for every memory row.
  struct Keys {
    Var<T> keys;      // {n, query}
    Var<T> memory_t;  // {2H, n}
  };
  Keys prepare(Graph<T>& g, Var<T> memory) const;
  AttentionResult<T> attend(Graph<T>& g, Var<T> query, const Keys& keys) const;

 private:
  Parameter<T>* w_ = nullptr;  // {query, memory}
};

}  // namespace trdec::nn
