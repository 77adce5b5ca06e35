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

#include "core/nn.hpp"

#include "core/error.hpp"

namespace trdec::nn {

template <typename T>
LstmCell<T>::LstmCell(ParameterStore<T>& store, const std::string& prefix, std::size_t input,
                      std::size_t hidden, std::uint64_t seed, double scale)
    : input_(input), hidden_(hidden) {
  w_ih_ = &store.add(prefix + ".w_ih", {4 * hidden, input}, seed, scale);
  w_hh_ = &store.add(prefix + ".w_hh", {4 * hidden, hidden}, seed, scale);
  b_ = &store.add(prefix + ".b", {4 * hidden}, seed, scale);
  for (std::size_t i = 0; i < hidden; ++i) {
    b_->value[i] = T(0);
    b_->value[hidden + i] = T(1);
    b_->value[2 * hidden + i] = T(0);
    b_->value[3 * hidden + i] = T(0);
  }
}

template <typename T>
LstmState<T> LstmCell<T>::zero_state(Graph<T>& g) const {
  return {g.input(ad::Tensor<T>({hidden_})), g.input(ad::Tensor<T>({hidden_}))};
}

template <typename T>
LstmState<T> LstmCell<T>::step(Graph<T>& g, Var<T> x, const LstmState<T>& s) const {
  if (x.shape() != ad::Shape{input_})
    fail(ErrorCode::Shape, "lstm_step: input " + ad::shape_string(x.shape()) + ", cell expects [" +
                               std::to_string(input_) + "]");
  if (s.h.shape() != ad::Shape{hidden_} || s.c.shape() != ad::Shape{hidden_})
    fail(ErrorCode::Shape, "lstm_step: state " + ad::shape_string(s.h.shape()) + ", cell expects [" +
                               std::to_string(hidden_) + "]");
  Var<T> z = ad::sum<T>({ad::matmul(g.param(*w_ih_), x), ad::matmul(g.param(*w_hh_), s.h), g.param(*b_)});
  const std::size_t h = hidden_;
  Var<T> i = ad::sigmoid(ad::slice(z, 0, h));
  Var<T> f = ad::sigmoid(ad::slice(z, h, h));
  Var<T> u = ad::tanh(ad::slice(z, 2 * h, h));
  Var<T> o = ad::sigmoid(ad::slice(z, 3 * h, h));
  Var<T> c = f * s.c + i * u;
  return {o * ad::tanh(c), c};
}

template <typename T>
BiLstmEncoder<T>::BiLstmEncoder(ParameterStore<T>& store, std::size_t vocab, std::size_t embed,
                                std::size_t hidden, std::uint64_t seed, double scale, bool tied) {
  embed_ = &store.add("encoder.embed", {vocab, embed}, seed, scale);
  fwd_ = LstmCell<T>(store, "encoder.fwd", embed, hidden, seed, scale);
  bwd_ = tied ? fwd_ : LstmCell<T>(store, "encoder.bwd", embed, hidden, seed, scale);
  bridge_w_ = &store.add("encoder.bridge.w", {hidden, 2 * hidden}, seed, scale);
  bridge_b_ = &store.add("encoder.bridge.b", {hidden}, seed, scale);
}

template <typename T>
EncoderOutput<T> BiLstmEncoder<T>::encode(Graph<T>& g, const std::vector<std::int32_t>& ids) const {
  if (ids.empty()) fail(ErrorCode::InvalidArgument, "encode: empty source sentence");
  const std::size_t n = ids.size();
  std::vector<Var<T>> x;
  x.reserve(n);
  for (auto id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= embed_->value.rows())
      fail(ErrorCode::InvalidArgument, "encode: token id " + std::to_string(id) + " outside the source vocabulary");
    x.push_back(ad::lookup(g, *embed_, static_cast<std::size_t>(id)));
  }
  std::vector<Var<T>> fh(n), bh(n);
  auto s = fwd_.zero_state(g);
  for (std::size_t i = 0; i < n; ++i) {
    s = fwd_.step(g, x[i], s);
    fh[i] = s.h;
  }
  s = bwd_.zero_state(g);
  for (std::size_t i = n; i-- > 0;) {
    s = bwd_.step(g, x[i], s);
    bh[i] = s.h;
  }
  EncoderOutput<T> out;
  for (std::size_t i = 0; i < n; ++i) out.states.push_back(ad::concat<T>({fh[i], bh[i]}));
  out.memory = ad::stack_rows(out.states);
  Var<T> last = ad::concat<T>({fh[n - 1], bh[0]});
  out.final_state = ad::tanh(ad::matmul(g.param(*bridge_w_), last) + g.param(*bridge_b_));
  return out;
}

template <typename T>
Attention<T>::Attention(ParameterStore<T>& store, const std::string& prefix, std::size_t query,
                        std::size_t memory, std::uint64_t seed, double scale) {
  w_ = &store.add(prefix + ".w", {query, memory}, seed, scale);
}

template <typename T>
typename Attention<T>::Keys Attention<T>::prepare(Graph<T>& g, Var<T> memory) const {
  return {ad::matmul(memory, ad::transpose(g.param(*w_))), ad::transpose(memory)};
}

template <typename T>
AttentionResult<T> Attention<T>::attend(Graph<T>&, Var<T> query, const Keys& k) const {
  Var<T> weights = ad::softmax(ad::matmul(k.keys, query));
  return {ad::matmul(k.memory_t, weights), weights};
}

template class LstmCell<float>;
template class LstmCell<double>;
template class BiLstmEncoder<float>;
template class BiLstmEncoder<double>;
template class Attention<float>;
template class Attention<double>;

}  // namespace trdec::nn
