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

// Dense tensors with a reverse-mode tape.
//
// A Graph records every operation applied to its Vars in creation order, which
// is a topological order, so backward() walks the nodes once from the loss
// down. Graphs are cheap, single-threaded and meant to live for one training
// example or one decode call. Parameters outlive graphs and accumulate
// gradients across backward() calls until zero_grad().
//
// Everything is templated on the element type; float and double are
// instantiated.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trdec::ad {

using Shape = std::vector<std::size_t>;
using Mask = std::vector<std::uint8_t>;

std::string shape_string(const Shape& s);
std::size_t shape_size(const Shape& s);

template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }
  static Tensor vector(std::vector<T> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  T at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
  T item() const;

  void fill(T v);
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

enum class DType : std::uint8_t { F32 = 1, F64 = 2, U8 = 3 };

/// One checkpoint record: a named, typed n-d array stored as raw bytes.
struct Record {
  std::string name;
  DType dtype = DType::F32;
  Shape dims;
  std::vector<std::uint8_t> bytes;  // little-endian
};

/// Magic "TRDECCKP", u32 version, then records until end of file, each
/// (u32 name length, name, u8 dtype, u32 rank, u64 dims..., raw buffer).
void write_records(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::filesystem::path& path);

Record text_record(const std::string& name, const std::string& text);
std::string record_text(const Record& r);

/// Named parameters in insertion order. Addresses are stable.
template <typename T>
class ParameterStore {
 public:
  /// Adds a parameter initialized uniformly in [-scale, scale] from the named
  /// stream (seed, name).
  Parameter<T>& add(const std::string& name, Shape shape, std::uint64_t seed, double scale = 0.1);
  Parameter<T>& get(const std::string& name);
  const Parameter<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }
  std::size_t num_scalars() const;

  void zero_grad();

  std::vector<Record> to_records() const;
  /// Loads values by name, converting precision; every parameter must be
  /// present with a matching shape.
  void load_records(const std::vector<Record>& records);

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <typename T>
class Graph;

/// Handle to a value recorded on a Graph.
template <typename T>
struct Var {
  Graph<T>* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor<T>& value() const;
  const Tensor<T>& grad() const;
  const Shape& shape() const { return value().shape(); }
};

template <typename T>
class Graph {
 public:
  /// With record = false no backward closures or gradients are kept, which
  /// is what decoding wants.
  explicit Graph(bool record = true) : record_(record) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }

  Var<T> input(Tensor<T> value);
  /// Leaf tied to a parameter; repeated calls reuse one node.
  Var<T> param(Parameter<T>& p);

  const Tensor<T>& value(std::uint32_t id) const { return nodes_[id].value; }
  /// Gradient of the last backward() target; zeros for unreached nodes.
  const Tensor<T>& grad(std::uint32_t id) const;
  std::size_t size() const { return nodes_.size(); }

  /// Accumulates d(loss)/d(node) into every reachable node and parameter.
  /// The loss must hold exactly one element.
  void backward(Var<T> loss);

  // Used by the ops.
  using Backward = std::function<void(Graph&, const Tensor<T>& grad_out)>;
  Var<T> record(Tensor<T> value, Backward backward);
  Tensor<T>& grad_ref(std::uint32_t id);

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    Backward backward;
  };
  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::uint32_t> param_nodes_;
};

// ---------------------------------------------------------------------------
// Operations. Shape errors throw trdec::Error(ErrorCode::Shape) naming the op.

template <typename T> Var<T> add(Var<T> a, Var<T> b);
template <typename T> Var<T> sub(Var<T> a, Var<T> b);
template <typename T> Var<T> mul(Var<T> a, Var<T> b);  // elementwise
template <typename T> Var<T> scale(Var<T> a, T s);
template <typename T> Var<T> sum(const std::vector<Var<T>>& xs);  // elementwise n-ary
template <typename T> Var<T> sum_all(Var<T> a);                   // to a scalar

/// {m,k}x{k} -> {m}; {m,k}x{k,n} -> {m,n}.
template <typename T> Var<T> matmul(Var<T> a, Var<T> b);
template <typename T> Var<T> transpose(Var<T> a);

/// Rank-1 operations.
template <typename T> Var<T> concat(const std::vector<Var<T>>& xs);
template <typename T> Var<T> slice(Var<T> a, std::size_t start, std::size_t len);
/// n rank-1 tensors of length d -> {n, d}.
template <typename T> Var<T> stack_rows(const std::vector<Var<T>>& xs);

template <typename T> Var<T> tanh(Var<T> a);
template <typename T> Var<T> sigmoid(Var<T> a);

/// Softmax over entries whose mask byte is non-zero; masked entries get
/// probability exactly 0 and receive no gradient. An all-zero mask throws.
template <typename T> Var<T> softmax_masked(Var<T> logits, const Mask& mask);
template <typename T> Var<T> softmax(Var<T> logits);
/// Log-probabilities under the same masking; masked entries are -inf.
template <typename T> Var<T> log_softmax_masked(Var<T> logits, const Mask& mask);

template <typename T> Var<T> pick(Var<T> a, std::size_t index);
/// -log_probs[target]; throws if the target is masked out.
template <typename T> Var<T> cross_entropy(Var<T> log_probs, std::size_t target);

/// Row `index` of a {V, d} table as a {d} vector. Backward writes straight
/// into the table's gradient row.
template <typename T> Var<T> lookup(Graph<T>& g, Parameter<T>& table, std::size_t index);

template <typename T> Var<T> operator+(Var<T> a, Var<T> b) { return add(a, b); }
template <typename T> Var<T> operator-(Var<T> a, Var<T> b) { return sub(a, b); }
template <typename T> Var<T> operator*(Var<T> a, Var<T> b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Optimizers. Both reject non-finite gradients with ErrorCode::Diverged before
// touching any parameter, and leave gradients zeroed after a step.

template <typename T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(ParameterStore<T>& params) = 0;
};

template <typename T>
class Sgd final : public Optimizer<T> {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(ParameterStore<T>& params) override;

 private:
  double lr_;
};

template <typename T>
class Adam final : public Optimizer<T> {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ParameterStore<T>& params) override;

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

/// Global L2 norm of all gradients.
template <typename T> double grad_norm(const ParameterStore<T>& params);
/// Rescales gradients so their global norm is at most max_norm; returns the
/// norm before clipping.
template <typename T> double clip_grad_norm(ParameterStore<T>& params, double max_norm);

}  // namespace trdec::ad
