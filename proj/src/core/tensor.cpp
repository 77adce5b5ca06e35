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

#include "core/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace trdec::ad {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (auto d : s) n *= d;
  return n;
}

namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  fail(ErrorCode::Shape, std::string(op) + ": " + detail);
}

void require_same(const char* op, const Shape& a, const Shape& b) {
  if (a != b) shape_error(op, "shapes differ " + shape_string(a) + " vs " + shape_string(b));
}

void require_rank(const char* op, const Shape& a, std::size_t rank) {
  if (a.size() != rank)
    shape_error(op, "expected rank " + std::to_string(rank) + ", got " + shape_string(a));
}

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
Eigen::Map<const RowMat<T>> as_mat(const Tensor<T>& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
template <typename T>
Eigen::Map<RowMat<T>> as_mat(Tensor<T>& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())};
}
template <typename T>
Eigen::Map<const Vec<T>> as_vec(const Tensor<T>& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.size())};
}
template <typename T>
Eigen::Map<Vec<T>> as_vec(Tensor<T>& t) {
  return {t.data().data(), static_cast<Eigen::Index>(t.size())};
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_))
    shape_error("Tensor", "data length " + std::to_string(data_.size()) + " does not match shape " +
                              shape_string(shape_));
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) shape_error("item", "tensor of shape " + shape_string(shape_) + " is not a scalar");
  return data_[0];
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

// ---------------------------------------------------------------------------
// Checkpoint records

namespace {

template <typename U>
void put(std::ofstream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::ifstream& in, const std::filesystem::path& path) {
  U v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(U));
  if (!in) fail(ErrorCode::Parse, path.string() + ": truncated checkpoint");
  return v;
}

constexpr char kMagic[8] = {'T', 'R', 'D', 'E', 'C', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

std::size_t dtype_bytes(DType t) {
  switch (t) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U8: return 1;
  }
  fail(ErrorCode::Parse, "unknown dtype tag");
}

}  // namespace

void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  for (const auto& r : records) {
    if (r.bytes.size() != shape_size(r.dims) * dtype_bytes(r.dtype))
      fail(ErrorCode::Internal, "record " + r.name + ": buffer does not match dims");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(r.dtype));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(r.dims.size()));
    for (auto d : r.dims) put<std::uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size()));
  }
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

std::vector<Record> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(ErrorCode::Parse, path.string() + ": not a trdec checkpoint");
  auto version = get<std::uint32_t>(in, path);
  if (version != kVersion)
    fail(ErrorCode::Parse, path.string() + ": unsupported checkpoint version " + std::to_string(version));
  std::vector<Record> records;
  while (in.peek() != std::char_traits<char>::eof()) {
    Record r;
    auto name_len = get<std::uint32_t>(in, path);
    r.name.resize(name_len);
    in.read(r.name.data(), name_len);
    auto tag = get<std::uint8_t>(in, path);
    if (tag < 1 || tag > 3) fail(ErrorCode::Parse, path.string() + ": bad dtype tag in " + r.name);
    r.dtype = static_cast<DType>(tag);
    auto rank = get<std::uint32_t>(in, path);
    for (std::uint32_t i = 0; i < rank; ++i) r.dims.push_back(get<std::uint64_t>(in, path));
    r.bytes.resize(shape_size(r.dims) * dtype_bytes(r.dtype));
    in.read(reinterpret_cast<char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size()));
    if (!in) fail(ErrorCode::Parse, path.string() + ": truncated record " + r.name);
    records.push_back(std::move(r));
  }
  return records;
}

Record text_record(const std::string& name, const std::string& text) {
  Record r{name, DType::U8, {text.size()}, {}};
  r.bytes.assign(text.begin(), text.end());
  return r;
}

std::string record_text(const Record& r) {
  if (r.dtype != DType::U8) fail(ErrorCode::Parse, "record " + r.name + " is not text");
  return std::string(r.bytes.begin(), r.bytes.end());
}

// ---------------------------------------------------------------------------
// ParameterStore

template <typename T>
Parameter<T>& ParameterStore<T>::add(const std::string& name, Shape shape, std::uint64_t seed,
                                     double scale) {
  if (contains(name)) fail(ErrorCode::InvalidArgument, "duplicate parameter " + name);
  auto p = std::make_unique<Parameter<T>>();
  p->name = name;
  p->value = Tensor<T>(shape);
  p->grad = Tensor<T>(shape);
  Rng rng = Rng::stream(seed, "init/" + name);
  for (auto& v : p->value.data()) v = static_cast<T>(rng.uniform(-scale, scale));
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

template <typename T>
Parameter<T>& ParameterStore<T>::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "no parameter named " + name);
  return *params_[it->second];
}

template <typename T>
const Parameter<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::InvalidArgument, "no parameter named " + name);
  return *params_[it->second];
}

template <typename T>
std::size_t ParameterStore<T>::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p->grad.fill(T(0));
}

template <typename T>
std::vector<Record> ParameterStore<T>::to_records() const {
  std::vector<Record> out;
  for (const auto& p : params_) {
    Record r{p->name, sizeof(T) == 4 ? DType::F32 : DType::F64, p->value.shape(), {}};
    r.bytes.resize(p->value.size() * sizeof(T));
    std::memcpy(r.bytes.data(), p->value.data().data(), r.bytes.size());
    out.push_back(std::move(r));
  }
  return out;
}

template <typename T>
void ParameterStore<T>::load_records(const std::vector<Record>& records) {
  std::unordered_map<std::string, const Record*> by_name;
  for (const auto& r : records) by_name.emplace(r.name, &r);
  for (auto& p : params_) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) fail(ErrorCode::Parse, "checkpoint lacks parameter " + p->name);
    const Record& r = *it->second;
    if (r.dims != p->value.shape())
      fail(ErrorCode::Parse, "parameter " + p->name + ": checkpoint shape " + shape_string(r.dims) +
                                 " vs model " + shape_string(p->value.shape()));
    auto out = p->value.data();
    if (r.dtype == DType::F32) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        float v;
        std::memcpy(&v, r.bytes.data() + 4 * i, 4);
        out[i] = static_cast<T>(v);
      }
    } else if (r.dtype == DType::F64) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        double v;
        std::memcpy(&v, r.bytes.data() + 8 * i, 8);
        out[i] = static_cast<T>(v);
      }
    } else {
      fail(ErrorCode::Parse, "parameter " + p->name + " stored as bytes");
    }
  }
}

// ---------------------------------------------------------------------------
// Graph

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return graph->value(id);
}

template <typename T>
const Tensor<T>& Var<T>::grad() const {
  return graph->grad(id);
}

template <typename T>
Var<T> Graph<T>::record(Tensor<T> value, Backward backward) {
  Node n;
  n.value = std::move(value);
  if (record_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Graph<T>::input(Tensor<T> value) {
  return record(std::move(value), nullptr);
}

template <typename T>
Var<T> Graph<T>::param(Parameter<T>& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var<T>{this, it->second};
  Parameter<T>* target = &p;
  Var<T> v = record(p.value, [target](Graph&, const Tensor<T>& go) {
    as_vec(target->grad) += as_vec(go);
  });
  param_nodes_.emplace(&p, v.id);
  return v;
}

template <typename T>
Tensor<T>& Graph<T>::grad_ref(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size() || n.grad.shape() != n.value.shape()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(std::uint32_t id) const {
  return const_cast<Graph*>(this)->grad_ref(id);
}

template <typename T>
void Graph<T>::backward(Var<T> loss) {
  if (!record_) fail(ErrorCode::InvalidArgument, "backward on a graph that does not record");
  if (loss.graph != this) fail(ErrorCode::InvalidArgument, "backward: loss from another graph");
  if (value(loss.id).size() != 1)
    shape_error("backward", "loss must be a scalar, got " + shape_string(value(loss.id).shape()));
  for (auto& n : nodes_) n.grad = Tensor<T>();
  grad_ref(loss.id).fill(T(1));
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() != n.value.size()) continue;
    n.backward(*this, n.grad);
  }
}

// ---------------------------------------------------------------------------
// Ops

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  require_same("add", a.shape(), b.shape());
  Tensor<T> out = a.value();
  as_vec(out) += as_vec(b.value());
  return a.graph->record(std::move(out), [a, b](Graph<T>& g, const Tensor<T>& go) {
    as_vec(g.grad_ref(a.id)) += as_vec(go);
    as_vec(g.grad_ref(b.id)) += as_vec(go);
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  require_same("sub", a.shape(), b.shape());
  Tensor<T> out = a.value();
  as_vec(out) -= as_vec(b.value());
  return a.graph->record(std::move(out), [a, b](Graph<T>& g, const Tensor<T>& go) {
    as_vec(g.grad_ref(a.id)) += as_vec(go);
    as_vec(g.grad_ref(b.id)) -= as_vec(go);
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  require_same("mul", a.shape(), b.shape());
  Tensor<T> out = a.value();
  as_vec(out).array() *= as_vec(b.value()).array();
  return a.graph->record(std::move(out), [a, b](Graph<T>& g, const Tensor<T>& go) {
    as_vec(g.grad_ref(a.id)).array() += as_vec(go).array() * as_vec(g.value(b.id)).array();
    as_vec(g.grad_ref(b.id)).array() += as_vec(go).array() * as_vec(g.value(a.id)).array();
  });
}

template <typename T>
Var<T> scale(Var<T> a, T s) {
  Tensor<T> out = a.value();
  as_vec(out) *= s;
  return a.graph->record(std::move(out), [a, s](Graph<T>& g, const Tensor<T>& go) {
    as_vec(g.grad_ref(a.id)) += s * as_vec(go);
  });
}

template <typename T>
Var<T> sum(const std::vector<Var<T>>& xs) {
  if (xs.empty()) shape_error("sum", "no operands");
  Tensor<T> out = xs[0].value();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    require_same("sum", xs[0].shape(), xs[i].shape());
    as_vec(out) += as_vec(xs[i].value());
  }
  std::vector<std::uint32_t> ids;
  for (const auto& x : xs) ids.push_back(x.id);
  return xs[0].graph->record(std::move(out), [ids](Graph<T>& g, const Tensor<T>& go) {
    for (auto id : ids) as_vec(g.grad_ref(id)) += as_vec(go);
  });
}

template <typename T>
Var<T> sum_all(Var<T> a) {
  T total = as_vec(a.value()).sum();
  return a.graph->record(Tensor<T>::scalar(total), [a](Graph<T>& g, const Tensor<T>& go) {
    as_vec(g.grad_ref(a.id)).array() += go[0];
  });
}

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  require_rank("matmul", sa, 2);
  if (sb.empty() || sb.size() > 2 || sb[0] != sa[1])
    shape_error("matmul", "cannot multiply " + shape_string(sa) + " by " + shape_string(sb));
  if (sb.size() == 1) {
    Tensor<T> out(Shape{sa[0]});
    as_vec(out).noalias() = as_mat(a.value()) * as_vec(b.value());
    return a.graph->record(std::move(out), [a, b](Graph<T>& g, const Tensor<T>& go) {
      as_mat(g.grad_ref(a.id)).noalias() += as_vec(go) * as_vec(g.value(b.id)).transpose();
      as_vec(g.grad_ref(b.id)).noalias() += as_mat(g.value(a.id)).transpose() * as_vec(go);
    });
  }
  Tensor<T> out(Shape{sa[0], sb[1]});
  as_mat(out).noalias() = as_mat(a.value()) * as_mat(b.value());
  return a.graph->record(std::move(out), [a, b](Graph<T>& g, const Tensor<T>& go) {
    as_mat(g.grad_ref(a.id)).noalias() += as_mat(go) * as_mat(g.value(b.id)).transpose();
    as_mat(g.grad_ref(b.id)).noalias() += as_mat(g.value(a.id)).transpose() * as_mat(go);
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  require_rank("transpose", a.shape(), 2);
  Tensor<T> out(Shape{a.shape()[1], a.shape()[0]});
  as_mat(out) = as_mat(a.value()).transpose();
  return a.graph->record(std::move(out), [a](Graph<T>& g, const Tensor<T>& go) {
    as_mat(g.grad_ref(a.id)) += as_mat(go).transpose();
  });
}

template <typename T>
Var<T> concat(const std::vector<Var<T>>& xs) {
  if (xs.empty()) shape_error("concat", "no operands");
  std::vector<T> data;
  std::vector<std::pair<std::uint32_t, std::size_t>> parts;  // id, length
  for (const auto& x : xs) {
    require_rank("concat", x.shape(), 1);
    const auto& v = x.value().values();
    data.insert(data.end(), v.begin(), v.end());
    parts.emplace_back(x.id, v.size());
  }
  return xs[0].graph->record(Tensor<T>::vector(std::move(data)), [parts](Graph<T>& g, const Tensor<T>& go) {
    std::size_t off = 0;
    for (auto [id, len] : parts) {
      auto& gi = g.grad_ref(id);
      for (std::size_t i = 0; i < len; ++i) gi[i] += go[off + i];
      off += len;
    }
  });
}

template <typename T>
Var<T> slice(Var<T> a, std::size_t start, std::size_t len) {
  require_rank("slice", a.shape(), 1);
  if (start + len > a.value().size())
    shape_error("slice", "range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                             ") exceeds " + shape_string(a.shape()));
  const auto& v = a.value().values();
  std::vector<T> data(v.begin() + static_cast<std::ptrdiff_t>(start),
                      v.begin() + static_cast<std::ptrdiff_t>(start + len));
  return a.graph->record(Tensor<T>::vector(std::move(data)), [a, start, len](Graph<T>& g, const Tensor<T>& go) {
    auto& ga = g.grad_ref(a.id);
    for (std::size_t i = 0; i < len; ++i) ga[start + i] += go[i];
  });
}

template <typename T>
Var<T> stack_rows(const std::vector<Var<T>>& xs) {
  if (xs.empty()) shape_error("stack_rows", "no operands");
  const std::size_t d = xs[0].value().size();
  std::vector<T> data;
  data.reserve(xs.size() * d);
  std::vector<std::uint32_t> ids;
  for (const auto& x : xs) {
    require_rank("stack_rows", x.shape(), 1);
    require_same("stack_rows", xs[0].shape(), x.shape());
    const auto& v = x.value().values();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(x.id);
  }
  Tensor<T> out(Shape{xs.size(), d}, std::move(data));
  return xs[0].graph->record(std::move(out), [ids, d](Graph<T>& g, const Tensor<T>& go) {
    for (std::size_t r = 0; r < ids.size(); ++r) {
      auto& gi = g.grad_ref(ids[r]);
      for (std::size_t i = 0; i < d; ++i) gi[i] += go[r * d + i];
    }
  });
}

template <typename T>
Var<T> tanh(Var<T> a) {
  Tensor<T> out = a.value();
  as_vec(out) = as_vec(out).array().tanh().matrix();
  return a.graph->record(std::move(out), [a](Graph<T>& g, const Tensor<T>& go) {
    const auto& x = g.value(a.id);
    auto y = as_vec(x).array().tanh();
    as_vec(g.grad_ref(a.id)).array() += as_vec(go).array() * (T(1) - y * y);
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = T(1) / (T(1) + std::exp(-v));
  return a.graph->record(std::move(out), [a](Graph<T>& g, const Tensor<T>& go) {
    const auto& x = g.value(a.id);
    auto& ga = g.grad_ref(a.id);
    for (std::size_t i = 0; i < x.size(); ++i) {
      T y = T(1) / (T(1) + std::exp(-x[i]));
      ga[i] += go[i] * y * (T(1) - y);
    }
  });
}

namespace {

template <typename T>
void check_mask(const char* op, const Tensor<T>& logits, const Mask& mask) {
  require_rank(op, logits.shape(), 1);
  if (mask.size() != logits.size())
    shape_error(op, "mask length " + std::to_string(mask.size()) + " vs logits " + shape_string(logits.shape()));
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }))
    fail(ErrorCode::InvalidArgument, std::string(op) + ": mask allows no entry");
}

// Probabilities with masked entries at exactly zero.
template <typename T>
std::vector<T> masked_probs(const Tensor<T>& logits, const Mask& mask, T& log_z) {
  T max = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (mask[i]) max = std::max(max, logits[i]);
  T z = 0;
  std::vector<T> p(logits.size(), T(0));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    p[i] = std::exp(logits[i] - max);
    z += p[i];
  }
  for (auto& v : p) v /= z;
  log_z = max + std::log(z);
  return p;
}

}  // namespace

template <typename T>
Var<T> softmax_masked(Var<T> logits, const Mask& mask) {
  check_mask("softmax_masked", logits.value(), mask);
  T log_z;
  auto p = masked_probs(logits.value(), mask, log_z);
  Tensor<T> out = Tensor<T>::vector(p);
  return logits.graph->record(std::move(out), [logits, p](Graph<T>& g, const Tensor<T>& go) {
    // dx_i = p_i (g_i - sum_j p_j g_j); zero wherever p_i is zero.
    T dot = 0;
    for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * go[i];
    auto& gx = g.grad_ref(logits.id);
    for (std::size_t i = 0; i < p.size(); ++i) gx[i] += p[i] * (go[i] - dot);
  });
}

template <typename T>
Var<T> softmax(Var<T> logits) {
  return softmax_masked(logits, Mask(logits.value().size(), 1));
}

template <typename T>
Var<T> log_softmax_masked(Var<T> logits, const Mask& mask) {
  check_mask("log_softmax_masked", logits.value(), mask);
  T log_z;
  auto p = masked_probs(logits.value(), mask, log_z);
  Tensor<T> out(Shape{p.size()}, -std::numeric_limits<T>::infinity());
  for (std::size_t i = 0; i < p.size(); ++i)
    if (mask[i]) out[i] = logits.value()[i] - log_z;
  return logits.graph->record(std::move(out), [logits, p, mask](Graph<T>& g, const Tensor<T>& go) {
    // dx_i = g_i - p_i sum_j g_j over allowed entries.
    T total = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (mask[i]) total += go[i];
    auto& gx = g.grad_ref(logits.id);
    for (std::size_t i = 0; i < p.size(); ++i)
      if (mask[i]) gx[i] += go[i] - p[i] * total;
  });
}

template <typename T>
Var<T> pick(Var<T> a, std::size_t index) {
  if (index >= a.value().size())
    shape_error("pick", "index " + std::to_string(index) + " outside " + shape_string(a.shape()));
  return a.graph->record(Tensor<T>::scalar(a.value()[index]), [a, index](Graph<T>& g, const Tensor<T>& go) {
    g.grad_ref(a.id)[index] += go[0];
  });
}

template <typename T>
Var<T> cross_entropy(Var<T> log_probs, std::size_t target) {
  require_rank("cross_entropy", log_probs.shape(), 1);
  if (target >= log_probs.value().size())
    shape_error("cross_entropy", "target " + std::to_string(target) + " outside " + shape_string(log_probs.shape()));
  if (std::isinf(log_probs.value()[target]))
    fail(ErrorCode::InvalidArgument, "cross_entropy: target " + std::to_string(target) + " is masked out");
  return scale(pick(log_probs, target), T(-1));
}

template <typename T>
Var<T> lookup(Graph<T>& g, Parameter<T>& table, std::size_t index) {
  require_rank("lookup", table.value.shape(), 2);
  if (index >= table.value.rows())
    shape_error("lookup", "row " + std::to_string(index) + " outside table " + shape_string(table.value.shape()));
  const std::size_t d = table.value.cols();
  const T* row = table.value.data().data() + index * d;
  Tensor<T> out = Tensor<T>::vector(std::vector<T>(row, row + d));
  Parameter<T>* target = &table;
  return g.record(std::move(out), [target, index, d](Graph<T>&, const Tensor<T>& go) {
    T* grow = target->grad.data().data() + index * d;
    for (std::size_t i = 0; i < d; ++i) grow[i] += go[i];
  });
}

// ---------------------------------------------------------------------------
// Optimizers

namespace {

template <typename T>
void require_finite(const ParameterStore<T>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (T v : params[i].grad.data()) {
      if (!std::isfinite(v))
        fail(ErrorCode::Diverged, "non-finite gradient in parameter " + params[i].name);
    }
  }
}

}  // namespace

template <typename T>
void Sgd<T>::step(ParameterStore<T>& params) {
  require_finite(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    as_vec(p.value) -= static_cast<T>(lr_) * as_vec(p.grad);
  }
  params.zero_grad();
}

template <typename T>
void Adam<T>::step(ParameterStore<T>& params) {
  require_finite(params);
  if (m_.size() != params.size()) {
    m_.assign(params.size(), {});
    v_.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].value.size(), T(0));
      v_[i].assign(params[i].value.size(), T(0));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto value = params[i].value.data();
    auto grad = params[i].grad.data();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double g = grad[k];
      m[k] = static_cast<T>(beta1_ * m[k] + (1.0 - beta1_) * g);
      v[k] = static_cast<T>(beta2_ * v[k] + (1.0 - beta2_) * g * g);
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      value[k] = static_cast<T>(value[k] - lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  }
  params.zero_grad();
}

template <typename T>
double grad_norm(const ParameterStore<T>& params) {
  double sq = 0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (T v : params[i].grad.data()) sq += static_cast<double>(v) * v;
  return std::sqrt(sq);
}

template <typename T>
double clip_grad_norm(ParameterStore<T>& params, double max_norm) {
  double norm = grad_norm(params);
  if (max_norm > 0 && norm > max_norm && std::isfinite(norm)) {
    const T f = static_cast<T>(max_norm / norm);
    for (std::size_t i = 0; i < params.size(); ++i) as_vec(params[i].grad) *= f;
  }
  return norm;
}

// ---------------------------------------------------------------------------

#define TRDEC_INSTANTIATE(T)                                                     \
  template class Tensor<T>;                                                      \
  template class ParameterStore<T>;                                              \
  template struct Var<T>;                                                        \
  template class Graph<T>;                                                       \
  template class Sgd<T>;                                                         \
  template class Adam<T>;                                                        \
  template Var<T> add(Var<T>, Var<T>);                                           \
  template Var<T> sub(Var<T>, Var<T>);                                           \
  template Var<T> mul(Var<T>, Var<T>);                                           \
  template Var<T> scale(Var<T>, T);                                              \
  template Var<T> sum(const std::vector<Var<T>>&);                               \
  template Var<T> sum_all(Var<T>);                                               \
  template Var<T> matmul(Var<T>, Var<T>);                                        \
  template Var<T> transpose(Var<T>);                                             \
  template Var<T> concat(const std::vector<Var<T>>&);                            \
  template Var<T> slice(Var<T>, std::size_t, std::size_t);                       \
  template Var<T> stack_rows(const std::vector<Var<T>>&);                        \
  template Var<T> tanh(Var<T>);                                                  \
  template Var<T> sigmoid(Var<T>);                                               \
  template Var<T> softmax_masked(Var<T>, const Mask&);                           \
  template Var<T> softmax(Var<T>);                                               \
  template Var<T> log_softmax_masked(Var<T>, const Mask&);                       \
  template Var<T> pick(Var<T>, std::size_t);                                     \
  template Var<T> cross_entropy(Var<T>, std::size_t);                            \
  template Var<T> lookup(Graph<T>&, Parameter<T>&, std::size_t);                 \
  template double grad_norm(const ParameterStore<T>&);                           \
  template double clip_grad_norm(ParameterStore<T>&, double);

TRDEC_INSTANTIATE(float)
TRDEC_INSTANTIATE(double)

#undef TRDEC_INSTANTIATE

}  // namespace trdec::ad
