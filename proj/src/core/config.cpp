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

#include "core/config.hpp"

#include <charconv>
#include <sstream>

#include "core/corpus_io.hpp"
#include "core/error.hpp"

namespace trdec {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    fail(ErrorCode::InvalidArgument, "config key " + key + ": bad number '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  fail(ErrorCode::InvalidArgument, "config key " + key + ": expected true or false, got '" + value + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view mode_name(ModelMode m) {
  switch (m) {
    case ModelMode::TrDec: return "trdec";
    case ModelMode::Seq2Seq: return "seq2seq";
    case ModelMode::Lin: return "lin";
  }
  return "?";
}

ModelMode parse_mode(std::string_view name) {
  if (name == "trdec") return ModelMode::TrDec;
  if (name == "seq2seq") return ModelMode::Seq2Seq;
  if (name == "lin") return ModelMode::Lin;
  fail(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "' (trdec, seq2seq, lin)");
}

void Config::set(const std::string& key, const std::string& value) {
  auto& m = model;
  auto& t = train;
  if (key == "mode") m.mode = parse_mode(value);
  else if (key == "hidden") m.hidden = parse_number<std::size_t>(key, value);
  else if (key == "embed") m.embed = parse_number<std::size_t>(key, value);
  else if (key == "src_vocab") m.src_vocab = parse_number<std::size_t>(key, value);
  else if (key == "tgt_vocab") m.tgt_vocab = parse_number<std::size_t>(key, value);
  else if (key == "word_rnn_init") {
    if (value == "sentence") m.word_rnn_init = WordInitScope::Sentence;
    else if (value == "phrase") m.word_rnn_init = WordInitScope::Phrase;
    else fail(ErrorCode::InvalidArgument, "config key word_rnn_init: expected sentence or phrase");
  } else if (key == "max_steps_factor") m.max_steps_factor = parse_number<double>(key, value);
  else if (key == "max_depth") m.max_depth = parse_number<std::size_t>(key, value);
  else if (key == "seed") m.seed = t.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "init_scale") m.init_scale = parse_number<double>(key, value);
  else if (key == "tie_encoder") m.tie_encoder = parse_bool(key, value);
  else if (key == "optimizer") {
    if (value != "adam" && value != "sgd")
      fail(ErrorCode::InvalidArgument, "config key optimizer: expected adam or sgd");
    t.optimizer = value;
  } else if (key == "lr") t.lr = parse_number<double>(key, value);
  else if (key == "epochs") t.epochs = parse_number<std::size_t>(key, value);
  else if (key == "max_updates") t.max_updates = parse_number<std::size_t>(key, value);
  else if (key == "batch_size") t.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "clip_norm") t.clip_norm = parse_number<double>(key, value);
  else if (key == "log_every") t.log_every = parse_number<std::size_t>(key, value);
  else if (key == "shuffle_seed") t.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "precision") {
    if (value == "32") t.precision = Precision::F32;
    else if (value == "64") t.precision = Precision::F64;
    else fail(ErrorCode::InvalidArgument, "config key precision: expected 32 or 64");
  } else if (key == "variant") t.variant = parse_tree_variant(value);
  else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");

  if (m.hidden == 0 || m.embed == 0) fail(ErrorCode::InvalidArgument, "hidden and embed must be positive");
  if (t.batch_size == 0) fail(ErrorCode::InvalidArgument, "batch_size must be positive");
  if (t.log_every == 0) fail(ErrorCode::InvalidArgument, "log_every must be positive");
}

Config Config::parse(std::string_view text) {
  Config c;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Parse, "config line " + std::to_string(line_no) + ": expected key = value");
    c.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::string text;
  for (const auto& l : read_lines(path)) text += l + "\n";
  return parse(text);
}

std::string Config::serialize() const {
  const auto& m = model;
  const auto& t = train;
  std::ostringstream os;
  os << "mode = " << mode_name(m.mode) << "\n"
     << "hidden = " << m.hidden << "\n"
     << "embed = " << m.embed << "\n"
     << "src_vocab = " << m.src_vocab << "\n"
     << "tgt_vocab = " << m.tgt_vocab << "\n"
     << "word_rnn_init = " << (m.word_rnn_init == WordInitScope::Sentence ? "sentence" : "phrase") << "\n"
     << "max_steps_factor = " << format_double(m.max_steps_factor) << "\n"
     << "max_depth = " << m.max_depth << "\n"
     << "seed = " << m.seed << "\n"
     << "init_scale = " << format_double(m.init_scale) << "\n"
     << "tie_encoder = " << (m.tie_encoder ? "true" : "false") << "\n"
     << "optimizer = " << t.optimizer << "\n"
     << "lr = " << format_double(t.lr) << "\n"
     << "epochs = " << t.epochs << "\n"
     << "max_updates = " << t.max_updates << "\n"
     << "batch_size = " << t.batch_size << "\n"
     << "clip_norm = " << format_double(t.clip_norm) << "\n"
     << "log_every = " << t.log_every << "\n"
     << "shuffle_seed = " << t.seed << "\n"
     << "precision = " << (t.precision == Precision::F32 ? "32" : "64") << "\n"
     << "variant = " << tree_variant_name(t.variant) << "\n";
  return os.str();
}

}  // namespace trdec
