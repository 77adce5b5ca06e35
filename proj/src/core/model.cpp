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

#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trdec {

using ad::Graph;
using ad::Var;

namespace {

template <typename T>
std::size_t argmax(const ad::Tensor<T>& lp) {
  std::size_t best = 0;
  T best_v = -std::numeric_limits<T>::infinity();
  for (std::size_t i = 0; i < lp.size(); ++i) {
    if (lp[i] > best_v) {
      best_v = lp[i];
      best = i;
    }
  }
  return best;
}

const char* kMetaConfig = "meta.config";
const char* kMetaSrc = "meta.src_vocab";
const char* kMetaTgt = "meta.tgt_vocab";
const char* kMetaGrammar = "meta.grammar";

}  // namespace

template <typename T>
std::uint32_t DecoderState<T>::steps() const {
  return expansion.steps_taken() + static_cast<std::uint32_t>(emitted.size());
}

template <typename T>
bool DecoderState<T>::finished() const {
  return expansion.finished() || done;
}

template <typename T>
TrdecModel<T>::TrdecModel(const ModelConfig& cfg, Vocab src, Vocab tgt, Grammar grammar)
    : cfg_(cfg), src_(std::move(src)), tgt_(std::move(tgt)), grammar_(std::move(grammar)) {
  if (cfg_.mode == ModelMode::TrDec && grammar_.size() < 2)
    fail(ErrorCode::InvalidArgument, "tree decoder needs a grammar with at least one rule");
  build();
}

template <typename T>
void TrdecModel<T>::build() {
  const std::size_t h = cfg_.hidden, e = cfg_.embed;
  const auto seed = cfg_.seed;
  const double scale = cfg_.init_scale;
  encoder_ = nn::BiLstmEncoder<T>(params_, src_.size(), e, h, seed, scale, cfg_.tie_encoder);
  attention_ = nn::Attention<T>(params_, "attention", h, 2 * h, seed, scale);
  word_embed_ = &params_.add("decoder.word_embed", {tgt_.size(), e}, seed, scale);
  word_mask_.assign(tgt_.size(), 1);
  word_mask_[Vocab::kPad] = 0;
  word_mask_[Vocab::kSos] = 0;
  if (cfg_.mode == ModelMode::TrDec) {
    rule_embed_ = &params_.add("decoder.rule_embed", {grammar_.size() + 1, e}, seed, scale);
    rule_rnn_ = nn::LstmCell<T>(params_, "decoder.rule", e + 2 * h + h + h, h, seed, scale);
    word_rnn_ = nn::LstmCell<T>(params_, "decoder.word", h + e + 2 * h, h, seed, scale);
    rule_out_ = &params_.add("decoder.rule_out.w", {grammar_.size(), 2 * h}, seed, scale);
    word_out_ = &params_.add("decoder.word_out.w", {tgt_.size(), 2 * h}, seed, scale);
    word_mask_[Vocab::kEos] = 0;
  } else {
    word_rnn_ = nn::LstmCell<T>(params_, "decoder.word", e + 2 * h, h, seed, scale);
    word_out_ = &params_.add("decoder.word_out.w", {tgt_.size(), h}, seed, scale);
    word_mask_[Vocab::kEop] = 0;
  }
}

template <typename T>
typename TrdecModel<T>::Context TrdecModel<T>::encode(Graph<T>& g, const std::vector<TokenId>& src) const {
  Context c;
  c.enc = encoder_.encode(g, src);
  c.keys = attention_.prepare(g, c.enc.memory);
  c.src_len = src.size();
  return c;
}

template <typename T>
DecoderState<T> TrdecModel<T>::initial_state(Graph<T>& g, const Context& c) const {
  const std::size_t h = cfg_.hidden;
  DecoderState<T> s;
  Var<T> zero = g.input(ad::Tensor<T>({h}));
  s.rule = {c.enc.final_state, zero};
  s.word = {c.enc.final_state, zero};
  s.last_word_h = zero;
  s.ctx = g.input(ad::Tensor<T>({2 * h}));
  s.step_states.push_back(c.enc.final_state);
  return s;
}

template <typename T>
const ad::Mask& TrdecModel<T>::rule_mask(const DecoderState<T>& s) const {
  if (s.expansion.stack_empty()) return grammar_.mask(std::nullopt);
  return grammar_.mask(s.expansion.top().symbol);
}

template <typename T>
Var<T> TrdecModel<T>::prev_embedding(Graph<T>& g, const DecoderState<T>& s) const {
  if (s.prev_id < 0) return ad::lookup(g, *rule_embed_, grammar_.size());
  if (s.prev_kind == StepKind::Rule) return ad::lookup(g, *rule_embed_, static_cast<std::size_t>(s.prev_id));
  return ad::lookup(g, *word_embed_, static_cast<std::size_t>(s.prev_id));
}

template <typename T>
Var<T> TrdecModel<T>::parent_state(const DecoderState<T>& s) const {
  const std::uint32_t p = s.expansion.stack_empty() ? 0 : s.expansion.top().parent;
  return s.step_states.at(p);
}

template <typename T>
Var<T> TrdecModel<T>::rule_step(Graph<T>& g, const Context& c, DecoderState<T>& s) const {
  if (cfg_.mode != ModelMode::TrDec) fail(ErrorCode::InvalidArgument, "rule_step in a sequence mode");
  if (s.expansion.finished()) fail(ErrorCode::Derivation, "rule_step after <eos>");
  if (s.expansion.expects_word())
    fail(ErrorCode::Derivation, "rule_step while a preterminal is open; a word step is due");
  Var<T> x = ad::concat<T>({prev_embedding(g, s), s.ctx, parent_state(s), s.last_word_h});
  s.rule = rule_rnn_.step(g, x, s.rule);
  s.ctx = attention_.attend(g, s.rule.h, c.keys).context;
  Var<T> logits = ad::matmul(g.param(*rule_out_), ad::tanh(ad::concat<T>({s.rule.h, s.last_word_h})));
  s.pending = StepKind::Rule;
  return ad::log_softmax_masked(logits, rule_mask(s));
}

template <typename T>
Var<T> TrdecModel<T>::word_step(Graph<T>& g, const Context& c, DecoderState<T>& s) const {
  if (cfg_.mode != ModelMode::TrDec) {
    if (s.done) fail(ErrorCode::Derivation, "word_step after <eos>");
    Var<T> x = ad::concat<T>({ad::lookup(g, *word_embed_, static_cast<std::size_t>(s.prev_word)), s.ctx});
    s.word = word_rnn_.step(g, x, s.word);
    s.ctx = attention_.attend(g, s.word.h, c.keys).context;
    Var<T> logits = ad::matmul(g.param(*word_out_), ad::tanh(s.word.h));
    s.pending = StepKind::Word;
    return ad::log_softmax_masked(logits, word_mask_);
  }
  if (!s.expansion.expects_word())
    fail(ErrorCode::Derivation, "word_step without an open preterminal; a rule step is due");
  Var<T> sp = parent_state(s);
  if (s.phrase_start && cfg_.word_rnn_init == WordInitScope::Phrase) {
    s.word = {c.enc.final_state, g.input(ad::Tensor<T>({cfg_.hidden}))};
    s.prev_word = Vocab::kSos;
  }
  Var<T> xr = ad::concat<T>({prev_embedding(g, s), s.ctx, sp, s.last_word_h});
  Var<T> xw = ad::concat<T>({sp, ad::lookup(g, *word_embed_, static_cast<std::size_t>(s.prev_word)), s.ctx});
  s.rule = rule_rnn_.step(g, xr, s.rule);
  s.word = word_rnn_.step(g, xw, s.word);
  s.ctx = attention_.attend(g, s.word.h, c.keys).context;
  Var<T> logits = ad::matmul(g.param(*word_out_), ad::tanh(ad::concat<T>({s.rule.h, s.word.h})));
  s.pending = StepKind::Word;
  return ad::log_softmax_masked(logits, word_mask_);
}

template <typename T>
Step TrdecModel<T>::apply_rule(DecoderState<T>& s, RuleId rule) const {
  if (s.pending != StepKind::Rule) fail(ErrorCode::Derivation, "apply_rule without a preceding rule_step");
  Step st = s.expansion.apply_rule(grammar_, rule);
  s.step_states.push_back(s.rule.h);
  s.prev_kind = StepKind::Rule;
  s.prev_id = rule;
  s.phrase_start = true;
  s.pending.reset();
  return st;
}

template <typename T>
Step TrdecModel<T>::apply_word(DecoderState<T>& s, TokenId word) const {
  if (s.pending != StepKind::Word) fail(ErrorCode::Derivation, "apply_word without a preceding word_step");
  if (word < 0 || static_cast<std::size_t>(word) >= tgt_.size())
    fail(ErrorCode::InvalidArgument, "word id " + std::to_string(word) + " outside the target vocabulary");
  s.pending.reset();
  s.prev_word = word;
  if (cfg_.mode != ModelMode::TrDec) {
    s.emitted.push_back(word);
    s.done = word == Vocab::kEos;
    return Step{StepKind::Word, word, 0};
  }
  Step st = s.expansion.apply_word(word);
  s.step_states.push_back(s.rule.h);
  s.last_word_h = s.word.h;
  s.prev_kind = StepKind::Word;
  s.prev_id = word;
  s.phrase_start = word == Vocab::kEop;
  return st;
}

template <typename T>
bool TrdecModel<T>::is_done(const DecoderState<T>& s) const {
  return s.finished();
}

template <typename T>
typename TrdecModel<T>::Loss TrdecModel<T>::loss(Graph<T>& g, const Example& ex) const {
  Context c = encode(g, ex.src);
  DecoderState<T> s = initial_state(g, c);
  std::vector<Var<T>> terms;
  Loss out;
  auto score = [&](Var<T> lp, const ad::Mask& mask, std::int32_t gold, std::size_t t) {
    if (gold < 0 || static_cast<std::size_t>(gold) >= mask.size() || !mask[static_cast<std::size_t>(gold)])
      fail(ErrorCode::Derivation, "gold decision " + std::to_string(gold) + " is not allowed at step " +
                                      std::to_string(t));
    terms.push_back(ad::cross_entropy(lp, static_cast<std::size_t>(gold)));
    ++out.steps;
    if (argmax(lp.value()) == static_cast<std::size_t>(gold)) ++out.correct;
  };

  if (cfg_.mode == ModelMode::TrDec) {
    if (ex.deriv.steps.empty()) fail(ErrorCode::Derivation, "empty gold derivation");
    for (std::size_t i = 0; i < ex.deriv.steps.size(); ++i) {
      const Step& gold = ex.deriv.steps[i];
      if (s.expansion.finished()) fail(ErrorCode::Derivation, "gold derivation continues after <eos>");
      Step got;
      if (gold.kind == StepKind::Rule) {
        if (s.expansion.expects_word())
          fail(ErrorCode::Derivation, "gold rule at step " + std::to_string(i + 1) + " inside an open phrase");
        Var<T> lp = rule_step(g, c, s);
        score(lp, rule_mask(s), gold.id, i + 1);
        got = apply_rule(s, gold.id);
      } else {
        if (!s.expansion.expects_word())
          fail(ErrorCode::Derivation, "gold word at step " + std::to_string(i + 1) + " outside a phrase");
        Var<T> lp = word_step(g, c, s);
        score(lp, word_mask_, gold.id, i + 1);
        got = apply_word(s, gold.id);
      }
      if (got.parent != gold.parent)
        fail(ErrorCode::Derivation, "gold step " + std::to_string(i + 1) + " names parent " +
                                        std::to_string(gold.parent) + ", expected " + std::to_string(got.parent));
    }
    if (!s.expansion.finished()) fail(ErrorCode::Derivation, "gold derivation ends before <eos>");
  } else {
    if (ex.flat.empty() || ex.flat.back() != Vocab::kEos)
      fail(ErrorCode::Derivation, "flat target must end in <eos>");
    for (std::size_t i = 0; i < ex.flat.size(); ++i) {
      Var<T> lp = word_step(g, c, s);
      score(lp, word_mask_, ex.flat[i], i + 1);
      apply_word(s, ex.flat[i]);
    }
  }
  out.value = ad::sum(terms);
  return out;
}

template <typename T>
Example TrdecModel<T>::make_example(const Sentence& src, const Tree& target) const {
  Example ex;
  ex.src = src_.encode(src);
  switch (cfg_.mode) {
    case ModelMode::TrDec:
      ex.deriv = canonical_derivation(target, grammar_, tgt_);
      break;
    case ModelMode::Seq2Seq:
      ex.flat = tgt_.encode(target.leaves());
      ex.flat.push_back(Vocab::kEos);
      break;
    case ModelMode::Lin:
      ex.flat = tgt_.encode(linearize(target));
      ex.flat.push_back(Vocab::kEos);
      break;
  }
  return ex;
}

template <typename T>
std::size_t TrdecModel<T>::step_limit(std::size_t src_len) const {
  const double limit = std::floor(cfg_.max_steps_factor * static_cast<double>(src_len));
  return std::max<std::size_t>(1, static_cast<std::size_t>(limit));
}

template <typename T>
DecodeResult TrdecModel<T>::finish(const DecoderState<T>& s, Derivation deriv, double logp) const {
  DecodeResult r;
  r.logp = logp;
  if (cfg_.mode == ModelMode::TrDec) {
    r.tree = replay_derivation(deriv, grammar_, tgt_);
    r.words = r.tree.leaves();
    r.word_steps = deriv.count(StepKind::Word);
    r.deriv = std::move(deriv);
    return r;
  }
  r.tokens = s.emitted;
  if (!r.tokens.empty() && r.tokens.back() == Vocab::kEos) r.tokens.pop_back();
  r.word_steps = s.emitted.size();
  Sentence toks = tgt_.decode(r.tokens);
  if (cfg_.mode == ModelMode::Lin) {
    try {
      r.tree = delinearize(toks);
    } catch (const Error&) {
      r.tree = Tree();
    }
    for (auto& t : toks)
      if (!is_bracket_token(t)) r.words.push_back(unescape_leaf(t));
  } else {
    r.words = std::move(toks);
  }
  return r;
}

template <typename T>
void TrdecModel<T>::truncated(const std::string& why, const Derivation& deriv, const DecoderState<T>& s) const {
  Tree partial;
  Sentence words;
  if (cfg_.mode == ModelMode::TrDec) {
    if (!deriv.steps.empty()) {
      partial = replay_derivation(deriv, grammar_, tgt_, true);
      words = partial.leaves();
    }
  } else {
    for (auto& t : tgt_.decode(s.emitted)) {
      if (cfg_.mode == ModelMode::Seq2Seq) words.push_back(t);
      else if (!is_bracket_token(t)) words.push_back(unescape_leaf(t));
    }
  }
  throw TruncatedError(why, std::move(partial), std::move(words));
}

template <typename T>
DecodeResult TrdecModel<T>::greedy(const std::vector<TokenId>& src, const StepObserver& observe) const {
  Graph<T> g(false);
  Context c = encode(g, src);
  DecoderState<T> s = initial_state(g, c);
  const std::size_t limit = step_limit(src.size());
  Derivation d;
  double logp = 0;
  while (!is_done(s)) {
    if (s.steps() >= limit)
      truncated("decoding stopped at the step limit of " + std::to_string(limit), d, s);
    const bool word = cfg_.mode != ModelMode::TrDec || s.expansion.expects_word();
    Var<T> lp = word ? word_step(g, c, s) : rule_step(g, c, s);
    const ad::Mask& mask = word ? word_mask_ : rule_mask(s);
    if (observe) {
      StepProbe probe{word ? StepKind::Word : StepKind::Rule, {}, &mask};
      for (T v : lp.value().data()) probe.probs.push_back(std::exp(static_cast<double>(v)));
      observe(probe);
    }
    const auto id = static_cast<std::int32_t>(argmax(lp.value()));
    if (!word && id != Grammar::kEos && s.expansion.top().depth + 1 > cfg_.max_depth)
      truncated("decoding stopped at the depth limit of " + std::to_string(cfg_.max_depth), d, s);
    logp += static_cast<double>(lp.value()[static_cast<std::size_t>(id)]);
    Step st = word ? apply_word(s, id) : apply_rule(s, id);
    if (cfg_.mode == ModelMode::TrDec) d.steps.push_back(st);
  }
  return finish(s, std::move(d), logp);
}

template <typename T>
std::vector<DecodeResult> TrdecModel<T>::beam(const std::vector<TokenId>& src, std::size_t beam_size) const {
  if (beam_size == 0) fail(ErrorCode::InvalidArgument, "beam size must be at least 1");
  Graph<T> g(false);
  Context c = encode(g, src);
  const std::size_t limit = step_limit(src.size());

  struct Hyp {
    DecoderState<T> s;
    Derivation d;
    double logp = 0;
  };
  struct Cand {
    std::size_t hyp;
    std::int32_t id;
    double score;
  };
  std::vector<Hyp> live{Hyp{initial_state(g, c), {}, 0.0}};
  std::vector<DecodeResult> done;
  std::optional<Hyp> dropped;
  std::string drop_reason;

  while (!live.empty() && done.size() < beam_size) {
    std::vector<DecoderState<T>> advanced;
    std::vector<bool> is_word;
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < live.size(); ++i) {
      DecoderState<T> s = live[i].s;
      const bool word = cfg_.mode != ModelMode::TrDec || s.expansion.expects_word();
      if (s.steps() >= limit) {
        if (!dropped) {
          dropped = live[i];
          drop_reason = "decoding stopped at the step limit of " + std::to_string(limit);
        }
        advanced.push_back(std::move(s));
        is_word.push_back(word);
        continue;
      }
      Var<T> lp = word ? word_step(g, c, s) : rule_step(g, c, s);
      std::vector<Cand> local;
      const auto& v = lp.value();
      for (std::size_t k = 0; k < v.size(); ++k)
        if (std::isfinite(static_cast<double>(v[k])))
          local.push_back({i, static_cast<std::int32_t>(k), live[i].logp + static_cast<double>(v[k])});
      auto better = [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.hyp != b.hyp) return a.hyp < b.hyp;
        return a.id < b.id;
      };
      const std::size_t keep = std::min(beam_size, local.size());
      std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep), local.end(), better);
      cands.insert(cands.end(), local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep));
      advanced.push_back(std::move(s));
      is_word.push_back(word);
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.hyp != b.hyp) return a.hyp < b.hyp;
      return a.id < b.id;
    });
    if (cands.size() > beam_size) cands.resize(beam_size);

    std::vector<Hyp> next;
    for (const Cand& cd : cands) {
      Hyp h{advanced[cd.hyp], live[cd.hyp].d, cd.score};
      if (!is_word[cd.hyp] && cd.id != Grammar::kEos && h.s.expansion.top().depth + 1 > cfg_.max_depth) {
        if (!dropped) {
          dropped = live[cd.hyp];
          drop_reason = "decoding stopped at the depth limit of " + std::to_string(cfg_.max_depth);
        }
        continue;
      }
      Step st = is_word[cd.hyp] ? apply_word(h.s, cd.id) : apply_rule(h.s, cd.id);
      if (cfg_.mode == ModelMode::TrDec) h.d.steps.push_back(st);
      if (is_done(h.s))
        done.push_back(finish(h.s, std::move(h.d), h.logp));
      else
        next.push_back(std::move(h));
    }
    live = std::move(next);
  }
  if (done.empty()) {
    if (dropped) truncated(drop_reason, dropped->d, dropped->s);
    fail(ErrorCode::Truncated, "beam search produced no finished hypothesis");
  }
  std::stable_sort(done.begin(), done.end(), [](const DecodeResult& a, const DecodeResult& b) {
    return a.score() > b.score();
  });
  return done;
}

template <typename T>
void TrdecModel<T>::save(const std::filesystem::path& path) const {
  auto records = params_.to_records();
  Config cfg;
  cfg.model = cfg_;
  records.push_back(ad::text_record(kMetaConfig, cfg.serialize()));
  records.push_back(ad::text_record(kMetaSrc, src_.serialize()));
  records.push_back(ad::text_record(kMetaTgt, tgt_.serialize()));
  records.push_back(ad::text_record(kMetaGrammar, grammar_.serialize()));
  ad::write_records(path, records);
}

template <typename T>
TrdecModel<T> TrdecModel<T>::load(const std::filesystem::path& path) {
  auto records = ad::read_records(path);
  auto text = [&](const char* name) {
    for (const auto& r : records)
      if (r.name == name) return ad::record_text(r);
    fail(ErrorCode::Parse, path.string() + ": checkpoint lacks " + name);
  };
  Config cfg = Config::parse(text(kMetaConfig));
  TrdecModel m(cfg.model, Vocab::deserialize(text(kMetaSrc)), Vocab::deserialize(text(kMetaTgt)),
               Grammar::deserialize(text(kMetaGrammar)));
  m.params_.load_records(records);
  return m;
}

Precision checkpoint_precision(const std::filesystem::path& path) {
  for (const auto& r : ad::read_records(path)) {
    if (r.dtype == ad::DType::F32) return Precision::F32;
    if (r.dtype == ad::DType::F64) return Precision::F64;
  }
  fail(ErrorCode::Parse, path.string() + ": checkpoint holds no parameters");
}

template struct DecoderState<float>;
template struct DecoderState<double>;
template class TrdecModel<float>;
template class TrdecModel<double>;

}  // namespace trdec
