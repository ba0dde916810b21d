#include "lada/encoder.hpp"

#include <cmath>

#include "lada/rng.hpp"

namespace lada {

void EncoderConfig::validate() const {
  if (vocab_size <= 0) throw ConfigError("encoder: vocab_size must be positive");
  if (n_tags <= 0) throw ConfigError("encoder: n_tags must be positive");
  if (max_len < 3) throw ConfigError("encoder: max_len must be at least 3");
  if (d_model <= 0 || n_heads <= 0 || d_ff <= 0 || n_layers <= 0)
    throw ConfigError("encoder: dimensions must be positive");
  if (d_model % n_heads != 0)
    throw ConfigError("encoder: d_model (" + std::to_string(d_model) +
                      ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
}

Parameter& ParameterStore::add(const std::string& name, Shape shape,
                               std::vector<double> values) {
  if (contains(name)) throw ConfigError("ParameterStore: duplicate parameter '" + name + "'");
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size()))
    throw ShapeError("ParameterStore: shape " + shape_str(shape) + " vs " +
                     std::to_string(values.size()) + " values for '" + name + "'");
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{name, std::move(shape), std::move(values)});
  return params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("ParameterStore: unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ConfigError("ParameterStore: unknown parameter '" + name + "'");
  return params_[it->second];
}

namespace {

std::vector<double> uniform_init(Rng& rng, std::int64_t n, double scale) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

std::string blk(int layer, const char* suffix) {
  return "blk" + std::to_string(layer) + "." + suffix;
}

}  // namespace

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  EncoderParams p;
  p.config = config;
  Rng rng(seed);
  const int d = config.d_model;
  const double proj = 1.0 / std::sqrt(static_cast<double>(d));
  const double emb = 0.02;

  auto matrix = [&](const std::string& name, int rows, int cols, double scale) {
    p.store.add(name, {rows, cols}, uniform_init(rng, static_cast<std::int64_t>(rows) * cols, scale));
  };
  auto vec = [&](const std::string& name, int n, double fill) {
    p.store.add(name, {n}, std::vector<double>(static_cast<std::size_t>(n), fill));
  };

  matrix("tok_emb", config.vocab_size, d, emb);
  matrix("pos_emb", config.max_len, d, emb);
  for (int l = 1; l <= config.n_layers; ++l) {
    vec(blk(l, "ln1.g"), d, 1.0);
    vec(blk(l, "ln1.b"), d, 0.0);
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"})
      matrix(blk(l, w), d, d, proj);
    for (const char* b : {"attn.bq", "attn.bk", "attn.bv", "attn.bo"})
      vec(blk(l, b), d, 0.0);
    vec(blk(l, "ln2.g"), d, 1.0);
    vec(blk(l, "ln2.b"), d, 0.0);
    matrix(blk(l, "ffn.w1"), d, config.d_ff, proj);
    vec(blk(l, "ffn.b1"), config.d_ff, 0.0);
    matrix(blk(l, "ffn.w2"), config.d_ff, d,
           1.0 / std::sqrt(static_cast<double>(config.d_ff)));
    vec(blk(l, "ffn.b2"), d, 0.0);
  }
  matrix("cls.w", d, config.n_tags, proj);
  vec("cls.b", config.n_tags, 0.0);
  return p;
}

TokenBatch TokenBatch::from_sentences(const std::vector<const SubtokenizedSentence*>& sents,
                                      const Vocab& vocab) {
  TokenBatch b;
  if (sents.empty()) throw DataError("TokenBatch: empty batch");
  b.size = static_cast<int>(sents.size());
  b.len = static_cast<int>(sents[0]->size());
  for (const SubtokenizedSentence* s : sents) {
    if (static_cast<int>(s->size()) != b.len)
      throw DataError("TokenBatch: sentences padded to different lengths");
    for (std::size_t i = 0; i < s->size(); ++i) {
      b.token_ids.push_back(vocab.id(s->subtokens[i]));
      b.attend.push_back(s->subtokens[i] == kPadToken ? 0 : 1);
    }
  }
  return b;
}

BoundEncoder::BoundEncoder(Tape& tape, const EncoderParams& params, bool trainable)
    : tape_(tape), config_(params.config) {
  config_.validate();
  for (const Parameter& p : params.store.all())
    bound_.emplace(p.name, tape_.leaf(p.shape, p.values, trainable));
}

Tensor BoundEncoder::param(const std::string& name) const {
  auto it = bound_.find(name);
  if (it == bound_.end()) throw ConfigError("BoundEncoder: unknown parameter '" + name + "'");
  return it->second;
}

const std::vector<double>& BoundEncoder::grad(const std::string& name) const {
  return tape_.grad(param(name));
}

Tensor BoundEncoder::attention_mask(const TokenBatch& x) const {
  const int B = x.size, T = x.len;
  std::vector<double> m(static_cast<std::size_t>(B) * T * T, 0.0);
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < T; ++j)
      if (!x.attend[static_cast<std::size_t>(b) * T + j])
        for (int i = 0; i < T; ++i)
          m[(static_cast<std::size_t>(b) * T + i) * T + j] = -1e9;
  return tape_.constant({B, T, T}, std::move(m));
}

Tensor BoundEncoder::attention_mask(const HiddenStates& h) const {
  TokenBatch fake;
  fake.size = h.batch_size;
  fake.len = h.len;
  fake.attend = h.attend;
  return attention_mask(fake);
}

Tensor BoundEncoder::block(const Tensor& h, int l, const HiddenStates& meta) {
  const int B = meta.batch_size, T = meta.len, d = config_.d_model;
  const int H = config_.n_heads, dk = config_.head_dim();

  Tensor a = tape_.layer_norm(h, param(blk(l, "ln1.g")), param(blk(l, "ln1.b")),
                              config_.ln_eps);
  Tensor q = tape_.add_rows(tape_.matmul(a, param(blk(l, "attn.wq"))), param(blk(l, "attn.bq")));
  Tensor k = tape_.add_rows(tape_.matmul(a, param(blk(l, "attn.wk"))), param(blk(l, "attn.bk")));
  Tensor v = tape_.add_rows(tape_.matmul(a, param(blk(l, "attn.wv"))), param(blk(l, "attn.bv")));
  Tensor q3 = tape_.reshape(q, {B, T, d});
  Tensor k3 = tape_.reshape(k, {B, T, d});
  Tensor v3 = tape_.reshape(v, {B, T, d});
  Tensor mask = attention_mask(meta);
  std::vector<Tensor> heads;
  heads.reserve(static_cast<std::size_t>(H));
  const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
  for (int head = 0; head < H; ++head) {
    Tensor qh = tape_.slice(q3, 2, head * dk, dk);
    Tensor kh = tape_.slice(k3, 2, head * dk, dk);
    Tensor vh = tape_.slice(v3, 2, head * dk, dk);
    Tensor scores = tape_.scale(tape_.matmul(qh, tape_.transpose_last2(kh)), inv_sqrt_dk);
    Tensor attn = tape_.softmax_rows(tape_.add(scores, mask));
    heads.push_back(tape_.matmul(attn, vh));
  }
  Tensor ctx = tape_.reshape(tape_.concat(heads, 2), {B * T, d});
  Tensor attn_out =
      tape_.add_rows(tape_.matmul(ctx, param(blk(l, "attn.wo"))), param(blk(l, "attn.bo")));
  Tensor h1 = tape_.add(h, attn_out);

  Tensor b = tape_.layer_norm(h1, param(blk(l, "ln2.g")), param(blk(l, "ln2.b")),
                              config_.ln_eps);
  Tensor ff1 = tape_.relu(
      tape_.add_rows(tape_.matmul(b, param(blk(l, "ffn.w1"))), param(blk(l, "ffn.b1"))));
  Tensor ff2 = tape_.add_rows(tape_.matmul(ff1, param(blk(l, "ffn.w2"))), param(blk(l, "ffn.b2")));
  return tape_.add(h1, ff2);
}

HiddenStates BoundEncoder::forward_lower(const TokenBatch& x, int m) {
  if (m < 0 || m > config_.n_layers)
    throw ConfigError("forward_lower: layer " + std::to_string(m) + " out of range [0, " +
                      std::to_string(config_.n_layers) + "]");
  if (x.len > config_.max_len)
    throw DataError("forward_lower: batch length " + std::to_string(x.len) +
                    " exceeds max_len " + std::to_string(config_.max_len));
  HiddenStates hs;
  hs.batch_size = x.size;
  hs.len = x.len;
  hs.attend = x.attend;
  std::vector<int> pos(static_cast<std::size_t>(x.size) * x.len);
  for (int b = 0; b < x.size; ++b)
    for (int t = 0; t < x.len; ++t) pos[static_cast<std::size_t>(b) * x.len + t] = t;
  Tensor h = tape_.add(tape_.rows_lookup(param("tok_emb"), x.token_ids),
                       tape_.rows_lookup(param("pos_emb"), pos));
  for (int l = 1; l <= m; ++l) h = block(h, l, hs);
  hs.layer = m;
  hs.h = h;
  return hs;
}

HiddenStates BoundEncoder::forward_upper(const HiddenStates& h, int m) {
  if (h.layer != m)
    throw ConfigError("forward_upper: hidden states tagged with layer " +
                      std::to_string(h.layer) + " but m = " + std::to_string(m));
  if (m < 0 || m > config_.n_layers)
    throw ConfigError("forward_upper: layer " + std::to_string(m) + " out of range");
  HiddenStates out = h;
  for (int l = m + 1; l <= config_.n_layers; ++l) out.h = block(out.h, l, out);
  out.layer = config_.n_layers;
  return out;
}

Tensor BoundEncoder::classify(const HiddenStates& h) {
  if (h.layer != config_.n_layers)
    throw ConfigError("classify: expected hidden states at layer " +
                      std::to_string(config_.n_layers) + ", got " + std::to_string(h.layer));
  Tensor logits = tape_.add_rows(tape_.matmul(h.h, param("cls.w")), param("cls.b"));
  Tensor shaped = tape_.reshape(logits, {h.batch_size, h.len, config_.n_tags});
  return tape_.softmax_rows(shaped);
}

HiddenStates mix_hidden(Tape& tape, const HiddenStates& a, const HiddenStates& b,
                        const std::vector<double>& lambda_per_sentence) {
  if (a.layer != b.layer)
    throw ConfigError("mix_hidden: layer tags differ (" + std::to_string(a.layer) + " vs " +
                      std::to_string(b.layer) + ")");
  if (a.batch_size != b.batch_size || a.len != b.len)
    throw ShapeError("mix_hidden: batch geometry differs");
  if (static_cast<int>(lambda_per_sentence.size()) != a.batch_size)
    throw ShapeError("mix_hidden: need one lambda per sentence");
  const std::int64_t row = a.h.size() / a.batch_size;
  std::vector<double> lam(static_cast<std::size_t>(a.h.size()));
  std::vector<double> one_minus(static_cast<std::size_t>(a.h.size()));
  for (int s = 0; s < a.batch_size; ++s) {
    const double l = lambda_per_sentence[static_cast<std::size_t>(s)];
    if (l < 0.0 || l > 1.0)
      throw DomainError("mix_hidden: lambda must be in [0, 1], got " + std::to_string(l));
    for (std::int64_t i = 0; i < row; ++i) {
      lam[static_cast<std::size_t>(s * row + i)] = l;
      one_minus[static_cast<std::size_t>(s * row + i)] = 1.0 - l;
    }
  }
  HiddenStates out = a;
  Tensor lt = tape.constant(a.h.shape(), std::move(lam));
  Tensor ot = tape.constant(a.h.shape(), std::move(one_minus));
  out.h = tape.add(tape.mul(a.h, lt), tape.mul(b.h, ot));
  return out;
}

}  // namespace lada
