#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lada/corpus.hpp"
#include "lada/params.hpp"
#include "lada/tensor.hpp"
#include "lada/vocab.hpp"

namespace lada {

/// Dimensions of the splittable L-layer token encoder.
struct EncoderConfig {
  int vocab_size = 0;
  int n_tags = 0;  // classifier output width C
  int max_len = 32;
  int d_model = 64;
  int n_heads = 2;
  int d_ff = 128;
  int n_layers = 4;
  double ln_eps = 1e-5;

  int head_dim() const { return d_model / n_heads; }
  void validate() const;
};

struct EncoderParams {
  EncoderConfig config;
  ParameterStore store;
};

/// Deterministic initialization: projections uniform with scale 1/sqrt(fan_in),
/// embeddings uniform with scale 0.02, biases and layer-norm shifts zero.
EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed);

/// A padded batch ready for encoding: token ids plus an attend flag per
/// position (1 for real and special tokens, 0 for pads, which are masked out
/// of attention).
struct TokenBatch {
  int size = 0;
  int len = 0;
  std::vector<int> token_ids;         // size * len
  std::vector<std::uint8_t> attend;   // size * len

  static TokenBatch from_sentences(const std::vector<const SubtokenizedSentence*>& sents,
                                   const Vocab& vocab);
};

/// Hidden representations at a given layer, tagged so the split forward can
/// be validated. The tensor is flattened to (size*len, d_model); the attend
/// mask travels with it because the upper layers still need it.
struct HiddenStates {
  int layer = -1;
  Tensor h;
  int batch_size = 0;
  int len = 0;
  std::vector<std::uint8_t> attend;
};

/// Encoder parameters bound as leaves on one tape. Binding is what makes a
/// training step's gradients reachable; evaluation binds with trainable =
/// false.
class BoundEncoder {
 public:
  BoundEncoder(Tape& tape, const EncoderParams& params, bool trainable);

  /// Embeddings plus blocks 1..m. m = 0 returns the embeddings.
  HiddenStates forward_lower(const TokenBatch& x, int m);
  /// Blocks m+1..L. h must be tagged with layer m; m = L is the identity.
  HiddenStates forward_upper(const HiddenStates& h, int m);
  /// Linear projection + row softmax over tags: (batch, len, C).
  Tensor classify(const HiddenStates& h);

  Tensor param(const std::string& name) const;
  /// Gradient of a bound parameter after Tape::backward.
  const std::vector<double>& grad(const std::string& name) const;
  const EncoderConfig& config() const { return config_; }
  Tape& tape() { return tape_; }

 private:
  Tensor block(const Tensor& h, int layer_index, const HiddenStates& meta);
  Tensor attention_mask(const TokenBatch& x) const;
  Tensor attention_mask(const HiddenStates& h) const;

  Tape& tape_;
  EncoderConfig config_;
  std::unordered_map<std::string, Tensor> bound_;
};

/// Convex combination of two lower-forward states with a per-sentence ratio:
/// row b gets lambda[b]*a + (1-lambda[b])*b. The result keeps a's layer tag
/// and attend mask.
HiddenStates mix_hidden(Tape& tape, const HiddenStates& a, const HiddenStates& b,
                        const std::vector<double>& lambda_per_sentence);

}  // namespace lada
