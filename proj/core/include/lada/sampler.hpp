#pragma once

#include <optional>
#include <vector>

#include "lada/corpus.hpp"
#include "lada/knn_index.hpp"
#include "lada/rng.hpp"

namespace lada {

enum class MixStrategy { Random, Intra, Inter };
std::string to_string(MixStrategy s);

/// Partner-sampling policy for hidden-state interpolation.
struct MixPolicy {
  enum class Mode { Random, Intra, Inter, Combined };
  Mode mode = Mode::Inter;
  /// Beta(alpha, alpha) parameter for the mixing ratio.
  double alpha = 8.0;
  /// Candidate layers for the interpolation point; one is drawn uniformly.
  std::vector<int> mix_layers = {2, 3};
  /// Weight of kNN sampling vs whole-corpus sampling in Inter mode.
  double mu = 0.5;
  int k = 3;
  /// Probability of Intra in Combined mode (Inter otherwise).
  double pi = 0.3;
  /// Optional lambda folding to max(lambda, 1-lambda); off by default, the
  /// ratio is used as drawn.
  bool fold_lambda = false;

  void validate() const;
  bool needs_index() const { return mode == Mode::Inter || mode == Mode::Combined; }
};

MixPolicy::Mode mix_mode_from_string(const std::string& s);
std::string to_string(MixPolicy::Mode m);

/// One resolved augmentation decision for an anchor sentence.
struct MixPlan {
  int anchor_id = -1;
  MixStrategy strategy = MixStrategy::Random;
  /// Inter/Random: labeled-corpus id of the partner (may equal the anchor).
  int partner_id = -1;
  /// Intra: the real-token permutation applied to the anchor.
  std::vector<std::size_t> permutation;
  double lambda = 1.0;
  int mix_layer = 0;
};

/// lambda ~ Beta(alpha, alpha); alpha must be positive.
double sample_lambda(double alpha, Rng& rng);

/// Uniformly random joint permutation of tokens and labels.
Sentence sample_intra(const Sentence& s, Rng& rng);
Sentence apply_permutation(const Sentence& s, const std::vector<std::size_t>& perm);

/// Two-stage mixture: with probability mu a uniform draw among the anchor's
/// k neighbors, otherwise a uniform draw over the whole labeled corpus (the
/// anchor itself included).
int sample_inter(int anchor_id, const KnnIndex& index, double mu, int corpus_size,
                 Rng& rng);

/// Resolves strategy, partner, lambda and mix layer for one anchor.
/// `anchor_len` is the anchor's raw token count (needed for Intra
/// permutations). `forced_layer` pins the layer when the trainer draws it
/// once per batch.
MixPlan make_mix_plan(int anchor_id, std::size_t anchor_len, int corpus_size,
                      const MixPolicy& policy, const KnnIndex* index, Rng& rng,
                      std::optional<int> forced_layer = std::nullopt);

}  // namespace lada
