#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lada/corpus.hpp"
#include "lada/encoder.hpp"
#include "lada/vocab.hpp"

namespace lada {

/// Brute-force k-nearest-neighbor lists under l2 distance in sentence
/// embedding space. Neighbor lists exclude the sentence itself, are sorted
/// by ascending distance, and break ties by ascending sentence id. Immutable
/// after build.
struct KnnIndex {
  int k = 0;
  int dim = 0;
  std::vector<std::vector<double>> embeddings;  // |S| x dim
  std::vector<std::vector<int>> neighbors;      // |S| x k

  int size() const { return static_cast<int>(neighbors.size()); }
  bool contains(int id) const { return id >= 0 && id < size(); }
  /// Stored neighbor list; throws DataError for unknown ids.
  const std::vector<int>& query(int id) const;
};

/// Mean of the final-layer hidden states over real-token positions
/// (specials and pads excluded). The sentence is subtokenized and padded
/// internally; the embedding dimension equals d_model.
std::vector<double> embed_sentence(const Sentence& s, const Vocab& vocab,
                                   const EncoderParams& params);

/// Batched embedding of a corpus (one forward per batch of sentences).
std::vector<std::vector<double>> embed_corpus(const std::vector<Sentence>& corpus,
                                              const Vocab& vocab,
                                              const EncoderParams& params,
                                              int batch_size = 16);

/// Exact all-pairs build; requires k < |corpus|.
KnnIndex build_index(const std::vector<Sentence>& corpus, int k, const Vocab& vocab,
                     const EncoderParams& params);

double l2_distance(const std::vector<double>& a, const std::vector<double>& b);

/// Content hash of (corpus tokens, parameter bits, k) for the on-disk cache.
std::uint64_t knn_cache_key(const std::vector<Sentence>& corpus, int k,
                            const EncoderParams& params);

/// Text cache of neighbor lists ("id: n1 n2 n3" lines). Loading verifies the
/// content key and returns false on any mismatch.
void save_neighbor_cache(const std::string& path, const KnnIndex& index,
                         std::uint64_t key);
bool load_neighbor_cache(const std::string& path, std::uint64_t key, KnnIndex* out);

}  // namespace lada
