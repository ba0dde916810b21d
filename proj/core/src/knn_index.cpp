#include "lada/knn_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lada/io.hpp"

namespace lada {

const std::vector<int>& KnnIndex::query(int id) const {
  if (!contains(id))
    throw DataError("KnnIndex::query: unknown sentence id " + std::to_string(id));
  return neighbors[static_cast<std::size_t>(id)];
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

// Labels play no role in embeddings, so sentences are subtokenized and
// padded directly into token ids here.
struct PaddedTokens {
  std::vector<int> ids;
  std::vector<std::uint8_t> real;  // 1 for genuine subtokens only
};

PaddedTokens pad_tokens(const Sentence& s, const Vocab& vocab, int max_len) {
  PaddedTokens out;
  out.ids.push_back(Vocab::kStart);
  out.real.push_back(0);
  for (const std::string& tok : s.tokens)
    for (const std::string& piece : split_token(tok)) {
      out.ids.push_back(vocab.id(piece));
      out.real.push_back(1);
    }
  out.ids.push_back(Vocab::kEnd);
  out.real.push_back(0);
  if (static_cast<int>(out.ids.size()) > max_len)
    throw DataError("embed_sentence: sentence needs " + std::to_string(out.ids.size()) +
                    " positions but max_len is " + std::to_string(max_len));
  while (static_cast<int>(out.ids.size()) < max_len) {
    out.ids.push_back(Vocab::kPad);
    out.real.push_back(0);
  }
  return out;
}

}  // namespace

std::vector<std::vector<double>> embed_corpus(const std::vector<Sentence>& corpus,
                                              const Vocab& vocab,
                                              const EncoderParams& params,
                                              int batch_size) {
  std::vector<std::vector<double>> out;
  out.reserve(corpus.size());
  const int d = params.config.d_model;
  const int T = params.config.max_len;
  for (std::size_t begin = 0; begin < corpus.size();
       begin += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(corpus.size(), begin + static_cast<std::size_t>(batch_size));
    std::vector<PaddedTokens> padded;
    TokenBatch batch;
    batch.size = static_cast<int>(end - begin);
    batch.len = T;
    for (std::size_t i = begin; i < end; ++i) {
      if (corpus[i].tokens.empty()) throw DataError("embed_sentence: empty sentence");
      PaddedTokens p = pad_tokens(corpus[i], vocab, T);
      batch.token_ids.insert(batch.token_ids.end(), p.ids.begin(), p.ids.end());
      for (int id : p.ids) batch.attend.push_back(id == Vocab::kPad ? 0 : 1);
      padded.push_back(std::move(p));
    }
    Tape tape;
    BoundEncoder enc(tape, params, false);
    HiddenStates h = enc.forward_lower(batch, params.config.n_layers);
    const std::vector<double>& values = h.h.values();
    for (std::size_t i = 0; i < padded.size(); ++i) {
      std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
      int count = 0;
      for (int t = 0; t < T; ++t) {
        if (!padded[i].real[static_cast<std::size_t>(t)]) continue;
        ++count;
        const double* row =
            values.data() + (static_cast<std::size_t>(i) * T + static_cast<std::size_t>(t)) * d;
        for (int c = 0; c < d; ++c) mean[static_cast<std::size_t>(c)] += row[c];
      }
      if (count == 0) throw DataError("embed_sentence: sentence has no real tokens");
      for (double& v : mean) v /= static_cast<double>(count);
      out.push_back(std::move(mean));
    }
  }
  return out;
}

std::vector<double> embed_sentence(const Sentence& s, const Vocab& vocab,
                                   const EncoderParams& params) {
  if (s.tokens.empty()) throw DataError("embed_sentence: empty sentence");
  return embed_corpus({s}, vocab, params, 1).front();
}

KnnIndex build_index(const std::vector<Sentence>& corpus, int k, const Vocab& vocab,
                     const EncoderParams& params) {
  if (k < 1) throw ConfigError("build_index: k must be >= 1");
  if (k >= static_cast<int>(corpus.size()))
    throw ConfigError("build_index: k (" + std::to_string(k) +
                      ") must be smaller than the corpus (" +
                      std::to_string(corpus.size()) + ")");
  KnnIndex index;
  index.k = k;
  index.dim = params.config.d_model;
  index.embeddings = embed_corpus(corpus, vocab, params);
  const int n = static_cast<int>(corpus.size());
  index.neighbors.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, int>> dist;
  for (int i = 0; i < n; ++i) {
    dist.clear();
    dist.reserve(static_cast<std::size_t>(n) - 1);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      dist.emplace_back(l2_distance(index.embeddings[static_cast<std::size_t>(i)],
                                    index.embeddings[static_cast<std::size_t>(j)]),
                        j);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<int>& nb = index.neighbors[static_cast<std::size_t>(i)];
    nb.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) nb.push_back(dist[static_cast<std::size_t>(j)].second);
  }
  return index;
}

std::uint64_t knn_cache_key(const std::vector<Sentence>& corpus, int k,
                            const EncoderParams& params) {
  // FNV-1a over the corpus tokens, parameter bit patterns and k.
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t kk = static_cast<std::uint64_t>(k);
  eat(&kk, sizeof kk);
  for (const Sentence& s : corpus)
    for (const std::string& t : s.tokens) eat(t.data(), t.size() + 1);
  for (const Parameter& p : params.store.all())
    eat(p.values.data(), p.values.size() * sizeof(double));
  return h;
}

void save_neighbor_cache(const std::string& path, const KnnIndex& index,
                         std::uint64_t key) {
  std::ostringstream os;
  os << "# knn-cache " << key << " k " << index.k << " n " << index.size() << "\n";
  for (int i = 0; i < index.size(); ++i) {
    os << i << ":";
    for (int nb : index.neighbors[static_cast<std::size_t>(i)]) os << " " << nb;
    os << "\n";
  }
  write_file(path, os.str());
}

bool load_neighbor_cache(const std::string& path, std::uint64_t key, KnnIndex* out) {
  std::ifstream in(path);
  if (!in) return false;
  std::string header;
  if (!std::getline(in, header)) return false;
  std::istringstream hs(header);
  std::string hash_tag, cache_tag, k_tag, n_tag;
  std::uint64_t file_key = 0;
  int k = 0, n = 0;
  hs >> hash_tag >> cache_tag >> file_key >> k_tag >> k >> n_tag >> n;
  if (hash_tag != "#" || cache_tag != "knn-cache" || file_key != key || k < 1 || n < 1)
    return false;
  KnnIndex index;
  index.k = k;
  index.neighbors.resize(static_cast<std::size_t>(n));
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) return false;
    std::istringstream ls(line);
    std::string id_part;
    ls >> id_part;
    if (id_part != std::to_string(i) + ":") return false;
    std::vector<int>& nb = index.neighbors[static_cast<std::size_t>(i)];
    int v;
    while (ls >> v) nb.push_back(v);
    if (static_cast<int>(nb.size()) != k) return false;
  }
  *out = std::move(index);
  return true;
}

}  // namespace lada
