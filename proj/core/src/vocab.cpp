#include "lada/vocab.hpp"

#include <algorithm>
#include <set>

namespace lada {

namespace {
const char* kFixed[] = {kPadToken, kUnkToken, kStartToken, kEndToken};
}

Vocab Vocab::build(const std::vector<const std::vector<Sentence>*>& corpora) {
  std::set<std::string> seen;
  for (const auto* corpus : corpora)
    for (const Sentence& s : *corpus)
      for (const std::string& tok : s.tokens)
        for (const std::string& piece : split_token(tok)) seen.insert(piece);
  for (const char* f : kFixed) seen.erase(f);
  std::vector<std::string> tokens(std::begin(kFixed), std::end(kFixed));
  tokens.insert(tokens.end(), seen.begin(), seen.end());
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> subtokens) {
  Vocab v;
  v.tokens_ = std::move(subtokens);
  if (v.tokens_.size() < 4 || v.tokens_[0] != kPadToken || v.tokens_[1] != kUnkToken ||
      v.tokens_[2] != kStartToken || v.tokens_[3] != kEndToken)
    throw DataError("Vocab: first four tokens must be the fixed markers");
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<int>(i)).second)
      throw DataError("Vocab: duplicate token '" + v.tokens_[i] + "'");
  }
  return v;
}

}  // namespace lada
