#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lada/corpus.hpp"

namespace lada {

/// Subtoken vocabulary. Ids 0..3 are fixed (<pad>, <unk>, <s>, </s>); the
/// remaining subtokens are sorted lexicographically so a vocabulary is a
/// pure function of its token set.
class Vocab {
 public:
  static Vocab build(const std::vector<const std::vector<Sentence>*>& corpora);
  static Vocab from_tokens(std::vector<std::string> subtokens);  // checkpoint load

  int id(const std::string& subtoken) const {
    auto it = index_.find(subtoken);
    return it == index_.end() ? kUnk : it->second;
  }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kStart = 2;
  static constexpr int kEnd = 3;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace lada
