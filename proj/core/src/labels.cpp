#include "lada/labels.hpp"

namespace lada {

namespace {
const std::string kSpecialTag = "SPECIAL";
}

LabelSet LabelSet::from_types(std::vector<std::string> types) {
  if (types.empty()) throw DataError("LabelSet: at least one entity type required");
  LabelSet ls;
  ls.types_ = std::move(types);
  ls.tags_.push_back("O");
  for (const std::string& t : ls.types_) {
    if (t.empty() || t == "O" || t == kSpecialTag)
      throw DataError("LabelSet: invalid entity type name '" + t + "'");
    ls.tags_.push_back("B-" + t);
    ls.tags_.push_back("I-" + t);
  }
  ls.tags_.push_back(kSpecialTag);
  return ls;
}

const std::string& LabelSet::tag_name(int id) const {
  if (id < 0 || id >= n_tags())
    throw DataError("LabelSet: tag id " + std::to_string(id) + " out of range");
  return tags_[static_cast<std::size_t>(id)];
}

int LabelSet::tag_id(const std::string& name) const {
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == name) return static_cast<int>(i);
  throw DataError("LabelSet: unknown tag '" + name + "'");
}

bool LabelSet::has_tag(const std::string& name) const {
  for (const std::string& t : tags_)
    if (t == name) return true;
  return false;
}

int LabelSet::first_bio_violation(const std::vector<int>& labels) const {
  int prev = o_id();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int cur = labels[i];
    if (is_i(cur)) {
      const bool ok = (is_b(prev) || is_i(prev)) && type_of(prev) == type_of(cur);
      if (!ok) return static_cast<int>(i);
    }
    prev = cur;
  }
  return -1;
}

}  // namespace lada
