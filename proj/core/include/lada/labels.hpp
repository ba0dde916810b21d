#pragma once

#include <string>
#include <vector>

#include "lada/error.hpp"

namespace lada {

/// BIO tag inventory over a set of entity types.
///
/// Tag ids are dense and fixed: O is always 0, then B-t/I-t pairs in the
/// order the types were given, and the special-token tag (shared by the
/// sentence-start/end and pad markers) is always the last id, C-1.
class LabelSet {
 public:
  /// Label for positions excluded from the training loss (sub-token
  /// strategy "none"). Not a tag id.
  static constexpr int kIgnore = -1;

  static LabelSet from_types(std::vector<std::string> types);

  int n_tags() const { return static_cast<int>(tags_.size()); }  // C
  int o_id() const { return 0; }
  int special_id() const { return n_tags() - 1; }

  int n_types() const { return static_cast<int>(types_.size()); }
  const std::vector<std::string>& types() const { return types_; }

  const std::string& tag_name(int id) const;
  /// Throws DataError for unknown tag names.
  int tag_id(const std::string& name) const;
  bool has_tag(const std::string& name) const;

  bool is_b(int id) const { return id > 0 && id < special_id() && (id - 1) % 2 == 0; }
  bool is_i(int id) const { return id > 0 && id < special_id() && (id - 1) % 2 == 1; }
  /// Entity type index for a B-/I- tag; -1 for O and the special tag.
  int type_of(int id) const { return (is_b(id) || is_i(id)) ? (id - 1) / 2 : -1; }
  int b_id(int type_index) const { return 1 + 2 * type_index; }
  int i_id(int type_index) const { return 2 + 2 * type_index; }

  /// Validates a BIO sequence; returns the 0-based position of the first
  /// violation or -1 if valid. I-t is legal only after B-t or I-t of the
  /// same type.
  int first_bio_violation(const std::vector<int>& labels) const;

 private:
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
};

}  // namespace lada
