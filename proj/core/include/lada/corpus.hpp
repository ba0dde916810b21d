#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lada/labels.hpp"

namespace lada {

// Marker strings for subword and special positions. Tokens in the column
// format are whitespace-delimited, so none of these can collide with data.
inline constexpr const char* kStartToken = "<s>";
inline constexpr const char* kEndToken = "</s>";
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<int> labels;  // tag ids, aligned with tokens
  int origin_id = -1;
};

struct SubtokenizedSentence {
  std::vector<std::string> subtokens;
  /// Loss labels per the chosen strategy; may contain LabelSet::kIgnore.
  std::vector<int> labels;
  /// Always-defined labels (the B->I expansion), used when a position's tag
  /// is needed regardless of strategy, e.g. as a mixing partner.
  std::vector<int> full_labels;
  std::vector<std::uint8_t> is_first_subtoken;
  std::vector<std::uint8_t> is_special;
  /// Subtoken -> source token index; -1 for specials and pads.
  std::vector<int> source_index;
  int origin_id = -1;

  std::size_t size() const { return subtokens.size(); }
};

/// Sub-token labeling strategies: what tag the non-first pieces of a split
/// token receive. First pieces always keep the original tag.
enum class SubtokenStrategy {
  None,    // ignore marker, excluded from the loss
  Real,    // O->O..., I-t->I-t..., B-t->B-t I-t...
  Repeat,  // every piece copies the original tag
  O,       // non-first pieces get O
};

SubtokenStrategy subtoken_strategy_from_string(const std::string& s);
std::string to_string(SubtokenStrategy s);

struct Dataset {
  LabelSet labels;
  std::vector<Sentence> labeled;
  /// Unlabeled training sentences. For synthetic data the gold labels are
  /// kept (the trainer never reads them; audits do).
  std::vector<Sentence> unlabeled;
  /// Unlabeled origin id -> paraphrase sentences.
  std::map<int, std::vector<Sentence>> paraphrases;
  std::vector<Sentence> dev;
  std::vector<Sentence> test;
};

/// Parses the one-token-per-line column format: whitespace-separated
/// columns, tag in the last column, blank line between sentences, and
/// -DOCSTART- document separators skipped. Column counts must be consistent
/// within a sentence. BIO violations, unknown tags and ragged columns throw
/// DataError with the 1-based line number.
std::vector<Sentence> parse_conll(const std::string& text, const LabelSet& labels);

/// Canonical serialization: "token<space>tag" lines, one blank line after
/// every sentence. parse_conll(serialize_conll(x)) == x.
std::string serialize_conll(const std::vector<Sentence>& sentences,
                            const LabelSet& labels);

/// Paraphrase files share the column format minus the tag column; groups
/// are introduced by "#group <unlabeled-id>" header lines. Labels of the
/// parsed sentences are filled with O placeholders.
std::map<int, std::vector<Sentence>> parse_paraphrases(const std::string& text,
                                                       const LabelSet& labels);
std::string serialize_paraphrases(const std::map<int, std::vector<Sentence>>& groups);

/// Untagged sentence-per-blank-line token file (unlabeled data). Labels are
/// O placeholders.
std::vector<Sentence> parse_untagged(const std::string& text, const LabelSet& labels);
std::string serialize_untagged(const std::vector<Sentence>& sentences);

/// Deterministic rule-based splitter: tokens longer than 6 characters are
/// cut into 4-character pieces (the last piece may be shorter).
std::vector<std::string> split_token(const std::string& token);

SubtokenizedSentence subtokenize(const Sentence& s, SubtokenStrategy strategy,
                                 const LabelSet& labels);

/// Prepends the sentence-start marker, appends the end marker, then pads to
/// max_len. All three carry the special tag. Throws DataError when the
/// sentence does not fit (|subtokens| + 2 > max_len).
SubtokenizedSentence add_special_and_pad(const SubtokenizedSentence& s, int max_len,
                                         const LabelSet& labels);

/// Seeded shuffled split. Subset size = round-half-up(fraction * N), at
/// least 1. Returns (subset, remainder); both keep the shuffled order.
std::pair<std::vector<Sentence>, std::vector<Sentence>> split_labeled(
    const std::vector<Sentence>& sentences, double fraction, std::uint64_t seed);

/// Gold entity occurrences per type (count of B- tags).
std::vector<int> entity_type_counts(const Sentence& s, const LabelSet& labels);

struct ParaphraseAudit {
  int groups_checked = 0;
  int paraphrases_checked = 0;
  int violations = 0;  // paraphrases whose per-type counts differ from the source
};

/// Checks every paraphrase group's per-type gold entity counts against its
/// source unlabeled sentence.
ParaphraseAudit audit_paraphrase_counts(const Dataset& d);

}  // namespace lada
