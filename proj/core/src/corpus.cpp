#include "lada/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lada/rng.hpp"

namespace lada {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

SubtokenStrategy subtoken_strategy_from_string(const std::string& s) {
  if (s == "none" || s == "None") return SubtokenStrategy::None;
  if (s == "real" || s == "Real") return SubtokenStrategy::Real;
  if (s == "repeat" || s == "Repeat") return SubtokenStrategy::Repeat;
  if (s == "o" || s == "O") return SubtokenStrategy::O;
  throw ConfigError("unknown sub-token strategy '" + s + "' (none|real|repeat|o)");
}

std::string to_string(SubtokenStrategy s) {
  switch (s) {
    case SubtokenStrategy::None: return "none";
    case SubtokenStrategy::Real: return "real";
    case SubtokenStrategy::Repeat: return "repeat";
    case SubtokenStrategy::O: return "o";
  }
  return "?";
}

std::vector<Sentence> parse_conll(const std::string& text, const LabelSet& labels) {
  if (text.empty()) throw DataError("parse_conll: empty input");
  std::vector<Sentence> out;
  Sentence cur;
  int cur_cols = -1;
  int line_no = 0;
  int sentence_start_line = 0;

  auto flush = [&](int at_line) {
    if (cur.tokens.empty()) return;
    const int bad = labels.first_bio_violation(cur.labels);
    if (bad >= 0)
      throw DataError("line " + std::to_string(sentence_start_line + bad) +
                      ": BIO violation: " + labels.tag_name(cur.labels[bad]) +
                      " has no compatible predecessor");
    cur.origin_id = static_cast<int>(out.size());
    out.push_back(std::move(cur));
    cur = Sentence{};
    cur_cols = -1;
    (void)at_line;
  };

  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (blank(line)) {
      flush(line_no);
      continue;
    }
    std::vector<std::string> cols = split_ws(line);
    if (cols[0] == "-DOCSTART-") continue;
    if (cols.size() < 2)
      throw DataError("line " + std::to_string(line_no) +
                      ": expected at least token and tag columns");
    if (cur.tokens.empty()) {
      cur_cols = static_cast<int>(cols.size());
      sentence_start_line = line_no;
    } else if (static_cast<int>(cols.size()) != cur_cols) {
      throw DataError("line " + std::to_string(line_no) +
                      ": inconsistent column count within sentence (" +
                      std::to_string(cols.size()) + " vs " + std::to_string(cur_cols) + ")");
    }
    const std::string& tag = cols.back();
    if (!labels.has_tag(tag))
      throw DataError("line " + std::to_string(line_no) + ": unknown tag '" + tag + "'");
    cur.tokens.push_back(cols[0]);
    cur.labels.push_back(labels.tag_id(tag));
  }
  flush(line_no + 1);
  if (out.empty()) throw DataError("parse_conll: no sentences found");
  return out;
}

std::string serialize_conll(const std::vector<Sentence>& sentences,
                            const LabelSet& labels) {
  std::ostringstream os;
  for (const Sentence& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i)
      os << s.tokens[i] << " " << labels.tag_name(s.labels[i]) << "\n";
    os << "\n";
  }
  return os.str();
}

std::map<int, std::vector<Sentence>> parse_paraphrases(const std::string& text,
                                                       const LabelSet& labels) {
  std::map<int, std::vector<Sentence>> out;
  int group = -1;
  Sentence cur;
  int line_no = 0;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    if (group < 0) throw DataError("paraphrase sentence before any #group header");
    cur.origin_id = group;
    out[group].push_back(std::move(cur));
    cur = Sentence{};
  };
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (blank(line)) {
      flush();
      continue;
    }
    if (line.rfind("#group", 0) == 0) {
      flush();
      std::vector<std::string> cols = split_ws(line);
      if (cols.size() != 2)
        throw DataError("line " + std::to_string(line_no) + ": malformed #group header");
      try {
        group = std::stoi(cols[1]);
      } catch (const std::exception&) {
        throw DataError("line " + std::to_string(line_no) + ": malformed #group id");
      }
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols = split_ws(line);
    cur.tokens.push_back(cols[0]);
    cur.labels.push_back(labels.o_id());
  }
  flush();
  return out;
}

std::string serialize_paraphrases(const std::map<int, std::vector<Sentence>>& groups) {
  std::ostringstream os;
  for (const auto& [id, sents] : groups) {
    os << "#group " << id << "\n";
    for (const Sentence& s : sents) {
      for (const std::string& t : s.tokens) os << t << "\n";
      os << "\n";
    }
  }
  return os.str();
}

std::vector<Sentence> parse_untagged(const std::string& text, const LabelSet& labels) {
  std::vector<Sentence> out;
  Sentence cur;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    cur.origin_id = static_cast<int>(out.size());
    out.push_back(std::move(cur));
    cur = Sentence{};
  };
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (blank(line)) {
      flush();
      continue;
    }
    std::vector<std::string> cols = split_ws(line);
    if (cols[0] == "-DOCSTART-") continue;
    cur.tokens.push_back(cols[0]);
    cur.labels.push_back(labels.o_id());
  }
  flush();
  return out;
}

std::vector<std::string> split_token(const std::string& token) {
  if (token.size() <= 6) return {token};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < token.size(); i += 4)
    out.push_back(token.substr(i, 4));
  return out;
}

SubtokenizedSentence subtokenize(const Sentence& s, SubtokenStrategy strategy,
                                 const LabelSet& labels) {
  if (s.tokens.size() != s.labels.size() || s.tokens.empty())
    throw DataError("subtokenize: sentence must have matching non-empty tokens/labels");
  SubtokenizedSentence out;
  out.origin_id = s.origin_id;
  for (std::size_t t = 0; t < s.tokens.size(); ++t) {
    const int tag = s.labels[t];
    const std::vector<std::string> pieces = split_token(s.tokens[t]);
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      const bool first = p == 0;
      int full = tag;  // the Real expansion, defined for every position
      if (!first && labels.is_b(tag)) full = labels.i_id(labels.type_of(tag));
      int lab = full;
      if (!first) {
        switch (strategy) {
          case SubtokenStrategy::Real: break;
          case SubtokenStrategy::Repeat: lab = tag; break;
          case SubtokenStrategy::O: lab = labels.o_id(); break;
          case SubtokenStrategy::None: lab = LabelSet::kIgnore; break;
        }
      }
      out.subtokens.push_back(pieces[p]);
      out.labels.push_back(lab);
      out.full_labels.push_back(full);
      out.is_first_subtoken.push_back(first ? 1 : 0);
      out.is_special.push_back(0);
      out.source_index.push_back(static_cast<int>(t));
    }
  }
  return out;
}

SubtokenizedSentence add_special_and_pad(const SubtokenizedSentence& s, int max_len,
                                         const LabelSet& labels) {
  const int need = static_cast<int>(s.size()) + 2;
  if (need > max_len)
    throw DataError("add_special_and_pad: sentence needs " + std::to_string(need) +
                    " positions but max_len is " + std::to_string(max_len) +
                    " (refusing to truncate)");
  SubtokenizedSentence out;
  out.origin_id = s.origin_id;
  auto push_special = [&](const char* tok) {
    out.subtokens.push_back(tok);
    out.labels.push_back(labels.special_id());
    out.full_labels.push_back(labels.special_id());
    out.is_first_subtoken.push_back(0);
    out.is_special.push_back(1);
    out.source_index.push_back(-1);
  };
  push_special(kStartToken);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.subtokens.push_back(s.subtokens[i]);
    out.labels.push_back(s.labels[i]);
    out.full_labels.push_back(s.full_labels[i]);
    out.is_first_subtoken.push_back(s.is_first_subtoken[i]);
    out.is_special.push_back(s.is_special[i]);
    out.source_index.push_back(s.source_index[i]);
  }
  push_special(kEndToken);
  while (static_cast<int>(out.size()) < max_len) push_special(kPadToken);
  return out;
}

std::pair<std::vector<Sentence>, std::vector<Sentence>> split_labeled(
    const std::vector<Sentence>& sentences, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw ConfigError("split_labeled: fraction must be in (0, 1], got " +
                      std::to_string(fraction));
  if (sentences.empty()) throw DataError("split_labeled: empty corpus");
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  // round-half-up on fraction * N, minimum 1
  std::size_t take = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(sentences.size()) + 0.5));
  take = std::max<std::size_t>(1, std::min(take, sentences.size()));
  std::pair<std::vector<Sentence>, std::vector<Sentence>> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < take ? out.first : out.second).push_back(sentences[order[i]]);
  return out;
}

std::vector<int> entity_type_counts(const Sentence& s, const LabelSet& labels) {
  std::vector<int> counts(static_cast<std::size_t>(labels.n_types()), 0);
  for (int tag : s.labels)
    if (labels.is_b(tag)) counts[static_cast<std::size_t>(labels.type_of(tag))]++;
  return counts;
}

ParaphraseAudit audit_paraphrase_counts(const Dataset& d) {
  ParaphraseAudit audit;
  for (const auto& [id, group] : d.paraphrases) {
    if (id < 0 || id >= static_cast<int>(d.unlabeled.size()))
      throw DataError("paraphrase group references unknown unlabeled id " +
                      std::to_string(id));
    const std::vector<int> src = entity_type_counts(d.unlabeled[static_cast<std::size_t>(id)],
                                                    d.labels);
    ++audit.groups_checked;
    for (const Sentence& p : group) {
      ++audit.paraphrases_checked;
      if (entity_type_counts(p, d.labels) != src) ++audit.violations;
    }
  }
  return audit;
}

}  // namespace lada
