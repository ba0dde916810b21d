#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lada/corpus.hpp"

namespace lada {

/// Configuration for the synthetic sequence-labeling corpus generator.
///
/// File format: one "key = value" per line plus repeated list entries.
///   types = PER,LOC,ORG
///   count_labeled = 500
///   count_unlabeled = 1000
///   count_dev = 100
///   count_test = 500
///   paraphrases_per_unlabeled = 2
///   violation_fraction = 0.0
///   gazetteer PER = Ann, Bob Marley, ...
///   template = {PER} visits {LOC} today .
/// Templates are whitespace-tokenized; {TYPE} tokens are entity slots filled
/// from the type's gazetteer. Multi-word gazetteer entries expand to
/// B-t I-t... spans.
struct SynthSpec {
  std::vector<std::string> types;
  std::map<std::string, std::vector<std::string>> gazetteers;
  std::vector<std::string> templates;
  int count_labeled = 0;
  int count_unlabeled = 0;
  int count_dev = 0;
  int count_test = 0;
  int paraphrases_per_unlabeled = 1;  // K
  /// Fraction of paraphrases deliberately generated with a different entity
  /// count, for robustness tests of the count audit.
  double violation_fraction = 0.0;

  static SynthSpec parse(const std::string& text);
  static SynthSpec parse_file(const std::string& path);
  void validate() const;
};

/// Deterministic synthetic dataset. Paraphrases of an unlabeled sentence
/// re-render the same entity multiset into a different template with the
/// same slot signature, so per-type entity counts are preserved by
/// construction (unless the violation fraction kicks in).
Dataset gen_synthetic(const SynthSpec& spec, std::uint64_t seed);

/// A compact built-in spec (3 entity types, ~40-entry gazetteers, ~30
/// templates) used by the experiment suites and as a gen-data starting
/// point.
std::string builtin_synth_spec();

}  // namespace lada
