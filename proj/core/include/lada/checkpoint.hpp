#pragma once

#include <string>

#include "lada/encoder.hpp"
#include "lada/labels.hpp"
#include "lada/vocab.hpp"

namespace lada {

/// Everything needed to evaluate a trained model later: encoder config and
/// weights, the subtoken vocabulary, and the tag inventory.
struct Checkpoint {
  EncoderParams params;
  Vocab vocab;
  LabelSet labels;
};

/// Versioned text format. Doubles are written as hexfloats, so
/// save -> load -> save round-trips byte-identically and values bit-exactly.
/// `header_comment` lines (e.g. the run's config hash) are embedded as
/// comments after the version line.
std::string serialize_checkpoint(const Checkpoint& ckpt,
                                 const std::string& header_comment = "");
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt,
                     const std::string& header_comment = "");
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lada
