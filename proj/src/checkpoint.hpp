// Self-describing text checkpoints for all four model kinds. Tensors are
// stored row-major with full precision; loads reject vocabulary or tagset
// fingerprint mismatches.
#pragma once

#include <optional>
#include <string>
#include <variant>

#include "crf.hpp"
#include "hmm.hpp"
#include "neural.hpp"

namespace ernn {

enum class ModelKind { hmm, crf, rnn, ernn };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct Checkpoint {
  ModelKind kind = ModelKind::rnn;
  uint64_t vocab_fingerprint = 0;
  uint64_t tagset_fingerprint = 0;
  ActivationSpec activation;  // rnn / ernn
  std::variant<HmmParams, CrfParams, RnnParams, ErnnParams> params;
  std::optional<SourceSummary> summary;  // ernn
};

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

// Fingerprint arguments of 0 skip the corresponding check.
Checkpoint load_checkpoint(const std::string& path,
                           uint64_t expect_vocab_fingerprint = 0,
                           uint64_t expect_tagset_fingerprint = 0);

}  // namespace ernn
