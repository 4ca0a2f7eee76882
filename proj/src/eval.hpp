// Entity-level scoring: IOB chunks, exact span-and-type matching, micro
// precision/recall/F1 and token accuracy. The single scoring authority for
// every experiment.
#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace ernn {

struct Chunk {
  std::string type;
  int begin = 0;  // token index, inclusive
  int end = 0;    // token index, exclusive

  bool operator==(const Chunk&) const = default;
  bool operator<(const Chunk& o) const {
    return std::tie(begin, end, type) < std::tie(o.begin, o.end, o.type);
  }
};

// Maximal B-X (I-X)* runs. Throws InternalError on IOB-invalid input; run
// repair_iob upstream.
std::vector<Chunk> extract_chunks(const std::vector<int>& tags,
                                  const TagSet& tagset);

struct TypeScore {
  int gold = 0;
  int predicted = 0;
  int matched = 0;
};

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double token_accuracy = 0.0;
  int gold_chunks = 0;
  int predicted_chunks = 0;
  int matched_chunks = 0;
  size_t tokens = 0;
  size_t correct_tokens = 0;
  std::map<std::string, TypeScore> per_type;
};

double f1_score(double precision, double recall);

EvalReport score(const Corpus& gold, const std::vector<std::vector<int>>& predicted,
                 const TagSet& tagset);

// Human-readable aligned table with the per-type breakdown.
void write_report_table(std::ostream& out, const EvalReport& report);
// Machine-readable `key value` lines.
void write_report_kv(std::ostream& out, const EvalReport& report);

}  // namespace ernn
