#include "eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>

namespace ernn {

std::vector<Chunk> extract_chunks(const std::vector<int>& tags,
                                  const TagSet& tagset) {
  if (!is_iob_valid(tags, tagset))
    throw InternalError("extract_chunks on an IOB-invalid sequence; repair it");

  std::vector<Chunk> chunks;
  for (size_t i = 0; i < tags.size(); ++i) {
    TagSet::Kind kind = tagset.kind(tags[i]);
    if (kind == TagSet::Kind::begin) {
      chunks.push_back(
          {tagset.chunk_type(tags[i]), static_cast<int>(i), static_cast<int>(i + 1)});
    } else if (kind == TagSet::Kind::inside) {
      chunks.back().end = static_cast<int>(i + 1);
    }
  }
  return chunks;
}

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

EvalReport score(const Corpus& gold,
                 const std::vector<std::vector<int>>& predicted,
                 const TagSet& tagset) {
  if (gold.size() != predicted.size())
    throw DataError("score: gold and predicted corpus sizes differ");

  EvalReport report;
  for (size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].tags.size() != predicted[s].size())
      throw DataError("score: sentence " + std::to_string(s) +
                      " length mismatch");
    report.tokens += gold[s].tags.size();
    for (size_t t = 0; t < predicted[s].size(); ++t)
      if (gold[s].tags[t] == predicted[s][t]) ++report.correct_tokens;

    std::vector<Chunk> gold_chunks = extract_chunks(gold[s].tags, tagset);
    std::vector<Chunk> pred_chunks = extract_chunks(predicted[s], tagset);
    std::set<Chunk> gold_set(gold_chunks.begin(), gold_chunks.end());

    for (const auto& c : gold_chunks) report.per_type[c.type].gold++;
    for (const auto& c : pred_chunks) {
      auto& ts = report.per_type[c.type];
      ts.predicted++;
      if (gold_set.count(c)) ts.matched++;
    }
  }

  for (const auto& [type, ts] : report.per_type) {
    report.gold_chunks += ts.gold;
    report.predicted_chunks += ts.predicted;
    report.matched_chunks += ts.matched;
  }
  report.precision = report.predicted_chunks == 0
                         ? 0.0
                         : static_cast<double>(report.matched_chunks) /
                               report.predicted_chunks;
  report.recall = report.gold_chunks == 0
                      ? 0.0
                      : static_cast<double>(report.matched_chunks) /
                            report.gold_chunks;
  report.f1 = f1_score(report.precision, report.recall);
  report.token_accuracy =
      report.tokens == 0 ? 0.0
                         : static_cast<double>(report.correct_tokens) /
                               static_cast<double>(report.tokens);
  return report;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%7.2f", 100.0 * v);
  return buf;
}

}  // namespace

void write_report_table(std::ostream& out, const EvalReport& report) {
  out << "type                 P(%)    R(%)   F1(%)    gold    pred   match\n";
  auto row = [&out](const std::string& name, double p, double r, int g,
                    int pr, int m) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-18s%s %s %s %7d %7d %7d\n", name.c_str(),
                  pct(p).c_str(), pct(r).c_str(), pct(f1_score(p, r)).c_str(),
                  g, pr, m);
    out << buf;
  };
  for (const auto& [type, ts] : report.per_type) {
    double p = ts.predicted == 0 ? 0.0 : static_cast<double>(ts.matched) / ts.predicted;
    double r = ts.gold == 0 ? 0.0 : static_cast<double>(ts.matched) / ts.gold;
    row(type, p, r, ts.gold, ts.predicted, ts.matched);
  }
  row("OVERALL", report.precision, report.recall, report.gold_chunks,
      report.predicted_chunks, report.matched_chunks);
  out << "token accuracy " << pct(report.token_accuracy) << "\n";
}

void write_report_kv(std::ostream& out, const EvalReport& report) {
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return std::string(buf);
  };
  out << "precision " << num(report.precision) << "\n";
  out << "recall " << num(report.recall) << "\n";
  out << "f1 " << num(report.f1) << "\n";
  out << "token_accuracy " << num(report.token_accuracy) << "\n";
  out << "gold_chunks " << report.gold_chunks << "\n";
  out << "predicted_chunks " << report.predicted_chunks << "\n";
  out << "matched_chunks " << report.matched_chunks << "\n";
  for (const auto& [type, ts] : report.per_type)
    out << "type." << type << " " << ts.gold << " " << ts.predicted << " "
        << ts.matched << "\n";
}

}  // namespace ernn
