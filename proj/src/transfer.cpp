#include "transfer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ernn {

void KernelSpec::validate() const {
  if (sigma <= 0.0) throw ConfigError("kernel sigma must be positive");
  if (degree < 1) throw ConfigError("kernel degree must be >= 1");
}

double kernel(const KernelSpec& spec, const SentenceVector& x,
              const SentenceVector& z) {
  spec.validate();
  if (x.size() != z.size())
    throw DataError("kernel: dimension mismatch " + std::to_string(x.size()) +
                    " vs " + std::to_string(z.size()));
  switch (spec.kind) {
    case KernelKind::rbf:
      return std::exp(-(x - z).squaredNorm() / (2.0 * spec.sigma * spec.sigma));
    case KernelKind::polynomial:
      return std::pow(x.dot(z) + 1.0, spec.degree);
  }
  throw InternalError("unknown kernel kind");
}

RankedSource rank_source(const Corpus& source, const SentenceVector& target_mean,
                         const EmbeddingTable& table, const KernelSpec& spec) {
  if (source.empty()) throw DataError("rank_source: empty source corpus");
  RankedSource ranked;
  ranked.entries.reserve(source.size());
  for (size_t i = 0; i < source.size(); ++i) {
    double score = kernel(spec, sentence_vector(source[i], table), target_mean);
    ranked.entries.emplace_back(static_cast<int>(i), score);
  }
  std::stable_sort(
      ranked.entries.begin(), ranked.entries.end(),
      [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

ReplicationSchedule ReplicationSchedule::default_schedule() {
  return {{{250, 80}, {500, 50}, {800, 30}, {kOpenBound, 1}}};
}

ReplicationSchedule ReplicationSchedule::parse(const std::string& text) {
  // "250:80,500:50,800:30,*:1"
  ReplicationSchedule schedule;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("bad replication schedule entry: " + item);
    std::string bound = item.substr(0, colon);
    int copies = std::stoi(item.substr(colon + 1));
    int upper = bound == "*" ? kOpenBound : std::stoi(bound);
    schedule.bands.push_back({upper, copies});
  }
  schedule.validate();
  return schedule;
}

std::string ReplicationSchedule::to_string() const {
  std::string out;
  for (const auto& band : bands) {
    if (!out.empty()) out += ",";
    out += band.upper_bound == kOpenBound ? "*" : std::to_string(band.upper_bound);
    out += ":" + std::to_string(band.copies);
  }
  return out;
}

int ReplicationSchedule::copies_for_rank(int rank) const {
  for (const auto& band : bands)
    if (rank <= band.upper_bound) return band.copies;
  throw InternalError("replication schedule has no open band");
}

void ReplicationSchedule::validate() const {
  if (bands.empty()) throw ConfigError("replication schedule is empty");
  int prev = 0;
  for (const auto& band : bands) {
    if (band.upper_bound <= prev)
      throw ConfigError("replication schedule bounds must increase");
    if (band.copies < 1)
      throw ConfigError("replication copies must be >= 1");
    prev = band.upper_bound == kOpenBound ? kOpenBound - 1 : band.upper_bound;
  }
  if (bands.back().upper_bound != kOpenBound)
    throw ConfigError("replication schedule must end with an open band");
}

size_t TransferPlan::total_instances() const {
  size_t total = 0;
  for (const auto& e : entries) total += static_cast<size_t>(e.copies);
  return total;
}

TransferPlan plan_top_n(const RankedSource& ranked, int n) {
  if (n < 1) throw ConfigError("plan_top_n requires n >= 1");
  if (static_cast<size_t>(n) > ranked.entries.size())
    throw ConfigError("plan_top_n: n exceeds ranked source size");
  TransferPlan plan;
  plan.strategy = TransferStrategy::top_n;
  plan.entries.reserve(n);
  for (int r = 0; r < n; ++r)
    plan.entries.push_back(
        {r + 1, ranked.entries[r].first, ranked.entries[r].second, 1});
  return plan;
}

TransferPlan plan_replicate(const RankedSource& ranked,
                            const ReplicationSchedule& schedule) {
  schedule.validate();
  TransferPlan plan;
  plan.strategy = TransferStrategy::replicate;
  plan.entries.reserve(ranked.entries.size());
  for (size_t r = 0; r < ranked.entries.size(); ++r) {
    int rank = static_cast<int>(r) + 1;
    plan.entries.push_back({rank, ranked.entries[r].first,
                            ranked.entries[r].second,
                            schedule.copies_for_rank(rank)});
  }
  return plan;
}

Corpus materialize(const TransferPlan& plan, const Corpus& source) {
  Corpus out;
  out.reserve(plan.total_instances());
  for (const auto& e : plan.entries) {
    if (e.source_index < 0 ||
        static_cast<size_t>(e.source_index) >= source.size())
      throw InternalError("transfer plan index out of range: " +
                          std::to_string(e.source_index));
    for (int c = 0; c < e.copies; ++c) out.push_back(source[e.source_index]);
  }
  return out;
}

void save_plan(const std::string& path, const TransferPlan& plan) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write plan file: " + path);
  out << "# strategy\t"
      << (plan.strategy == TransferStrategy::top_n ? "top_n" : "replicate")
      << "\n";
  char buf[64];
  for (const auto& e : plan.entries) {
    std::snprintf(buf, sizeof(buf), "%.12g", e.score);
    out << e.rank << "\t" << e.source_index << "\t" << buf << "\t" << e.copies
        << "\n";
  }
}

TransferPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open plan file: " + path);
  TransferPlan plan;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.find("top_n") != std::string::npos)
        plan.strategy = TransferStrategy::top_n;
      continue;
    }
    std::istringstream ss(line);
    PlanEntry e;
    if (!(ss >> e.rank >> e.source_index >> e.score >> e.copies))
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": expected rank, index, score, copies");
    plan.entries.push_back(e);
  }
  if (plan.entries.empty()) throw DataError(path + ": empty transfer plan");
  return plan;
}

}  // namespace ernn
