// Instance transfer: kernel similarity between source sentences and the
// target corpus mean, ranking, and the two selection strategies (top-n and
// rank-dependent replication).
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "embeddings.hpp"

namespace ernn {

enum class KernelKind { rbf, polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;  // rbf bandwidth
  int degree = 2;      // polynomial degree

  void validate() const;
};

// rbf: exp(-|x - z|^2 / (2 sigma^2)); polynomial: (x . z + 1)^degree.
double kernel(const KernelSpec& spec, const SentenceVector& x,
              const SentenceVector& z);

// (source index, similarity) in descending score order; ties keep corpus order.
struct RankedSource {
  std::vector<std::pair<int, double>> entries;
};

RankedSource rank_source(const Corpus& source, const SentenceVector& target_mean,
                         const EmbeddingTable& table, const KernelSpec& spec);

struct ReplicationBand {
  int upper_bound;  // inclusive 1-based rank bound; kOpenBound = no bound
  int copies;
};

inline constexpr int kOpenBound = std::numeric_limits<int>::max();

struct ReplicationSchedule {
  std::vector<ReplicationBand> bands;

  // Ranks 1-250 copied 80x, 251-500 50x, 501-800 30x, 801+ once.
  static ReplicationSchedule default_schedule();
  static ReplicationSchedule parse(const std::string& text);
  std::string to_string() const;

  int copies_for_rank(int rank) const;  // rank is 1-based
  void validate() const;
};

enum class TransferStrategy { top_n, replicate };

struct PlanEntry {
  int rank;          // 1-based
  int source_index;  // into the ranked source corpus
  double score;
  int copies;
};

struct TransferPlan {
  TransferStrategy strategy = TransferStrategy::replicate;
  std::vector<PlanEntry> entries;

  size_t total_instances() const;
};

TransferPlan plan_top_n(const RankedSource& ranked, int n);

TransferPlan plan_replicate(const RankedSource& ranked,
                            const ReplicationSchedule& schedule);

// Expands the plan against the source corpus: rank order, copies adjacent.
Corpus materialize(const TransferPlan& plan, const Corpus& source);

// One `rank<TAB>source_index<TAB>score<TAB>copies` line per entry.
void save_plan(const std::string& path, const TransferPlan& plan);
TransferPlan load_plan(const std::string& path);

}  // namespace ernn
