// Co-training loop: two learners trade their most confident labelings of an
// unlabeled pool, with per-learner best-model tracking on a held-out test set.
#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "crf.hpp"
#include "eval.hpp"
#include "neural.hpp"

namespace ernn {

class Learner {
 public:
  virtual ~Learner() = default;
  virtual void train(const Corpus& data) = 0;
  // Predicted (IOB-repaired) tags plus a sentence-level confidence.
  virtual std::pair<std::vector<int>, double> label(
      const TaggedSentence& s) const = 0;
  // Snapshot / restore of the current parameters for best-model tracking.
  virtual void mark_best() = 0;
  virtual void use_best() = 0;
};

struct ConfidentLabel {
  size_t pool_index;
  std::vector<int> tags;
  double confidence;
};

// Positions of the k most confident items, descending confidence, ties by
// input order. Returns all positions when fewer than k items exist.
std::vector<size_t> select_top_k(const std::vector<ConfidentLabel>& labeled,
                                 int k);

struct CotrainConfig {
  int k = 300;             // selections per learner per iteration
  int max_iterations = 10;
  uint64_t seed = 0;
  // per_learner: both learners select k each iteration (the paper's
  // pseudocode); alternate: one learner selects per iteration, matching the
  // reported single-sided pool arithmetic.
  enum class Selection { per_learner, alternate };
  Selection selection = Selection::per_learner;

  void validate() const;
};

struct IterationMetrics {
  int iteration = 0;
  EvalReport learner1;
  EvalReport learner2;
  size_t pool_remaining = 0;
};

struct CotrainResult {
  std::vector<IterationMetrics> log;
  double best_f1_1 = 0.0;
  double best_f1_2 = 0.0;
  int best_iteration_1 = 0;
  int best_iteration_2 = 0;
};

// Post-iteration snapshot of the index bookkeeping, for invariant checks.
struct CotrainState {
  int iteration = 0;
  std::vector<size_t> s1_pool_indices;  // pool sentences added to learner 1
  std::vector<size_t> s2_pool_indices;
  std::vector<size_t> remaining;
  size_t s1_size = 0;
  size_t s2_size = 0;
};

using CotrainObserver = std::function<void(const CotrainState&)>;

CotrainResult cotrain(Learner& learner1, Learner& learner2,
                      const Corpus& labeled, const Corpus& pool,
                      const Corpus& test, const TagSet& tagset,
                      const CotrainConfig& cfg,
                      const CotrainObserver& observer = nullptr);

// Concrete learners used by the experiments.

class ErnnLearner : public Learner {
 public:
  ErnnLearner(const EmbeddingTable& table, SourceSummary summary,
              TrainConfig cfg, ActivationSpec act, const TagSet& tagset);

  void train(const Corpus& data) override;
  std::pair<std::vector<int>, double> label(const TaggedSentence& s) const override;
  void mark_best() override;
  void use_best() override;

  const ErnnParams& params() const { return params_; }

 private:
  const EmbeddingTable& table_;
  SourceSummary summary_;
  TrainConfig cfg_;
  ActivationSpec act_;
  const TagSet& tagset_;
  ErnnParams params_;
  ErnnParams best_;
  bool trained_ = false;
};

class CrfLearner : public Learner {
 public:
  CrfLearner(size_t vocab_size, CrfTemplates templates, CrfTrainConfig cfg,
             const TagSet& tagset);

  void train(const Corpus& data) override;
  std::pair<std::vector<int>, double> label(const TaggedSentence& s) const override;
  void mark_best() override;
  void use_best() override;

  const CrfParams& params() const { return params_; }

 private:
  size_t vocab_size_;
  CrfTemplates templates_;
  CrfTrainConfig cfg_;
  const TagSet& tagset_;
  CrfParams params_;
  CrfParams best_;
  bool trained_ = false;
};

}  // namespace ernn
