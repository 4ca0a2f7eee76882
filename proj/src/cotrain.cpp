#include "cotrain.hpp"

#include <algorithm>
#include <set>

namespace ernn {

std::vector<size_t> select_top_k(const std::vector<ConfidentLabel>& labeled,
                                 int k) {
  if (k < 1) throw ConfigError("select_top_k requires k >= 1");
  std::vector<size_t> positions(labeled.size());
  for (size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  std::stable_sort(positions.begin(), positions.end(), [&](size_t a, size_t b) {
    return labeled[a].confidence > labeled[b].confidence;
  });
  if (positions.size() > static_cast<size_t>(k)) positions.resize(k);
  return positions;
}

void CotrainConfig::validate() const {
  if (k < 1) throw ConfigError("cotrain k must be >= 1");
  if (max_iterations < 1) throw ConfigError("cotrain max_iterations must be >= 1");
}

namespace {

EvalReport evaluate_learner(const Learner& learner, const Corpus& test,
                            const TagSet& tagset) {
  std::vector<std::vector<int>> predicted;
  predicted.reserve(test.size());
  for (const auto& s : test) predicted.push_back(learner.label(s).first);
  return score(test, predicted, tagset);
}

}  // namespace

CotrainResult cotrain(Learner& learner1, Learner& learner2,
                      const Corpus& labeled, const Corpus& pool,
                      const Corpus& test, const TagSet& tagset,
                      const CotrainConfig& cfg, const CotrainObserver& observer) {
  cfg.validate();
  if (labeled.empty()) throw DataError("cotrain: empty labeled set");
  if (test.empty()) throw DataError("cotrain: empty test set");

  Corpus s1 = labeled;
  Corpus s2 = labeled;
  std::vector<size_t> remaining(pool.size());
  for (size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::vector<size_t> s1_from_pool, s2_from_pool;

  CotrainResult result;
  for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
    learner1.train(s1);
    learner2.train(s2);

    IterationMetrics metrics;
    metrics.iteration = iteration;
    metrics.learner1 = evaluate_learner(learner1, test, tagset);
    metrics.learner2 = evaluate_learner(learner2, test, tagset);

    if (metrics.learner1.f1 > result.best_f1_1) {
      result.best_f1_1 = metrics.learner1.f1;
      result.best_iteration_1 = iteration;
      learner1.mark_best();
    }
    if (metrics.learner2.f1 > result.best_f1_2) {
      result.best_f1_2 = metrics.learner2.f1;
      result.best_iteration_2 = iteration;
      learner2.mark_best();
    }

    if (!remaining.empty()) {
      std::vector<ConfidentLabel> labeled1, labeled2;
      bool use1 = cfg.selection == CotrainConfig::Selection::per_learner ||
                  iteration % 2 == 1;
      bool use2 = cfg.selection == CotrainConfig::Selection::per_learner ||
                  iteration % 2 == 0;
      for (size_t idx : remaining) {
        if (use1) {
          auto [tags, conf] = learner1.label(pool[idx]);
          labeled1.push_back({idx, std::move(tags), conf});
        }
        if (use2) {
          auto [tags, conf] = learner2.label(pool[idx]);
          labeled2.push_back({idx, std::move(tags), conf});
        }
      }

      // winner[pool index] = (labeling learner, tags). When both learners
      // select the same sentence the higher-confidence labeling wins and the
      // sentence is consumed once, keeping the train sets disjoint.
      std::map<size_t, std::pair<int, const ConfidentLabel*>> chosen;
      for (size_t pos : select_top_k(labeled1, cfg.k)) {
        const ConfidentLabel& c = labeled1[pos];
        chosen[c.pool_index] = {1, &c};
      }
      for (size_t pos : select_top_k(labeled2, cfg.k)) {
        const ConfidentLabel& c = labeled2[pos];
        auto it = chosen.find(c.pool_index);
        if (it == chosen.end() || c.confidence > it->second.second->confidence)
          chosen[c.pool_index] = {2, &c};
      }

      std::set<size_t> consumed;
      for (const auto& [pool_index, pick] : chosen) {
        const auto& [who, label] = pick;
        TaggedSentence moved;
        moved.tokens = pool[pool_index].tokens;
        moved.tags = label->tags;
        // cross-teaching: a learner's confident labels train the other one
        if (who == 1) {
          s2.push_back(std::move(moved));
          s2_from_pool.push_back(pool_index);
        } else {
          s1.push_back(std::move(moved));
          s1_from_pool.push_back(pool_index);
        }
        consumed.insert(pool_index);
      }
      std::erase_if(remaining,
                    [&consumed](size_t idx) { return consumed.count(idx) > 0; });
    }

    metrics.pool_remaining = remaining.size();
    result.log.push_back(std::move(metrics));

    if (observer) {
      CotrainState state;
      state.iteration = iteration;
      state.s1_pool_indices = s1_from_pool;
      state.s2_pool_indices = s2_from_pool;
      state.remaining = remaining;
      state.s1_size = s1.size();
      state.s2_size = s2.size();
      observer(state);
    }

    if (remaining.empty()) break;
  }
  return result;
}

// ---------------------------------------------------------------- ErnnLearner

ErnnLearner::ErnnLearner(const EmbeddingTable& table, SourceSummary summary,
                         TrainConfig cfg, ActivationSpec act,
                         const TagSet& tagset)
    : table_(table),
      summary_(std::move(summary)),
      cfg_(cfg),
      act_(act),
      tagset_(tagset) {}

void ErnnLearner::train(const Corpus& data) {
  params_ = train_ernn(data, table_, summary_, cfg_, act_,
                       static_cast<int>(tagset_.size()))
                .params;
  trained_ = true;
}

std::pair<std::vector<int>, double> ErnnLearner::label(
    const TaggedSentence& s) const {
  if (!trained_) throw InternalError("ErnnLearner::label before train");
  Decoded d = decode(params_, s, table_, summary_, act_, tagset_);
  double conf = 0.0;
  for (double c : d.confidence) conf += c;
  conf /= static_cast<double>(d.confidence.size());
  return {std::move(d.tags), conf};
}

void ErnnLearner::mark_best() { best_ = params_; }

void ErnnLearner::use_best() { params_ = best_; }

// ----------------------------------------------------------------- CrfLearner

CrfLearner::CrfLearner(size_t vocab_size, CrfTemplates templates,
                       CrfTrainConfig cfg, const TagSet& tagset)
    : vocab_size_(vocab_size), templates_(templates), cfg_(cfg), tagset_(tagset) {}

void CrfLearner::train(const Corpus& data) {
  params_ = crf_train(data, static_cast<int>(tagset_.size()), vocab_size_,
                      templates_, cfg_);
  trained_ = true;
}

std::pair<std::vector<int>, double> CrfLearner::label(
    const TaggedSentence& s) const {
  if (!trained_) throw InternalError("CrfLearner::label before train");
  CrfDecoded d = crf_decode(params_, s);
  return {repair_iob(d.tags, tagset_), d.confidence};
}

void CrfLearner::mark_best() { best_ = params_; }

void CrfLearner::use_best() { params_ = best_; }

}  // namespace ernn
