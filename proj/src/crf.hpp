// Linear-chain CRF with dense indicator-feature blocks: current word,
// previous/next word, tag bigram and a per-tag bias. Trained by SGD on the
// L2-regularized conditional log-likelihood via forward-backward.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corpus.hpp"

namespace ernn {

struct CrfTemplates {
  bool word = true;
  bool prev_word = true;
  bool next_word = true;
  bool tag_bigram = true;
  bool bias = true;
};

struct CrfParams {
  int n_tags = 0;
  int vocab = 0;
  CrfTemplates templates;
  double lambda = 0.0;

  Eigen::MatrixXd w_word;   // vocab x n_tags
  Eigen::MatrixXd w_prev;   // (vocab + 1) x n_tags, last row = sentence start
  Eigen::MatrixXd w_next;   // (vocab + 1) x n_tags, last row = sentence end
  Eigen::MatrixXd w_trans;  // (n_tags + 1) x n_tags, last row = start state
  Eigen::RowVectorXd w_bias;

  double weight_squared_norm() const;
};

struct CrfTrainConfig {
  double lambda = 1e-3;
  int epochs = 25;
  double learning_rate = 0.1;
  uint64_t seed = 1;
  bool shuffle = true;

  void validate() const;
};

CrfParams crf_init(int n_tags, size_t vocab_size, const CrfTemplates& templates,
                   double lambda);

CrfParams crf_train(const Corpus& train, int n_tags, size_t vocab_size,
                    const CrfTemplates& templates, const CrfTrainConfig& cfg);

struct CrfDecoded {
  std::vector<int> tags;
  // Length-normalized path probability exp((score - logZ) / T) in (0, 1].
  double confidence;
};

CrfDecoded crf_decode(const CrfParams& params, const TaggedSentence& s);

// Internals shared with tests: node scores fold the start transition into
// position 0, so path score = sum node(t, y_t) + sum_{t>0} trans(y_{t-1}, y_t).
Eigen::MatrixXd crf_node_scores(const CrfParams& params, const TaggedSentence& s);
double crf_path_score(const CrfParams& params, const Eigen::MatrixXd& node,
                      const std::vector<int>& tags);
double crf_log_partition_forward(const CrfParams& params,
                                 const Eigen::MatrixXd& node);
double crf_log_partition_backward(const CrfParams& params,
                                  const Eigen::MatrixXd& node);
// Per-position tag marginals, one row per token; each row sums to 1.
Eigen::MatrixXd crf_marginals(const CrfParams& params,
                              const Eigen::MatrixXd& node);
double crf_sentence_loglik(const CrfParams& params, const TaggedSentence& s);
// Gradient of the sentence log-likelihood (observed minus expected counts),
// returned in a CrfParams-shaped container with zero untouched blocks.
CrfParams crf_loglik_gradient(const CrfParams& params, const TaggedSentence& s);

}  // namespace ernn
