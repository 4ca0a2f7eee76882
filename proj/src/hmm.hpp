// First-order HMM tagger: maximum-likelihood counts with add-kappa smoothing,
// Viterbi decoding.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corpus.hpp"

namespace ernn {

struct HmmParams {
  Eigen::VectorXd initial_logp;     // n_tags
  Eigen::MatrixXd transition_logp;  // n_tags x n_tags, row = previous tag
  Eigen::MatrixXd emission_logp;    // n_tags x vocab
  double kappa = 0.1;

  int n_tags() const { return static_cast<int>(initial_logp.size()); }
};

HmmParams hmm_train(const Corpus& train, int n_tags, size_t vocab_size,
                    double kappa = 0.1);

struct HmmDecoded {
  std::vector<int> tags;
  double log_prob;  // joint log-probability of the best path
};

HmmDecoded hmm_decode(const HmmParams& params, const TaggedSentence& s);

}  // namespace ernn
