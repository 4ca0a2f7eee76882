// Word vector table plus the sentence/corpus vectorization used by the
// transfer kernels and the networks.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "corpus.hpp"

namespace ernn {

using SentenceVector = Eigen::VectorXd;

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(size_t rows, int dim) : vectors_(rows, dim) {
    vectors_.setZero();
  }

  int dim() const { return static_cast<int>(vectors_.cols()); }
  size_t rows() const { return static_cast<size_t>(vectors_.rows()); }

  Eigen::MatrixXd::ConstRowXpr row(int id) const { return vectors_.row(id); }
  Eigen::MatrixXd::RowXpr row(int id) { return vectors_.row(id); }

  const Eigen::MatrixXd& matrix() const { return vectors_; }
  Eigen::MatrixXd& matrix() { return vectors_; }

 private:
  Eigen::MatrixXd vectors_;
};

// Text format: one `surface v1 v2 ... vd` line per word, space separated.
// Vocabulary words absent from the file get seeded uniform vectors in
// [-0.1, 0.1] so builds stay deterministic.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               uint64_t seed = 0);

void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const Vocabulary& vocab);

// iid uniform entries in [-scale, scale].
EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim,
                                 uint64_t seed, double scale = 0.1);

// Unweighted mean of the token rows.
SentenceVector sentence_vector(const TaggedSentence& sentence,
                               const EmbeddingTable& table);

// Mean of sentence vectors over the corpus.
SentenceVector corpus_mean(const Corpus& sentences, const EmbeddingTable& table);

}  // namespace ernn
