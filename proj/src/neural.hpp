// Elman recurrent network and its enhanced variant (ERNN). The ERNN adds a
// confluent layer that folds a fixed source-domain vector into the hidden
// state before the softmax:
//
//   T_t = A(x_t U + T_{t-1} W)           hidden recurrence (combined act.)
//   S_t = F(T_t W + i w2 + b0)           confluent layer (sigmoid by default)
//   O_t = softmax(S_t V + b1)
//
// Trained by per-sentence SGD with full backpropagation through time.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "activation.hpp"
#include "embeddings.hpp"
#include "transfer.hpp"

namespace ernn {

struct RnnParams {
  Eigen::MatrixXd U;       // (window * embed_dim) x hidden
  Eigen::MatrixXd W;       // hidden x hidden
  Eigen::MatrixXd V;       // hidden x n_tags
  Eigen::RowVectorXd b1;   // n_tags
  Eigen::RowVectorXd h0;   // hidden
  int window = 1;

  int hidden() const { return static_cast<int>(W.rows()); }
  int n_tags() const { return static_cast<int>(V.cols()); }
  int input_dim() const { return static_cast<int>(U.rows()); }
};

struct ErnnParams : RnnParams {
  Eigen::MatrixXd w2;      // source_dim x hidden
  Eigen::RowVectorXd b0;   // hidden
  // When set, the confluent layer uses the combined activation A instead of
  // the plain sigmoid F.
  bool confluent_combined = false;

  int source_dim() const { return static_cast<int>(w2.rows()); }
};

// The fixed source-domain input vector i, one per training/decoding run.
struct SourceSummary {
  Eigen::VectorXd values;
  std::string provenance;
};

// Count-weighted mean of the sentence vectors selected by the plan.
SourceSummary build_source_summary(const TransferPlan& plan, const Corpus& source,
                                   const EmbeddingTable& table);

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 50;
  int window = 1;          // odd; number of tokens concatenated into x_t
  uint64_t seed = 1;
  double clip = 5.0;       // gradient-norm cap per sentence
  int hidden = 24;
  double init_scale = 0.1;
  bool shuffle = true;
  bool fine_tune_embeddings = false;
  bool confluent_combined = false;

  void validate() const;
};

RnnParams init_rnn(int embed_dim, int hidden, int n_tags, int window,
                   uint64_t seed, double scale = 0.1);
ErnnParams init_ernn(int embed_dim, int hidden, int n_tags, int source_dim,
                     int window, uint64_t seed, double scale = 0.1);

// Numerically stable softmax of a logit row.
Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& logits);

// Per-token tag distributions, one row per token.
Eigen::MatrixXd rnn_forward(const RnnParams& params, const TaggedSentence& s,
                            const EmbeddingTable& table,
                            const ActivationSpec& act);
Eigen::MatrixXd ernn_forward(const ErnnParams& params, const TaggedSentence& s,
                             const EmbeddingTable& table,
                             const SourceSummary& summary,
                             const ActivationSpec& act);

// Summed token cross-entropy over the batch.
double rnn_batch_loss(const RnnParams& params, const Corpus& batch,
                      const EmbeddingTable& table, const ActivationSpec& act);
double ernn_batch_loss(const ErnnParams& params, const Corpus& batch,
                       const EmbeddingTable& table, const SourceSummary& summary,
                       const ActivationSpec& act);

struct RnnGradients {
  Eigen::MatrixXd U, W, V;
  Eigen::RowVectorXd b1, h0;
};

struct ErnnGradients : RnnGradients {
  Eigen::MatrixXd w2;
  Eigen::RowVectorXd b0;
};

// Analytic BPTT gradients of the summed batch loss.
RnnGradients rnn_gradients(const RnnParams& params, const Corpus& batch,
                           const EmbeddingTable& table,
                           const ActivationSpec& act);
ErnnGradients ernn_gradients(const ErnnParams& params, const Corpus& batch,
                             const EmbeddingTable& table,
                             const SourceSummary& summary,
                             const ActivationSpec& act);

template <class Params>
struct TrainResult {
  Params params;
  std::vector<double> epoch_losses;  // mean per-token cross-entropy
  std::optional<EmbeddingTable> tuned_embeddings;
};

TrainResult<RnnParams> train_rnn(const Corpus& data, const EmbeddingTable& table,
                                 const TrainConfig& cfg,
                                 const ActivationSpec& act, int n_tags);
TrainResult<ErnnParams> train_ernn(const Corpus& data,
                                   const EmbeddingTable& table,
                                   const SourceSummary& summary,
                                   const TrainConfig& cfg,
                                   const ActivationSpec& act, int n_tags);

struct Decoded {
  std::vector<int> tags;
  std::vector<double> confidence;  // max softmax probability per token
};

// Argmax decoding (ties toward the lowest tag id) followed by IOB repair.
Decoded decode(const RnnParams& params, const TaggedSentence& s,
               const EmbeddingTable& table, const ActivationSpec& act,
               const TagSet& tagset);
Decoded decode(const ErnnParams& params, const TaggedSentence& s,
               const EmbeddingTable& table, const SourceSummary& summary,
               const ActivationSpec& act, const TagSet& tagset);

}  // namespace ernn
