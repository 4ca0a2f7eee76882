#include "crf.hpp"

#include <cmath>

#include "rng.hpp"

namespace ernn {

namespace {

double logsumexp_row(const Eigen::RowVectorXd& v) {
  double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

struct ForwardBackward {
  Eigen::MatrixXd alpha;  // T x K, log space
  Eigen::MatrixXd beta;
  double log_z;
};

ForwardBackward run_forward_backward(const CrfParams& p,
                                     const Eigen::MatrixXd& node) {
  int T = static_cast<int>(node.rows());
  int K = p.n_tags;
  ForwardBackward fb;
  fb.alpha.resize(T, K);
  fb.beta.resize(T, K);

  fb.alpha.row(0) = node.row(0);
  for (int t = 1; t < T; ++t)
    for (int y = 0; y < K; ++y) {
      Eigen::RowVectorXd terms =
          fb.alpha.row(t - 1) + p.w_trans.col(y).head(K).transpose();
      fb.alpha(t, y) = logsumexp_row(terms) + node(t, y);
    }

  fb.beta.row(T - 1).setZero();
  for (int t = T - 2; t >= 0; --t)
    for (int y = 0; y < K; ++y) {
      Eigen::RowVectorXd terms = p.w_trans.row(y).head(K) + node.row(t + 1) +
                                 fb.beta.row(t + 1);
      fb.beta(t, y) = logsumexp_row(terms);
    }

  fb.log_z = logsumexp_row(fb.alpha.row(T - 1));
  return fb;
}

int prev_word_row(const CrfParams& p, const TaggedSentence& s, int t) {
  return t == 0 ? p.vocab : s.tokens[t - 1].vocab_id;
}

int next_word_row(const CrfParams& p, const TaggedSentence& s, int t) {
  return t + 1 == static_cast<int>(s.size()) ? p.vocab
                                             : s.tokens[t + 1].vocab_id;
}

}  // namespace

double CrfParams::weight_squared_norm() const {
  return w_word.squaredNorm() + w_prev.squaredNorm() + w_next.squaredNorm() +
         w_trans.squaredNorm() + w_bias.squaredNorm();
}

void CrfTrainConfig::validate() const {
  if (lambda < 0.0) throw ConfigError("crf lambda must be >= 0");
  if (epochs < 1) throw ConfigError("crf epochs must be >= 1");
  if (learning_rate < 0.0) throw ConfigError("crf learning rate must be >= 0");
}

CrfParams crf_init(int n_tags, size_t vocab_size, const CrfTemplates& templates,
                   double lambda) {
  if (n_tags < 1) throw ConfigError("crf needs at least one tag");
  CrfParams p;
  p.n_tags = n_tags;
  p.vocab = static_cast<int>(vocab_size);
  p.templates = templates;
  p.lambda = lambda;
  p.w_word = Eigen::MatrixXd::Zero(p.vocab, n_tags);
  p.w_prev = Eigen::MatrixXd::Zero(p.vocab + 1, n_tags);
  p.w_next = Eigen::MatrixXd::Zero(p.vocab + 1, n_tags);
  p.w_trans = Eigen::MatrixXd::Zero(n_tags + 1, n_tags);
  p.w_bias = Eigen::RowVectorXd::Zero(n_tags);
  return p;
}

Eigen::MatrixXd crf_node_scores(const CrfParams& p, const TaggedSentence& s) {
  int T = static_cast<int>(s.size());
  Eigen::MatrixXd node = Eigen::MatrixXd::Zero(T, p.n_tags);
  for (int t = 0; t < T; ++t) {
    if (p.templates.bias) node.row(t) += p.w_bias;
    if (p.templates.word) node.row(t) += p.w_word.row(s.tokens[t].vocab_id);
    if (p.templates.prev_word) node.row(t) += p.w_prev.row(prev_word_row(p, s, t));
    if (p.templates.next_word) node.row(t) += p.w_next.row(next_word_row(p, s, t));
  }
  // start transition folded into position 0
  if (p.templates.tag_bigram && T > 0) node.row(0) += p.w_trans.row(p.n_tags);
  return node;
}

double crf_path_score(const CrfParams& p, const Eigen::MatrixXd& node,
                      const std::vector<int>& tags) {
  double score = 0.0;
  for (size_t t = 0; t < tags.size(); ++t) {
    score += node(static_cast<int>(t), tags[t]);
    if (p.templates.tag_bigram && t > 0)
      score += p.w_trans(tags[t - 1], tags[t]);
  }
  return score;
}

double crf_log_partition_forward(const CrfParams& p,
                                 const Eigen::MatrixXd& node) {
  return run_forward_backward(p, node).log_z;
}

double crf_log_partition_backward(const CrfParams& p,
                                  const Eigen::MatrixXd& node) {
  ForwardBackward fb = run_forward_backward(p, node);
  Eigen::RowVectorXd first = node.row(0) + fb.beta.row(0);
  return logsumexp_row(first);
}

Eigen::MatrixXd crf_marginals(const CrfParams& p, const Eigen::MatrixXd& node) {
  ForwardBackward fb = run_forward_backward(p, node);
  Eigen::MatrixXd marg =
      (fb.alpha + fb.beta).array().rowwise() -
      Eigen::RowVectorXd::Constant(p.n_tags, fb.log_z).array().row(0);
  return marg.array().exp();
}

double crf_sentence_loglik(const CrfParams& p, const TaggedSentence& s) {
  if (s.size() == 0) throw DataError("crf loglik of an empty sentence");
  Eigen::MatrixXd node = crf_node_scores(p, s);
  ForwardBackward fb = run_forward_backward(p, node);
  return crf_path_score(p, node, s.tags) - fb.log_z;
}

namespace {

// Walks the (observed - expected) feature counts of one sentence. Word-indexed
// blocks are touched only at the rows present in the sentence, so training
// updates stay sparse.
template <class Add>
void accumulate_loglik_gradient(const CrfParams& p, const TaggedSentence& s,
                                Add&& add) {
  Eigen::MatrixXd node = crf_node_scores(p, s);
  ForwardBackward fb = run_forward_backward(p, node);
  int T = static_cast<int>(s.size());
  int K = p.n_tags;

  for (int t = 0; t < T; ++t) {
    Eigen::RowVectorXd marg =
        ((fb.alpha.row(t) + fb.beta.row(t)).array() - fb.log_z).exp();
    for (int y = 0; y < K; ++y) {
      double delta = (s.tags[t] == y ? 1.0 : 0.0) - marg(y);
      if (p.templates.bias) add(&CrfParams::w_bias, 0, y, delta);
      if (p.templates.word)
        add(&CrfParams::w_word, s.tokens[t].vocab_id, y, delta);
      if (p.templates.prev_word)
        add(&CrfParams::w_prev, prev_word_row(p, s, t), y, delta);
      if (p.templates.next_word)
        add(&CrfParams::w_next, next_word_row(p, s, t), y, delta);
      if (p.templates.tag_bigram && t == 0) add(&CrfParams::w_trans, K, y, delta);
    }
  }

  if (p.templates.tag_bigram) {
    for (int t = 1; t < T; ++t) {
      for (int yp = 0; yp < K; ++yp)
        for (int y = 0; y < K; ++y) {
          double pair = std::exp(fb.alpha(t - 1, yp) + p.w_trans(yp, y) +
                                 node(t, y) + fb.beta(t, y) - fb.log_z);
          add(&CrfParams::w_trans, yp, y, -pair);
        }
      add(&CrfParams::w_trans, s.tags[t - 1], s.tags[t], 1.0);
    }
  }
}

void sgd_update(CrfParams& p, const TaggedSentence& s, double step) {
  accumulate_loglik_gradient(
      p, s, [&p, step](auto block, Eigen::Index row, Eigen::Index col,
                       double value) {
        auto& m = p.*block;
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>,
                                     Eigen::RowVectorXd>) {
          m(col) += step * value;
        } else {
          m(row, col) += step * value;
        }
      });
}

}  // namespace

CrfParams crf_loglik_gradient(const CrfParams& params, const TaggedSentence& s) {
  CrfParams grad = crf_init(params.n_tags, params.vocab, params.templates,
                            params.lambda);
  accumulate_loglik_gradient(
      params, s,
      [&grad](auto block, Eigen::Index row, Eigen::Index col, double value) {
        auto& m = grad.*block;
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>,
                                     Eigen::RowVectorXd>) {
          m(col) += value;
        } else {
          m(row, col) += value;
        }
      });
  return grad;
}

CrfParams crf_train(const Corpus& train, int n_tags, size_t vocab_size,
                    const CrfTemplates& templates, const CrfTrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw DataError("crf_train: empty training corpus");

  CrfParams p = crf_init(n_tags, vocab_size, templates, cfg.lambda);
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double reg = cfg.lambda / static_cast<double>(train.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) order_rng.shuffle(order);
    double loglik = 0.0;
    for (size_t idx : order) {
      const TaggedSentence& s = train[idx];
      if (s.size() == 0) continue;
      if (reg > 0.0) {
        double shrink = 1.0 - cfg.learning_rate * reg;
        if (shrink < 0.0) shrink = 0.0;
        p.w_word *= shrink;
        p.w_prev *= shrink;
        p.w_next *= shrink;
        p.w_trans *= shrink;
        p.w_bias *= shrink;
      }
      loglik += crf_sentence_loglik(p, s);
      sgd_update(p, s, cfg.learning_rate);
    }
    if (!std::isfinite(loglik))
      throw TrainingDiverged(
          "crf objective became non-finite at epoch " + std::to_string(epoch),
          epoch);
  }
  return p;
}

CrfDecoded crf_decode(const CrfParams& p, const TaggedSentence& s) {
  if (s.size() == 0) throw DataError("crf_decode: empty sentence");
  Eigen::MatrixXd node = crf_node_scores(p, s);
  int T = static_cast<int>(s.size());
  int K = p.n_tags;

  Eigen::MatrixXd score(T, K);
  Eigen::MatrixXi back(T, K);
  score.row(0) = node.row(0);
  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < K; ++y) {
      int best_prev = 0;
      double best = score(t - 1, 0) +
                    (p.templates.tag_bigram ? p.w_trans(0, y) : 0.0);
      for (int yp = 1; yp < K; ++yp) {
        double cand = score(t - 1, yp) +
                      (p.templates.tag_bigram ? p.w_trans(yp, y) : 0.0);
        if (cand > best) {
          best = cand;
          best_prev = yp;
        }
      }
      score(t, y) = best + node(t, y);
      back(t, y) = best_prev;
    }
  }

  CrfDecoded out;
  out.tags.resize(T);
  int best_last = 0;
  for (int y = 1; y < K; ++y)
    if (score(T - 1, y) > score(T - 1, best_last)) best_last = y;
  out.tags[T - 1] = best_last;
  for (int t = T - 1; t > 0; --t) out.tags[t - 1] = back(t, out.tags[t]);

  double log_z = run_forward_backward(p, node).log_z;
  double path = score(T - 1, best_last);
  out.confidence = std::exp((path - log_z) / static_cast<double>(T));
  return out;
}

}  // namespace ernn
