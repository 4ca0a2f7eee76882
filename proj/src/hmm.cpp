#include "hmm.hpp"

#include <cmath>

namespace ernn {

HmmParams hmm_train(const Corpus& train, int n_tags, size_t vocab_size,
                    double kappa) {
  if (train.empty()) throw DataError("hmm_train: empty training corpus");
  if (kappa <= 0.0) throw ConfigError("hmm smoothing kappa must be positive");

  int K = n_tags;
  int V = static_cast<int>(vocab_size);
  Eigen::VectorXd initial = Eigen::VectorXd::Zero(K);
  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(K, K);
  Eigen::MatrixXd emis = Eigen::MatrixXd::Zero(K, V);

  for (const auto& s : train) {
    if (s.size() == 0) continue;
    initial(s.tags[0]) += 1.0;
    for (size_t t = 0; t < s.size(); ++t) {
      emis(s.tags[t], s.tokens[t].vocab_id) += 1.0;
      if (t > 0) trans(s.tags[t - 1], s.tags[t]) += 1.0;
    }
  }

  HmmParams params;
  params.kappa = kappa;
  params.initial_logp =
      ((initial.array() + kappa) / (initial.sum() + kappa * K)).log();
  params.transition_logp.resize(K, K);
  params.emission_logp.resize(K, V);
  for (int y = 0; y < K; ++y) {
    params.transition_logp.row(y) =
        ((trans.row(y).array() + kappa) / (trans.row(y).sum() + kappa * K))
            .log();
    params.emission_logp.row(y) =
        ((emis.row(y).array() + kappa) / (emis.row(y).sum() + kappa * V)).log();
  }
  return params;
}

HmmDecoded hmm_decode(const HmmParams& params, const TaggedSentence& s) {
  if (s.size() == 0) throw DataError("hmm_decode: empty sentence");
  int K = params.n_tags();
  int T = static_cast<int>(s.size());

  Eigen::MatrixXd score(T, K);
  Eigen::MatrixXi back(T, K);
  for (int y = 0; y < K; ++y)
    score(0, y) =
        params.initial_logp(y) + params.emission_logp(y, s.tokens[0].vocab_id);

  for (int t = 1; t < T; ++t) {
    for (int y = 0; y < K; ++y) {
      int best_prev = 0;
      double best = score(t - 1, 0) + params.transition_logp(0, y);
      for (int yp = 1; yp < K; ++yp) {
        double cand = score(t - 1, yp) + params.transition_logp(yp, y);
        if (cand > best) {
          best = cand;
          best_prev = yp;
        }
      }
      score(t, y) = best + params.emission_logp(y, s.tokens[t].vocab_id);
      back(t, y) = best_prev;
    }
  }

  HmmDecoded out;
  out.tags.resize(T);
  int best_last = 0;
  for (int y = 1; y < K; ++y)
    if (score(T - 1, y) > score(T - 1, best_last)) best_last = y;
  out.log_prob = score(T - 1, best_last);
  out.tags[T - 1] = best_last;
  for (int t = T - 1; t > 0; --t) out.tags[t - 1] = back(t, out.tags[t]);
  return out;
}

}  // namespace ernn
