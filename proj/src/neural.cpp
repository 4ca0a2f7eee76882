#include "neural.hpp"

#include <cmath>

#include "rng.hpp"

namespace ernn {

namespace {

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-scale, scale);
}

void fill_uniform(Eigen::RowVectorXd& v, Rng& rng, double scale) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) v(c) = rng.uniform(-scale, scale);
}

// Window-concatenated token inputs, one row per token; out-of-range positions
// use the padding embedding.
Eigen::MatrixXd input_matrix(const TaggedSentence& s, const EmbeddingTable& table,
                             int window) {
  int T = static_cast<int>(s.size());
  int E = table.dim();
  int hw = window / 2;
  Eigen::MatrixXd xs(T, window * E);
  for (int t = 0; t < T; ++t) {
    for (int o = 0; o < window; ++o) {
      int src = t - hw + o;
      int id = (src < 0 || src >= T) ? Vocabulary::kPadId
                                     : s.tokens[src].vocab_id;
      xs.block(t, o * E, 1, E) = table.row(id);
    }
  }
  return xs;
}

struct ForwardCache {
  Eigen::MatrixXd xs;  // T x window*E
  Eigen::MatrixXd a;   // recurrence preactivation
  Eigen::MatrixXd h;   // hidden states
  Eigen::MatrixXd c;   // confluent preactivation (ernn)
  Eigen::MatrixXd s;   // confluent output (ernn)
  Eigen::MatrixXd p;   // per-token tag distributions
};

// Shared forward pass; `ep`/`i_row` are null for the plain Elman network.
ForwardCache run_forward(const RnnParams& params, const ErnnParams* ep,
                         const TaggedSentence& sent, const EmbeddingTable& table,
                         const Eigen::RowVectorXd* i_row,
                         const ActivationSpec& act) {
  if (sent.size() == 0) throw DataError("forward pass on an empty sentence");
  if (table.dim() * params.window != params.input_dim())
    throw InternalError("input weights do not match embeddings * window");
  if (ep) {
    if (!i_row) throw InternalError("ernn forward needs a source summary");
    if (i_row->cols() != ep->w2.rows())
      throw DataError("source summary dimension " +
                      std::to_string(i_row->cols()) + " does not match w2 " +
                      std::to_string(ep->w2.rows()));
  }

  int T = static_cast<int>(sent.size());
  int H = params.hidden();
  int K = params.n_tags();

  ForwardCache f;
  f.xs = input_matrix(sent, table, params.window);
  f.a.resize(T, H);
  f.h.resize(T, H);
  f.p.resize(T, K);
  if (ep) {
    f.c.resize(T, H);
    f.s.resize(T, H);
  }

  auto act_fn = [&act](double x) { return activation(act, x); };
  Eigen::RowVectorXd confluent_in;
  if (ep) confluent_in = (*i_row) * ep->w2 + ep->b0;

  for (int t = 0; t < T; ++t) {
    const auto h_prev = t == 0 ? params.h0 : Eigen::RowVectorXd(f.h.row(t - 1));
    f.a.row(t) = f.xs.row(t) * params.U + h_prev * params.W;
    f.h.row(t) = f.a.row(t).unaryExpr(act_fn);
    if (ep) {
      f.c.row(t) = f.h.row(t) * params.W + confluent_in;
      if (ep->confluent_combined)
        f.s.row(t) = f.c.row(t).unaryExpr(act_fn);
      else
        f.s.row(t) = f.c.row(t).unaryExpr([](double x) { return sigmoid(x); });
      f.p.row(t) = softmax(f.s.row(t) * params.V + params.b1);
    } else {
      f.p.row(t) = softmax(f.h.row(t) * params.V + params.b1);
    }
  }
  return f;
}

double cache_loss(const ForwardCache& f, const std::vector<int>& tags) {
  double ce = 0.0;
  for (int t = 0; t < f.p.rows(); ++t) ce -= std::log(f.p(t, tags[t]));
  return ce;
}

// BPTT for one sentence, accumulated into `g` (and the confluent gradients
// when `ep` is set). W picks up contributions from both of its uses. Returns
// per-token input gradients in `dxs` when requested (embedding fine-tuning).
void run_backward(const RnnParams& params, const ErnnParams* ep,
                  const ForwardCache& f, const std::vector<int>& tags,
                  const Eigen::RowVectorXd* i_row, const ActivationSpec& act,
                  RnnGradients& g, ErnnGradients* eg,
                  Eigen::MatrixXd* dxs = nullptr) {
  int T = static_cast<int>(tags.size());
  int H = params.hidden();
  auto act_prime = [&act](double x) { return activation_derivative(act, x); };

  Eigen::RowVectorXd carry = Eigen::RowVectorXd::Zero(H);
  for (int t = T - 1; t >= 0; --t) {
    Eigen::RowVectorXd dz = f.p.row(t);
    dz(tags[t]) -= 1.0;
    g.b1 += dz;

    Eigen::RowVectorXd g_h;
    if (ep) {
      g.V += f.s.row(t).transpose() * dz;
      Eigen::RowVectorXd ds = dz * params.V.transpose();
      Eigen::RowVectorXd dc;
      if (ep->confluent_combined) {
        dc = ds.cwiseProduct(f.c.row(t).unaryExpr(act_prime));
      } else {
        Eigen::RowVectorXd sv = f.s.row(t);
        dc = ds.cwiseProduct(sv.cwiseProduct(
            (Eigen::RowVectorXd::Ones(H) - sv).eval()));
      }
      g.W += f.h.row(t).transpose() * dc;
      eg->w2 += i_row->transpose() * dc;
      eg->b0 += dc;
      g_h = dc * params.W.transpose() + carry;
    } else {
      g.V += f.h.row(t).transpose() * dz;
      g_h = dz * params.V.transpose() + carry;
    }

    Eigen::RowVectorXd da = g_h.cwiseProduct(f.a.row(t).unaryExpr(act_prime));
    g.U += f.xs.row(t).transpose() * da;
    if (t == 0)
      g.W += params.h0.transpose() * da;
    else
      g.W += f.h.row(t - 1).transpose() * da;
    carry = da * params.W.transpose();
    if (dxs) dxs->row(t) = da * params.U.transpose();
  }
  g.h0 += carry;
}

RnnGradients zero_gradients(const RnnParams& p) {
  RnnGradients g;
  g.U = Eigen::MatrixXd::Zero(p.U.rows(), p.U.cols());
  g.W = Eigen::MatrixXd::Zero(p.W.rows(), p.W.cols());
  g.V = Eigen::MatrixXd::Zero(p.V.rows(), p.V.cols());
  g.b1 = Eigen::RowVectorXd::Zero(p.b1.cols());
  g.h0 = Eigen::RowVectorXd::Zero(p.h0.cols());
  return g;
}

ErnnGradients zero_gradients(const ErnnParams& p) {
  ErnnGradients g;
  static_cast<RnnGradients&>(g) = zero_gradients(static_cast<const RnnParams&>(p));
  g.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  g.b0 = Eigen::RowVectorXd::Zero(p.b0.cols());
  return g;
}

double squared_norm(const RnnGradients& g) {
  return g.U.squaredNorm() + g.W.squaredNorm() + g.V.squaredNorm() +
         g.b1.squaredNorm() + g.h0.squaredNorm();
}

double squared_norm(const ErnnGradients& g) {
  return squared_norm(static_cast<const RnnGradients&>(g)) + g.w2.squaredNorm() +
         g.b0.squaredNorm();
}

void apply_step(RnnParams& p, const RnnGradients& g, double step) {
  p.U -= step * g.U;
  p.W -= step * g.W;
  p.V -= step * g.V;
  p.b1 -= step * g.b1;
  p.h0 -= step * g.h0;
}

void apply_step(ErnnParams& p, const ErnnGradients& g, double step) {
  apply_step(static_cast<RnnParams&>(p), g, step);
  p.w2 -= step * g.w2;
  p.b0 -= step * g.b0;
}

Decoded decode_from_distributions(const Eigen::MatrixXd& dist,
                                  const TagSet& tagset) {
  Decoded out;
  out.tags.resize(dist.rows());
  out.confidence.resize(dist.rows());
  for (int t = 0; t < dist.rows(); ++t) {
    int best = 0;
    double best_p = dist(t, 0);
    for (int j = 1; j < dist.cols(); ++j) {
      if (dist(t, j) > best_p) {  // strict: ties keep the lowest tag id
        best = j;
        best_p = dist(t, j);
      }
    }
    out.tags[t] = best;
    out.confidence[t] = best_p;
  }
  out.tags = repair_iob(out.tags, tagset);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ConfigError("learning rate must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (window < 1 || window % 2 == 0)
    throw ConfigError("context window must be odd and positive");
  if (clip <= 0.0) throw ConfigError("gradient clip must be positive");
  if (hidden < 1) throw ConfigError("hidden size must be >= 1");
}

Eigen::RowVectorXd softmax(const Eigen::RowVectorXd& logits) {
  Eigen::RowVectorXd shifted =
      (logits.array() - logits.maxCoeff()).exp().matrix();
  return shifted / shifted.sum();
}

RnnParams init_rnn(int embed_dim, int hidden, int n_tags, int window,
                   uint64_t seed, double scale) {
  RnnParams p;
  p.window = window;
  p.U.resize(window * embed_dim, hidden);
  p.W.resize(hidden, hidden);
  p.V.resize(hidden, n_tags);
  p.b1.resize(n_tags);
  p.h0 = Eigen::RowVectorXd::Zero(hidden);
  Rng rng(seed);
  fill_uniform(p.U, rng, scale);
  fill_uniform(p.W, rng, scale);
  fill_uniform(p.V, rng, scale);
  fill_uniform(p.b1, rng, scale);
  return p;
}

ErnnParams init_ernn(int embed_dim, int hidden, int n_tags, int source_dim,
                     int window, uint64_t seed, double scale) {
  ErnnParams p;
  static_cast<RnnParams&>(p) =
      init_rnn(embed_dim, hidden, n_tags, window, seed, scale);
  p.w2.resize(source_dim, hidden);
  p.b0.resize(hidden);
  Rng rng(seed ^ 0xe11a9ull);
  fill_uniform(p.w2, rng, scale);
  fill_uniform(p.b0, rng, scale);
  return p;
}

SourceSummary build_source_summary(const TransferPlan& plan, const Corpus& source,
                                   const EmbeddingTable& table) {
  if (plan.entries.empty())
    throw DataError("cannot build a source summary from an empty plan");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dim());
  double total = 0.0;
  for (const auto& e : plan.entries) {
    if (e.source_index < 0 ||
        static_cast<size_t>(e.source_index) >= source.size())
      throw InternalError("plan index out of range: " +
                          std::to_string(e.source_index));
    sum += static_cast<double>(e.copies) *
           sentence_vector(source[e.source_index], table);
    total += static_cast<double>(e.copies);
  }
  SourceSummary summary;
  summary.values = sum / total;
  summary.provenance = "count-weighted mean of " +
                       std::to_string(plan.entries.size()) +
                       " planned source sentences (" +
                       std::to_string(static_cast<size_t>(total)) +
                       " instances)";
  return summary;
}

Eigen::MatrixXd rnn_forward(const RnnParams& params, const TaggedSentence& s,
                            const EmbeddingTable& table,
                            const ActivationSpec& act) {
  return run_forward(params, nullptr, s, table, nullptr, act).p;
}

Eigen::MatrixXd ernn_forward(const ErnnParams& params, const TaggedSentence& s,
                             const EmbeddingTable& table,
                             const SourceSummary& summary,
                             const ActivationSpec& act) {
  Eigen::RowVectorXd i_row = summary.values.transpose();
  return run_forward(params, &params, s, table, &i_row, act).p;
}

double rnn_batch_loss(const RnnParams& params, const Corpus& batch,
                      const EmbeddingTable& table, const ActivationSpec& act) {
  double loss = 0.0;
  for (const auto& s : batch)
    loss += cache_loss(run_forward(params, nullptr, s, table, nullptr, act),
                       s.tags);
  return loss;
}

double ernn_batch_loss(const ErnnParams& params, const Corpus& batch,
                       const EmbeddingTable& table, const SourceSummary& summary,
                       const ActivationSpec& act) {
  Eigen::RowVectorXd i_row = summary.values.transpose();
  double loss = 0.0;
  for (const auto& s : batch)
    loss += cache_loss(run_forward(params, &params, s, table, &i_row, act),
                       s.tags);
  return loss;
}

RnnGradients rnn_gradients(const RnnParams& params, const Corpus& batch,
                           const EmbeddingTable& table,
                           const ActivationSpec& act) {
  if (batch.empty()) throw DataError("gradients of an empty batch");
  RnnGradients g = zero_gradients(params);
  for (const auto& s : batch) {
    ForwardCache f = run_forward(params, nullptr, s, table, nullptr, act);
    run_backward(params, nullptr, f, s.tags, nullptr, act, g, nullptr);
  }
  return g;
}

ErnnGradients ernn_gradients(const ErnnParams& params, const Corpus& batch,
                             const EmbeddingTable& table,
                             const SourceSummary& summary,
                             const ActivationSpec& act) {
  if (batch.empty()) throw DataError("gradients of an empty batch");
  Eigen::RowVectorXd i_row = summary.values.transpose();
  ErnnGradients g = zero_gradients(params);
  for (const auto& s : batch) {
    ForwardCache f = run_forward(params, &params, s, table, &i_row, act);
    run_backward(params, &params, f, s.tags, &i_row, act, g, &g);
  }
  return g;
}

namespace {

// One SGD pass shared by both network kinds.
template <class Params, class Gradients>
std::vector<double> sgd_train(Params& params, const ErnnParams* ep_alias,
                              const Corpus& data, const EmbeddingTable& table,
                              const Eigen::RowVectorXd* i_row,
                              const TrainConfig& cfg, const ActivationSpec& act,
                              EmbeddingTable* tuned) {
  Rng order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  const EmbeddingTable* active = tuned ? tuned : &table;
  std::vector<double> losses;
  losses.reserve(cfg.epochs);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) order_rng.shuffle(order);
    double total_ce = 0.0;
    size_t total_tokens = 0;

    for (size_t idx : order) {
      const TaggedSentence& sent = data[idx];
      if (sent.size() == 0) continue;
      ForwardCache f =
          run_forward(params, ep_alias, sent, *active, i_row, act);
      total_ce += cache_loss(f, sent.tags);
      total_tokens += sent.size();

      Gradients g = zero_gradients(params);
      Eigen::MatrixXd dxs;
      if (tuned) dxs.resize(sent.size(), params.input_dim());
      if constexpr (std::is_same_v<Gradients, ErnnGradients>) {
        run_backward(params, ep_alias, f, sent.tags, i_row, act, g, &g,
                     tuned ? &dxs : nullptr);
      } else {
        run_backward(params, nullptr, f, sent.tags, nullptr, act, g, nullptr,
                     tuned ? &dxs : nullptr);
      }

      double norm = std::sqrt(squared_norm(g));
      double scale = norm > cfg.clip ? cfg.clip / norm : 1.0;
      apply_step(params, g, cfg.learning_rate * scale);

      if (tuned) {
        int E = tuned->dim();
        int hw = params.window / 2;
        int T = static_cast<int>(sent.size());
        double step = cfg.learning_rate * scale;
        for (int t = 0; t < T; ++t)
          for (int o = 0; o < params.window; ++o) {
            int src = t - hw + o;
            if (src < 0 || src >= T) continue;
            tuned->row(sent.tokens[src].vocab_id) -=
                step * dxs.block(t, o * E, 1, E);
          }
      }
    }

    double mean_ce =
        total_tokens == 0 ? 0.0 : total_ce / static_cast<double>(total_tokens);
    if (!std::isfinite(mean_ce))
      throw TrainingDiverged(
          "training loss became non-finite at epoch " + std::to_string(epoch),
          epoch);
    losses.push_back(mean_ce);
  }
  return losses;
}

}  // namespace

TrainResult<RnnParams> train_rnn(const Corpus& data, const EmbeddingTable& table,
                                 const TrainConfig& cfg,
                                 const ActivationSpec& act, int n_tags) {
  cfg.validate();
  if (data.empty()) throw DataError("cannot train on an empty corpus");
  TrainResult<RnnParams> result;
  result.params = init_rnn(table.dim(), cfg.hidden, n_tags, cfg.window,
                           cfg.seed, cfg.init_scale);
  std::optional<EmbeddingTable> tuned;
  if (cfg.fine_tune_embeddings) tuned = table;
  result.epoch_losses = sgd_train<RnnParams, RnnGradients>(
      result.params, nullptr, data, table, nullptr, cfg, act,
      tuned ? &*tuned : nullptr);
  result.tuned_embeddings = std::move(tuned);
  return result;
}

TrainResult<ErnnParams> train_ernn(const Corpus& data,
                                   const EmbeddingTable& table,
                                   const SourceSummary& summary,
                                   const TrainConfig& cfg,
                                   const ActivationSpec& act, int n_tags) {
  cfg.validate();
  if (data.empty()) throw DataError("cannot train on an empty corpus");
  TrainResult<ErnnParams> result;
  result.params =
      init_ernn(table.dim(), cfg.hidden, n_tags,
                static_cast<int>(summary.values.size()), cfg.window, cfg.seed,
                cfg.init_scale);
  result.params.confluent_combined = cfg.confluent_combined;
  Eigen::RowVectorXd i_row = summary.values.transpose();
  std::optional<EmbeddingTable> tuned;
  if (cfg.fine_tune_embeddings) tuned = table;
  result.epoch_losses = sgd_train<ErnnParams, ErnnGradients>(
      result.params, &result.params, data, table, &i_row, cfg, act,
      tuned ? &*tuned : nullptr);
  result.tuned_embeddings = std::move(tuned);
  return result;
}

Decoded decode(const RnnParams& params, const TaggedSentence& s,
               const EmbeddingTable& table, const ActivationSpec& act,
               const TagSet& tagset) {
  return decode_from_distributions(rnn_forward(params, s, table, act), tagset);
}

Decoded decode(const ErnnParams& params, const TaggedSentence& s,
               const EmbeddingTable& table, const SourceSummary& summary,
               const ActivationSpec& act, const TagSet& tagset) {
  return decode_from_distributions(
      ernn_forward(params, s, table, summary, act), tagset);
}

}  // namespace ernn
