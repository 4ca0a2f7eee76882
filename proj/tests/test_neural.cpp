#include <doctest.h>

#include <cmath>

#include "neural.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace ernn;

TEST_CASE("combined activation values") {
  ActivationSpec sigmoid_only{1.0, 0.0, 0.2, 0.5};
  CHECK(activation(sigmoid_only, 0.0) == doctest::Approx(0.5));

  ActivationSpec linear_only{0.0, 1.0, 0.2, 0.5};
  CHECK(activation(linear_only, 1.0) == doctest::Approx(0.7));

  ActivationSpec mixed{0.5, 0.5, 0.2, 0.5};
  CHECK(activation(mixed, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("activation derivative matches finite differences") {
  ActivationSpec sigmoid_only{1.0, 0.0, 0.2, 0.5};
  CHECK(activation_derivative(sigmoid_only, 0.0) == doctest::Approx(0.25));

  ActivationSpec linear_only{0.0, 1.0, 0.2, 0.5};
  for (double x : {-3.0, 0.0, 2.5})
    CHECK(activation_derivative(linear_only, x) == doctest::Approx(0.2));

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    ActivationSpec spec{rng.uniform(-1, 1), rng.uniform(-1, 1),
                        rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    double x = rng.uniform(-4, 4);
    double fd = (activation(spec, x + 1e-6) - activation(spec, x - 1e-6)) / 2e-6;
    double analytic = activation_derivative(spec, x);
    CHECK(std::abs(analytic - fd) <=
          1e-6 * std::max(1.0, std::abs(analytic)));
  }
}

TEST_CASE("activation is monotone when alpha >= 0 and beta*a >= 0") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    ActivationSpec spec{rng.uniform(0, 2), rng.uniform(0, 2),
                        rng.uniform(0, 0.5), rng.uniform(-1, 1)};
    double x1 = rng.uniform(-5, 5);
    double x2 = x1 + rng.uniform(0, 3);
    CHECK(activation(spec, x2) >= activation(spec, x1) - 1e-12);
  }
}

TEST_CASE("softmax is normalized and shift invariant") {
  Eigen::RowVectorXd logits(4);
  logits << 0.3, -1.2, 2.0, 0.0;
  Eigen::RowVectorXd p = softmax(logits);
  CHECK(std::abs(p.sum() - 1.0) < 1e-12);
  CHECK(p.minCoeff() > 0.0);

  Eigen::RowVectorXd shifted = softmax((logits.array() + 17.5).matrix());
  CHECK((p - shifted).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::RowVectorXd zeros = softmax(Eigen::RowVectorXd::Zero(5));
  for (int i = 0; i < 5; ++i) CHECK(zeros(i) == doctest::Approx(0.2));
}

namespace {

struct NetFixture {
  Vocabulary vocab;
  EmbeddingTable table;

  NetFixture(int words, int dim, uint64_t seed) {
    for (int i = 0; i < words; ++i) vocab.add("w" + std::to_string(i));
    table = random_embeddings(vocab, dim, seed, 0.5);
  }

  TaggedSentence sentence(Rng& rng, int len, int n_tags) const {
    TaggedSentence s;
    for (int i = 0; i < len; ++i) {
      int id = Vocabulary::kReservedCount +
               static_cast<int>(rng.index(vocab.size() - 2));
      s.tokens.push_back({vocab.word(id), id});
      s.tags.push_back(static_cast<int>(rng.index(n_tags)));
    }
    return s;
  }
};

// Naive scalar re-implementation of the Elman recurrence, independent of the
// library's Eigen code path.
std::vector<std::vector<double>> naive_rnn_forward(
    const RnnParams& p, const TaggedSentence& s, const EmbeddingTable& table,
    const ActivationSpec& act) {
  int H = p.hidden();
  int K = p.n_tags();
  int E = table.dim();
  std::vector<double> h_prev(H);
  for (int j = 0; j < H; ++j) h_prev[j] = p.h0(j);

  std::vector<std::vector<double>> out;
  for (size_t t = 0; t < s.size(); ++t) {
    std::vector<double> h(H);
    for (int j = 0; j < H; ++j) {
      double a = 0.0;
      for (int e = 0; e < E; ++e)
        a += table.row(s.tokens[t].vocab_id)(e) * p.U(e, j);
      for (int m = 0; m < H; ++m) a += h_prev[m] * p.W(m, j);
      h[j] = activation(act, a);
    }
    std::vector<double> logits(K);
    double max_logit = -1e300;
    for (int k = 0; k < K; ++k) {
      double z = p.b1(k);
      for (int j = 0; j < H; ++j) z += h[j] * p.V(j, k);
      logits[k] = z;
      max_logit = std::max(max_logit, z);
    }
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(logits[k] - max_logit);
    std::vector<double> probs(K);
    for (int k = 0; k < K; ++k)
      probs[k] = std::exp(logits[k] - max_logit) / denom;
    out.push_back(probs);
    h_prev = h;
  }
  return out;
}

}  // namespace

TEST_CASE("rnn_forward produces probability rows") {
  NetFixture fx(10, 4, 31);
  Rng rng(2);
  RnnParams params = init_rnn(4, 6, 3, 1, 11);
  ActivationSpec act;

  for (int trial = 0; trial < 10; ++trial) {
    TaggedSentence s = fx.sentence(rng, 1 + static_cast<int>(rng.index(7)), 3);
    Eigen::MatrixXd dist = rnn_forward(params, s, fx.table, act);
    REQUIRE(dist.rows() == static_cast<int>(s.size()));
    for (int t = 0; t < dist.rows(); ++t) {
      CHECK(std::abs(dist.row(t).sum() - 1.0) < 1e-9);
      CHECK(dist.row(t).minCoeff() > 0.0);
    }
  }
}

TEST_CASE("rnn_forward with zero output weights is uniform") {
  NetFixture fx(6, 3, 5);
  RnnParams params = init_rnn(3, 4, 5, 1, 7);
  params.V.setZero();
  params.b1.setZero();
  Rng rng(9);
  TaggedSentence s = fx.sentence(rng, 1, 5);
  Eigen::MatrixXd dist = rnn_forward(params, s, fx.table, ActivationSpec{});
  for (int k = 0; k < 5; ++k) CHECK(dist(0, k) == doctest::Approx(0.2));
}

TEST_CASE("rnn_forward matches a naive scalar recurrence") {
  NetFixture fx(12, 2, 77);
  Rng rng(4);
  RnnParams params = init_rnn(2, 2, 2, 1, 13, 0.8);
  ActivationSpec act{0.6, 0.4, 0.2, 0.5};
  TaggedSentence s = fx.sentence(rng, 3, 2);

  Eigen::MatrixXd dist = rnn_forward(params, s, fx.table, act);
  auto expected = naive_rnn_forward(params, s, fx.table, act);
  for (int t = 0; t < 3; ++t)
    for (int k = 0; k < 2; ++k)
      CHECK(std::abs(dist(t, k) - expected[t][k]) < 1e-12);
}

TEST_CASE("ernn_forward ignores the summary when w2 is zero") {
  NetFixture fx(8, 3, 19);
  Rng rng(6);
  ErnnParams params = init_ernn(3, 4, 3, 5, 1, 21);
  params.w2.setZero();
  params.b0.setZero();
  TaggedSentence s = fx.sentence(rng, 4, 3);

  SourceSummary i1, i2;
  i1.values = Eigen::VectorXd::Zero(5);
  i2.values = Eigen::VectorXd::Constant(5, 3.25);
  ActivationSpec act;
  Eigen::MatrixXd d1 = ernn_forward(params, s, fx.table, i1, act);
  Eigen::MatrixXd d2 = ernn_forward(params, s, fx.table, i2, act);
  CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);

  SUBCASE("and reduces to the rnn with an extra sigmoid layer over W") {
    Eigen::MatrixXd rnn_dist = rnn_forward(params, s, fx.table, act);
    // recompute by pushing the rnn hidden state through F(h W) V + b1
    // on a scalar path
    RnnParams plain = params;
    // forward once more to fetch hidden states via the naive path
    int H = params.hidden();
    Eigen::RowVectorXd h = params.h0;
    for (size_t t = 0; t < s.size(); ++t) {
      Eigen::RowVectorXd a =
          fx.table.row(s.tokens[t].vocab_id) * params.U + h * params.W;
      h = a.unaryExpr([&](double x) { return activation(act, x); });
      Eigen::RowVectorXd c = h * params.W;
      Eigen::RowVectorXd conf =
          c.unaryExpr([](double x) { return sigmoid(x); });
      Eigen::RowVectorXd probs = softmax(conf * params.V + params.b1);
      for (int k = 0; k < params.n_tags(); ++k)
        CHECK(d1(static_cast<int>(t), k) == doctest::Approx(probs(k)).epsilon(1e-14));
    }
    (void)plain;
    (void)rnn_dist;
    (void)H;
  }
}

TEST_CASE("ernn_forward matches a scalar hand computation") {
  // 1x1 everything: U=0.5, W=0.25, V=2, b1=0.1, h0=0.3, w2=0.8, b0=-0.2, i=0.7
  Vocabulary vocab;
  vocab.add("tok");
  EmbeddingTable table(vocab.size(), 1);
  table.row(vocab.lookup("tok"))(0) = 0.9;

  ErnnParams p;
  p.window = 1;
  p.U = Eigen::MatrixXd::Constant(1, 1, 0.5);
  p.W = Eigen::MatrixXd::Constant(1, 1, 0.25);
  p.V = Eigen::MatrixXd::Constant(1, 2, 2.0);
  p.V(0, 1) = -1.0;
  p.b1 = Eigen::RowVectorXd::Zero(2);
  p.b1 << 0.1, 0.0;
  p.h0 = Eigen::RowVectorXd::Constant(1, 0.3);
  p.w2 = Eigen::MatrixXd::Constant(1, 1, 0.8);
  p.b0 = Eigen::RowVectorXd::Constant(1, -0.2);

  SourceSummary summary;
  summary.values = Eigen::VectorXd::Constant(1, 0.7);
  ActivationSpec act{0.5, 0.5, 0.2, 0.5};

  TaggedSentence s;
  s.tokens = {{"tok", vocab.lookup("tok")}, {"tok", vocab.lookup("tok")}};
  s.tags = {0, 0};

  Eigen::MatrixXd dist = ernn_forward(p, s, table, summary, act);

  auto A = [&](double x) { return 0.5 * (1.0 / (1.0 + std::exp(-x))) +
                                  0.5 * (0.2 * x + 0.5); };
  auto F = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
  double h_prev = 0.3;
  for (int t = 0; t < 2; ++t) {
    double a = 0.9 * 0.5 + h_prev * 0.25;
    double h = A(a);
    double c = h * 0.25 + 0.7 * 0.8 - 0.2;
    double sc = F(c);
    double z0 = sc * 2.0 + 0.1;
    double z1 = sc * -1.0;
    double m = std::max(z0, z1);
    double e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
    CHECK(std::abs(dist(t, 0) - e0 / (e0 + e1)) < 1e-12);
    CHECK(std::abs(dist(t, 1) - e1 / (e0 + e1)) < 1e-12);
    h_prev = h;
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 3; ++trial) {
    int embed = 2 + static_cast<int>(rng.index(4));
    int hidden = 2 + static_cast<int>(rng.index(4));
    int n_tags = 2 + static_cast<int>(rng.index(3));
    NetFixture fx(12, embed, 1000 + trial);
    Corpus batch;
    for (int b = 0; b < 2; ++b)
      batch.push_back(
          fx.sentence(rng, 1 + static_cast<int>(rng.index(5)), n_tags));
    ActivationSpec act{rng.uniform(0.2, 1.0), rng.uniform(0.2, 1.0), 0.2, 0.5};

    SUBCASE("rnn") {}
    RnnParams rnn = init_rnn(embed, hidden, n_tags, 1, 55 + trial, 0.4);
    RnnGradients rg = rnn_gradients(rnn, batch, fx.table, act);
    auto rnn_loss = [&]() { return rnn_batch_loss(rnn, batch, fx.table, act); };
    auto analytic = oracles::tensor_refs(rg);
    auto param_refs = oracles::tensor_refs(rnn);
    for (size_t tensor = 0; tensor < param_refs.size(); ++tensor) {
      for (Eigen::Index i = 0; i < param_refs[tensor].size; ++i) {
        double numeric =
            oracles::central_difference(rnn_loss, param_refs[tensor].data + i);
        CHECK_MESSAGE(
            oracles::gradient_close(analytic[tensor].data[i], numeric),
            "rnn tensor ", param_refs[tensor].name, " coordinate ", i);
      }
    }

    ErnnParams ernn = init_ernn(embed, hidden, n_tags, 3, 1, 99 + trial, 0.4);
    ernn.confluent_combined = trial % 2 == 1;
    SourceSummary summary;
    summary.values = Eigen::VectorXd(3);
    for (int j = 0; j < 3; ++j) summary.values(j) = rng.uniform(-1, 1);
    ErnnGradients eg = ernn_gradients(ernn, batch, fx.table, summary, act);
    auto ernn_loss = [&]() {
      return ernn_batch_loss(ernn, batch, fx.table, summary, act);
    };
    auto e_analytic = oracles::tensor_refs(eg);
    auto e_params = oracles::tensor_refs(ernn);
    for (size_t tensor = 0; tensor < e_params.size(); ++tensor) {
      for (Eigen::Index i = 0; i < e_params[tensor].size; ++i) {
        double numeric =
            oracles::central_difference(ernn_loss, e_params[tensor].data + i);
        CHECK_MESSAGE(
            oracles::gradient_close(e_analytic[tensor].data[i], numeric),
            "ernn tensor ", e_params[tensor].name, " coordinate ", i);
      }
    }
  }
}

TEST_CASE("uniform targets on a zero-output net give zero V gradient") {
  NetFixture fx(6, 3, 44);
  RnnParams params = init_rnn(3, 4, 3, 1, 8);
  params.V.setZero();
  params.b1.setZero();

  // same single-token sentence once per tag
  Corpus batch;
  for (int k = 0; k < 3; ++k) {
    TaggedSentence s;
    int id = Vocabulary::kReservedCount;
    s.tokens.push_back({fx.vocab.word(id), id});
    s.tags.push_back(k);
    batch.push_back(s);
  }
  RnnGradients g = rnn_gradients(params, batch, fx.table, ActivationSpec{});
  CHECK(g.V.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(g.b1.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("duplicating a sentence doubles its gradient contribution") {
  NetFixture fx(9, 3, 23);
  Rng rng(12);
  RnnParams params = init_rnn(3, 3, 3, 1, 66);
  ActivationSpec act;
  TaggedSentence s = fx.sentence(rng, 4, 3);

  RnnGradients once = rnn_gradients(params, {s}, fx.table, act);
  RnnGradients twice = rnn_gradients(params, {s, s}, fx.table, act);
  CHECK((twice.U - 2.0 * once.U).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((twice.W - 2.0 * once.W).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((twice.V - 2.0 * once.V).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

// Deterministic word->tag corpus: each word belongs to exactly one tag.
struct SeparableFixture {
  Vocabulary vocab;
  TagSet tags;
  EmbeddingTable table;
  Corpus corpus;

  SeparableFixture(int sentences, uint64_t seed) {
    tags.add("B-x");
    tags.add("I-x");
    std::vector<std::pair<std::string, std::string>> lexicon;
    for (int i = 0; i < 6; ++i)
      lexicon.emplace_back("o" + std::to_string(i), "O");
    for (int i = 0; i < 3; ++i)
      lexicon.emplace_back("b" + std::to_string(i), "B-x");
    for (int i = 0; i < 3; ++i)
      lexicon.emplace_back("i" + std::to_string(i), "I-x");
    for (const auto& [w, t] : lexicon) vocab.add(w);
    table = random_embeddings(vocab, 8, seed, 0.5);

    Rng rng(seed);
    for (int n = 0; n < sentences; ++n) {
      TaggedSentence s;
      int len = 3 + static_cast<int>(rng.index(4));
      for (int t = 0; t < len; ++t) {
        size_t pick;
        if (t > 0 && tags.tag(s.tags.back()) != "O" && rng.bernoulli(0.4))
          pick = 9 + rng.index(3);  // continue the entity with an I word
        else if (rng.bernoulli(0.3))
          pick = 6 + rng.index(3);  // begin an entity
        else
          pick = rng.index(6);  // outside word
        const auto& [w, tag] = lexicon[pick];
        s.tokens.push_back({w, vocab.lookup(w)});
        s.tags.push_back(*tags.lookup(tag));
      }
      s.tags = repair_iob(s.tags, tags);
      corpus.push_back(std::move(s));
    }
  }
};

}  // namespace

TEST_CASE("training drives the loss down on a separable corpus") {
  SeparableFixture fx(40, 5);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.hidden = 12;
  cfg.learning_rate = 0.15;
  cfg.seed = 3;
  ActivationSpec act;

  auto result = train_rnn(fx.corpus, fx.table, cfg, act,
                          static_cast<int>(fx.tags.size()));
  REQUIRE(result.epoch_losses.size() == 200);
  CHECK(result.epoch_losses.back() < 0.01);
  CHECK(result.epoch_losses.back() < result.epoch_losses.front());

  SUBCASE("the trained model reproduces gold tags") {
    for (int i = 0; i < 5; ++i) {
      Decoded d = decode(result.params, fx.corpus[i], fx.table, act, fx.tags);
      CHECK(d.tags == fx.corpus[i].tags);
      for (double c : d.confidence) {
        CHECK(c >= 1.0 / static_cast<double>(fx.tags.size()) - 1e-12);
        CHECK(c <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("a zero learning rate leaves parameters at initialization") {
  SeparableFixture fx(8, 21);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.learning_rate = 0.0;
  cfg.hidden = 5;
  cfg.seed = 77;
  auto result = train_rnn(fx.corpus, fx.table, cfg, ActivationSpec{},
                          static_cast<int>(fx.tags.size()));
  RnnParams fresh = init_rnn(fx.table.dim(), 5, static_cast<int>(fx.tags.size()),
                             1, 77, cfg.init_scale);
  CHECK(result.params.U == fresh.U);
  CHECK(result.params.W == fresh.W);
  CHECK(result.params.V == fresh.V);
  CHECK(result.params.b1 == fresh.b1);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  SeparableFixture fx(15, 9);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.hidden = 6;
  cfg.seed = 31;
  auto r1 = train_rnn(fx.corpus, fx.table, cfg, ActivationSpec{},
                      static_cast<int>(fx.tags.size()));
  auto r2 = train_rnn(fx.corpus, fx.table, cfg, ActivationSpec{},
                      static_cast<int>(fx.tags.size()));
  CHECK(r1.epoch_losses.back() == r2.epoch_losses.back());
  CHECK(r1.params.U == r2.params.U);
}

TEST_CASE("an absurd learning rate reports divergence with its epoch") {
  SeparableFixture fx(10, 2);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.learning_rate = 1e18;
  cfg.hidden = 4;
  try {
    train_rnn(fx.corpus, fx.table, cfg, ActivationSpec{},
              static_cast<int>(fx.tags.size()));
    FAIL("expected TrainingDiverged");
  } catch (const TrainingDiverged& e) {
    CHECK(e.epoch >= 1);
  }
}

TEST_CASE("ernn training works end to end on the separable corpus") {
  SeparableFixture fx(40, 13);
  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.hidden = 12;
  cfg.learning_rate = 0.15;
  cfg.seed = 5;
  SourceSummary summary;
  summary.values = corpus_mean(fx.corpus, fx.table);
  auto result = train_ernn(fx.corpus, fx.table, summary, cfg, ActivationSpec{},
                           static_cast<int>(fx.tags.size()));
  CHECK(result.epoch_losses.back() < 0.05);
  Decoded d =
      decode(result.params, fx.corpus[0], fx.table, summary, ActivationSpec{},
             fx.tags);
  CHECK(d.tags == fx.corpus[0].tags);
}

TEST_CASE("decode breaks ties toward the lowest tag id") {
  NetFixture fx(5, 2, 3);
  TagSet tags;
  tags.add("B-q");
  tags.add("I-q");
  RnnParams params = init_rnn(2, 3, 3, 1, 4);
  params.V.setZero();
  params.b1.setZero();
  Rng rng(1);
  TaggedSentence s = fx.sentence(rng, 3, 3);
  Decoded d = decode(params, s, fx.table, ActivationSpec{}, tags);
  for (int t : d.tags) CHECK(t == tags.outside_id());
  for (double c : d.confidence) CHECK(c == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("window context concatenates neighbor embeddings") {
  NetFixture fx(8, 3, 91);
  Rng rng(14);
  TrainConfig cfg;
  cfg.window = 3;
  cfg.epochs = 2;
  cfg.hidden = 4;
  SeparableFixture sep(6, 10);
  auto result = train_rnn(sep.corpus, sep.table, cfg, ActivationSpec{},
                          static_cast<int>(sep.tags.size()));
  CHECK(result.params.U.rows() == 3 * sep.table.dim());
  // decoding still yields one tag per token
  Decoded d = decode(result.params, sep.corpus[0], sep.table, ActivationSpec{},
                     sep.tags);
  CHECK(d.tags.size() == sep.corpus[0].size());
}

TEST_CASE("window must be odd") {
  TrainConfig cfg;
  cfg.window = 2;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("build_source_summary weights sentences by plan counts") {
  NetFixture fx(6, 3, 55);
  Corpus source;
  for (int i = 0; i < 2; ++i) {
    TaggedSentence s;
    int id = Vocabulary::kReservedCount + i;
    s.tokens.push_back({fx.vocab.word(id), id});
    s.tags.push_back(0);
    source.push_back(std::move(s));
  }
  Eigen::VectorXd u = sentence_vector(source[0], fx.table);
  Eigen::VectorXd w = sentence_vector(source[1], fx.table);

  TransferPlan plan;
  plan.entries.push_back({1, 0, 1.0, 1});
  plan.entries.push_back({2, 1, 0.5, 3});
  SourceSummary summary = build_source_summary(plan, source, fx.table);
  CHECK((summary.values - (u + 3 * w) / 4).norm() < 1e-12);

  SUBCASE("single sentence plan returns its vector") {
    TransferPlan single;
    single.entries.push_back({1, 1, 1.0, 1});
    CHECK((build_source_summary(single, source, fx.table).values - w).norm() <
          1e-12);
  }
  SUBCASE("scaling all counts changes nothing") {
    TransferPlan scaled;
    scaled.entries.push_back({1, 0, 1.0, 10});
    scaled.entries.push_back({2, 1, 0.5, 30});
    CHECK((build_source_summary(scaled, source, fx.table).values -
           summary.values)
              .norm() < 1e-12);
  }
  SUBCASE("empty plan is a domain error") {
    TransferPlan empty;
    CHECK_THROWS_AS(build_source_summary(empty, source, fx.table), DataError);
  }
}
