#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rng.hpp"
#include "transfer.hpp"

using namespace ernn;

namespace {

Eigen::VectorXd random_vector(Rng& rng, int dim, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.uniform(-scale, scale);
  return v;
}

}  // namespace

TEST_CASE("rbf kernel closed-form values") {
  KernelSpec rbf;
  Eigen::VectorXd x(2), z(2);
  x << 1, 0;
  z << 1, 0;
  CHECK(kernel(rbf, x, z) == doctest::Approx(1.0).epsilon(1e-15));

  // squared distance 2 with sigma 1
  z << 0, 1;
  CHECK(std::abs(kernel(rbf, x, z) - std::exp(-1.0)) < 1e-12);
}

TEST_CASE("polynomial kernel closed-form values") {
  KernelSpec poly;
  poly.kind = KernelKind::polynomial;
  poly.degree = 2;
  Eigen::VectorXd x(2), z(2);
  x << 1, 0;
  z << 1, 0;  // dot = 1
  CHECK(kernel(poly, x, z) == 4.0);

  z << 0, 1;  // orthogonal
  CHECK(kernel(poly, x, z) == 1.0);
}

TEST_CASE("kernel argument validation") {
  KernelSpec spec;
  Eigen::VectorXd x(2), z(3);
  CHECK_THROWS_AS(kernel(spec, x, z), DataError);

  spec.sigma = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.sigma = 1.0;
  spec.degree = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("rbf kernel properties over random pairs") {
  KernelSpec rbf;
  rbf.sigma = 0.7;
  KernelSpec poly;
  poly.kind = KernelKind::polynomial;
  poly.degree = 3;
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd x = random_vector(rng, 6);
    Eigen::VectorXd z = random_vector(rng, 6);
    double k = kernel(rbf, x, z);
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
    CHECK(kernel(rbf, z, x) == doctest::Approx(k).epsilon(1e-12));
    CHECK(kernel(poly, x, z) ==
          doctest::Approx(kernel(poly, z, x)).epsilon(1e-12));
    CHECK(kernel(rbf, x, x) == doctest::Approx(1.0).epsilon(1e-15));
    if ((x - z).norm() > 1e-9) CHECK(kernel(rbf, x, z) < 1.0);
  }
}

namespace {

struct RankFixture {
  Vocabulary vocab;
  EmbeddingTable table;
  Corpus source;

  explicit RankFixture(int n, uint64_t seed) {
    for (int i = 0; i < n; ++i) vocab.add("w" + std::to_string(i));
    table = random_embeddings(vocab, 5, seed, 1.0);
    for (int i = 0; i < n; ++i) {
      TaggedSentence s;
      int id = Vocabulary::kReservedCount + i;
      s.tokens.push_back({vocab.word(id), id});
      s.tags.push_back(0);
      source.push_back(std::move(s));
    }
  }
};

}  // namespace

TEST_CASE("rank_source orders by kernel score with stable ties") {
  RankFixture fx(100, 21);
  Rng rng(5);
  Eigen::VectorXd target = random_vector(rng, 5);
  KernelSpec spec;

  RankedSource ranked = rank_source(fx.source, target, fx.table, spec);
  REQUIRE(ranked.entries.size() == 100);

  // oracle: compute every score independently and stable-sort
  std::vector<std::pair<int, double>> expected;
  for (int i = 0; i < 100; ++i)
    expected.emplace_back(
        i, kernel(spec, sentence_vector(fx.source[i], fx.table), target));
  std::stable_sort(expected.begin(), expected.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (size_t r = 0; r < expected.size(); ++r) {
    CHECK(ranked.entries[r].first == expected[r].first);
    CHECK(ranked.entries[r].second == doctest::Approx(expected[r].second));
  }

  SUBCASE("rbf ranking equals ascending distance ranking") {
    for (size_t r = 1; r < ranked.entries.size(); ++r) {
      double d_prev =
          (sentence_vector(fx.source[ranked.entries[r - 1].first], fx.table) -
           target)
              .norm();
      double d_this =
          (sentence_vector(fx.source[ranked.entries[r].first], fx.table) -
           target)
              .norm();
      CHECK(d_prev <= d_this + 1e-12);
    }
  }
}

TEST_CASE("rank_source puts an exact match first") {
  RankFixture fx(2, 33);
  Eigen::VectorXd target =
      sentence_vector(fx.source[1], fx.table);
  KernelSpec spec;
  RankedSource ranked = rank_source(fx.source, target, fx.table, spec);
  CHECK(ranked.entries[0].first == 1);
  CHECK(ranked.entries[0].second == doctest::Approx(1.0));
}

TEST_CASE("rank_source of a single sentence") {
  RankFixture fx(1, 4);
  Eigen::VectorXd target = Eigen::VectorXd::Zero(5);
  CHECK(rank_source(fx.source, target, fx.table, KernelSpec{}).entries.size() == 1);
}

TEST_CASE("corpus_mean is invariant under duplicating the corpus") {
  RankFixture fx(10, 8);
  Corpus doubled = fx.source;
  doubled.insert(doubled.end(), fx.source.begin(), fx.source.end());
  CHECK((corpus_mean(fx.source, fx.table) - corpus_mean(doubled, fx.table))
            .norm() < 1e-12);
}

namespace {

RankedSource synthetic_ranking(int n) {
  RankedSource ranked;
  for (int i = 0; i < n; ++i)
    ranked.entries.emplace_back(i, 1.0 - 0.0001 * i);
  return ranked;
}

}  // namespace

TEST_CASE("plan_top_n selects the highest ranks once each") {
  RankedSource ranked;
  ranked.entries = {{7, .9}, {3, .8}, {5, .7}, {1, .1}};
  TransferPlan plan = plan_top_n(ranked, 3);
  REQUIRE(plan.entries.size() == 3);
  CHECK(plan.entries[0].source_index == 7);
  CHECK(plan.entries[1].source_index == 3);
  CHECK(plan.entries[2].source_index == 5);
  for (const auto& e : plan.entries) CHECK(e.copies == 1);
  CHECK(plan.total_instances() == 3);

  CHECK_THROWS_AS(plan_top_n(ranked, 5), ConfigError);
  CHECK(plan_top_n(ranked, 4).total_instances() == 4);
}

TEST_CASE("default replication schedule matches the band definition") {
  ReplicationSchedule schedule = ReplicationSchedule::default_schedule();
  schedule.validate();
  CHECK(schedule.copies_for_rank(1) == 80);
  CHECK(schedule.copies_for_rank(250) == 80);
  CHECK(schedule.copies_for_rank(251) == 50);
  CHECK(schedule.copies_for_rank(500) == 50);
  CHECK(schedule.copies_for_rank(501) == 30);
  CHECK(schedule.copies_for_rank(800) == 30);
  CHECK(schedule.copies_for_rank(801) == 1);
  CHECK(schedule.copies_for_rank(900) == 1);
}

TEST_CASE("plan_replicate over 1000 ranked sentences yields 41700 instances") {
  TransferPlan plan = plan_replicate(synthetic_ranking(1000),
                                     ReplicationSchedule::default_schedule());
  // 250*80 + 250*50 + 300*30 + 200*1
  CHECK(plan.total_instances() == 41700);
  CHECK(plan.entries[0].copies == 80);
  CHECK(plan.entries[899].copies == 1);

  size_t band_sum = 250 * 80 + 250 * 50 + 300 * 30 + 200 * 1;
  CHECK(plan.total_instances() == band_sum);
}

TEST_CASE("schedule parsing and validation") {
  ReplicationSchedule schedule = ReplicationSchedule::parse("10:4,20:2,*:1");
  CHECK(schedule.copies_for_rank(10) == 4);
  CHECK(schedule.copies_for_rank(11) == 2);
  CHECK(schedule.copies_for_rank(21) == 1);
  CHECK(ReplicationSchedule::parse(schedule.to_string()).to_string() ==
        schedule.to_string());

  CHECK_THROWS_AS(ReplicationSchedule::parse("10:4,5:2,*:1"), ConfigError);
  CHECK_THROWS_AS(ReplicationSchedule::parse("10:0,*:1"), ConfigError);
  CHECK_THROWS_AS(ReplicationSchedule::parse("10:4,20:2"), ConfigError);
}

TEST_CASE("materialize expands the plan with adjacent copies") {
  RankFixture fx(5, 2);
  TransferPlan plan;
  plan.entries.push_back({1, 3, 0.9, 2});
  Corpus out = materialize(plan, fx.source);
  REQUIRE(out.size() == 2);
  CHECK(out[0].tokens[0].surface == fx.source[3].tokens[0].surface);
  CHECK(out[1].tokens[0].surface == fx.source[3].tokens[0].surface);

  TransferPlan empty;
  CHECK(materialize(empty, fx.source).empty());

  TransferPlan bad;
  bad.entries.push_back({1, 99, 0.5, 1});
  CHECK_THROWS_AS(materialize(bad, fx.source), InternalError);
}

TEST_CASE("materializing the default schedule over 1000 gives 41700 sentences") {
  RankFixture fx(1000, 14);
  TransferPlan plan = plan_replicate(synthetic_ranking(1000),
                                     ReplicationSchedule::default_schedule());
  CHECK(materialize(plan, fx.source).size() == 41700);
}

TEST_CASE("plan files round-trip") {
  oracles::TempDir dir("plan");
  TransferPlan plan = plan_replicate(synthetic_ranking(30),
                                     ReplicationSchedule::parse("10:3,*:1"));
  save_plan(dir.file("plan.tsv"), plan);
  TransferPlan loaded = load_plan(dir.file("plan.tsv"));
  CHECK(loaded.strategy == plan.strategy);
  REQUIRE(loaded.entries.size() == plan.entries.size());
  for (size_t i = 0; i < plan.entries.size(); ++i) {
    CHECK(loaded.entries[i].source_index == plan.entries[i].source_index);
    CHECK(loaded.entries[i].copies == plan.entries[i].copies);
  }
  CHECK(loaded.total_instances() == plan.total_instances());
}
