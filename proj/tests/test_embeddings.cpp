#include <doctest.h>

#include "embeddings.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace ernn;
using oracles::TempDir;
using oracles::write_file;

namespace {

Vocabulary vocab_of(std::initializer_list<const char*> words) {
  Vocabulary vocab;
  for (const char* w : words) vocab.add(w);
  return vocab;
}

TaggedSentence sentence_of(const Vocabulary& vocab,
                           std::initializer_list<const char*> words) {
  TaggedSentence s;
  for (const char* w : words) {
    s.tokens.push_back({w, vocab.lookup(w)});
    s.tags.push_back(0);
  }
  return s;
}

}  // namespace

TEST_CASE("load_embeddings fills absent words with seeded vectors") {
  TempDir dir("emb");
  write_file(dir.file("vec.txt"),
             "one 1 0 0 0\ntwo 0 1 0 0\nthree 0 0 1 0\n");
  Vocabulary vocab = vocab_of({"one", "two", "three", "four", "five"});

  EmbeddingTable table = load_embeddings(dir.file("vec.txt"), vocab, 42);
  CHECK(table.rows() == vocab.size());
  CHECK(table.dim() == 4);
  CHECK(table.row(vocab.lookup("two"))(1) == 1.0);

  EmbeddingTable again = load_embeddings(dir.file("vec.txt"), vocab, 42);
  CHECK(table.matrix() == again.matrix());  // fallback rows are reproducible

  EmbeddingTable other = load_embeddings(dir.file("vec.txt"), vocab, 43);
  CHECK(table.row(vocab.lookup("four")) != other.row(vocab.lookup("four")));

  for (int id : {vocab.lookup("four"), vocab.lookup("five")})
    for (int j = 0; j < 4; ++j) CHECK(std::abs(table.row(id)(j)) <= 0.1);
}

TEST_CASE("load_embeddings rejects inconsistent dimensions and empty files") {
  TempDir dir("emb");
  write_file(dir.file("bad.txt"), "one 1 2 3\ntwo 1 2\n");
  Vocabulary vocab = vocab_of({"one", "two"});
  CHECK_THROWS_AS(load_embeddings(dir.file("bad.txt"), vocab), DataError);

  write_file(dir.file("empty.txt"), "");
  CHECK_THROWS_AS(load_embeddings(dir.file("empty.txt"), vocab), DataError);
}

TEST_CASE("embedding lookup is keyed by word, not file order") {
  TempDir dir("emb");
  write_file(dir.file("vec.txt"), "b 2 2\na 1 1\n");
  Vocabulary v1 = vocab_of({"a", "b"});
  Vocabulary v2 = vocab_of({"b", "a"});
  EmbeddingTable t1 = load_embeddings(dir.file("vec.txt"), v1);
  EmbeddingTable t2 = load_embeddings(dir.file("vec.txt"), v2);
  CHECK(t1.row(v1.lookup("a")) == t2.row(v2.lookup("a")));
  CHECK(t1.row(v1.lookup("b")) == t2.row(v2.lookup("b")));
}

TEST_CASE("save then load preserves present-word vectors") {
  Vocabulary vocab = vocab_of({"x", "y", "z"});
  EmbeddingTable table = random_embeddings(vocab, 6, 9, 0.5);
  TempDir dir("emb");
  save_embeddings(dir.file("vec.txt"), table, vocab);
  EmbeddingTable loaded = load_embeddings(dir.file("vec.txt"), vocab);
  for (size_t id = 0; id < vocab.size(); ++id)
    for (int j = 0; j < 6; ++j)
      CHECK(loaded.row(static_cast<int>(id))(j) ==
            doctest::Approx(table.row(static_cast<int>(id))(j)).epsilon(1e-12));
}

TEST_CASE("random_embeddings are seeded and bounded") {
  Vocabulary vocab;
  for (int i = 0; i < 100; ++i) vocab.add("w" + std::to_string(i));

  EmbeddingTable a = random_embeddings(vocab, 50, 5, 0.1);
  EmbeddingTable b = random_embeddings(vocab, 50, 5, 0.1);
  CHECK(a.matrix() == b.matrix());
  CHECK(a.rows() == 102);  // 100 words + padding + unknown
  CHECK(a.dim() == 50);
  CHECK(a.matrix().cwiseAbs().maxCoeff() <= 0.1);

  EmbeddingTable zero = random_embeddings(vocab, 5, 5, 0.0);
  CHECK(zero.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sentence_vector is the mean of token rows") {
  Vocabulary vocab = vocab_of({"p", "q", "r"});
  EmbeddingTable table(vocab.size(), 2);
  table.row(vocab.lookup("p")) << 1, 0;
  table.row(vocab.lookup("q")) << 0, 1;
  table.row(vocab.lookup("r")) << 2, 2;

  SUBCASE("one token returns its own row") {
    auto v = sentence_vector(sentence_of(vocab, {"p"}), table);
    CHECK(v(0) == 1.0);
    CHECK(v(1) == 0.0);
  }
  SUBCASE("opposite vectors cancel") {
    EmbeddingTable t2(vocab.size(), 2);
    t2.row(vocab.lookup("p")) << 3, -1;
    t2.row(vocab.lookup("q")) << -3, 1;
    auto v = sentence_vector(sentence_of(vocab, {"p", "q"}), t2);
    CHECK(v.norm() == 0.0);
  }
  SUBCASE("hand-computed three-token mean") {
    auto v = sentence_vector(sentence_of(vocab, {"p", "q", "r"}), table);
    CHECK(v(0) == doctest::Approx(1.0));
    CHECK(v(1) == doctest::Approx(1.0));
  }
  SUBCASE("permutation invariance") {
    auto v1 = sentence_vector(sentence_of(vocab, {"p", "q", "r"}), table);
    auto v2 = sentence_vector(sentence_of(vocab, {"r", "p", "q"}), table);
    CHECK((v1 - v2).norm() == doctest::Approx(0.0));
  }
  SUBCASE("empty sentence is a domain error") {
    TaggedSentence empty;
    CHECK_THROWS_AS(sentence_vector(empty, table), DataError);
  }
}

TEST_CASE("corpus_mean averages sentence vectors") {
  Vocabulary vocab = vocab_of({"p", "q"});
  EmbeddingTable table(vocab.size(), 2);
  table.row(vocab.lookup("p")) << 4, 0;
  table.row(vocab.lookup("q")) << 0, 2;

  Corpus one = {sentence_of(vocab, {"p"})};
  CHECK(corpus_mean(one, table) == sentence_vector(one[0], table));

  Corpus two = {sentence_of(vocab, {"p"}), sentence_of(vocab, {"q"})};
  auto mean = corpus_mean(two, table);
  CHECK(mean(0) == doctest::Approx(2.0));
  CHECK(mean(1) == doctest::Approx(1.0));

  SUBCASE("matches an independent recomputation on random data") {
    Rng rng(17);
    Vocabulary big;
    for (int i = 0; i < 30; ++i) big.add("v" + std::to_string(i));
    EmbeddingTable t = random_embeddings(big, 8, 3, 0.2);
    Corpus corpus;
    for (int s = 0; s < 10; ++s) {
      TaggedSentence sent;
      int len = 1 + static_cast<int>(rng.index(6));
      for (int i = 0; i < len; ++i) {
        int id = Vocabulary::kReservedCount + static_cast<int>(rng.index(30));
        sent.tokens.push_back({big.word(id), id});
        sent.tags.push_back(0);
      }
      corpus.push_back(std::move(sent));
    }
    // oracle: accumulate token means sentence by sentence
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(8);
    for (const auto& s : corpus) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(8);
      for (const auto& tok : s.tokens) sum += t.row(tok.vocab_id).transpose();
      expected += sum / static_cast<double>(s.size());
    }
    expected /= static_cast<double>(corpus.size());
    CHECK((corpus_mean(corpus, t) - expected).norm() < 1e-12);
  }

  SUBCASE("empty corpus is a domain error") {
    Corpus empty;
    CHECK_THROWS_AS(corpus_mean(empty, table), DataError);
  }
}
