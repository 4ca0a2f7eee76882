#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "synth.hpp"

using namespace ernn;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.vocab_size = 120;
  spec.entity_types = 3;
  spec.source_sentences = 60;
  spec.target_train_sentences = 40;
  spec.target_test_sentences = 20;
  spec.pool_sentences = 10;
  spec.embed_dim = 8;
  spec.seed = 77;
  return spec;
}

}  // namespace

TEST_CASE("generation honors the requested sentence counts") {
  SyntheticSpec spec = small_spec();
  SyntheticData data = generate_synthetic(spec);
  CHECK(data.source.size() == 60);
  CHECK(data.target_train.size() == 40);
  CHECK(data.target_test.size() == 20);
  CHECK(data.target_pool.size() == 10);
  CHECK(data.words.size() == 120);
  CHECK(data.word_vectors[0].size() == 8);
}

TEST_CASE("generated sentences respect the length bounds and IOB validity") {
  SyntheticSpec spec = small_spec();
  SyntheticData data = generate_synthetic(spec);
  TagSet tags;
  for (const RawCorpus* corpus :
       {&data.source, &data.target_train, &data.target_test}) {
    for (const auto& s : *corpus) {
      CHECK(s.surfaces.size() >= static_cast<size_t>(spec.min_len));
      CHECK(s.surfaces.size() <= static_cast<size_t>(spec.max_len));
      std::vector<int> ids;
      for (const auto& t : s.tags) ids.push_back(tags.add(t));
      CHECK(is_iob_valid(ids, tags));
    }
  }
}

TEST_CASE("each word carries one dominant tag in the target domain") {
  SyntheticSpec spec = small_spec();
  SyntheticData data = generate_synthetic(spec);
  std::map<std::string, std::set<std::string>> tags_per_word;
  for (const RawCorpus* corpus : {&data.target_train, &data.target_test})
    for (const auto& s : *corpus)
      for (size_t t = 0; t < s.surfaces.size(); ++t)
        tags_per_word[s.surfaces[t]].insert(s.tags[t]);
  for (const auto& [word, tagset] : tags_per_word)
    CHECK_MESSAGE(tagset.size() == 1, "word ", word, " has multiple tags");
}

TEST_CASE("divergence zero keeps the source inside the active lexicon") {
  SyntheticSpec spec = small_spec();
  spec.divergence = 0.0;
  SyntheticData data = generate_synthetic(spec);

  std::set<std::string> target_words;
  for (const auto& s : data.target_train)
    target_words.insert(s.surfaces.begin(), s.surfaces.end());

  int active = static_cast<int>(spec.vocab_size * spec.active_fraction);
  for (const auto& s : data.source)
    for (const auto& w : s.surfaces) {
      int id = std::stoi(w.substr(1));
      CHECK(id < active);
    }
}

TEST_CASE("lexical overlap decreases monotonically in the divergence knob") {
  SyntheticSpec spec = small_spec();
  spec.source_sentences = 150;
  spec.target_train_sentences = 150;

  auto overlap_at = [&](double divergence) {
    SyntheticSpec s = spec;
    s.divergence = divergence;
    SyntheticData data = generate_synthetic(s);
    return lexical_overlap(data.source, data.target_train);
  };
  double at0 = overlap_at(0.0);
  double at03 = overlap_at(0.3);
  double at1 = overlap_at(1.0);
  CHECK(at0 > at03);
  CHECK(at03 > at1);
}

TEST_CASE("generation is deterministic under the seed") {
  SyntheticSpec spec = small_spec();
  SyntheticData a = generate_synthetic(spec);
  SyntheticData b = generate_synthetic(spec);
  REQUIRE(a.source.size() == b.source.size());
  for (size_t i = 0; i < a.source.size(); ++i) {
    CHECK(a.source[i].surfaces == b.source[i].surfaces);
    CHECK(a.source[i].tags == b.source[i].tags);
  }
  CHECK(a.word_vectors == b.word_vectors);

  spec.seed = 78;
  SyntheticData c = generate_synthetic(spec);
  bool differs = false;
  for (size_t i = 0; i < a.source.size() && !differs; ++i)
    differs = a.source[i].surfaces != c.source[i].surfaces;
  CHECK(differs);
}

TEST_CASE("written files parse back through the corpus loader") {
  oracles::TempDir dir("synth");
  SyntheticSpec spec = small_spec();
  SyntheticData data = generate_synthetic(spec);
  write_synthetic(dir.path(), data);

  TagSet tags;
  Corpus source = load_corpus(dir.file("source.txt"), tags, nullptr, true);
  CHECK(source.size() == data.source.size());

  Corpus pool = load_corpus(dir.file("target_pool.txt"), tags, nullptr, true);
  CHECK(pool.size() == data.target_pool.size());
  for (const auto& s : pool)
    for (int t : s.tags) CHECK(t == tags.outside_id());  // written unlabeled

  // embeddings file covers every generated word
  RawCorpus all = data.source;
  Vocabulary vocab;
  for (const auto& w : data.words) vocab.add(w);
  EmbeddingTable table = load_embeddings(dir.file("embeddings.txt"), vocab, 1);
  CHECK(table.rows() == vocab.size());
  CHECK(table.dim() == spec.embed_dim);
  CHECK(table.row(vocab.lookup(data.words[5]))(0) ==
        doctest::Approx(data.word_vectors[5][0]).epsilon(1e-9));
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec = small_spec();
  spec.vocab_size = 10;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.divergence = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = small_spec();
  spec.min_len = 5;
  spec.max_len = 4;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
