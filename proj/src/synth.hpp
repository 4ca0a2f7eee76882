// Seeded synthetic corpus generation for desk-scale experiments. Every word
// has a dominant tag; the target domain draws from an "active" lexicon while
// a divergence knob mixes source sentences from a shifted lexicon that uses
// reserve words plus a subset of active words under conflicting tags.
#pragma once

#include <string>
#include <vector>

#include "corpus.hpp"
#include "embeddings.hpp"

namespace ernn {

struct SyntheticSpec {
  int vocab_size = 500;  // active + reserve word inventory
  double active_fraction = 0.6;
  int entity_types = 4;
  int source_sentences = 200;
  int target_train_sentences = 200;
  int target_test_sentences = 100;
  int pool_sentences = 0;
  int min_len = 4;
  int max_len = 12;
  // Fraction of source sentences drawn from the divergent process; 0 makes
  // both domains identical.
  double divergence = 0.0;
  // Share of active words the divergent process reuses with shifted tags.
  double conflict_fraction = 0.25;
  // Sampling weight of those words in the target process (< 1 keeps them
  // present but rare, so contradicting labels can dominate raw source data).
  double conflict_weight = 0.3;
  // Share of divergent tokens drawn from the reserve inventory.
  double reserve_share = 0.5;
  double entity_start_prob = 0.35;
  double entity_continue_prob = 0.45;
  int embed_dim = 24;
  // Embedding structure: per-region center plus per-word noise, standing in
  // for distributional vectors a word2vec run would produce.
  double center_scale = 0.15;
  double noise_scale = 0.1;
  uint64_t seed = 1;

  void validate() const;
};

struct SyntheticData {
  RawCorpus source;
  RawCorpus target_train;
  RawCorpus target_test;
  RawCorpus target_pool;  // written unlabeled
  // every generated word and its vector, in word order
  std::vector<std::string> words;
  std::vector<std::vector<double>> word_vectors;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Writes source.txt, target_train.txt, target_test.txt, target_pool.txt
// (single-column) and embeddings.txt under `out_dir`.
void write_synthetic(const std::string& out_dir, const SyntheticData& data);

void write_raw_corpus(const std::string& path, const RawCorpus& corpus,
                      bool labeled);

// Jaccard similarity of the surface-type sets of two corpora.
double lexical_overlap(const RawCorpus& a, const RawCorpus& b);

}  // namespace ernn
