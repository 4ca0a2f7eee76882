// Corpus ingestion: IOB-tagged sentences, dictionary construction, noise
// filtering, train/test splits and cross-validation folds.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"

namespace ernn {

struct Token {
  std::string surface;
  int vocab_id = 0;
};

struct TaggedSentence {
  std::vector<Token> tokens;
  std::vector<int> tags;

  size_t size() const { return tokens.size(); }
};

using Corpus = std::vector<TaggedSentence>;

// One sentence as read from disk, before any id mapping.
struct RawSentence {
  std::vector<std::string> surfaces;
  std::vector<std::string> tags;
};

using RawCorpus = std::vector<RawSentence>;

// Word dictionary with two reserved ids: 0 = padding, 1 = unknown.
class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnknownId = 1;
  static constexpr int kReservedCount = 2;

  Vocabulary();

  // Returns the id of `word`, inserting it if absent.
  int add(const std::string& word);
  // Returns the id of `word`, or kUnknownId if absent.
  int lookup(const std::string& word) const;
  bool contains(const std::string& word) const;
  const std::string& word(int id) const;
  size_t size() const { return words_.size(); }

  uint64_t fingerprint() const;
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
};

// Tag inventory. The outside tag "O" always has id 0; ids are dense in
// insertion order. Adding I-X inserts B-X first when missing so that
// repair_iob always has a begin tag to map to.
class TagSet {
 public:
  enum class Kind { outside, begin, inside };

  TagSet();

  int add(const std::string& tag);
  std::optional<int> lookup(const std::string& tag) const;
  const std::string& tag(int id) const;
  size_t size() const { return tags_.size(); }
  int outside_id() const { return 0; }

  Kind kind(int id) const { return kinds_[check(id)]; }
  // Chunk type of B-X / I-X tags; empty for O.
  const std::string& chunk_type(int id) const { return types_[check(id)]; }
  // Id of B-X for an I-X tag.
  int begin_id(int inside_id) const;

  uint64_t fingerprint() const;
  void save(const std::string& path) const;
  static TagSet load(const std::string& path);

 private:
  int check(int id) const;

  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> tags_;
  std::vector<Kind> kinds_;
  std::vector<std::string> types_;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double test_fraction = 0.2;
  int k_folds = 5;
  uint64_t seed = 0;
};

// File format: one `surface<TAB>tag` per line, blank line between sentences.
// A first non-blank line with a single column marks an unlabeled corpus; all
// its tokens are tagged "O".
RawCorpus read_raw_corpus(const std::string& path);

Corpus tokenize_corpus(const RawCorpus& raw, TagSet& tagset,
                       const Vocabulary* vocab, bool extend_tagset = false);

Corpus load_corpus(const std::string& path, TagSet& tagset,
                   const Vocabulary* vocab = nullptr,
                   bool extend_tagset = false);

void write_corpus(const std::string& path, const Corpus& sentences,
                  const TagSet& tagset);

// Keeps the `capacity` most frequent surfaces; frequency ties are broken by
// first occurrence so builds are deterministic.
Vocabulary build_vocabulary(const RawCorpus& raw, size_t capacity);

// Drops sentences shorter than 3 tokens or with more than 50% unknown tokens.
Corpus filter_noise(const Corpus& sentences, const Vocabulary& vocab);

// Seeded shuffle split. Test gets floor(n * test_fraction) sentences, train
// everything else.
std::pair<Corpus, Corpus> split(const Corpus& sentences, const SplitSpec& spec);

// k disjoint (train, validation) partitions; validation sizes differ by <= 1.
std::vector<std::pair<Corpus, Corpus>> k_folds(const Corpus& train, int k,
                                               uint64_t seed);

// Rewrites any I-X that does not continue a chunk of type X into B-X.
std::vector<int> repair_iob(const std::vector<int>& tags, const TagSet& tagset);

bool is_iob_valid(const std::vector<int>& tags, const TagSet& tagset);

// FNV-1a over length-prefixed strings; shared by vocabulary/tagset/checkpoint.
uint64_t fnv1a(const std::vector<std::string>& items);

}  // namespace ernn
