#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rng.hpp"

namespace ernn {

uint64_t fnv1a(const std::vector<std::string>& items) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ull;
  };
  for (const auto& s : items) {
    for (size_t n = s.size(); n > 0; n >>= 8) mix(static_cast<unsigned char>(n));
    mix(0xff);
    for (char c : s) mix(static_cast<unsigned char>(c));
  }
  return h;
}

// ---------------------------------------------------------------- Vocabulary

Vocabulary::Vocabulary() {
  words_ = {"<pad>", "<unk>"};
  ids_ = {{"<pad>", kPadId}, {"<unk>", kUnknownId}};
}

int Vocabulary::add(const std::string& word) {
  auto it = ids_.find(word);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(words_.size());
  ids_.emplace(word, id);
  words_.push_back(word);
  return id;
}

int Vocabulary::lookup(const std::string& word) const {
  auto it = ids_.find(word);
  return it == ids_.end() ? kUnknownId : it->second;
}

bool Vocabulary::contains(const std::string& word) const {
  return ids_.count(word) > 0;
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || id >= static_cast<int>(words_.size()))
    throw InternalError("vocabulary id out of range: " + std::to_string(id));
  return words_[id];
}

uint64_t Vocabulary::fingerprint() const { return fnv1a(words_); }

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary file: " + path);
  for (const auto& w : words_) out << w << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= kReservedCount) {
      // reserved rows are fixed; just sanity-check them
      if (line != vocab.words_[line_no - 1])
        throw DataError(path + ": line " + std::to_string(line_no) +
                        ": expected reserved word " + vocab.words_[line_no - 1]);
      continue;
    }
    if (line.empty())
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": empty vocabulary entry");
    vocab.add(line);
  }
  return vocab;
}

// -------------------------------------------------------------------- TagSet

namespace {

TagSet::Kind classify_tag(const std::string& tag, std::string* type) {
  if (tag.size() > 2 && tag[1] == '-') {
    if (tag[0] == 'B') {
      *type = tag.substr(2);
      return TagSet::Kind::begin;
    }
    if (tag[0] == 'I') {
      *type = tag.substr(2);
      return TagSet::Kind::inside;
    }
  }
  type->clear();
  return TagSet::Kind::outside;
}

}  // namespace

TagSet::TagSet() { add("O"); }

int TagSet::add(const std::string& tag) {
  auto it = ids_.find(tag);
  if (it != ids_.end()) return it->second;
  std::string type;
  Kind kind = classify_tag(tag, &type);
  if (kind == Kind::inside) add("B-" + type);
  int id = static_cast<int>(tags_.size());
  ids_.emplace(tag, id);
  tags_.push_back(tag);
  kinds_.push_back(kind);
  types_.push_back(type);
  return id;
}

std::optional<int> TagSet::lookup(const std::string& tag) const {
  auto it = ids_.find(tag);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& TagSet::tag(int id) const { return tags_[check(id)]; }

int TagSet::begin_id(int inside_id) const {
  if (kind(inside_id) != Kind::inside)
    throw InternalError("begin_id called on non-inside tag " +
                        tags_[inside_id]);
  auto it = ids_.find("B-" + types_[inside_id]);
  if (it == ids_.end())
    throw InternalError("missing begin tag for " + tags_[inside_id]);
  return it->second;
}

int TagSet::check(int id) const {
  if (id < 0 || id >= static_cast<int>(tags_.size()))
    throw InternalError("tag id out of range: " + std::to_string(id));
  return id;
}

uint64_t TagSet::fingerprint() const { return fnv1a(tags_); }

void TagSet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write tagset file: " + path);
  for (const auto& t : tags_) out << t << "\n";
}

TagSet TagSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tagset file: " + path);
  TagSet tags;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int id = tags.add(line);
    if (tags.tag(id) != line || id != line_no - 1)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": tagset file is not in insertion order");
  }
  return tags;
}

// ------------------------------------------------------------------- loading

RawCorpus read_raw_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);

  RawCorpus corpus;
  RawSentence current;
  std::string line;
  int line_no = 0;
  int columns = 0;  // detected from the first non-blank line

  auto flush = [&]() {
    if (!current.surfaces.empty()) {
      corpus.push_back(std::move(current));
      current = RawSentence{};
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    size_t tab = line.find('\t');
    int ncols = tab == std::string::npos ? 1 : 2;
    if (ncols == 2 && line.find('\t', tab + 1) != std::string::npos)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": expected 1 or 2 columns");
    if (columns == 0) columns = ncols;
    if (ncols != columns)
      throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                      std::to_string(columns) + " column(s), found " +
                      std::to_string(ncols));
    std::string surface = ncols == 2 ? line.substr(0, tab) : line;
    std::string tag = ncols == 2 ? line.substr(tab + 1) : "O";
    if (surface.empty() || tag.empty())
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": empty token or tag");
    current.surfaces.push_back(std::move(surface));
    current.tags.push_back(std::move(tag));
  }
  flush();
  return corpus;
}

Corpus tokenize_corpus(const RawCorpus& raw, TagSet& tagset,
                       const Vocabulary* vocab, bool extend_tagset) {
  Corpus corpus;
  corpus.reserve(raw.size());
  for (const auto& rs : raw) {
    TaggedSentence sentence;
    sentence.tokens.reserve(rs.surfaces.size());
    sentence.tags.reserve(rs.tags.size());
    for (size_t i = 0; i < rs.surfaces.size(); ++i) {
      int vocab_id =
          vocab ? vocab->lookup(rs.surfaces[i]) : Vocabulary::kUnknownId;
      sentence.tokens.push_back({rs.surfaces[i], vocab_id});
      if (extend_tagset) {
        sentence.tags.push_back(tagset.add(rs.tags[i]));
      } else {
        auto id = tagset.lookup(rs.tags[i]);
        if (!id)
          throw DataError("tag not in tagset: " + rs.tags[i]);
        sentence.tags.push_back(*id);
      }
    }
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path, TagSet& tagset,
                   const Vocabulary* vocab, bool extend_tagset) {
  return tokenize_corpus(read_raw_corpus(path), tagset, vocab, extend_tagset);
}

void write_corpus(const std::string& path, const Corpus& sentences,
                  const TagSet& tagset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) out << "\n";
    const auto& sent = sentences[s];
    for (size_t i = 0; i < sent.size(); ++i)
      out << sent.tokens[i].surface << "\t" << tagset.tag(sent.tags[i]) << "\n";
  }
}

// ---------------------------------------------------------------- operations

Vocabulary build_vocabulary(const RawCorpus& raw, size_t capacity) {
  if (capacity < 1) throw ConfigError("vocabulary capacity must be >= 1");

  std::unordered_map<std::string, size_t> count;
  std::vector<std::string> order;  // first-occurrence order
  for (const auto& rs : raw) {
    for (const auto& w : rs.surfaces) {
      auto [it, inserted] = count.emplace(w, 0);
      it->second++;
      if (inserted) order.push_back(w);
    }
  }

  std::vector<size_t> idx(order.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    return count[order[a]] > count[order[b]];
  });

  Vocabulary vocab;
  for (size_t i = 0; i < idx.size() && i < capacity; ++i) vocab.add(order[idx[i]]);
  return vocab;
}

Corpus filter_noise(const Corpus& sentences, const Vocabulary& vocab) {
  (void)vocab;
  Corpus kept;
  for (const auto& s : sentences) {
    if (s.size() < 3) continue;
    size_t unknown = 0;
    for (const auto& t : s.tokens)
      if (t.vocab_id == Vocabulary::kUnknownId) ++unknown;
    // "more than 50%" is noise, so exactly half is kept
    if (2 * unknown > s.size()) continue;
    kept.push_back(s);
  }
  return kept;
}

std::pair<Corpus, Corpus> split(const Corpus& sentences, const SplitSpec& spec) {
  if (spec.train_fraction <= 0.0 || spec.train_fraction > 1.0 ||
      spec.test_fraction < 0.0 ||
      spec.train_fraction + spec.test_fraction > 1.0 + 1e-12)
    throw ConfigError("invalid split fractions");

  size_t n = sentences.size();
  size_t test_size =
      static_cast<size_t>(static_cast<double>(n) * spec.test_fraction);
  if (test_size == 0)
    throw ConfigError("split would produce an empty test set");

  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(idx);

  Corpus train, test;
  train.reserve(n - test_size);
  test.reserve(test_size);
  for (size_t i = 0; i < n; ++i) {
    if (i < n - test_size)
      train.push_back(sentences[idx[i]]);
    else
      test.push_back(sentences[idx[i]]);
  }
  return {std::move(train), std::move(test)};
}

std::vector<std::pair<Corpus, Corpus>> k_folds(const Corpus& train, int k,
                                               uint64_t seed) {
  if (k < 2) throw ConfigError("k_folds requires k >= 2");
  if (train.size() < static_cast<size_t>(k))
    throw ConfigError("k_folds requires at least k sentences");

  std::vector<size_t> idx(train.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  size_t n = train.size();
  size_t base = n / k;
  size_t extra = n % k;  // first `extra` folds get one more validation item

  std::vector<std::pair<Corpus, Corpus>> folds;
  size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    size_t fold_size = base + (static_cast<size_t>(f) < extra ? 1 : 0);
    Corpus fold_train, fold_val;
    for (size_t i = 0; i < n; ++i) {
      if (i >= pos && i < pos + fold_size)
        fold_val.push_back(train[idx[i]]);
      else
        fold_train.push_back(train[idx[i]]);
    }
    pos += fold_size;
    folds.emplace_back(std::move(fold_train), std::move(fold_val));
  }
  return folds;
}

std::vector<int> repair_iob(const std::vector<int>& tags, const TagSet& tagset) {
  std::vector<int> out = tags;
  for (size_t i = 0; i < out.size(); ++i) {
    if (tagset.kind(out[i]) != TagSet::Kind::inside) continue;
    bool continues = false;
    if (i > 0) {
      int prev = out[i - 1];
      TagSet::Kind pk = tagset.kind(prev);
      continues = (pk == TagSet::Kind::begin || pk == TagSet::Kind::inside) &&
                  tagset.chunk_type(prev) == tagset.chunk_type(out[i]);
    }
    if (!continues) out[i] = tagset.begin_id(out[i]);
  }
  return out;
}

bool is_iob_valid(const std::vector<int>& tags, const TagSet& tagset) {
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tagset.kind(tags[i]) != TagSet::Kind::inside) continue;
    if (i == 0) return false;
    int prev = tags[i - 1];
    TagSet::Kind pk = tagset.kind(prev);
    if (pk == TagSet::Kind::outside) return false;
    if (tagset.chunk_type(prev) != tagset.chunk_type(tags[i])) return false;
  }
  return true;
}

}  // namespace ernn
