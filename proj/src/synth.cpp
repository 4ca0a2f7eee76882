#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "rng.hpp"

namespace ernn {

void SyntheticSpec::validate() const {
  if (vocab_size < 20) throw ConfigError("synthetic vocab_size must be >= 20");
  if (active_fraction <= 0.0 || active_fraction > 1.0)
    throw ConfigError("synthetic active_fraction must be in (0, 1]");
  if (entity_types < 1) throw ConfigError("synthetic entity_types must be >= 1");
  if (min_len < 1 || max_len < min_len)
    throw ConfigError("synthetic length bounds are invalid");
  if (divergence < 0.0 || divergence > 1.0)
    throw ConfigError("synthetic divergence must be in [0, 1]");
  if (embed_dim < 1) throw ConfigError("synthetic embed_dim must be >= 1");
  if (source_sentences < 0 || target_train_sentences < 0 ||
      target_test_sentences < 0 || pool_sentences < 0)
    throw ConfigError("synthetic sentence counts must be >= 0");
  int roles = 1 + 2 * entity_types;
  int active = static_cast<int>(vocab_size * active_fraction);
  int reserve = vocab_size - active;
  if (active < 2 * roles || reserve < roles)
    throw ConfigError("synthetic vocab_size too small for the tag inventory");
}

namespace {

struct WeightedWords {
  std::vector<int> word_ids;
  std::vector<double> weights;
  double total = 0.0;

  void add(int id, double weight) {
    word_ids.push_back(id);
    weights.push_back(weight);
    total += weight;
  }

  bool empty() const { return word_ids.empty(); }

  int draw(Rng& rng) const {
    double x = rng.uniform01() * total;
    for (size_t i = 0; i < word_ids.size(); ++i) {
      x -= weights[i];
      if (x <= 0.0) return word_ids[i];
    }
    return word_ids.back();
  }
};

// role 0 = O, role 2e+1 = B-ent(e+1), role 2e+2 = I-ent(e+1)
struct RoleLayout {
  int entity_types;

  int count() const { return 1 + 2 * entity_types; }
  int begin_role(int type) const { return 1 + 2 * type; }
  int inside_role(int type) const { return 2 + 2 * type; }

  std::string tag(int role) const {
    if (role == 0) return "O";
    int type = (role - 1) / 2;
    bool begin = role % 2 == 1;
    return (begin ? "B-ent" : "I-ent") + std::to_string(type + 1);
  }
};

// Assigns word ids to roles: 55% outside, the rest split across entity types
// with 60/40 begin/inside shares. Every role gets at least one word.
std::vector<std::vector<int>> partition_roles(const std::vector<int>& word_ids,
                                              const RoleLayout& layout,
                                              Rng& rng) {
  std::vector<int> shuffled = word_ids;
  rng.shuffle(shuffled);
  int n = static_cast<int>(shuffled.size());
  int roles = layout.count();

  std::vector<int> wanted(roles, 0);
  wanted[0] = std::max(1, static_cast<int>(n * 0.55));
  int per_type = (n - wanted[0]) / layout.entity_types;
  for (int e = 0; e < layout.entity_types; ++e) {
    int b = std::max(1, static_cast<int>(per_type * 0.6));
    int i = std::max(1, per_type - b);
    wanted[layout.begin_role(e)] = b;
    wanted[layout.inside_role(e)] = i;
  }

  std::vector<std::vector<int>> by_role(roles);
  size_t pos = 0;
  for (int r = 1; r < roles; ++r)
    for (int j = 0; j < wanted[r] && pos < shuffled.size(); ++j)
      by_role[r].push_back(shuffled[pos++]);
  while (pos < shuffled.size()) by_role[0].push_back(shuffled[pos++]);

  for (int r = 0; r < roles; ++r)
    if (by_role[r].empty())
      throw ConfigError("synthetic vocabulary too small: empty role inventory");
  return by_role;
}

struct Lexicon {
  std::vector<WeightedWords> by_role;  // token inventory per role
};

struct SentenceSink {
  RawCorpus* corpus;
  Rng* rng;
  const SyntheticSpec* spec;
  const RoleLayout* layout;

  void generate(const Lexicon& lexicon, const std::vector<std::string>& words,
                int count) {
    for (int i = 0; i < count; ++i) {
      int len = spec->min_len +
                static_cast<int>(rng->index(
                    static_cast<size_t>(spec->max_len - spec->min_len + 1)));
      RawSentence sentence;
      int t = 0;
      while (t < len) {
        if (rng->bernoulli(spec->entity_start_prob)) {
          int type = static_cast<int>(rng->index(layout->entity_types));
          emit(lexicon, words, layout->begin_role(type), sentence);
          ++t;
          while (t < len && rng->bernoulli(spec->entity_continue_prob)) {
            emit(lexicon, words, layout->inside_role(type), sentence);
            ++t;
          }
        } else {
          emit(lexicon, words, 0, sentence);
          ++t;
        }
      }
      corpus->push_back(std::move(sentence));
    }
  }

  void emit(const Lexicon& lexicon, const std::vector<std::string>& words,
            int role, RawSentence& sentence) {
    int id = lexicon.by_role[role].draw(*rng);
    sentence.surfaces.push_back(words[id]);
    sentence.tags.push_back(layout->tag(role));
  }
};

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  RoleLayout layout{spec.entity_types};
  int roles = layout.count();

  int active = static_cast<int>(spec.vocab_size * spec.active_fraction);
  SyntheticData data;
  data.words.reserve(spec.vocab_size);
  char buf[32];
  for (int i = 0; i < spec.vocab_size; ++i) {
    std::snprintf(buf, sizeof(buf), "w%05d", i);
    data.words.push_back(buf);
  }

  std::vector<int> active_ids(active), reserve_ids(spec.vocab_size - active);
  for (int i = 0; i < active; ++i) active_ids[i] = i;
  for (int i = active; i < spec.vocab_size; ++i) reserve_ids[i - active] = i;

  auto active_by_role = partition_roles(active_ids, layout, rng);
  auto reserve_by_role = partition_roles(reserve_ids, layout, rng);

  // Conflict words: the leading slice of each active role inventory (the
  // inventories are already shuffled). The divergent process uses them under
  // the next role in the cycle, so their tags always contradict the target's.
  std::vector<int> conflict_role(spec.vocab_size, -1);
  for (int r = 0; r < roles; ++r) {
    size_t n_conflict = static_cast<size_t>(
        std::floor(spec.conflict_fraction *
                   static_cast<double>(active_by_role[r].size())));
    for (size_t j = 0; j < n_conflict; ++j)
      conflict_role[active_by_role[r][j]] = (r + 1) % roles;
  }

  Lexicon target;
  target.by_role.resize(roles);
  for (int r = 0; r < roles; ++r)
    for (int id : active_by_role[r])
      target.by_role[r].add(id, conflict_role[id] >= 0 ? spec.conflict_weight
                                                       : 1.0);

  Lexicon divergent;
  divergent.by_role.resize(roles);
  for (int r = 0; r < roles; ++r) {
    WeightedWords conflict_part;
    for (int id : active_ids)
      if (conflict_role[id] == r) conflict_part.add(id, 1.0);
    double reserve_total = spec.reserve_share;
    double conflict_total = conflict_part.empty() ? 0.0 : 1.0 - spec.reserve_share;
    for (int id : reserve_by_role[r])
      divergent.by_role[r].add(
          id, reserve_total / static_cast<double>(reserve_by_role[r].size()));
    for (size_t j = 0; j < conflict_part.word_ids.size(); ++j)
      divergent.by_role[r].add(
          conflict_part.word_ids[j],
          conflict_total / static_cast<double>(conflict_part.word_ids.size()));
  }

  SentenceSink sink{nullptr, &rng, &spec, &layout};

  sink.corpus = &data.target_train;
  sink.generate(target, data.words, spec.target_train_sentences);
  sink.corpus = &data.target_test;
  sink.generate(target, data.words, spec.target_test_sentences);
  sink.corpus = &data.target_pool;
  sink.generate(target, data.words, spec.pool_sentences);

  sink.corpus = &data.source;
  for (int i = 0; i < spec.source_sentences; ++i) {
    bool from_divergent = rng.bernoulli(spec.divergence);
    sink.generate(from_divergent ? divergent : target, data.words, 1);
  }

  // Embeddings: region center (active vs reserve) plus per-word noise, so
  // sentence means separate the two domains the way corpus-trained vectors
  // would.
  std::vector<double> center_active(spec.embed_dim), center_reserve(spec.embed_dim);
  for (int j = 0; j < spec.embed_dim; ++j)
    center_active[j] = rng.uniform(-spec.center_scale, spec.center_scale);
  for (int j = 0; j < spec.embed_dim; ++j)
    center_reserve[j] = rng.uniform(-spec.center_scale, spec.center_scale);
  data.word_vectors.resize(spec.vocab_size);
  for (int id = 0; id < spec.vocab_size; ++id) {
    const auto& center = id < active ? center_active : center_reserve;
    data.word_vectors[id].resize(spec.embed_dim);
    for (int j = 0; j < spec.embed_dim; ++j)
      data.word_vectors[id][j] =
          center[j] + rng.uniform(-spec.noise_scale, spec.noise_scale);
  }
  return data;
}

void write_raw_corpus(const std::string& path, const RawCorpus& corpus,
                      bool labeled) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (size_t s = 0; s < corpus.size(); ++s) {
    if (s > 0) out << "\n";
    const auto& sentence = corpus[s];
    for (size_t t = 0; t < sentence.surfaces.size(); ++t) {
      out << sentence.surfaces[t];
      if (labeled) out << "\t" << sentence.tags[t];
      out << "\n";
    }
  }
}

void write_synthetic(const std::string& out_dir, const SyntheticData& data) {
  std::filesystem::create_directories(out_dir);
  auto path = [&out_dir](const char* name) { return out_dir + "/" + name; };
  write_raw_corpus(path("source.txt"), data.source, true);
  write_raw_corpus(path("target_train.txt"), data.target_train, true);
  write_raw_corpus(path("target_test.txt"), data.target_test, true);
  write_raw_corpus(path("target_pool.txt"), data.target_pool, false);

  std::ofstream out(path("embeddings.txt"));
  if (!out) throw DataError("cannot write embeddings file");
  char buf[40];
  for (size_t id = 0; id < data.words.size(); ++id) {
    out << data.words[id];
    for (double v : data.word_vectors[id]) {
      std::snprintf(buf, sizeof(buf), " %.10g", v);
      out << buf;
    }
    out << "\n";
  }
}

double lexical_overlap(const RawCorpus& a, const RawCorpus& b) {
  std::set<std::string> types_a, types_b;
  for (const auto& s : a) types_a.insert(s.surfaces.begin(), s.surfaces.end());
  for (const auto& s : b) types_b.insert(s.surfaces.begin(), s.surfaces.end());
  size_t intersection = 0;
  for (const auto& w : types_a) intersection += types_b.count(w);
  size_t unions = types_a.size() + types_b.size() - intersection;
  return unions == 0 ? 0.0
                     : static_cast<double>(intersection) /
                           static_cast<double>(unions);
}

}  // namespace ernn
