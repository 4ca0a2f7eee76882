#include "embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "rng.hpp"

namespace ernn {

namespace {

constexpr double kFallbackScale = 0.1;

void fill_uniform(Eigen::MatrixXd::RowXpr row, Rng& rng, double scale) {
  for (int j = 0; j < row.cols(); ++j) row(j) = rng.uniform(-scale, scale);
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);

  std::string line;
  int dim = 0;
  int line_no = 0;
  std::vector<std::pair<int, std::vector<double>>> present;  // (vocab id, row)
  std::vector<bool> seen(vocab.size(), false);

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (values.empty())
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": no vector values");
    if (dim == 0) dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != dim)
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": dimension " + std::to_string(values.size()) +
                      " does not match " + std::to_string(dim));
    if (!vocab.contains(word)) continue;
    int id = vocab.lookup(word);
    if (seen[id]) continue;  // keep the first row for duplicate words
    seen[id] = true;
    present.emplace_back(id, std::move(values));
  }
  if (dim == 0) throw DataError(path + ": empty embedding file");

  EmbeddingTable table(vocab.size(), dim);
  Rng rng(seed);
  // Fallback rows are drawn in id order so the result does not depend on
  // file order.
  for (size_t id = 0; id < vocab.size(); ++id)
    if (!seen[id])
      fill_uniform(table.row(static_cast<int>(id)), rng, kFallbackScale);
  for (const auto& [id, values] : present)
    for (int j = 0; j < dim; ++j) table.row(id)(j) = values[j];
  return table;
}

void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const Vocabulary& vocab) {
  if (table.rows() != vocab.size())
    throw InternalError("embedding table does not match vocabulary size");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path);
  out.precision(17);
  for (size_t id = 0; id < vocab.size(); ++id) {
    out << vocab.word(static_cast<int>(id));
    for (int j = 0; j < table.dim(); ++j)
      out << " " << table.row(static_cast<int>(id))(j);
    out << "\n";
  }
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, int dim,
                                 uint64_t seed, double scale) {
  if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
  EmbeddingTable table(vocab.size(), dim);
  Rng rng(seed);
  for (size_t id = 0; id < vocab.size(); ++id)
    fill_uniform(table.row(static_cast<int>(id)), rng, scale);
  return table;
}

SentenceVector sentence_vector(const TaggedSentence& sentence,
                               const EmbeddingTable& table) {
  if (sentence.size() == 0)
    throw DataError("sentence_vector of an empty sentence");
  SentenceVector sum = SentenceVector::Zero(table.dim());
  for (const auto& token : sentence.tokens)
    sum += table.row(token.vocab_id).transpose();
  return sum / static_cast<double>(sentence.size());
}

SentenceVector corpus_mean(const Corpus& sentences, const EmbeddingTable& table) {
  if (sentences.empty()) throw DataError("corpus_mean of an empty corpus");
  SentenceVector sum = SentenceVector::Zero(table.dim());
  for (const auto& s : sentences) sum += sentence_vector(s, table);
  return sum / static_cast<double>(sentences.size());
}

}  // namespace ernn
