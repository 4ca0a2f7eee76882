#include "checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ernn {

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::hmm: return "hmm";
    case ModelKind::crf: return "crf";
    case ModelKind::rnn: return "rnn";
    case ModelKind::ernn: return "ernn";
  }
  throw InternalError("unknown model kind");
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "hmm") return ModelKind::hmm;
  if (name == "crf") return ModelKind::crf;
  if (name == "rnn") return ModelKind::rnn;
  if (name == "ernn") return ModelKind::ernn;
  throw ConfigError("unknown model kind: " + name);
}

namespace {

constexpr const char* kMagic = "ernn-checkpoint 1";

void write_matrix(std::ostream& out, const std::string& name,
                  const Eigen::MatrixXd& m) {
  out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << buf << (c + 1 == m.cols() ? "" : " ");
    }
    out << "\n";
  }
}

void write_row(std::ostream& out, const std::string& name,
               const Eigen::RowVectorXd& v) {
  write_matrix(out, name, Eigen::MatrixXd(v));
}

void write_col(std::ostream& out, const std::string& name,
               const Eigen::VectorXd& v) {
  write_matrix(out, name, Eigen::MatrixXd(v.transpose()));
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  std::string expect_line(const std::string& prefix) {
    std::string line = next_line();
    if (line.rfind(prefix, 0) != 0)
      throw DataError(path_ + ": expected '" + prefix + "', found '" + line + "'");
    return line.size() > prefix.size() ? line.substr(prefix.size() + 1) : "";
  }

  Eigen::MatrixXd read_matrix(const std::string& name) {
    std::istringstream header(expect_line("tensor " + name));
    Eigen::Index rows, cols;
    if (!(header >> rows >> cols))
      throw DataError(path_ + ": bad tensor header for " + name);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(next_line());
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(row >> m(r, c)))
          throw DataError(path_ + ": truncated tensor " + name);
    }
    return m;
  }

  Eigen::RowVectorXd read_row(const std::string& name) {
    return read_matrix(name).row(0);
  }

  Eigen::VectorXd read_col(const std::string& name) {
    return read_matrix(name).row(0).transpose();
  }

  std::string next_line() {
    std::string line;
    if (!std::getline(in_, line)) throw DataError(path_ + ": truncated checkpoint");
    return line;
  }

 private:
  std::istream& in_;
  std::string path_;
};

void save_rnn_body(std::ostream& out, const RnnParams& p) {
  out << "window " << p.window << "\n";
  write_matrix(out, "U", p.U);
  write_matrix(out, "W", p.W);
  write_matrix(out, "V", p.V);
  write_row(out, "b1", p.b1);
  write_row(out, "h0", p.h0);
}

RnnParams load_rnn_body(Reader& reader) {
  RnnParams p;
  p.window = std::stoi(reader.expect_line("window"));
  p.U = reader.read_matrix("U");
  p.W = reader.read_matrix("W");
  p.V = reader.read_matrix("V");
  p.b1 = reader.read_row("b1");
  p.h0 = reader.read_row("h0");
  return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint: " + path);
  out << kMagic << "\n";
  out << "kind " << model_kind_name(checkpoint.kind) << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "vocab_fingerprint %" PRIu64 "\n",
                checkpoint.vocab_fingerprint);
  out << buf;
  std::snprintf(buf, sizeof(buf), "tagset_fingerprint %" PRIu64 "\n",
                checkpoint.tagset_fingerprint);
  out << buf;
  std::snprintf(buf, sizeof(buf), "activation %.17g %.17g %.17g %.17g\n",
                checkpoint.activation.alpha, checkpoint.activation.beta,
                checkpoint.activation.a, checkpoint.activation.b);
  out << buf;

  switch (checkpoint.kind) {
    case ModelKind::hmm: {
      const auto& p = std::get<HmmParams>(checkpoint.params);
      std::snprintf(buf, sizeof(buf), "kappa %.17g\n", p.kappa);
      out << buf;
      write_col(out, "initial", p.initial_logp);
      write_matrix(out, "transition", p.transition_logp);
      write_matrix(out, "emission", p.emission_logp);
      break;
    }
    case ModelKind::crf: {
      const auto& p = std::get<CrfParams>(checkpoint.params);
      out << "templates " << p.templates.word << " " << p.templates.prev_word
          << " " << p.templates.next_word << " " << p.templates.tag_bigram
          << " " << p.templates.bias << "\n";
      std::snprintf(buf, sizeof(buf), "lambda %.17g\n", p.lambda);
      out << buf;
      write_matrix(out, "w_word", p.w_word);
      write_matrix(out, "w_prev", p.w_prev);
      write_matrix(out, "w_next", p.w_next);
      write_matrix(out, "w_trans", p.w_trans);
      write_row(out, "w_bias", p.w_bias);
      break;
    }
    case ModelKind::rnn:
      save_rnn_body(out, std::get<RnnParams>(checkpoint.params));
      break;
    case ModelKind::ernn: {
      const auto& p = std::get<ErnnParams>(checkpoint.params);
      save_rnn_body(out, p);
      out << "confluent_combined " << (p.confluent_combined ? 1 : 0) << "\n";
      write_matrix(out, "w2", p.w2);
      write_row(out, "b0", p.b0);
      if (!checkpoint.summary) throw InternalError("ernn checkpoint without summary");
      write_col(out, "summary", checkpoint.summary->values);
      out << "provenance " << checkpoint.summary->provenance << "\n";
      break;
    }
  }
}

Checkpoint load_checkpoint(const std::string& path,
                           uint64_t expect_vocab_fingerprint,
                           uint64_t expect_tagset_fingerprint) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  Reader reader(in, path);

  if (reader.next_line() != kMagic)
    throw DataError(path + ": not a checkpoint file");
  Checkpoint checkpoint;
  checkpoint.kind = parse_model_kind(reader.expect_line("kind"));
  checkpoint.vocab_fingerprint =
      std::stoull(reader.expect_line("vocab_fingerprint"));
  checkpoint.tagset_fingerprint =
      std::stoull(reader.expect_line("tagset_fingerprint"));
  if (expect_vocab_fingerprint != 0 &&
      checkpoint.vocab_fingerprint != expect_vocab_fingerprint)
    throw DataError(path + ": vocabulary fingerprint mismatch");
  if (expect_tagset_fingerprint != 0 &&
      checkpoint.tagset_fingerprint != expect_tagset_fingerprint)
    throw DataError(path + ": tagset fingerprint mismatch");

  {
    std::istringstream act(reader.expect_line("activation"));
    if (!(act >> checkpoint.activation.alpha >> checkpoint.activation.beta >>
          checkpoint.activation.a >> checkpoint.activation.b))
      throw DataError(path + ": bad activation line");
  }

  switch (checkpoint.kind) {
    case ModelKind::hmm: {
      HmmParams p;
      p.kappa = std::stod(reader.expect_line("kappa"));
      p.initial_logp = reader.read_col("initial");
      p.transition_logp = reader.read_matrix("transition");
      p.emission_logp = reader.read_matrix("emission");
      checkpoint.params = std::move(p);
      break;
    }
    case ModelKind::crf: {
      CrfParams p;
      std::istringstream t(reader.expect_line("templates"));
      t >> p.templates.word >> p.templates.prev_word >> p.templates.next_word >>
          p.templates.tag_bigram >> p.templates.bias;
      p.lambda = std::stod(reader.expect_line("lambda"));
      p.w_word = reader.read_matrix("w_word");
      p.w_prev = reader.read_matrix("w_prev");
      p.w_next = reader.read_matrix("w_next");
      p.w_trans = reader.read_matrix("w_trans");
      p.w_bias = reader.read_row("w_bias");
      p.n_tags = static_cast<int>(p.w_trans.cols());
      p.vocab = static_cast<int>(p.w_word.rows());
      checkpoint.params = std::move(p);
      break;
    }
    case ModelKind::rnn:
      checkpoint.params = load_rnn_body(reader);
      break;
    case ModelKind::ernn: {
      ErnnParams p;
      static_cast<RnnParams&>(p) = load_rnn_body(reader);
      p.confluent_combined =
          std::stoi(reader.expect_line("confluent_combined")) != 0;
      p.w2 = reader.read_matrix("w2");
      p.b0 = reader.read_row("b0");
      SourceSummary summary;
      summary.values = reader.read_col("summary");
      summary.provenance = reader.expect_line("provenance");
      checkpoint.summary = std::move(summary);
      checkpoint.params = std::move(p);
      break;
    }
  }
  return checkpoint;
}

}  // namespace ernn
