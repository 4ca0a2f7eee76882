#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "checkpoint.hpp"
#include "rng.hpp"

namespace ernn::exp {

namespace {

// ------------------------------------------------------------ config pieces

std::string out_dir(const Config& config) {
  std::string dir = config.get_string("out", "out");
  std::filesystem::create_directories(dir);
  return dir;
}

uint64_t global_seed(const Config& config) {
  return config.get_uint64("seed", 1);
}

ActivationSpec read_activation(const Config& config) {
  ActivationSpec act;
  act.alpha = config.get_double("act.alpha", act.alpha);
  act.beta = config.get_double("act.beta", act.beta);
  act.a = config.get_double("act.a", act.a);
  act.b = config.get_double("act.b", act.b);
  return act;
}

TrainConfig read_train_config(const Config& config) {
  TrainConfig cfg;
  cfg.learning_rate = config.get_double("train.learning_rate", cfg.learning_rate);
  cfg.epochs = config.get_int("train.epochs", cfg.epochs);
  cfg.window = config.get_int("train.window", cfg.window);
  cfg.seed = config.get_uint64("train.seed", global_seed(config));
  cfg.clip = config.get_double("train.clip", cfg.clip);
  cfg.hidden = config.get_int("train.hidden", cfg.hidden);
  cfg.init_scale = config.get_double("train.init_scale", cfg.init_scale);
  cfg.shuffle = config.get_bool("train.shuffle", cfg.shuffle);
  cfg.fine_tune_embeddings =
      config.get_bool("train.fine_tune", cfg.fine_tune_embeddings);
  cfg.confluent_combined =
      config.get_bool("train.confluent_combined", cfg.confluent_combined);
  cfg.validate();
  return cfg;
}

CrfTrainConfig read_crf_config(const Config& config) {
  CrfTrainConfig cfg;
  cfg.lambda = config.get_double("crf.lambda", cfg.lambda);
  cfg.epochs = config.get_int("crf.epochs", cfg.epochs);
  cfg.learning_rate = config.get_double("crf.learning_rate", cfg.learning_rate);
  cfg.seed = config.get_uint64("crf.seed", global_seed(config));
  cfg.validate();
  return cfg;
}

KernelSpec read_kernel(const Config& config) {
  KernelSpec spec;
  std::string kind = config.get_string("transfer.kernel", "rbf");
  if (kind == "rbf")
    spec.kind = KernelKind::rbf;
  else if (kind == "polynomial")
    spec.kind = KernelKind::polynomial;
  else
    throw ConfigError("unknown kernel kind: " + kind);
  spec.sigma = config.get_double("transfer.sigma", 1.0);
  spec.degree = config.get_int("transfer.degree", 2);
  spec.validate();
  return spec;
}

SyntheticSpec read_synth(const Config& config) {
  SyntheticSpec spec;
  spec.vocab_size = config.get_int("synth.vocab_size", spec.vocab_size);
  spec.active_fraction =
      config.get_double("synth.active_fraction", spec.active_fraction);
  spec.entity_types = config.get_int("synth.entity_types", spec.entity_types);
  spec.source_sentences =
      config.get_int("synth.source_sentences", spec.source_sentences);
  spec.target_train_sentences = config.get_int("synth.target_train_sentences",
                                               spec.target_train_sentences);
  spec.target_test_sentences = config.get_int("synth.target_test_sentences",
                                              spec.target_test_sentences);
  spec.pool_sentences = config.get_int("synth.pool_sentences", spec.pool_sentences);
  spec.min_len = config.get_int("synth.min_len", spec.min_len);
  spec.max_len = config.get_int("synth.max_len", spec.max_len);
  spec.divergence = config.get_double("synth.divergence", spec.divergence);
  spec.conflict_fraction =
      config.get_double("synth.conflict_fraction", spec.conflict_fraction);
  spec.conflict_weight =
      config.get_double("synth.conflict_weight", spec.conflict_weight);
  spec.reserve_share = config.get_double("synth.reserve_share", spec.reserve_share);
  spec.entity_start_prob =
      config.get_double("synth.entity_start_prob", spec.entity_start_prob);
  spec.entity_continue_prob =
      config.get_double("synth.entity_continue_prob", spec.entity_continue_prob);
  spec.embed_dim = config.get_int("synth.embed_dim", spec.embed_dim);
  spec.center_scale = config.get_double("synth.center_scale", spec.center_scale);
  spec.noise_scale = config.get_double("synth.noise_scale", spec.noise_scale);
  spec.seed = config.get_uint64("synth.seed", global_seed(config));
  spec.validate();
  return spec;
}

// ------------------------------------------------------------- data loading

RawCorpus read_raw_required(const Config& config, const std::string& key) {
  return read_raw_corpus(config.get_string(key));
}

Vocabulary vocabulary_over(const std::vector<const RawCorpus*>& corpora,
                           size_t capacity) {
  RawCorpus merged;
  for (const RawCorpus* c : corpora)
    merged.insert(merged.end(), c->begin(), c->end());
  return build_vocabulary(merged, capacity);
}

EmbeddingTable embeddings_for(const Config& config, const Vocabulary& vocab) {
  if (config.has("paths.embeddings"))
    return load_embeddings(config.get_string("paths.embeddings"), vocab,
                           config.get_uint64("embeddings.seed", global_seed(config)));
  return random_embeddings(vocab,
                           config.get_int("embeddings.dim", 50),
                           config.get_uint64("embeddings.seed", global_seed(config)),
                           config.get_double("embeddings.scale", 0.1));
}

// ------------------------------------------------------------------ output

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  return out;
}

void write_metrics_csv_row(std::ostream& out, const EvalReport& r) {
  out << fmt(r.precision) << "," << fmt(r.recall) << "," << fmt(r.f1) << ","
      << fmt(r.token_accuracy);
}

void write_report_files(const std::string& dir, const std::string& stem,
                        const EvalReport& report) {
  auto table = open_out(dir + "/" + stem + ".txt");
  write_report_table(table, report);
  auto kv = open_out(dir + "/" + stem + ".kv");
  write_report_kv(kv, report);
  auto csv = open_out(dir + "/" + stem + ".csv");
  csv << "metric,value\n";
  csv << "precision," << fmt(report.precision) << "\n";
  csv << "recall," << fmt(report.recall) << "\n";
  csv << "f1," << fmt(report.f1) << "\n";
  csv << "token_accuracy," << fmt(report.token_accuracy) << "\n";
}

// --------------------------------------------------------------- modelling

std::vector<std::vector<int>> decode_corpus_rnn(const RnnParams& params,
                                                const Corpus& test,
                                                const EmbeddingTable& table,
                                                const ActivationSpec& act,
                                                const TagSet& tagset) {
  std::vector<std::vector<int>> out;
  out.reserve(test.size());
  for (const auto& s : test) out.push_back(decode(params, s, table, act, tagset).tags);
  return out;
}

std::vector<std::vector<int>> decode_corpus_ernn(
    const ErnnParams& params, const Corpus& test, const EmbeddingTable& table,
    const SourceSummary& summary, const ActivationSpec& act,
    const TagSet& tagset) {
  std::vector<std::vector<int>> out;
  out.reserve(test.size());
  for (const auto& s : test)
    out.push_back(decode(params, s, table, summary, act, tagset).tags);
  return out;
}

std::vector<std::vector<int>> decode_corpus_hmm(const HmmParams& params,
                                                const Corpus& test,
                                                const TagSet& tagset) {
  std::vector<std::vector<int>> out;
  out.reserve(test.size());
  for (const auto& s : test)
    out.push_back(repair_iob(hmm_decode(params, s).tags, tagset));
  return out;
}

std::vector<std::vector<int>> decode_corpus_crf(const CrfParams& params,
                                                const Corpus& test,
                                                const TagSet& tagset) {
  std::vector<std::vector<int>> out;
  out.reserve(test.size());
  for (const auto& s : test)
    out.push_back(repair_iob(crf_decode(params, s).tags, tagset));
  return out;
}

EvalReport average_reports(const std::vector<EvalReport>& reports) {
  EvalReport avg;
  if (reports.empty()) return avg;
  for (const auto& r : reports) {
    avg.precision += r.precision;
    avg.recall += r.recall;
    avg.f1 += r.f1;
    avg.token_accuracy += r.token_accuracy;
    avg.gold_chunks += r.gold_chunks;
    avg.predicted_chunks += r.predicted_chunks;
    avg.matched_chunks += r.matched_chunks;
    avg.tokens += r.tokens;
    avg.correct_tokens += r.correct_tokens;
    for (const auto& [type, ts] : r.per_type) {
      auto& t = avg.per_type[type];
      t.gold += ts.gold;
      t.predicted += ts.predicted;
      t.matched += ts.matched;
    }
  }
  double n = static_cast<double>(reports.size());
  avg.precision /= n;
  avg.recall /= n;
  avg.f1 /= n;
  avg.token_accuracy /= n;
  return avg;
}

}  // namespace

// -------------------------------------------------------------- typed cores

int folds_for_fraction(double fraction) {
  if (fraction < 0.3) return 5;
  if (fraction < 0.7) return 3;
  return 1;
}

std::vector<LearningCurveCell> learning_curve(const Corpus& data,
                                              size_t vocab_size,
                                              const TagSet& tagset,
                                              const EmbeddingTable& table,
                                              const LearningCurveOptions& options) {
  if (options.fractions.empty())
    throw ConfigError("learning curve needs at least one fraction");
  if (options.models.empty())
    throw ConfigError("learning curve needs at least one model");
  for (double f : options.fractions)
    if (f <= 0.0 || f > 1.0)
      throw ConfigError("learning curve fractions must be in (0, 1]");

  Corpus shuffled = data;
  {
    Rng rng(options.seed);
    std::vector<size_t> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    for (size_t i = 0; i < idx.size(); ++i) shuffled[i] = data[idx[i]];
  }

  int n_tags = static_cast<int>(tagset.size());
  std::vector<LearningCurveCell> cells;
  for (double fraction : options.fractions) {
    size_t take = static_cast<size_t>(static_cast<double>(data.size()) * fraction);
    if (take < 2)
      throw ConfigError("fraction " + fmt(fraction) + " leaves too little data");
    Corpus subset(shuffled.begin(), shuffled.begin() + take);

    int k = folds_for_fraction(fraction);
    std::vector<std::pair<Corpus, Corpus>> folds;
    if (k >= 2) {
      folds = k_folds(subset, k, options.seed);
    } else {
      SplitSpec spec;
      spec.train_fraction = 0.8;
      spec.test_fraction = 0.2;
      spec.seed = options.seed;
      folds.push_back(split(subset, spec));
    }

    for (const auto& model : options.models) {
      std::vector<EvalReport> fold_reports;
      for (const auto& [fold_train, fold_val] : folds) {
        std::vector<std::vector<int>> predicted;
        if (model == "hmm") {
          HmmParams params =
              hmm_train(fold_train, n_tags, vocab_size, options.hmm_kappa);
          predicted = decode_corpus_hmm(params, fold_val, tagset);
        } else if (model == "crf") {
          CrfParams params = crf_train(fold_train, n_tags, vocab_size,
                                       options.templates, options.crf);
          predicted = decode_corpus_crf(params, fold_val, tagset);
        } else if (model == "rnn") {
          RnnParams params =
              train_rnn(fold_train, table, options.rnn, options.act, n_tags)
                  .params;
          predicted = decode_corpus_rnn(params, fold_val, table, options.act,
                                        tagset);
        } else {
          throw ConfigError("unknown learning-curve model: " + model);
        }
        fold_reports.push_back(score(fold_val, predicted, tagset));
      }
      cells.push_back({fraction, model, average_reports(fold_reports)});
    }
  }
  return cells;
}

std::vector<VariantResult> transfer_experiment(
    const Corpus& source, const Corpus& target_train, const Corpus& target_test,
    const Corpus& target_for_mean, const TagSet& tagset,
    const EmbeddingTable& table, const TransferOptions& options) {
  if (options.variants.empty())
    throw ConfigError("transfer experiment needs at least one variant");
  if (target_test.empty())
    throw ConfigError("transfer experiment needs a target test corpus");

  int n_tags = static_cast<int>(tagset.size());

  bool needs_transfer = false;
  bool needs_labels = false;
  for (const auto& name : options.variants) {
    if (name == "ERNN_IT" || name == "ERNN_L_IT" || name == "RNN_D_IT" ||
        name == "RNN_L_D_IT")
      needs_transfer = true;
    if (name == "RNN_L" || name == "RNN_L_D_IT" || name == "ERNN_L_IT")
      needs_labels = true;
  }
  if (needs_transfer && source.empty())
    throw ConfigError("transfer variants need a source corpus");

  Corpus labeled = target_train;
  if (options.target_labeled >= 0 &&
      static_cast<size_t>(options.target_labeled) < labeled.size())
    labeled.resize(options.target_labeled);
  if (needs_labels && labeled.empty())
    throw ConfigError("the _L variants need labeled target sentences");

  Corpus transferred;
  SourceSummary summary;
  bool have_plan = false;
  auto ensure_plan = [&]() {
    if (have_plan) return;
    if (target_for_mean.empty())
      throw ConfigError("instance transfer needs target sentences for the corpus mean");
    RankedSource ranked = rank_source(source, corpus_mean(target_for_mean, table),
                                      table, options.kernel);
    TransferPlan plan = options.strategy == TransferStrategy::top_n
                            ? plan_top_n(ranked, options.top_n)
                            : plan_replicate(ranked, options.schedule);
    transferred = materialize(plan, source);
    summary = build_source_summary(plan, source, table);
    have_plan = true;
  };

  std::vector<VariantResult> results;
  for (const auto& name : options.variants) {
    std::vector<std::vector<int>> predicted;
    if (name == "RNN_D_IT") {
      RnnParams params =
          train_rnn(source, table, options.rnn, options.act, n_tags).params;
      predicted = decode_corpus_rnn(params, target_test, table, options.act,
                                    tagset);
    } else if (name == "ERNN_IT") {
      ensure_plan();
      ErnnParams params = train_ernn(transferred, table, summary, options.rnn,
                                     options.act, n_tags)
                              .params;
      predicted = decode_corpus_ernn(params, target_test, table, summary,
                                     options.act, tagset);
    } else if (name == "RNN_L") {
      RnnParams params =
          train_rnn(labeled, table, options.rnn, options.act, n_tags).params;
      predicted = decode_corpus_rnn(params, target_test, table, options.act,
                                    tagset);
    } else if (name == "RNN_L_D_IT") {
      Corpus merged = labeled;
      merged.insert(merged.end(), source.begin(), source.end());
      RnnParams params =
          train_rnn(merged, table, options.rnn, options.act, n_tags).params;
      predicted = decode_corpus_rnn(params, target_test, table, options.act,
                                    tagset);
    } else if (name == "ERNN_L_IT") {
      ensure_plan();
      Corpus merged = labeled;
      merged.insert(merged.end(), transferred.begin(), transferred.end());
      ErnnParams params =
          train_ernn(merged, table, summary, options.rnn, options.act, n_tags)
              .params;
      predicted = decode_corpus_ernn(params, target_test, table, summary,
                                     options.act, tagset);
    } else {
      throw ConfigError("unknown transfer variant: " + name);
    }
    results.push_back({name, score(target_test, predicted, tagset)});
  }
  return results;
}

std::vector<SweepPoint> sweep_activation(
    const Corpus& train, const Corpus& test, const TagSet& tagset,
    const EmbeddingTable& table,
    const std::vector<std::pair<double, double>>& grid, const TrainConfig& cfg,
    const ActivationSpec& base_act) {
  if (grid.empty()) throw ConfigError("activation sweep needs a non-empty grid");
  int n_tags = static_cast<int>(tagset.size());
  std::vector<SweepPoint> points;
  for (const auto& [alpha, beta] : grid) {
    ActivationSpec act = base_act;
    act.alpha = alpha;
    act.beta = beta;
    RnnParams params = train_rnn(train, table, cfg, act, n_tags).params;
    EvalReport report =
        score(test, decode_corpus_rnn(params, test, table, act, tagset), tagset);
    points.push_back({alpha, beta, report, false});
  }
  size_t best = 0;
  for (size_t i = 1; i < points.size(); ++i)
    if (points[i].report.f1 > points[best].report.f1) best = i;
  points[best].best = true;
  return points;
}

// ------------------------------------------------------------------ runners

void save_ranked(const std::string& path, const RankedSource& ranked) {
  auto out = open_out(path);
  char buf[48];
  for (size_t r = 0; r < ranked.entries.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.12g", ranked.entries[r].second);
    out << (r + 1) << "\t" << ranked.entries[r].first << "\t" << buf << "\n";
  }
}

RankedSource load_ranked(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rank file: " + path);
  RankedSource ranked;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int rank, index;
    double score;
    if (!(ss >> rank >> index >> score))
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": expected rank, index, score");
    ranked.entries.emplace_back(index, score);
  }
  if (ranked.entries.empty()) throw DataError(path + ": empty rank file");
  return ranked;
}

void run_generate(const Config& config) {
  SyntheticSpec spec = read_synth(config);
  std::string dir = out_dir(config);
  SyntheticData data = generate_synthetic(spec);
  write_synthetic(dir, data);
}

void run_preprocess(const Config& config) {
  std::string dir = out_dir(config);
  RawCorpus raw = read_raw_required(config, "paths.input");
  size_t capacity =
      static_cast<size_t>(config.get_int("vocab.capacity", 13450));
  Vocabulary vocab = build_vocabulary(raw, capacity);

  TagSet tagset;
  Corpus corpus = tokenize_corpus(raw, tagset, &vocab, /*extend_tagset=*/true);
  if (config.get_bool("preprocess.filter", true))
    corpus = filter_noise(corpus, vocab);

  vocab.save(dir + "/vocab.txt");
  tagset.save(dir + "/tagset.txt");

  if (config.get_bool("preprocess.split", true)) {
    SplitSpec spec;
    spec.train_fraction = config.get_double("split.train_fraction", 0.8);
    spec.test_fraction = config.get_double("split.test_fraction", 0.2);
    spec.seed = config.get_uint64("split.seed", global_seed(config));
    auto [train, test] = split(corpus, spec);
    write_corpus(dir + "/train.txt", train, tagset);
    write_corpus(dir + "/test.txt", test, tagset);
  } else {
    write_corpus(dir + "/corpus.txt", corpus, tagset);
  }
}

namespace {

// Shared loading for the experiment commands: vocabulary over every provided
// corpus, tagset grown from labeled data, embeddings from file or seeded.
struct ExperimentData {
  Vocabulary vocab;
  TagSet tagset;
  EmbeddingTable table;
  Corpus source, target_train, target_test, target_pool;
};

ExperimentData load_experiment_data(const Config& config, bool need_source,
                                    bool need_train, bool need_test) {
  ExperimentData data;
  RawCorpus raw_source, raw_train, raw_test, raw_pool;
  if (config.has("paths.source") || need_source)
    raw_source = read_raw_required(config, "paths.source");
  if (config.has("paths.target_train") || need_train)
    raw_train = read_raw_required(config, "paths.target_train");
  if (config.has("paths.target_test") || need_test)
    raw_test = read_raw_required(config, "paths.target_test");
  if (config.has("paths.target_pool"))
    raw_pool = read_raw_corpus(config.get_string("paths.target_pool"));

  size_t capacity = static_cast<size_t>(config.get_int("vocab.capacity", 20000));
  data.vocab =
      vocabulary_over({&raw_source, &raw_train, &raw_pool}, capacity);
  data.table = embeddings_for(config, data.vocab);

  data.source =
      tokenize_corpus(raw_source, data.tagset, &data.vocab, /*extend=*/true);
  data.target_train =
      tokenize_corpus(raw_train, data.tagset, &data.vocab, /*extend=*/true);
  data.target_test =
      tokenize_corpus(raw_test, data.tagset, &data.vocab, /*extend=*/true);
  data.target_pool =
      tokenize_corpus(raw_pool, data.tagset, &data.vocab, /*extend=*/true);
  return data;
}

TransferOptions read_transfer_options(const Config& config) {
  TransferOptions options;
  options.kernel = read_kernel(config);
  std::string strategy = config.get_string("transfer.strategy", "replicate");
  if (strategy == "top_n")
    options.strategy = TransferStrategy::top_n;
  else if (strategy == "replicate")
    options.strategy = TransferStrategy::replicate;
  else
    throw ConfigError("unknown transfer strategy: " + strategy);
  options.top_n = config.get_int("transfer.top_n", options.top_n);
  if (config.has("transfer.schedule"))
    options.schedule =
        ReplicationSchedule::parse(config.get_string("transfer.schedule"));
  options.rnn = read_train_config(config);
  options.act = read_activation(config);
  options.target_labeled =
      config.get_int("transfer.target_labeled", options.target_labeled);
  if (config.has("transfer.variants")) {
    options.variants.clear();
    std::istringstream ss(config.get_string("transfer.variants"));
    std::string item;
    while (std::getline(ss, item, ',')) options.variants.push_back(item);
  }
  return options;
}

Corpus target_mean_corpus(const Config& config, const ExperimentData& data) {
  std::string which = config.get_string("transfer.target_corpus", "both");
  Corpus mean_corpus;
  if (which == "train" || which == "both")
    mean_corpus.insert(mean_corpus.end(), data.target_train.begin(),
                       data.target_train.end());
  if (which == "pool" || which == "both")
    mean_corpus.insert(mean_corpus.end(), data.target_pool.begin(),
                       data.target_pool.end());
  if (which != "train" && which != "pool" && which != "both")
    throw ConfigError("transfer.target_corpus must be train, pool or both");
  return mean_corpus;
}

}  // namespace

void run_rank(const Config& config) {
  std::string dir = out_dir(config);
  ExperimentData data = load_experiment_data(config, /*need_source=*/true,
                                             /*need_train=*/false,
                                             /*need_test=*/false);
  Corpus mean_corpus = target_mean_corpus(config, data);
  if (mean_corpus.empty())
    throw ConfigError("rank needs target sentences (train or pool)");
  RankedSource ranked =
      rank_source(data.source, corpus_mean(mean_corpus, data.table), data.table,
                  read_kernel(config));
  save_ranked(config.get_string("paths.rank", dir + "/rank.tsv"), ranked);
}

void run_plan(const Config& config) {
  std::string dir = out_dir(config);
  RankedSource ranked =
      load_ranked(config.get_string("paths.rank", dir + "/rank.tsv"));
  TransferOptions options = read_transfer_options(config);
  TransferPlan plan = options.strategy == TransferStrategy::top_n
                          ? plan_top_n(ranked, options.top_n)
                          : plan_replicate(ranked, options.schedule);
  save_plan(config.get_string("paths.plan", dir + "/plan.tsv"), plan);
}

namespace {

struct TrainArtifacts {
  Vocabulary vocab;
  TagSet tagset;
  EmbeddingTable table;
  Corpus train;
};

TrainArtifacts load_train_data(const Config& config) {
  TrainArtifacts art;
  RawCorpus raw = read_raw_required(config, "paths.train");
  if (config.has("paths.vocab")) {
    art.vocab = Vocabulary::load(config.get_string("paths.vocab"));
  } else {
    art.vocab = build_vocabulary(
        raw, static_cast<size_t>(config.get_int("vocab.capacity", 20000)));
  }
  if (config.has("paths.tagset")) {
    art.tagset = TagSet::load(config.get_string("paths.tagset"));
    art.train = tokenize_corpus(raw, art.tagset, &art.vocab, /*extend=*/false);
  } else {
    art.train = tokenize_corpus(raw, art.tagset, &art.vocab, /*extend=*/true);
  }
  art.table = embeddings_for(config, art.vocab);
  return art;
}

}  // namespace

void run_train(const Config& config) {
  std::string dir = out_dir(config);
  std::string model = config.get_string("train.model", "rnn");
  ModelKind kind = parse_model_kind(model);
  TrainArtifacts art = load_train_data(config);
  int n_tags = static_cast<int>(art.tagset.size());

  Checkpoint checkpoint;
  checkpoint.kind = kind;
  checkpoint.vocab_fingerprint = art.vocab.fingerprint();
  checkpoint.tagset_fingerprint = art.tagset.fingerprint();
  checkpoint.activation = read_activation(config);

  std::vector<double> losses;
  switch (kind) {
    case ModelKind::hmm:
      checkpoint.params = hmm_train(art.train, n_tags, art.vocab.size(),
                                    config.get_double("hmm.kappa", 0.1));
      break;
    case ModelKind::crf:
      checkpoint.params = crf_train(art.train, n_tags, art.vocab.size(),
                                    CrfTemplates{}, read_crf_config(config));
      break;
    case ModelKind::rnn: {
      auto result = train_rnn(art.train, art.table, read_train_config(config),
                              checkpoint.activation, n_tags);
      losses = result.epoch_losses;
      if (result.tuned_embeddings)
        save_embeddings(dir + "/tuned_embeddings.txt", *result.tuned_embeddings,
                        art.vocab);
      checkpoint.params = std::move(result.params);
      break;
    }
    case ModelKind::ernn: {
      if (!config.has("paths.plan") || !config.has("paths.source"))
        throw ConfigError("ernn training needs paths.plan and paths.source");
      TransferPlan plan = load_plan(config.get_string("paths.plan"));
      Corpus source = load_corpus(config.get_string("paths.source"), art.tagset,
                                  &art.vocab, /*extend=*/true);
      SourceSummary summary = build_source_summary(plan, source, art.table);
      Corpus train_data = art.train;
      if (config.get_bool("train.include_transfer", true)) {
        Corpus transferred = materialize(plan, source);
        train_data.insert(train_data.end(), transferred.begin(),
                          transferred.end());
      }
      auto result = train_ernn(train_data, art.table, summary,
                               read_train_config(config),
                               checkpoint.activation, n_tags);
      losses = result.epoch_losses;
      if (result.tuned_embeddings)
        save_embeddings(dir + "/tuned_embeddings.txt", *result.tuned_embeddings,
                        art.vocab);
      checkpoint.summary = std::move(summary);
      checkpoint.params = std::move(result.params);
      break;
    }
  }

  art.vocab.save(dir + "/vocab.txt");
  art.tagset.save(dir + "/tagset.txt");
  save_checkpoint(config.get_string("paths.checkpoint", dir + "/model.ckpt"),
                  checkpoint);
  if (!losses.empty()) {
    auto log = open_out(dir + "/train_log.txt");
    log << "epoch\tmean_token_cross_entropy\n";
    for (size_t e = 0; e < losses.size(); ++e)
      log << (e + 1) << "\t" << fmt(losses[e]) << "\n";
  }
}

void run_eval(const Config& config) {
  std::string dir = out_dir(config);
  Vocabulary vocab = Vocabulary::load(config.get_string("paths.vocab"));
  TagSet tagset = TagSet::load(config.get_string("paths.tagset"));
  Checkpoint checkpoint =
      load_checkpoint(config.get_string("paths.checkpoint"),
                      vocab.fingerprint(), tagset.fingerprint());
  Corpus test = load_corpus(config.get_string("paths.test"), tagset, &vocab,
                            /*extend=*/false);

  std::vector<std::vector<int>> predicted;
  switch (checkpoint.kind) {
    case ModelKind::hmm:
      predicted =
          decode_corpus_hmm(std::get<HmmParams>(checkpoint.params), test, tagset);
      break;
    case ModelKind::crf:
      predicted =
          decode_corpus_crf(std::get<CrfParams>(checkpoint.params), test, tagset);
      break;
    case ModelKind::rnn: {
      EmbeddingTable table = embeddings_for(config, vocab);
      predicted = decode_corpus_rnn(std::get<RnnParams>(checkpoint.params), test,
                                    table, checkpoint.activation, tagset);
      break;
    }
    case ModelKind::ernn: {
      EmbeddingTable table = embeddings_for(config, vocab);
      predicted = decode_corpus_ernn(std::get<ErnnParams>(checkpoint.params),
                                     test, table, *checkpoint.summary,
                                     checkpoint.activation, tagset);
      break;
    }
  }
  write_report_files(dir, "eval_report", score(test, predicted, tagset));
}

void run_learning_curve(const Config& config) {
  std::string dir = out_dir(config);
  RawCorpus raw = read_raw_required(config, "paths.train");
  size_t capacity = static_cast<size_t>(config.get_int("vocab.capacity", 20000));
  Vocabulary vocab = build_vocabulary(raw, capacity);
  TagSet tagset;
  Corpus corpus = tokenize_corpus(raw, tagset, &vocab, /*extend=*/true);
  EmbeddingTable table = embeddings_for(config, vocab);

  LearningCurveOptions options;
  options.fractions =
      config.get_double_list("curve.fractions", options.fractions);
  if (config.has("curve.models")) {
    options.models.clear();
    std::istringstream ss(config.get_string("curve.models"));
    std::string item;
    while (std::getline(ss, item, ',')) options.models.push_back(item);
  }
  options.rnn = read_train_config(config);
  options.crf = read_crf_config(config);
  options.hmm_kappa = config.get_double("hmm.kappa", 0.1);
  options.act = read_activation(config);
  options.seed = global_seed(config);

  auto cells = learning_curve(corpus, vocab.size(), tagset, table, options);

  auto csv = open_out(dir + "/learning_curve.csv");
  csv << "fraction,model,precision,recall,f1,token_accuracy\n";
  for (const auto& cell : cells) {
    csv << fmt(cell.fraction) << "," << cell.model << ",";
    write_metrics_csv_row(csv, cell.report);
    csv << "\n";
  }
  auto txt = open_out(dir + "/learning_curve.txt");
  txt << "fraction  model      P(%)     R(%)    F1(%)   acc(%)\n";
  char buf[128];
  for (const auto& cell : cells) {
    std::snprintf(buf, sizeof(buf), "%7.2f   %-5s  %7.2f  %7.2f  %7.2f  %7.2f\n",
                  cell.fraction, cell.model.c_str(), 100 * cell.report.precision,
                  100 * cell.report.recall, 100 * cell.report.f1,
                  100 * cell.report.token_accuracy);
    txt << buf;
  }
}

void run_transfer_experiment(const Config& config) {
  std::string dir = out_dir(config);
  ExperimentData data = load_experiment_data(config, /*need_source=*/true,
                                             /*need_train=*/true,
                                             /*need_test=*/true);
  TransferOptions options = read_transfer_options(config);
  Corpus mean_corpus = target_mean_corpus(config, data);

  auto results =
      transfer_experiment(data.source, data.target_train, data.target_test,
                          mean_corpus, data.tagset, data.table, options);

  auto csv = open_out(dir + "/transfer_experiment.csv");
  csv << "variant,precision,recall,f1,token_accuracy\n";
  for (const auto& r : results) {
    csv << r.name << ",";
    write_metrics_csv_row(csv, r.report);
    csv << "\n";
  }
  auto txt = open_out(dir + "/transfer_experiment.txt");
  txt << "variant         P(%)     R(%)    F1(%)   acc(%)\n";
  char buf[128];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%-12s %7.2f  %7.2f  %7.2f  %7.2f\n",
                  r.name.c_str(), 100 * r.report.precision,
                  100 * r.report.recall, 100 * r.report.f1,
                  100 * r.report.token_accuracy);
    txt << buf;
  }
}

void run_cotrain(const Config& config) {
  std::string dir = out_dir(config);
  ExperimentData data = load_experiment_data(config, /*need_source=*/false,
                                             /*need_train=*/true,
                                             /*need_test=*/true);
  if (!config.has("paths.target_pool"))
    throw ConfigError("cotrain needs paths.target_pool");

  CotrainConfig cfg;
  cfg.k = config.get_int("cotrain.k", cfg.k);
  cfg.max_iterations = config.get_int("cotrain.max_iterations", cfg.max_iterations);
  cfg.seed = global_seed(config);
  std::string selection = config.get_string("cotrain.selection", "per_learner");
  if (selection == "per_learner")
    cfg.selection = CotrainConfig::Selection::per_learner;
  else if (selection == "alternate")
    cfg.selection = CotrainConfig::Selection::alternate;
  else
    throw ConfigError("cotrain.selection must be per_learner or alternate");
  cfg.validate();

  // The ERNN's source input comes from a transfer plan when one is
  // configured; otherwise the labeled target set stands in.
  SourceSummary summary;
  if (config.has("paths.plan") && config.has("paths.source")) {
    TransferPlan plan = load_plan(config.get_string("paths.plan"));
    summary = build_source_summary(plan, data.source, data.table);
  } else {
    summary.values = corpus_mean(data.target_train, data.table);
    summary.provenance = "mean of the labeled target training set";
  }

  ErnnLearner learner1(data.table, summary, read_train_config(config),
                       read_activation(config), data.tagset);
  CrfLearner learner2(data.vocab.size(), CrfTemplates{}, read_crf_config(config),
                      data.tagset);

  CotrainResult result =
      cotrain(learner1, learner2, data.target_train, data.target_pool,
              data.target_test, data.tagset, cfg);

  auto csv = open_out(dir + "/cotrain_log.csv");
  csv << "iteration,learner,precision,recall,f1,pool_remaining\n";
  for (const auto& row : result.log) {
    csv << row.iteration << ",ernn,";
    write_metrics_csv_row(csv, row.learner1);
    csv << "," << row.pool_remaining << "\n";
    csv << row.iteration << ",crf,";
    write_metrics_csv_row(csv, row.learner2);
    csv << "," << row.pool_remaining << "\n";
  }
  auto txt = open_out(dir + "/cotrain_log.txt");
  txt << "iter  learner    P(%)     R(%)    F1(%)   pool\n";
  char buf[128];
  for (const auto& row : result.log) {
    std::snprintf(buf, sizeof(buf), "%4d  ernn    %7.2f  %7.2f  %7.2f  %6zu\n",
                  row.iteration, 100 * row.learner1.precision,
                  100 * row.learner1.recall, 100 * row.learner1.f1,
                  row.pool_remaining);
    txt << buf;
    std::snprintf(buf, sizeof(buf), "%4d  crf     %7.2f  %7.2f  %7.2f  %6zu\n",
                  row.iteration, 100 * row.learner2.precision,
                  100 * row.learner2.recall, 100 * row.learner2.f1,
                  row.pool_remaining);
    txt << buf;
  }
}

void run_sweep_activation(const Config& config) {
  std::string dir = out_dir(config);
  RawCorpus raw = read_raw_required(config, "paths.train");
  size_t capacity = static_cast<size_t>(config.get_int("vocab.capacity", 20000));
  Vocabulary vocab = build_vocabulary(raw, capacity);
  TagSet tagset;
  Corpus corpus = tokenize_corpus(raw, tagset, &vocab, /*extend=*/true);
  EmbeddingTable table = embeddings_for(config, vocab);

  SplitSpec split_spec;
  split_spec.seed = global_seed(config);
  auto [train, test] = split(corpus, split_spec);

  std::vector<double> alphas = config.get_double_list("sweep.alphas", {0.0, 0.5, 1.0});
  std::vector<double> betas = config.get_double_list("sweep.betas", {0.0, 0.5, 1.0});
  std::vector<std::pair<double, double>> grid;
  for (double a : alphas)
    for (double b : betas)
      if (a != 0.0 || b != 0.0) grid.emplace_back(a, b);
  if (config.get_bool("sweep.include_corners", true)) {
    for (auto corner : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}})
      if (std::find(grid.begin(), grid.end(), corner) == grid.end())
        grid.push_back(corner);
  }

  auto points = sweep_activation(train, test, tagset, table, grid,
                                 read_train_config(config),
                                 read_activation(config));

  auto csv = open_out(dir + "/sweep_activation.csv");
  csv << "alpha,beta,precision,recall,f1,token_accuracy,best\n";
  for (const auto& p : points) {
    csv << fmt(p.alpha) << "," << fmt(p.beta) << ",";
    write_metrics_csv_row(csv, p.report);
    csv << "," << (p.best ? 1 : 0) << "\n";
  }
  auto txt = open_out(dir + "/sweep_activation.txt");
  txt << "alpha    beta     F1(%)\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%5.2f   %5.2f   %7.2f%s\n", p.alpha, p.beta,
                  100 * p.report.f1, p.best ? "  <- best" : "");
    txt << buf;
  }
}

void run_command(const std::string& name, const Config& config) {
  if (name == "generate") return run_generate(config);
  if (name == "preprocess") return run_preprocess(config);
  if (name == "rank") return run_rank(config);
  if (name == "plan") return run_plan(config);
  if (name == "train") return run_train(config);
  if (name == "eval") return run_eval(config);
  if (name == "learning-curve") return run_learning_curve(config);
  if (name == "transfer-exp") return run_transfer_experiment(config);
  if (name == "cotrain") return run_cotrain(config);
  if (name == "sweep-activation") return run_sweep_activation(config);
  throw ConfigError("unknown command: " + name);
}

}  // namespace ernn::exp
