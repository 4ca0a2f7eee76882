// Experiment drivers behind the CLI subcommands. Each run_* function reads a
// validated Config, executes the pipeline, and writes its result tables
// (aligned text plus CSV) under the configured output directory. The typed
// functions beneath them are reused directly by the test suites.
#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "cotrain.hpp"
#include "eval.hpp"
#include "hmm.hpp"
#include "synth.hpp"
#include "transfer.hpp"

namespace ernn::exp {

// ------------------------------------------------------------- typed cores

struct LearningCurveOptions {
  std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::string> models = {"hmm", "crf", "rnn"};
  TrainConfig rnn;
  CrfTrainConfig crf;
  CrfTemplates templates;
  double hmm_kappa = 0.1;
  ActivationSpec act;
  uint64_t seed = 1;
};

struct LearningCurveCell {
  double fraction = 0.0;
  std::string model;
  EvalReport report;
};

// K-fold cross validation per fraction: K=5 below 30%, K=3 below 70%, a
// single 80/20 split above. Metrics are averaged across folds.
int folds_for_fraction(double fraction);

std::vector<LearningCurveCell> learning_curve(const Corpus& data,
                                              size_t vocab_size,
                                              const TagSet& tagset,
                                              const EmbeddingTable& table,
                                              const LearningCurveOptions& options);

struct TransferOptions {
  KernelSpec kernel;
  TransferStrategy strategy = TransferStrategy::replicate;
  ReplicationSchedule schedule = ReplicationSchedule::default_schedule();
  int top_n = 800;
  TrainConfig rnn;
  ActivationSpec act;
  // Number of labeled target sentences available to the _L variants
  // (-1 keeps all of target_train).
  int target_labeled = -1;
  std::vector<std::string> variants = {"RNN_D_IT", "ERNN_IT", "RNN_L",
                                       "RNN_L_D_IT", "ERNN_L_IT"};
};

struct VariantResult {
  std::string name;
  EvalReport report;
};

std::vector<VariantResult> transfer_experiment(
    const Corpus& source, const Corpus& target_train, const Corpus& target_test,
    const Corpus& target_for_mean, const TagSet& tagset,
    const EmbeddingTable& table, const TransferOptions& options);

struct SweepPoint {
  double alpha = 0.0;
  double beta = 0.0;
  EvalReport report;
  bool best = false;
};

std::vector<SweepPoint> sweep_activation(
    const Corpus& train, const Corpus& test, const TagSet& tagset,
    const EmbeddingTable& table, const std::vector<std::pair<double, double>>& grid,
    const TrainConfig& cfg, const ActivationSpec& base_act);

// --------------------------------------------------------------- runners

void run_generate(const Config& config);
void run_preprocess(const Config& config);
void run_rank(const Config& config);
void run_plan(const Config& config);
void run_train(const Config& config);
void run_eval(const Config& config);
void run_learning_curve(const Config& config);
void run_transfer_experiment(const Config& config);
void run_cotrain(const Config& config);
void run_sweep_activation(const Config& config);

// Dispatch by subcommand name; throws ConfigError for unknown names.
void run_command(const std::string& name, const Config& config);

// Ranked-source file: `rank<TAB>source_index<TAB>score` lines.
void save_ranked(const std::string& path, const RankedSource& ranked);
RankedSource load_ranked(const std::string& path);

}  // namespace ernn::exp
