// Experiment driver. Every subcommand goes through the shared library's C
// interface; exit codes: 0 ok, 2 config error, 3 data error, 4 diverged.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ernn.h"

namespace {

struct ConfigDeleter {
  void operator()(ernn_config* config) const { ernn_config_free(config); }
};

using ConfigHandle = std::unique_ptr<ernn_config, ConfigDeleter>;

int report(ernn_status status, const std::string& command) {
  if (status == ERNN_OK) return 0;
  std::fprintf(stderr, "ernn %s: %s\n", command.c_str(), ernn_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ernn: sequence labeling with kernel-based instance transfer"};
  app.set_version_flag("--version", ernn_version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seed;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "configuration file (key = value)");
  app.add_option("--out", out_dir, "output directory (overrides `out`)");
  app.add_option("--seed", seed, "global seed (overrides `seed`)");
  app.add_option("--set", overrides, "extra key=value overrides")
      ->type_name("KEY=VALUE");

  const char* commands[] = {"generate",       "preprocess", "rank",
                            "plan",           "train",      "eval",
                            "learning-curve", "transfer-exp", "cotrain",
                            "sweep-activation"};
  const char* help[] = {
      "write synthetic source/target corpora and embeddings",
      "build vocabulary and tagset, filter noise, split train/test",
      "score source sentences against the target corpus mean",
      "turn a ranking into a transfer plan (top-n or replication)",
      "train hmm/crf/rnn/ernn and write a checkpoint",
      "evaluate a checkpoint on a test corpus",
      "P/R/F1 of hmm/crf/rnn over training-set fractions",
      "run the five transfer variants (RNN_D_IT ... ERNN_L_IT)",
      "co-train the ernn and crf over an unlabeled pool",
      "grid search over the combined activation coefficients"};
  for (size_t i = 0; i < std::size(commands); ++i)
    app.add_subcommand(commands[i], help[i]);

  CLI11_PARSE(app, argc, argv);

  std::string command = app.get_subcommands().front()->get_name();

  ernn_config* raw = nullptr;
  ernn_status status = config_path.empty() ? ernn_config_create(&raw)
                                           : ernn_config_open(config_path.c_str(), &raw);
  if (status != ERNN_OK) return report(status, command);
  ConfigHandle config(raw);

  if (!out_dir.empty()) ernn_config_set(config.get(), "out", out_dir.c_str());
  if (!seed.empty()) ernn_config_set(config.get(), "seed", seed.c_str());
  for (const auto& kv : overrides) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "ernn: --set expects KEY=VALUE, got '%s'\n",
                   kv.c_str());
      return static_cast<int>(ERNN_CONFIG_ERROR);
    }
    ernn_config_set(config.get(), kv.substr(0, eq).c_str(),
                    kv.substr(eq + 1).c_str());
  }

  return report(ernn_run(config.get(), command.c_str()), command);
}
