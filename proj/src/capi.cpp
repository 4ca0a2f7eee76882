// C API implementation: thin exception-to-status translation over the core.
#include "ernn.h"

#include <string>

#include "checkpoint.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

thread_local std::string g_last_error;

ernn_status fail(ernn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <class Fn>
ernn_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ERNN_OK;
  } catch (const ernn::ConfigError& e) {
    return fail(ERNN_CONFIG_ERROR, e.what());
  } catch (const ernn::TrainingDiverged& e) {
    return fail(ERNN_TRAINING_DIVERGED, e.what());
  } catch (const ernn::DataError& e) {
    return fail(ERNN_DATA_ERROR, e.what());
  } catch (const std::exception& e) {
    return fail(ERNN_ERROR, e.what());
  }
}

}  // namespace

struct ernn_config {
  ernn::Config config;
  std::string scratch;  // backs ernn_config_get
};

struct ernn_model {
  ernn::Vocabulary vocab;
  ernn::TagSet tagset;
  ernn::EmbeddingTable table;
  ernn::Checkpoint checkpoint;
  std::string kind_name;
};

struct ernn_tagging {
  std::vector<std::string> tags;
  std::vector<double> confidence;
};

extern "C" {

const char* ernn_version(void) { return "1.0.0"; }

const char* ernn_last_error(void) { return g_last_error.c_str(); }

ernn_status ernn_config_create(ernn_config** out) {
  if (!out) return fail(ERNN_CONFIG_ERROR, "null output pointer");
  return guarded([&] { *out = new ernn_config(); });
}

ernn_status ernn_config_open(const char* path, ernn_config** out) {
  if (!path || !out) return fail(ERNN_CONFIG_ERROR, "null argument");
  return guarded([&] {
    auto* config = new ernn_config();
    try {
      config->config = ernn::Config::load(path);
    } catch (...) {
      delete config;
      throw;
    }
    *out = config;
  });
}

ernn_status ernn_config_set(ernn_config* config, const char* key,
                            const char* value) {
  if (!config || !key || !value) return fail(ERNN_CONFIG_ERROR, "null argument");
  return guarded([&] { config->config.set(key, value); });
}

const char* ernn_config_get(ernn_config* config, const char* key) {
  if (!config || !key || !config->config.has(key)) return nullptr;
  config->scratch = config->config.get_string(key);
  return config->scratch.c_str();
}

void ernn_config_free(ernn_config* config) { delete config; }

#define ERNN_DEFINE_RUNNER(name, fn)                                 \
  ernn_status name(ernn_config* config) {                            \
    if (!config) return fail(ERNN_CONFIG_ERROR, "null config");      \
    return guarded([&] { ernn::exp::fn(config->config); });          \
  }

ERNN_DEFINE_RUNNER(ernn_run_generate, run_generate)
ERNN_DEFINE_RUNNER(ernn_run_preprocess, run_preprocess)
ERNN_DEFINE_RUNNER(ernn_run_rank, run_rank)
ERNN_DEFINE_RUNNER(ernn_run_plan, run_plan)
ERNN_DEFINE_RUNNER(ernn_run_train, run_train)
ERNN_DEFINE_RUNNER(ernn_run_eval, run_eval)
ERNN_DEFINE_RUNNER(ernn_run_learning_curve, run_learning_curve)
ERNN_DEFINE_RUNNER(ernn_run_transfer_experiment, run_transfer_experiment)
ERNN_DEFINE_RUNNER(ernn_run_cotrain, run_cotrain)
ERNN_DEFINE_RUNNER(ernn_run_sweep_activation, run_sweep_activation)

#undef ERNN_DEFINE_RUNNER

ernn_status ernn_run(ernn_config* config, const char* command) {
  if (!config || !command) return fail(ERNN_CONFIG_ERROR, "null argument");
  return guarded([&] { ernn::exp::run_command(command, config->config); });
}

ernn_status ernn_model_open(const char* checkpoint_path, const char* vocab_path,
                            const char* tagset_path,
                            const char* embeddings_path, ernn_model** out) {
  if (!checkpoint_path || !vocab_path || !tagset_path || !out)
    return fail(ERNN_CONFIG_ERROR, "null argument");
  return guarded([&] {
    auto model = std::make_unique<ernn_model>();
    model->vocab = ernn::Vocabulary::load(vocab_path);
    model->tagset = ernn::TagSet::load(tagset_path);
    model->checkpoint =
        ernn::load_checkpoint(checkpoint_path, model->vocab.fingerprint(),
                              model->tagset.fingerprint());
    model->kind_name = ernn::model_kind_name(model->checkpoint.kind);
    bool neural = model->checkpoint.kind == ernn::ModelKind::rnn ||
                  model->checkpoint.kind == ernn::ModelKind::ernn;
    if (neural) {
      if (!embeddings_path)
        throw ernn::ConfigError("neural checkpoints need an embeddings path");
      model->table = ernn::load_embeddings(embeddings_path, model->vocab);
    }
    *out = model.release();
  });
}

const char* ernn_model_kind(const ernn_model* model) {
  return model ? model->kind_name.c_str() : nullptr;
}

ernn_status ernn_model_tag(const ernn_model* model, const char* const* tokens,
                           size_t count, ernn_tagging** out) {
  if (!model || !tokens || !out) return fail(ERNN_CONFIG_ERROR, "null argument");
  if (count == 0) return fail(ERNN_DATA_ERROR, "empty sentence");
  return guarded([&] {
    ernn::TaggedSentence sentence;
    sentence.tokens.reserve(count);
    sentence.tags.assign(count, model->tagset.outside_id());
    for (size_t i = 0; i < count; ++i) {
      if (!tokens[i]) throw ernn::DataError("null token");
      sentence.tokens.push_back({tokens[i], model->vocab.lookup(tokens[i])});
    }

    std::vector<int> tags;
    std::vector<double> confidence;
    switch (model->checkpoint.kind) {
      case ernn::ModelKind::hmm: {
        auto decoded =
            hmm_decode(std::get<ernn::HmmParams>(model->checkpoint.params),
                       sentence);
        tags = repair_iob(decoded.tags, model->tagset);
        confidence.assign(count, 0.0);
        break;
      }
      case ernn::ModelKind::crf: {
        auto decoded =
            crf_decode(std::get<ernn::CrfParams>(model->checkpoint.params),
                       sentence);
        tags = repair_iob(decoded.tags, model->tagset);
        confidence.assign(count, decoded.confidence);
        break;
      }
      case ernn::ModelKind::rnn: {
        auto decoded =
            decode(std::get<ernn::RnnParams>(model->checkpoint.params), sentence,
                   model->table, model->checkpoint.activation, model->tagset);
        tags = std::move(decoded.tags);
        confidence = std::move(decoded.confidence);
        break;
      }
      case ernn::ModelKind::ernn: {
        auto decoded =
            decode(std::get<ernn::ErnnParams>(model->checkpoint.params),
                   sentence, model->table, *model->checkpoint.summary,
                   model->checkpoint.activation, model->tagset);
        tags = std::move(decoded.tags);
        confidence = std::move(decoded.confidence);
        break;
      }
    }

    auto tagging = std::make_unique<ernn_tagging>();
    tagging->confidence = std::move(confidence);
    tagging->tags.reserve(count);
    for (int id : tags) tagging->tags.push_back(model->tagset.tag(id));
    *out = tagging.release();
  });
}

void ernn_model_free(ernn_model* model) { delete model; }

size_t ernn_tagging_size(const ernn_tagging* tagging) {
  return tagging ? tagging->tags.size() : 0;
}

const char* ernn_tagging_tag(const ernn_tagging* tagging, size_t index) {
  if (!tagging || index >= tagging->tags.size()) return nullptr;
  return tagging->tags[index].c_str();
}

double ernn_tagging_confidence(const ernn_tagging* tagging, size_t index) {
  if (!tagging || index >= tagging->confidence.size()) return 0.0;
  return tagging->confidence[index];
}

void ernn_tagging_free(ernn_tagging* tagging) { delete tagging; }

}  // extern "C"
