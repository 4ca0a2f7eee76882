/* ernn -- sequence labeling with kernel-based instance transfer.
 *
 * C interface to the shared library. All functions return ernn_status; on
 * failure ernn_last_error() describes the problem for the calling thread.
 * Handles are opaque and must be released with their _free function.
 */
#ifndef ERNN_H_
#define ERNN_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ernn_status {
  ERNN_OK = 0,
  ERNN_ERROR = 1,             /* unexpected internal failure */
  ERNN_CONFIG_ERROR = 2,      /* invalid or inconsistent configuration */
  ERNN_DATA_ERROR = 3,        /* malformed or incompatible input data */
  ERNN_TRAINING_DIVERGED = 4  /* training loss became non-finite */
} ernn_status;

const char* ernn_version(void);

/* Message for the most recent failure on this thread; empty if none. */
const char* ernn_last_error(void);

/* ------------------------------------------------------------ configuration
 * Flat `key = value` settings with `#` comments and dotted keys, matching the
 * on-disk config format.
 */
typedef struct ernn_config ernn_config;

ernn_status ernn_config_create(ernn_config** out);
ernn_status ernn_config_open(const char* path, ernn_config** out);
ernn_status ernn_config_set(ernn_config* config, const char* key,
                            const char* value);
/* Returns NULL when the key is absent. The pointer stays valid until the next
 * call on this config. */
const char* ernn_config_get(ernn_config* config, const char* key);
void ernn_config_free(ernn_config* config);

/* ------------------------------------------------------------- experiments
 * Each runner validates its configuration, executes the pipeline, and writes
 * result tables under the configured output directory (`out` key).
 */
ernn_status ernn_run_generate(ernn_config* config);
ernn_status ernn_run_preprocess(ernn_config* config);
ernn_status ernn_run_rank(ernn_config* config);
ernn_status ernn_run_plan(ernn_config* config);
ernn_status ernn_run_train(ernn_config* config);
ernn_status ernn_run_eval(ernn_config* config);
ernn_status ernn_run_learning_curve(ernn_config* config);
ernn_status ernn_run_transfer_experiment(ernn_config* config);
ernn_status ernn_run_cotrain(ernn_config* config);
ernn_status ernn_run_sweep_activation(ernn_config* config);
/* Dispatch by subcommand name ("generate", "learning-curve", ...). */
ernn_status ernn_run(ernn_config* config, const char* command);

/* ------------------------------------------------------------------ tagging
 * Load a trained checkpoint together with its vocabulary/tagset (and
 * embeddings for the neural kinds) and tag tokenized sentences.
 */
typedef struct ernn_model ernn_model;
typedef struct ernn_tagging ernn_tagging;

/* embeddings_path may be NULL for hmm/crf checkpoints. */
ernn_status ernn_model_open(const char* checkpoint_path, const char* vocab_path,
                            const char* tagset_path,
                            const char* embeddings_path, ernn_model** out);
const char* ernn_model_kind(const ernn_model* model);
ernn_status ernn_model_tag(const ernn_model* model, const char* const* tokens,
                           size_t count, ernn_tagging** out);
void ernn_model_free(ernn_model* model);

size_t ernn_tagging_size(const ernn_tagging* tagging);
const char* ernn_tagging_tag(const ernn_tagging* tagging, size_t index);
double ernn_tagging_confidence(const ernn_tagging* tagging, size_t index);
void ernn_tagging_free(ernn_tagging* tagging);

#ifdef __cplusplus
}
#endif

#endif /* ERNN_H_ */
