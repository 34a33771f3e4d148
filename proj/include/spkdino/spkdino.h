// spkdino/spkdino.h

// Copyright 2026  spkdino authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

/*
 * C interface of the spkdino library: self-supervised speaker embeddings
 * trained by self-distillation, plus fine-tuning, scoring and analysis.
 *
 * Every function that can fail returns an spkdino_status; on failure a
 * description is available from spkdino_last_error() on the same thread.
 * Objects are opaque and owned by the caller, who releases them with the
 * matching _destroy function. Strings returned as const char* stay valid
 * until the owning object is destroyed.
 */

#ifndef SPKDINO_SPKDINO_H_
#define SPKDINO_SPKDINO_H_

#include <stddef.h>

#if defined(SPKDINO_BUILDING_LIBRARY)
#define SPKDINO_API __attribute__((visibility("default")))
#else
#define SPKDINO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  SPKDINO_OK = 0,
  SPKDINO_ERR_INVALID_ARGUMENT = 1,
  SPKDINO_ERR_IO = 2,
  SPKDINO_ERR_FORMAT = 3,
  SPKDINO_ERR_NUMERIC = 4,
  SPKDINO_ERR_NOT_FOUND = 5,
  SPKDINO_ERR_INTERNAL = 6
} spkdino_status;

typedef struct spkdino_config spkdino_config;
typedef struct spkdino_model spkdino_model;
typedef struct spkdino_report spkdino_report;

SPKDINO_API const char* spkdino_version(void);
SPKDINO_API const char* spkdino_status_string(int status);
/* Message of the last failure on this thread; empty after a success. */
SPKDINO_API const char* spkdino_last_error(void);

/* ---- configuration ---------------------------------------------------- */

SPKDINO_API int spkdino_config_create(spkdino_config** out);
/* Defaults overlaid with the key=value lines of `path`. */
SPKDINO_API int spkdino_config_load(const char* path, spkdino_config** out);
SPKDINO_API void spkdino_config_destroy(spkdino_config* cfg);
SPKDINO_API int spkdino_config_set(spkdino_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncated to buf_len); *needed
 * receives the full length including the terminator. buf may be NULL. */
SPKDINO_API int spkdino_config_get(const spkdino_config* cfg, const char* key, char* buf,
                                   size_t buf_len, size_t* needed);
SPKDINO_API int spkdino_config_save(const spkdino_config* cfg, const char* path);
SPKDINO_API int spkdino_config_validate(const spkdino_config* cfg);
/* Number of recognised keys and their names / one-line descriptions. */
SPKDINO_API size_t spkdino_config_key_count(void);
SPKDINO_API const char* spkdino_config_key_name(size_t index);
SPKDINO_API const char* spkdino_config_key_doc(size_t index);

/* ---- pipelines ---------------------------------------------------------- */

/* Writes train.manifest, eval.manifest and eval.trials for the configured
 * synthetic corpora into out_dir. With render_wav != 0 the audio is rendered
 * into out_dir/wav and the manifests reference the files. */
SPKDINO_API int spkdino_synth(const spkdino_config* cfg, const char* out_dir, int render_wav);

/* Self-distillation pre-training into out_dir (train_log.tsv, config.txt,
 * checkpoint.bin). resume_checkpoint may be NULL. */
SPKDINO_API int spkdino_train(const spkdino_config* cfg, const char* out_dir,
                              const char* resume_checkpoint, int verbose);

/* Angular-margin fine-tuning on the labelled share of the training corpus;
 * starts from finetune.init when set. */
SPKDINO_API int spkdino_finetune(const spkdino_config* cfg, const char* out_dir, int verbose);

/* Scores a trial list (NULL: eval.trials or generated) with the checkpoint's
 * student. Writes scores.txt and report.txt when out_dir is non-NULL. */
SPKDINO_API int spkdino_evaluate(const spkdino_config* cfg, const char* checkpoint,
                                 const char* trials, const char* out_dir, spkdino_report** out);

/* Summarises a training log; writes summary.txt and series.tsv when out_dir
 * is non-NULL. The report carries a "collapse" field (1 or 0). */
SPKDINO_API int spkdino_analyze(const char* log_path, const char* out_dir, spkdino_report** out);

/* Runs every [name] block of the sweep file in order and writes
 * out_dir/comparison.tsv. */
SPKDINO_API int spkdino_ablate(const spkdino_config* cfg, const char* sweep_path,
                               const char* out_dir, int verbose, spkdino_report** out);

/* ---- reports ------------------------------------------------------------ */

/* Tab-separated key/value lines. */
SPKDINO_API const char* spkdino_report_text(const spkdino_report* report);
/* Numeric value of a report field; SPKDINO_ERR_NOT_FOUND when absent. */
SPKDINO_API int spkdino_report_get(const spkdino_report* report, const char* key, double* value);
SPKDINO_API void spkdino_report_destroy(spkdino_report* report);

/* ---- models ------------------------------------------------------------- */

SPKDINO_API int spkdino_model_load(const char* checkpoint, spkdino_model** out);
SPKDINO_API void spkdino_model_destroy(spkdino_model* model);
SPKDINO_API size_t spkdino_model_embedding_dim(const spkdino_model* model);
/* Whole-utterance embedding of mono samples in [-1, 1]. out must hold
 * spkdino_model_embedding_dim() values. */
SPKDINO_API int spkdino_model_embed(const spkdino_model* model, const double* samples,
                                    size_t n_samples, int sample_rate, double* out, size_t out_len);

#ifdef __cplusplus
}
#endif

#endif /* SPKDINO_SPKDINO_H_ */
