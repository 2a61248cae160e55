// Copyright 2026 The hivae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIVAE_HIVAE_H_
#define HIVAE_HIVAE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HIVAE_API __declspec(dllexport)
#else
#define HIVAE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum hivae_status {
  HIVAE_OK = 0,
  HIVAE_ERR_INTERNAL = 1,
  HIVAE_ERR_IO = 2,
  HIVAE_ERR_CONFIG = 3,
  HIVAE_ERR_NUMERIC = 4,
  HIVAE_ERR_ARGUMENT = 5
} hivae_status;

typedef struct hivae_config hivae_config;
typedef struct hivae_dataset hivae_dataset;
typedef struct hivae_model hivae_model;

HIVAE_API const char* hivae_version(void);
HIVAE_API const char* hivae_build_id(void);

/* Message of the most recent failure on the calling thread ("" if none). */
HIVAE_API const char* hivae_last_error(void);

/* Releases strings returned through char** out-parameters. */
HIVAE_API void hivae_string_free(char* s);

/* ---- configuration ---- */

HIVAE_API hivae_status hivae_config_default(hivae_config** out);
/* Defaults overlaid with the JSON object stored at `path`. */
HIVAE_API hivae_status hivae_config_load(const char* path, hivae_config** out);
/* Overlays the keys of a JSON object. Unknown keys are rejected. */
HIVAE_API hivae_status hivae_config_merge_json(hivae_config* cfg, const char* json);
/* Sets one key; `json_value` is a JSON literal such as `0.5` or `"mlp"`. */
HIVAE_API hivae_status hivae_config_set(hivae_config* cfg, const char* key, const char* json_value);
HIVAE_API hivae_status hivae_config_to_json(const hivae_config* cfg, char** out);
/* 16 hex digits identifying the effective configuration. */
HIVAE_API hivae_status hivae_config_hash(const hivae_config* cfg, char** out);
HIVAE_API void hivae_config_destroy(hivae_config* cfg);

/* ---- data ---- */

/* `cascades_path` may be NULL for graph-only work such as pretraining. */
HIVAE_API hivae_status hivae_dataset_load(const char* graph_path, const char* cascades_path, hivae_dataset** out);
HIVAE_API size_t hivae_dataset_num_users(const hivae_dataset* d);
HIVAE_API size_t hivae_dataset_num_edges(const hivae_dataset* d);
HIVAE_API size_t hivae_dataset_num_cascades(const hivae_dataset* d);
HIVAE_API void hivae_dataset_destroy(hivae_dataset* d);

/* ---- model ---- */

/* Called once per logged phase; `phase` is "pretrain", "network" or
 * "diffusion". `val_map` is NaN when no validation ran. */
typedef void (*hivae_epoch_callback)(size_t epoch, const char* phase, double loss, double val_map,
                                     double seconds, void* user);

/* Fresh model over the dataset's network with parameters drawn from the
 * config seed. */
HIVAE_API hivae_status hivae_model_create(const hivae_config* cfg, const hivae_dataset* d, hivae_model** out);
HIVAE_API hivae_status hivae_model_load(const char* dir, hivae_model** out);
HIVAE_API hivae_status hivae_model_save(const hivae_model* m, const char* dir);
HIVAE_API size_t hivae_model_num_users(const hivae_model* m);
/* Effective configuration stored with the model. */
HIVAE_API hivae_status hivae_model_config(const hivae_model* m, char** out_json);
HIVAE_API void hivae_model_destroy(hivae_model* m);

/* Pretrains the social autoencoder and writes the checkpoint plus
 * pretrain_log.tsv to `out_dir`. */
HIVAE_API hivae_status hivae_model_pretrain(hivae_model* m, const char* out_dir, hivae_epoch_callback cb, void* user);

/* Splits the dataset's cascades, trains with early stopping and writes
 * train.tsv, val.tsv, test.tsv, train_log.tsv and the best checkpoint to
 * `out_dir`. Pretraining runs first unless `skip_pretrain` is nonzero.
 * On divergence the last good parameters go to `out_dir`/abort and
 * HIVAE_ERR_NUMERIC is returned. */
HIVAE_API hivae_status hivae_model_train(hivae_model* m, const hivae_dataset* d, const char* out_dir,
                                         int skip_pretrain, hivae_epoch_callback cb, void* user);

/* Writes `cascade_id<TAB>rank,user_id,score;...` (top_k entries, 0 for the
 * model's configured top_k) for the seed slice of every cascade in
 * `cascades_path`. */
HIVAE_API hivae_status hivae_model_predict(const hivae_model* m, const char* cascades_path, double seed_pct,
                                           size_t top_k, size_t threads, const char* out_path);

/* Evaluation report as JSON. `scorer` is "model", "degree" or "random"
 * (seeded by `seed`). `train_cascades_path` may be NULL, which disables the
 * quartile tables. */
HIVAE_API hivae_status hivae_model_evaluate(const hivae_model* m, const char* scorer, const char* test_cascades_path,
                                            const char* train_cascades_path, const double* seed_pcts,
                                            size_t num_seed_pcts, const size_t* ks, size_t num_ks, size_t threads,
                                            uint64_t seed, char** out_json);

/* ---- synthetic data ---- */

/* Preferential-attachment graph plus Independent Cascade runs written as
 * edges.tsv and cascades.tsv. `out_summary` (nullable) receives JSON
 * counts. */
HIVAE_API hivae_status hivae_synth(size_t nodes, size_t m, double p, size_t length, size_t cascades, uint64_t seed,
                                   const char* out_dir, char** out_summary);

/* ---- gradient check ---- */

typedef void (*hivae_gradcheck_callback)(const char* objective, const char* tensor, size_t entries,
                                         double max_rel_error, void* user);

/* Random instance (20 users, D=8, 5 episodes) under the model variant of
 * `cfg`; compares analytic gradients with finite differences for `tensor`
 * ("all" for every parameter) and every objective. */
HIVAE_API hivae_status hivae_gradcheck(const hivae_config* cfg, uint64_t seed, const char* tensor,
                                       hivae_gradcheck_callback cb, void* user, double* out_max_rel_error);

#ifdef __cplusplus
}
#endif

#endif /* HIVAE_HIVAE_H_ */
