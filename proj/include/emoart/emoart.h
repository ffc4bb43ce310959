/*
 * Copyright 2026 The emoart Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the emoart library.
 *
 * Every call returns an emo_status. On failure the message is available
 * from emo_last_error() on the calling thread until the next failing call.
 * Structured results come back as UTF-8 JSON strings owned by the caller
 * and released with emo_string_free(). Option objects are JSON as well;
 * omitted keys take their defaults.
 */

#ifndef EMOART_H
#define EMOART_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EMO_API __declspec(dllexport)
#else
#define EMO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum emo_status {
  EMO_OK = 0,
  EMO_ERR_INVALID_ARGUMENT = 1, /* NULL pointer, malformed option JSON */
  EMO_ERR_VALIDATION = 2,       /* bad data or configuration */
  EMO_ERR_IO = 3,               /* missing or unwritable file */
  EMO_ERR_RUNTIME = 4,          /* failure while computing */
  EMO_ERR_DIVERGED = 5          /* training produced a non-finite loss */
} emo_status;

#define EMO_NUM_CATEGORIES 26
#define EMO_NUM_VAD 3

typedef struct emo_model emo_model;

EMO_API const char* emo_version(void);
EMO_API const char* emo_last_error(void);
EMO_API const char* emo_status_name(emo_status status);
EMO_API void emo_string_free(char* s);

/* level: 0 debug, 1 info, 2 warning, 3 error. A NULL callback restores the
 * default stderr sink. */
typedef void (*emo_log_fn)(int level, const char* message, void* user);
EMO_API void emo_set_log_callback(emo_log_fn fn, void* user);
EMO_API void emo_set_log_level(int level);

/* Category names in output order, as a JSON array. */
EMO_API emo_status emo_categories(char** json_out);

/* ---- models ------------------------------------------------------------ */

EMO_API emo_status emo_model_load(const char* checkpoint_path, emo_model** out);
EMO_API void emo_model_free(emo_model* model);
/* Configuration, categories, normalization and training metadata. */
EMO_API emo_status emo_model_info(const emo_model* model, char** json_out);

/* One person in one image. bbox is x1, y1, x2, y2 in pixels. */
EMO_API emo_status emo_predict(const emo_model* model, const char* image_path, const double bbox[4],
                               double scores[EMO_NUM_CATEGORIES], double vad[EMO_NUM_VAD]);

/* Every person of a manifest: {"predictions": [{"image_id", "person",
 * "scores", "vad"}]}. */
EMO_API emo_status emo_predict_manifest(const emo_model* model, const char* manifest_path, int workers,
                                        char** json_out);

/* ---- datasets ---------------------------------------------------------- */

/* Parses and validates a manifest; returns a summary. */
EMO_API emo_status emo_manifest_check(const char* manifest_path, char** json_out);

/* options: {"format", "input", "images_root", "split", "source_tag",
 * "vad_scale": [lo, hi], "output"}. */
EMO_API emo_status emo_convert(const char* options_json, char** json_out);

/* options: {"output", "n_images", "width", "height", "n_classes",
 * "second_person_prob", "vad_noise", "seed", "split", "source_tag"}. */
EMO_API emo_status emo_synthesize(const char* options_json, char** json_out);

/* options: {"weights_dir", "backbone", "scheme", "source" | "random": true,
 * "width", "seed"}. Copies a verified trunk weight file into weights_dir,
 * or writes a randomly initialized stand-in. */
EMO_API emo_status emo_fetch_weights(const char* options_json, char** json_out);

/* ---- experiments ------------------------------------------------------- */

/* config_text: flat key = value text; overrides_json: object of string
 * values applied on top (may be NULL); base_dir resolves relative paths.
 * Returns the resolved text and its hash: {"text", "hash"}. */
EMO_API emo_status emo_config_resolve(const char* config_text, const char* base_dir, const char* overrides_json,
                                      char** json_out);

/* Trains and returns the run record as JSON. */
EMO_API emo_status emo_train(const char* config_text, const char* base_dir, const char* out_dir,
                             char** json_out);

/* options: {"predominant_only", "workers", "batch_size", "output"}. */
EMO_API emo_status emo_evaluate(const char* checkpoint_path, const char* manifest_path, const char* options_json,
                                char** json_out);

/* Report diff of b against a. */
EMO_API emo_status emo_compare(const char* report_a_path, const char* report_b_path, char** json_out);

/* options: {"manifest", "styles", "output", "strength", "seed", "workers",
 * "stylizer"}. */
EMO_API emo_status emo_stylize(const char* options_json, char** json_out);

/* options: {"axes": ["INW", "224B"], "eval": [manifest paths], "work_dir",
 * "workers"}. The result holds the rendered table under "text". */
EMO_API emo_status emo_ablate(const char* config_text, const char* base_dir, const char* options_json,
                              char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* EMOART_H */
