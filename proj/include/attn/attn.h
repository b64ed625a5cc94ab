#ifndef ATTN_ATTN_H
#define ATTN_ATTN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef ATTN_BUILDING_LIBRARY
#    define ATTN_API __declspec(dllexport)
#  else
#    define ATTN_API __declspec(dllimport)
#  endif
#else
#  define ATTN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum attn_status {
  ATTN_OK = 0,
  ATTN_ERR_USAGE = 2,    /* bad argument, config or precondition */
  ATTN_ERR_IO = 3,       /* file could not be read or written */
  ATTN_ERR_SHAPE = 4,    /* tensor extents disagree */
  ATTN_ERR_FORMAT = 5,   /* file contents malformed */
  ATTN_ERR_INTERNAL = 6
} attn_status;

typedef struct attn_config attn_config;
typedef struct attn_model attn_model;

typedef struct attn_model_info {
  size_t parameter_count;
  int image_size;
  int map_size;          /* 0 for the baseline */
  int insertion_stage;
  const char* variant;   /* "none", "regression" or "mam"; static storage */
  int64_t step;          /* optimizer steps taken */
} attn_model_info;

/* Message for the last failing call on this thread; never NULL. */
ATTN_API const char* attn_last_error(void);
ATTN_API const char* attn_version(void);
/* Frees strings returned through char** out-parameters. */
ATTN_API void attn_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

ATTN_API attn_status attn_config_default(attn_config** out);
ATTN_API attn_status attn_config_parse(const char* json, attn_config** out);
ATTN_API attn_status attn_config_load(const char* path, attn_config** out);
/* Replaces the top-level seed and every per-section seed. */
ATTN_API attn_status attn_config_set_seed(attn_config* cfg, uint64_t seed);
ATTN_API attn_status attn_config_to_json(const attn_config* cfg, char** out_json);
/* Side of the square attention map the config's model would produce. */
ATTN_API attn_status attn_config_map_size(const attn_config* cfg, int* out);
ATTN_API void attn_config_free(attn_config* cfg);

/* ---- data ------------------------------------------------------------- */

/* Writes images/, masks/ and manifest.jsonl under out_dir. */
ATTN_API attn_status attn_gen_dataset(const attn_config* cfg, const char* out_dir, size_t* out_records);

/* Fits the appearance-model basis from up to max_masks partial-fake masks of
   the train split, downsampled to map_size x map_size. */
ATTN_API attn_status attn_fit_mam(const char* manifest_path, int n, int max_masks, int map_size, uint64_t seed,
                                  const char* out_path);

/* ---- model ------------------------------------------------------------ */

/* basis_path may be NULL unless the config selects the mam variant. */
ATTN_API attn_status attn_model_create(const attn_config* cfg, const char* basis_path, attn_model** out);
ATTN_API attn_status attn_model_load(const char* checkpoint_path, attn_model** out);
/* Writes the checkpoint and its .meta.json sidecar. */
ATTN_API attn_status attn_model_save(const attn_model* model, const char* checkpoint_path);
ATTN_API attn_status attn_model_info_get(const attn_model* model, attn_model_info* out);

/* Trains with the model's train and loss settings. history_csv may be NULL. */
ATTN_API attn_status attn_model_train(attn_model* model, const char* manifest_path, const char* history_csv);

/* images: n x S x S x 3 floats in [0, 1]. out_scores receives n fake
   probabilities; out_maps (may be NULL) receives n x map_size x map_size
   attention probabilities and must be NULL for the baseline. */
ATTN_API attn_status attn_model_forward(attn_model* model, const float* images, size_t n, double* out_scores,
                                        float* out_maps);

/* split: "train", "val" or "test". roc_csv and maps_dir may be NULL; maps_dir
   receives one MAPF file per record, named after its image. */
ATTN_API attn_status attn_model_evaluate(attn_model* model, const char* manifest_path, const char* split,
                                         double map_threshold, const char* report_json, const char* roc_csv,
                                         const char* maps_dir);
ATTN_API void attn_model_free(attn_model* model);

/* ---- metrics ---------------------------------------------------------- */

/* Masks are count bytes of 0 or 1; both must describe the same grid. */
ATTN_API attn_status attn_iinc(const uint8_t* pred, const uint8_t* gt, size_t count, double* out);
/* *out_defined is 0 when the union is empty. */
ATTN_API attn_status attn_iou(const uint8_t* pred, const uint8_t* gt, size_t count, double* out, int* out_defined);
ATTN_API attn_status attn_pbca(const uint8_t* pred, const uint8_t* gt, size_t count, double* out);
/* *out_defined is 0 when either map has zero norm. */
ATTN_API attn_status attn_cosine(const float* pred, const float* gt, size_t count, double* out, int* out_defined);
/* labels: 0 real, 1 fake; both must occur. Any output pointer may be NULL. */
ATTN_API attn_status attn_detection_metrics(const double* scores, const int* labels, size_t n, double* out_auc,
                                            double* out_eer, double* out_tdr_1pct, double* out_tdr_0_1pct);
/* RGB buffers of width*height*3 bytes; out_mask receives width*height bytes. */
ATTN_API attn_status attn_derive_gt_mask(const uint8_t* source_rgb, const uint8_t* fake_rgb, int width, int height,
                                         double thresh, uint8_t* out_mask);
/* Scores MAPF/PGM prediction files against ground truth paired by basename. */
ATTN_API attn_status attn_score_maps(const char* pred_dir, const char* gt_dir, double thresh,
                                     const char* report_json);

#ifdef __cplusplus
}
#endif

#endif
