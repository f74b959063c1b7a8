/*
 * Copyright 2026 The faceir Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of libfaceir: paired face decomposition into albedo, shading,
 * normals and second-order spherical-harmonic lighting.
 *
 * Every function returning fir_status reports failure through the status
 * code; the message of the last failure on the calling thread is available
 * from fir_last_error(). Output handles are only written on success and are
 * owned by the caller. */

#ifndef FACEIR_FACEIR_H_
#define FACEIR_FACEIR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FACEIR_BUILDING_LIBRARY)
#define FIR_API __declspec(dllexport)
#else
#define FIR_API __declspec(dllimport)
#endif
#else
#define FIR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fir_status {
  FIR_OK = 0,
  FIR_ERR_INVALID_ARGUMENT = 1,
  FIR_ERR_INSUFFICIENT_DATA = 2,
  FIR_ERR_DIVERGED = 3,
  FIR_ERR_NOT_CONVERGED = 4,
  FIR_ERR_IO = 5,
  FIR_ERR_INTERNAL = 6
} fir_status;

typedef enum fir_member { FIR_MEMBER_I = 0, FIR_MEMBER_J = 1 } fir_member;

typedef enum fir_detach {
  FIR_DETACH_NONE = 0,
  FIR_DETACH_LIGHT = 1,
  FIR_DETACH_LIGHT_AND_SHADING = 2
} fir_detach;

#define FIR_SH_COUNT 9

/* Nine SH coefficients, shared by the three color channels. */
typedef struct fir_light {
  double coeffs[FIR_SH_COUNT];
} fir_light;

typedef struct fir_image fir_image;     /* RGB, linear, values in [0, 1] */
typedef struct fir_shading fir_shading; /* single channel */
typedef struct fir_mask fir_mask;
typedef struct fir_normals fir_normals; /* unit vectors plus a validity bit */
typedef struct fir_config fir_config;
typedef struct fir_result fir_result;

FIR_API const char* fir_version(void);
FIR_API const char* fir_status_name(fir_status status);
/* Message of the most recent failure on this thread, "" if none. */
FIR_API const char* fir_last_error(void);

/* Images. Pixel data is row-major with interleaved channels. */
FIR_API fir_status fir_image_create(int width, int height, fir_image** out);
FIR_API fir_status fir_image_read_png(const char* path, double gamma, fir_image** out);
FIR_API fir_status fir_image_write_png(const fir_image* image, const char* path, double gamma);
FIR_API fir_status fir_image_size(const fir_image* image, int* width, int* height);
FIR_API double* fir_image_data(fir_image* image);
FIR_API const double* fir_image_const_data(const fir_image* image);
FIR_API void fir_image_free(fir_image* image);

FIR_API fir_status fir_shading_read_png(const char* path, fir_shading** out);
FIR_API fir_status fir_shading_write_png(const fir_shading* shading, const char* path);
FIR_API fir_status fir_shading_size(const fir_shading* shading, int* width, int* height);
FIR_API const double* fir_shading_const_data(const fir_shading* shading);
FIR_API void fir_shading_free(fir_shading* shading);

/* Masks. Non-zero entries are inside. */
FIR_API fir_status fir_mask_create(int width, int height, int inside, fir_mask** out);
FIR_API fir_status fir_mask_read_png(const char* path, fir_mask** out);
FIR_API fir_status fir_mask_write_png(const fir_mask* mask, const char* path);
FIR_API fir_status fir_mask_size(const fir_mask* mask, int* width, int* height);
FIR_API fir_status fir_mask_set(fir_mask* mask, int x, int y, int inside);
FIR_API int fir_mask_get(const fir_mask* mask, int x, int y);
FIR_API size_t fir_mask_count(const fir_mask* mask);
FIR_API void fir_mask_free(fir_mask* mask);

/* Normal maps. Encoded PNGs store (n + 1) / 2; black pixels are invalid. */
FIR_API fir_status fir_normals_frontal(int width, int height, fir_normals** out);
FIR_API fir_status fir_normals_read_png(const char* path, fir_normals** out);
FIR_API fir_status fir_normals_write_png(const fir_normals* normals, const char* path);
FIR_API fir_status fir_normals_size(const fir_normals* normals, int* width, int* height);
/* xyz receives three doubles; valid (optional) receives 0 or 1. */
FIR_API fir_status fir_normals_get(const fir_normals* normals, int x, int y, double* xyz,
                                   int* valid);
FIR_API void fir_normals_free(fir_normals* normals);

/* SH light files: nine whitespace-separated decimals. */
FIR_API fir_status fir_light_read(const char* path, fir_light* out);
FIR_API fir_status fir_light_write(const fir_light* light, const char* path);
/* Constant shading s everywhere. */
FIR_API void fir_light_ambient(double shading, fir_light* out);
FIR_API fir_status fir_light_solve(const fir_shading* shading, const fir_normals* normals,
                                   const fir_mask* mask, fir_light* out, int* rank);

/* Solver configuration. */
FIR_API fir_status fir_config_create(fir_config** out);
FIR_API void fir_config_free(fir_config* config);
/* "default" or "dpr"; resets every weight. */
FIR_API fir_status fir_config_set_preset(fir_config* config, const char* name);
/* Keys: lambda_a, lambda_s, lambda_n, lambda_l, lambda_irec, lambda_srec, xi. */
FIR_API fir_status fir_config_set_weight(fir_config* config, const char* key, double value);
FIR_API fir_status fir_config_get_weight(const fir_config* config, const char* key,
                                         double* value);
/* key=value lines, '#' comments, optional "preset" key. */
FIR_API fir_status fir_config_load(fir_config* config, const char* path);
FIR_API fir_status fir_config_set_iterations(fir_config* config, int phase1, int phase2);
FIR_API fir_status fir_config_set_detach(fir_config* config, fir_detach mode);
FIR_API fir_status fir_config_parse_detach(const char* name, fir_detach* out);
FIR_API fir_status fir_config_set_convergence_tol(fir_config* config, double tol);
FIR_API fir_status fir_config_set_freeze_normals(fir_config* config, int freeze);

/* Progress callback: iteration, phase (1 or 2), total energy. */
typedef void (*fir_progress_fn)(int iteration, int phase, double total, void* user);

/* Decomposes an image pair. prior_j may be NULL to share prior_i. */
FIR_API fir_status fir_decompose(const fir_image* image_i, const fir_image* image_j,
                                 const fir_mask* mask, const fir_normals* prior_i,
                                 const fir_normals* prior_j, const fir_config* config,
                                 fir_progress_fn progress, void* user, fir_result** out);
/* Reads a result directory; only the component files are restored. */
FIR_API fir_status fir_result_read(const char* directory, fir_result** out);
FIR_API fir_status fir_result_write(const fir_result* result, const char* directory);
FIR_API void fir_result_free(fir_result* result);
/* 1 when the solver met its stopping criterion, 0 at the iteration limit. */
FIR_API int fir_result_converged(const fir_result* result);
FIR_API int fir_result_monotone(const fir_result* result);
FIR_API size_t fir_result_trace_size(const fir_result* result);
FIR_API fir_status fir_result_trace_total(const fir_result* result, size_t index, double* total);
FIR_API double fir_result_final_energy(const fir_result* result);
FIR_API const char* fir_result_stop_reason(const fir_result* result);
FIR_API fir_status fir_result_light(const fir_result* result, fir_member member, fir_light* out);
FIR_API fir_status fir_result_albedo(const fir_result* result, fir_member member,
                                     fir_image** out);
FIR_API fir_status fir_result_shading(const fir_result* result, fir_member member,
                                      fir_shading** out);
FIR_API fir_status fir_result_normals(const fir_result* result, fir_member member,
                                      fir_normals** out);
FIR_API fir_status fir_result_reconstruction(const fir_result* result, fir_member member,
                                             fir_image** out);

/* Rendering. */
FIR_API fir_status fir_render(const fir_image* albedo, const fir_normals* normals,
                              const fir_light* light, fir_image** out);
FIR_API fir_status fir_render_shading(const fir_normals* normals, const fir_light* light,
                                      fir_shading** out);
FIR_API fir_status fir_delight(const fir_image* image, const fir_shading* shading,
                               double epsilon, fir_image** out, fir_mask** low_confidence);
FIR_API fir_status fir_transfer_light(const fir_result* source, fir_member source_member,
                                      const fir_result* target, fir_member target_member,
                                      fir_image** out);

/* Poisson blending of foreground into background inside the mask. */
FIR_API fir_status fir_blend(const fir_image* foreground, const fir_image* background,
                             const fir_mask* mask, double tolerance, fir_image** out,
                             int* iterations, double* residual);

/* Synthetic sphere pairs. */
typedef struct fir_synth_options {
  int size;
  uint64_t seed;
  double prior_perturbation_deg;
  double gaussian_sigma;
  double salt_pepper_fraction;
  /* 0 checkerboard, 1 radial gradient, 2 smooth noise. */
  int albedo_kind;
} fir_synth_options;

FIR_API void fir_synth_default_options(fir_synth_options* out);
/* Writes image_{i,j}.png, mask.png, prior_{i,j}.png, pair.tsv and ground_truth/. */
FIR_API fir_status fir_synth_write(const fir_synth_options* options, const char* directory);

/* Metrics. thresholds/pct_under may be NULL when count is 0. */
FIR_API fir_status fir_angular_error(const fir_normals* predicted, const fir_normals* truth,
                                     const fir_mask* mask, const double* thresholds,
                                     size_t count, double* mean, double* std_dev,
                                     double* pct_under);
FIR_API fir_status fir_image_mae(const fir_image* a, const fir_image* b, const fir_mask* mask,
                                 double* out);
FIR_API fir_status fir_image_rmse(const fir_image* a, const fir_image* b, const fir_mask* mask,
                                  double* out);
FIR_API fir_status fir_shading_mae(const fir_shading* a, const fir_shading* b,
                                   const fir_mask* mask, double* out);
/* Clusters lights with k-means; assignments receives count entries. */
FIR_API fir_status fir_kmeans_lights(const fir_light* lights, size_t count, int k,
                                     uint64_t seed, int* assignments, double* inertia);

#ifdef __cplusplus
}
#endif

#endif /* FACEIR_FACEIR_H_ */
