/*
 * Copyright 2026 The weakiqa Authors
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

#ifndef IQA_IQA_H_
#define IQA_IQA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(IQA_BUILDING_LIBRARY)
#define IQA_API __declspec(dllexport)
#else
#define IQA_API __declspec(dllimport)
#endif
#else
#define IQA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iqa_status {
  IQA_OK = 0,
  IQA_ERR_INVALID_ARGUMENT = 1,
  IQA_ERR_VALIDATION = 2,
  IQA_ERR_DEGENERATE = 3,
  IQA_ERR_IO = 4,
  IQA_ERR_UNSUPPORTED = 5,
  IQA_ERR_RUNTIME = 6
} iqa_status;

/* Message of the last failed call on this thread ("" if none). */
IQA_API const char* iqa_last_error(void);
IQA_API const char* iqa_status_name(iqa_status status);
IQA_API const char* iqa_version(void);

/* 0 = errors only, 1 = info, 2 = debug. Logs go to stderr. */
IQA_API void iqa_set_verbosity(int level);

/* Images hold planar double samples in [0,1]; channel 0 row-major first. */
typedef struct iqa_image iqa_image;

IQA_API iqa_status iqa_image_create(int width, int height, int channels, const double* planar, iqa_image** out);
IQA_API iqa_status iqa_image_read(const char* path, iqa_image** out);
IQA_API iqa_status iqa_image_write_png(const iqa_image* image, const char* path);
IQA_API void iqa_image_free(iqa_image* image);
IQA_API int iqa_image_width(const iqa_image* image);
IQA_API int iqa_image_height(const iqa_image* image);
IQA_API int iqa_image_channels(const iqa_image* image);
/* Borrowed pointer, valid until the image is freed. */
IQA_API const double* iqa_image_data(const iqa_image* image);

/* kind: distortion name (e.g. "gaussian_blur"), level 1..5. */
IQA_API iqa_status iqa_distort(const iqa_image* ref, const char* kind, int level, uint64_t seed, iqa_image** out);
IQA_API iqa_status iqa_synthetic_reference(int width, int height, uint64_t seed, iqa_image** out);

/* metric: "psnr", "ssim", "ms_ssim" or "gmsd". */
IQA_API iqa_status iqa_metric(const char* metric, const iqa_image* ref, const iqa_image* dist, double* out);

IQA_API iqa_status iqa_plcc(const double* x, const double* y, size_t n, double* out);
IQA_API iqa_status iqa_srocc(const double* x, const double* y, size_t n, double* out);

/* Runs a pipeline command with a JSON object config. On return *result_json
 * (when non-NULL) holds a JSON document owned by the caller; free it with
 * iqa_string_free. A command that completes with failed records or checks
 * still fills the result and returns the matching error status. */
IQA_API iqa_status iqa_run(const char* command, const char* config_json, char** result_json);
IQA_API void iqa_string_free(char* s);

/* Number of pipeline commands and their names, for help output. */
IQA_API size_t iqa_command_count(void);
IQA_API const char* iqa_command_name(size_t index);

#ifdef __cplusplus
}
#endif

#endif /* IQA_IQA_H_ */
