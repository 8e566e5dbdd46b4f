#ifndef RBFKAN_H
#define RBFKAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RbfkanStatus {
  RBFKAN_STATUS_OK = 0,
  RBFKAN_STATUS_NULL_POINTER = 1,
  RBFKAN_STATUS_INVALID_ARGUMENT = 2,
  RBFKAN_STATUS_SHAPE_MISMATCH = 3,
  RBFKAN_STATUS_IO = 4,
  RBFKAN_STATUS_FORMAT = 5,
  RBFKAN_STATUS_NUMERICAL = 6,
  RBFKAN_STATUS_PANIC = 7,
} RbfkanStatus;

typedef enum RbfkanArch {
  RBFKAN_ARCH_MLP = 0,
  RBFKAN_ARCH_KAN = 1,
  RBFKAN_ARCH_RBF_KAN = 2,
  RBFKAN_ARCH_FREE_RBF_KAN = 3,
} RbfkanArch;

/**
 * Opaque model handle.
 */
typedef struct RbfkanModel RbfkanModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a freshly initialized model. `widths` holds `n_widths` node
 * counts; `grid_size` is ignored for MLPs; `domain_lo < domain_hi` is the
 * first-layer grid range.
 *
 * # Safety
 * `widths` must point to `n_widths` readable values and `out` must be a
 * valid pointer to write the handle to.
 */
enum RbfkanStatus rbfkan_model_create(enum RbfkanArch arch,
                                      const uintptr_t *widths,
                                      uintptr_t n_widths,
                                      uintptr_t grid_size,
                                      double domain_lo,
                                      double domain_hi,
                                      uint64_t seed,
                                      struct RbfkanModel **out);

/**
 * Loads a JSON checkpoint.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum RbfkanStatus rbfkan_model_load(const char *path, struct RbfkanModel **out);

/**
 * Writes a JSON checkpoint.
 *
 * # Safety
 * `model` must be a live handle and `path` a valid NUL-terminated string.
 */
enum RbfkanStatus rbfkan_model_save(const struct RbfkanModel *model, const char *path);

/**
 * Evaluates the model at one input point.
 *
 * # Safety
 * `x` must hold `n_x` values and `y` must have room for `n_y` values.
 */
enum RbfkanStatus rbfkan_model_forward(const struct RbfkanModel *model,
                                       const double *x,
                                       uintptr_t n_x,
                                       double *y,
                                       uintptr_t n_y);

/**
 * Number of trainable parameters, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t rbfkan_model_param_count(const struct RbfkanModel *model);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t rbfkan_model_n_inputs(const struct RbfkanModel *model);

/**
 * # Safety
 * `model` must be null or a live handle.
 */
uintptr_t rbfkan_model_n_outputs(const struct RbfkanModel *model);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void rbfkan_model_free(struct RbfkanModel *model);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *rbfkan_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RBFKAN_H */
