#ifndef NEURODIFF_H
#define NEURODIFF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  ND_STATUS_OK = 0,
  ND_STATUS_NULL_POINTER = 1,
  ND_STATUS_INVALID_ARGUMENT = 2,
  ND_STATUS_ROUND_RANGE = 3,
  ND_STATUS_SHAPE = 4,
  ND_STATUS_FORMAT = 5,
  ND_STATUS_TRUNCATION = 6,
  ND_STATUS_RANGE = 7,
  ND_STATUS_ALIGNMENT = 8,
  ND_STATUS_IO = 9,
  ND_STATUS_BUFFER_TOO_SMALL = 10,
  ND_STATUS_PANIC = 11,
} NdStatus;

/**
 * Values for `cipher` parameters; equal to the dataset header tags.
 */
typedef enum {
  ND_CIPHER_DES = 1,
  ND_CIPHER_CHASKEY = 2,
  ND_CIPHER_PRESENT = 3,
} NdCipher;

/**
 * Values for [`nd_spec_set_key_mode`].
 */
typedef enum {
  ND_KEY_MODE_PER_GROUP = 0,
  ND_KEY_MODE_PER_PAIR = 1,
} NdKeyMode;

/**
 * Opaque streaming dataset reader.
 */
typedef struct NdDataset NdDataset;

/**
 * Opaque generation spec.
 */
typedef struct NdSpec NdSpec;

typedef struct {
  uint64_t groups;
  uint64_t positives;
} NdGenSummary;

typedef struct {
  uint8_t cipher;
  uint8_t rounds;
  uint16_t m;
  uint16_t omega;
  uint16_t block_bits;
  uint64_t group_count;
  uint64_t seed;
  /**
   * Bytes per packed group tensor.
   */
  uint64_t group_bytes;
  /**
   * Δ, big-endian, `block_bits / 8` bytes used.
   */
  uint8_t delta[16];
} NdHeader;

/**
 * `tpr`/`tnr` are NaN when the class is absent.
 */
typedef struct {
  uint64_t n;
  double accuracy;
  double tpr;
  double tnr;
  double threshold;
  uint64_t tp;
  uint64_t tn;
  uint64_t fp;
  uint64_t fn_;
  double ci95_low;
  double ci95_high;
} NdEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nd_version(void);

/**
 * Copies the calling thread's last error message (NUL-terminated, possibly
 * truncated) into `buf` and returns the full message length without the NUL.
 */
size_t nd_last_error_message(char *buf, size_t len);

/**
 * Block width in bytes; 0 for an unknown tag.
 */
size_t nd_block_bytes(uint32_t c);

/**
 * Key width in bytes (PRESENT keys are 10); 0 for an unknown tag.
 */
size_t nd_key_bytes(uint32_t c);

/**
 * 0 for an unknown tag.
 */
uint32_t nd_max_rounds(uint32_t c);

/**
 * Round-reduced encryption. `key`, `plaintext` and `out` must hold exactly
 * the cipher's key and block widths.
 */
NdStatus nd_encrypt(uint32_t c,
                    const uint8_t *key,
                    size_t key_len,
                    const uint8_t *plaintext,
                    size_t block_len,
                    uint32_t rounds,
                    uint8_t *out);

/**
 * Creates a spec with the cipher's default Δ and unit width.
 */
NdStatus nd_spec_new(uint32_t c,
                     uint32_t rounds,
                     uint16_t m,
                     uint64_t group_count,
                     uint64_t seed,
                     NdSpec **out);

void nd_spec_free(NdSpec *spec);

NdStatus nd_spec_set_delta(NdSpec *spec, const uint8_t *delta, size_t len);

NdStatus nd_spec_set_omega(NdSpec *spec, uint16_t omega);

NdStatus nd_spec_set_key_mode(NdSpec *spec, uint32_t mode);

/**
 * Bytes per packed group tensor for this spec.
 */
size_t nd_spec_group_bytes(const NdSpec *spec);

/**
 * Generates group `index` into `tensor` (at least `nd_spec_group_bytes`).
 */
NdStatus nd_generate_group(const NdSpec *spec,
                           uint64_t index,
                           uint8_t *label,
                           uint8_t *tensor,
                           size_t tensor_len);

/**
 * Writes the whole dataset to `path`. `threads == 0` uses all cores; the
 * bytes do not depend on it. `summary` may be null.
 */
NdStatus nd_generate_dataset(const NdSpec *spec,
                             const char *path_,
                             uint32_t threads_,
                             NdGenSummary *summary);

NdStatus nd_dataset_open(const char *path_, NdDataset **out);

void nd_dataset_close(NdDataset *ds);

NdStatus nd_dataset_header(const NdDataset *ds, NdHeader *out);

/**
 * Random access to group `index`.
 */
NdStatus nd_dataset_read_group(NdDataset *ds,
                               uint64_t index,
                               uint8_t *label,
                               uint8_t *tensor,
                               size_t tensor_len);

/**
 * Copies all `group_count` labels into `labels`.
 */
NdStatus nd_dataset_read_labels(NdDataset *ds, uint8_t *labels, size_t len);

NdStatus nd_write_predictions(const char *path_, const float *preds, size_t n);

/**
 * Scores a prediction file against a dataset's labels.
 */
NdStatus nd_evaluate(const char *dataset,
                     const char *predictions,
                     double threshold,
                     NdEvalReport *out);

/**
 * In-memory variant of [`nd_evaluate`].
 */
NdStatus nd_evaluate_labels(const uint8_t *labels,
                            const float *preds,
                            size_t n,
                            double threshold,
                            NdEvalReport *out);

double nd_ci_half_width(double accuracy, uint64_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEURODIFF_H */
