#ifndef PBS_H
#define PBS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum PbsStatus {
  PBS_STATUS_OK = 0,
  PBS_STATUS_NULL_ARGUMENT = 1,
  PBS_STATUS_INVALID_UTF8 = 2,
  PBS_STATUS_INVALID_ALPHABET = 3,
  PBS_STATUS_ILLEGAL_CHARACTER = 4,
  PBS_STATUS_IO = 5,
  PBS_STATUS_CORRUPT = 6,
  PBS_STATUS_INVALID_ARGUMENT = 7,
  PBS_STATUS_PANIC = 8,
} PbsStatus;

/**
 * Opaque corpus database handle.
 */
typedef struct PbsDb PbsDb;

/**
 * Opaque FM-index handle.
 */
typedef struct PbsIndex PbsIndex;

/**
 * Detector settings for [`pbs_db_search`].
 */
typedef struct PbsSearchParams {
  size_t seed_k;
  size_t max_gap;
  size_t min_report;
} PbsSearchParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string; do not free.
 */
const char *pbs_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on this thread; do not free.
 */
const char *pbs_last_error_message(void);

void pbs_string_free(char *s);

/**
 * Encodes UTF-8 text to its sequence, one character per word.
 */
enum PbsStatus pbs_encode(const uint8_t *text,
                          size_t len,
                          uint32_t alphabet_size,
                          char **out_sequence);

/**
 * Encodes UTF-8 text to a FASTA record named `name` plus the offset-map
 * sidecar text that ties each sequence position back to the source bytes.
 */
enum PbsStatus pbs_encode_document(const uint8_t *text,
                                   size_t len,
                                   uint32_t alphabet_size,
                                   const char *name,
                                   char **out_fasta,
                                   char **out_map);

/**
 * Builds an index over an encoded sequence.
 */
enum PbsStatus pbs_index_build(const uint8_t *sequence,
                               size_t len,
                               uint32_t alphabet_size,
                               struct PbsIndex **out_index);

/**
 * Loads an index saved by [`pbs_index_serialize`].
 */
enum PbsStatus pbs_index_deserialize(const uint8_t *data, size_t len, struct PbsIndex **out_index);

/**
 * Serializes an index; release the buffer with [`pbs_bytes_free`].
 */
enum PbsStatus pbs_index_serialize(const struct PbsIndex *index,
                                   uint8_t **out_data,
                                   size_t *out_len);

void pbs_bytes_free(uint8_t *data, size_t len);

/**
 * Length of the indexed sequence.
 */
size_t pbs_index_len(const struct PbsIndex *index);

/**
 * Number of occurrences of `pattern`.
 */
enum PbsStatus pbs_index_count(const struct PbsIndex *index,
                               const uint8_t *pattern,
                               size_t len,
                               size_t *out_count);

/**
 * Ascending start positions of `pattern`. Release with
 * [`pbs_positions_free`]; an empty result yields a null array.
 */
enum PbsStatus pbs_index_locate(const struct PbsIndex *index,
                                const uint8_t *pattern,
                                size_t len,
                                uint64_t **out_positions,
                                size_t *out_len);

void pbs_positions_free(uint64_t *positions, size_t len);

void pbs_index_free(struct PbsIndex *index);

/**
 * Opens a corpus database file.
 */
enum PbsStatus pbs_db_open(const char *path, struct PbsDb **out_db);

size_t pbs_db_document_count(const struct PbsDb *db);

size_t pbs_db_total_words(const struct PbsDb *db);

/**
 * Default detector settings.
 */
struct PbsSearchParams pbs_search_params_default(void);

/**
 * Searches an encoded query against the database and returns the result
 * metadata as JSON. `params` may be null for defaults.
 */
enum PbsStatus pbs_db_search(const struct PbsDb *db,
                             const char *query_id,
                             const uint8_t *sequence,
                             size_t len,
                             const struct PbsSearchParams *params,
                             char **out_json);

void pbs_db_free(struct PbsDb *db);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PBS_H */
