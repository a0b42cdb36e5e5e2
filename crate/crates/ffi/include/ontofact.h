#ifndef ONTOFACT_H
#define ONTOFACT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum OntofactStatus {
  ONTOFACT_STATUS_OK = 0,
  ONTOFACT_STATUS_NULL_POINTER = 1,
  ONTOFACT_STATUS_INVALID_UTF8 = 2,
  ONTOFACT_STATUS_PARSE = 3,
  ONTOFACT_STATUS_STRUCTURAL = 4,
  ONTOFACT_STATUS_INVALID_TABLE = 5,
  ONTOFACT_STATUS_INVALID_FACTORIZATION = 6,
  ONTOFACT_STATUS_RESOURCE = 7,
  ONTOFACT_STATUS_RATIONALIZATION = 8,
  ONTOFACT_STATUS_INVALID_ARGUMENT = 9,
  ONTOFACT_STATUS_PANIC = 10,
} OntofactStatus;

/**
 * Opaque ontological factorization.
 */
typedef struct OntofactFactorization OntofactFactorization;

/**
 * Opaque data table.
 */
typedef struct OntofactTable OntofactTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *ontofact_last_error(void);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void ontofact_string_free(char *s);

/**
 * Parses a table document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum OntofactStatus ontofact_table_from_json(const char *json, struct OntofactTable **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum OntofactStatus ontofact_table_pauli(struct OntofactTable **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum OntofactStatus ontofact_table_kernaghan(struct OntofactTable **out);

/**
 * # Safety
 * `table` must be a live handle or null; `out` must be writable.
 */
enum OntofactStatus ontofact_table_to_json(const struct OntofactTable *table, char **out);

/**
 * # Safety
 * `table` must be a live handle; the out pointers must be writable.
 */
enum OntofactStatus ontofact_table_dims(const struct OntofactTable *table,
                                        size_t *d,
                                        size_t *m,
                                        size_t *s);

/**
 * Exact rank of the table matrix.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum OntofactStatus ontofact_table_rank(const struct OntofactTable *table, size_t *out);

/**
 * # Safety
 * `table` must come from this library or be null.
 */
void ontofact_table_free(struct OntofactTable *table);

/**
 * Builds Model 1, 2 or 3.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum OntofactStatus ontofact_factor(const struct OntofactTable *table,
                                    uint32_t model,
                                    struct OntofactFactorization **out);

/**
 * Deterministic expansion; `random != 0` selects the seeded shuffle policy.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum OntofactStatus ontofact_determinize(const struct OntofactTable *table,
                                         const struct OntofactFactorization *of,
                                         uint32_t random,
                                         uint64_t seed,
                                         struct OntofactFactorization **out);

/**
 * Compresses with method 1 (block-uniform input) or method 2 (Model 2 input).
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum OntofactStatus ontofact_compress(const struct OntofactTable *table,
                                      const struct OntofactFactorization *of,
                                      uint32_t method,
                                      uint64_t seed,
                                      size_t restarts,
                                      size_t iterations,
                                      struct OntofactFactorization **out);

/**
 * Sets `*valid` to whether `M P` reproduces the table exactly.
 *
 * # Safety
 * Handles must be live; `valid` must be writable.
 */
enum OntofactStatus ontofact_verify(const struct OntofactTable *table,
                                    const struct OntofactFactorization *of,
                                    bool *valid);

/**
 * # Safety
 * `of` must be a live handle; `out` must be writable.
 */
enum OntofactStatus ontofact_factorization_omega(const struct OntofactFactorization *of,
                                                 size_t *out);

/**
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum OntofactStatus ontofact_factorization_from_json(const char *json,
                                                     struct OntofactFactorization **out);

/**
 * # Safety
 * `of` must be a live handle; `out` must be writable.
 */
enum OntofactStatus ontofact_factorization_to_json(const struct OntofactFactorization *of,
                                                   char **out);

/**
 * # Safety
 * `of` must come from this library or be null.
 */
void ontofact_factorization_free(struct OntofactFactorization *of);

/**
 * Bounds report as a JSON string.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum OntofactStatus ontofact_bounds_json(const struct OntofactTable *table, char **out);

/**
 * Analysis report as a JSON string.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum OntofactStatus ontofact_analyze_json(const struct OntofactTable *table,
                                          const struct OntofactFactorization *of,
                                          char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ONTOFACT_H */
