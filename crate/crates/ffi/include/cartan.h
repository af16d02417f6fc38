#ifndef CARTAN_H
#define CARTAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CartanKind {
  CARTAN_KIND_MAIN = 0,
  CARTAN_KIND_GAMMA = 1,
} CartanKind;

typedef enum CartanStatus {
  CARTAN_STATUS_OK = 0,
  CARTAN_STATUS_NULL_POINTER = 1,
  CARTAN_STATUS_INVALID_ARGUMENT = 2,
  CARTAN_STATUS_DOMAIN = 3,
  CARTAN_STATUS_HYPOTHESIS = 4,
  CARTAN_STATUS_SOLVER = 5,
  CARTAN_STATUS_STRUCTURAL = 6,
  CARTAN_STATUS_IO = 7,
  CARTAN_STATUS_PANIC = 8,
} CartanStatus;

// Opaque table of `c(m)` or `c_gamma(m)` for one prime.
typedef struct CartanCharTable CartanCharTable;

// Opaque sieve state (quadratic characters up to `ell_max`).
typedef struct CartanSieve CartanSieve;

typedef struct CartanBounds {
  uint64_t p_max_pipeline;
  double x_final;
  uint64_t p_max_final;
} CartanBounds;

typedef struct CartanVerdict {
  // 1 if a witness prime was found.
  int32_t ruled_out;
  // 0 when not ruled out.
  uint64_t witness_ell;
  int64_t a_ell;
} CartanVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *cartan_last_error(void);

// Builds the character-sum table for prime `p = 2 mod 3`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum CartanStatus cartan_char_table_new(uint64_t p,
                                        enum CartanKind kind,
                                        struct CartanCharTable **out);

// # Safety
// `table` must come from [`cartan_char_table_new`] and not be used afterwards.
void cartan_char_table_free(struct CartanCharTable *table);

// Number of entries (`p`); 0 for a null table.
//
// # Safety
// `table` must be null or a live table.
size_t cartan_char_table_len(const struct CartanCharTable *table);

// `c(m mod p)` as real and imaginary parts.
//
// # Safety
// `table` must be a live table; `re` and `im` must be writable.
enum CartanStatus cartan_char_table_get(const struct CartanCharTable *table,
                                        uint64_t m,
                                        double *re,
                                        double *im);

// `max_{s<p} |D(s)| / sqrt(ps)` and the `s` attaining it.
//
// # Safety
// `table` must be a live table; `c_p` and `argmax_s` must be writable.
enum CartanStatus cartan_char_table_partial_sum_constant(const struct CartanCharTable *table,
                                                         double *c_p,
                                                         uint64_t *argmax_s);

// Whether `a + b sqrt(eps)` is a cube in F_{p^2}, `eps` the least non-residue.
//
// # Safety
// `out` must be writable.
enum CartanStatus cartan_is_cube(uint64_t p, uint64_t a, uint64_t b, int32_t *out);

// `|E(F_l)|` for `y^2 = x^3 + a x + b`.
//
// # Safety
// `out` must be writable.
enum CartanStatus cartan_count_points(uint64_t a, uint64_t b, uint64_t ell, uint64_t *out);

// Solves the analytic bound chain with the default constants.
//
// # Safety
// `out` must be writable.
enum CartanStatus cartan_bounds(struct CartanBounds *out);

// Largest `|log|q||` allowed at `p = 101` for the given `C_gamma`.
//
// # Safety
// `out` must be writable.
enum CartanStatus cartan_final_x_bound(double c_gamma, double *out);

// # Safety
// `out` must be writable.
enum CartanStatus cartan_sieve_new(uint64_t ell_max, struct CartanSieve **out);

// # Safety
// `sieve` must come from [`cartan_sieve_new`] and not be used afterwards.
void cartan_sieve_free(struct CartanSieve *sieve);

// Looks for a witness prime for `j = p^d c^3`.
//
// # Safety
// `sieve` must be live and `out` writable.
enum CartanStatus cartan_sieve_rule_out(const struct CartanSieve *sieve,
                                        uint64_t p,
                                        uint32_t d,
                                        int64_t c,
                                        struct CartanVerdict *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CARTAN_H */
