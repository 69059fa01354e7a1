#ifndef TORUS_MOBIUS_H
#define TORUS_MOBIUS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Bumped on any incompatible change to the exported signatures.
 */
#define TM_ABI_VERSION 1

typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_NULL_POINTER = 1,
  TM_STATUS_INVALID_ARGUMENT = 2,
  TM_STATUS_DOMAIN = 3,
  TM_STATUS_RANGE = 4,
  TM_STATUS_CONTRACT = 5,
  TM_STATUS_SINGULAR = 6,
  TM_STATUS_NO_CONVERGENCE = 7,
  TM_STATUS_PANIC = 8,
} TmStatus;

/**
 * Single-mode lattice state.
 */
typedef struct TmLatticeState TmLatticeState;

/**
 * Two-mode lattice state.
 */
typedef struct TmPairState TmPairState;

typedef struct TmComplex {
  double re;
  double im;
} TmComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

uint32_t tm_abi_version(void);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *tm_last_error_message(void);

/**
 * `Θ₃(v|τ)`; requires `Im τ > 0`.
 */
enum TmStatus tm_theta3(struct TmComplex v, struct TmComplex tau, struct TmComplex *out);

/**
 * `Σ e^{bj − j²}` over all integers.
 */
enum TmStatus tm_gaussian_lattice_sum(struct TmComplex b, struct TmComplex *out);

/**
 * Overlap of two torus coherent states via theta functions.
 */
enum TmStatus tm_overlap_theta(double l1,
                               double a1,
                               double l2,
                               double a2,
                               double lp1,
                               double ap1,
                               double lp2,
                               double ap2,
                               struct TmComplex *out);

enum TmStatus tm_mobius_label_value(double l, double r, double phi, struct TmComplex *out);

enum TmStatus tm_torus_coherent(double l1,
                                double a1,
                                double l2,
                                double a2,
                                uint32_t cutoff,
                                struct TmLatticeState **out);

enum TmStatus tm_mobius_coherent(double l,
                                 double r,
                                 double phi,
                                 uint32_t cutoff,
                                 struct TmLatticeState **out);

enum TmStatus tm_basis_state(int64_t j1, int64_t j2, uint32_t cutoff, struct TmLatticeState **out);

/**
 * Releases a state; null is ignored.
 */
void tm_lattice_state_free(struct TmLatticeState *state);

/**
 * Number of stored amplitudes.
 */
enum TmStatus tm_lattice_state_len(const struct TmLatticeState *state, size_t *out);

enum TmStatus tm_lattice_state_cutoff(const struct TmLatticeState *state, uint32_t *out);

/**
 * Amplitude of `|j1, j2⟩`; zero when not stored.
 */
enum TmStatus tm_lattice_state_get(const struct TmLatticeState *state,
                                   int64_t j1,
                                   int64_t j2,
                                   struct TmComplex *out);

/**
 * The `index`-th stored entry in ascending `(j1, j2)` order.
 */
enum TmStatus tm_lattice_state_entry(const struct TmLatticeState *state,
                                     size_t index,
                                     int64_t *j1,
                                     int64_t *j2,
                                     struct TmComplex *amp);

/**
 * `⟨a|b⟩`; the cutoffs must match.
 */
enum TmStatus tm_lattice_inner(const struct TmLatticeState *a,
                               const struct TmLatticeState *b,
                               struct TmComplex *out);

/**
 * Applies an operator given by tag: `identity`, `t`, `ladder+1`, `ladder-2`,
 * `j1`, `m2`, `m1^4`.
 */
enum TmStatus tm_lattice_apply(const struct TmLatticeState *state,
                               const char *op_tag,
                               struct TmLatticeState **out);

/**
 * `(|j⟩|−j′⟩ + |−j⟩|j′⟩)`, normalized.
 */
enum TmStatus tm_pair_ideal(int64_t j1,
                            int64_t j2,
                            int64_t jp1,
                            int64_t jp2,
                            uint32_t cutoff,
                            struct TmPairState **out);

/**
 * `|a⟩ ⊗ |b⟩`
 */
enum TmStatus tm_pair_product(const struct TmLatticeState *a,
                              const struct TmLatticeState *b,
                              struct TmPairState **out);

void tm_pair_state_free(struct TmPairState *state);

enum TmStatus tm_pair_state_len(const struct TmPairState *state, size_t *out);

enum TmStatus tm_pair_state_norm(const struct TmPairState *state, double *out);

enum TmStatus tm_pair_state_get(const struct TmPairState *state,
                                int64_t j1,
                                int64_t j2,
                                int64_t jp1,
                                int64_t jp2,
                                struct TmComplex *out);

/**
 * `M̂^{(ss′)}` with `s, s′ ∈ {+1, −1}`.
 */
enum TmStatus tm_pair_apply_m_ss(const struct TmPairState *state,
                                 int32_t s,
                                 int32_t sp,
                                 struct TmPairState **out);

/**
 * `D̂ⁿᵢₖ` with axes numbered 1 and 2.
 */
enum TmStatus tm_pair_apply_d(const struct TmPairState *state,
                              uint32_t n,
                              uint8_t i,
                              uint8_t k,
                              struct TmPairState **out);

/**
 * Entanglement entropy in nats from the Schmidt spectrum.
 */
enum TmStatus tm_pair_entropy(const struct TmPairState *state, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TORUS_MOBIUS_H */
