/* SPDX-License-Identifier: Apache-2.0 */

#ifndef MKE_H
#define MKE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  MKE_STATUS_OK = 0,
  /**
   * Constraints cannot be met or the data carry no information.
   */
  MKE_STATUS_INFEASIBLE = 2,
  /**
   * Malformed or out-of-domain input.
   */
  MKE_STATUS_INVALID = 3,
  MKE_STATUS_NON_CONVERGENCE = 4,
  MKE_STATUS_NULL_POINTER = 5,
  MKE_STATUS_PANIC = 6,
} MkeStatus;

/**
 * Displacement estimator selector, passed as its integer value.
 */
typedef enum {
  /**
   * Consensus over all ordered outcome pairs.
   */
  MKE_DISPLACEMENT_METHOD_PAIRWISE = 0,
  /**
   * One determination per outcome.
   */
  MKE_DISPLACEMENT_METHOD_DIRECT = 1,
} MkeDisplacementMethod;

/**
 * Opaque density matrix.
 */
typedef struct MkeDensityMatrix MkeDensityMatrix;

/**
 * Opaque estimation result.
 */
typedef struct MkeEstimate MkeEstimate;

/**
 * Opaque Hermitian observable.
 */
typedef struct MkeObservable MkeObservable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *mke_last_error_message(void);

/**
 * Validates and copies a density matrix. `im` may be null.
 */
MkeStatus mke_density_new(size_t dim,
                          const double *re,
                          const double *im,
                          MkeDensityMatrix **out_rho);

/**
 * Diagonal density matrix from a probability vector.
 */
MkeStatus mke_density_from_diagonal(size_t dim, const double *p, MkeDensityMatrix **out_rho);

void mke_density_free(MkeDensityMatrix *rho);

/**
 * Dimension, or 0 for a null handle.
 */
size_t mke_density_dim(const MkeDensityMatrix *rho);

/**
 * Copies the matrix into caller buffers of `dim * dim` doubles.
 */
MkeStatus mke_density_entries(const MkeDensityMatrix *rho, double *re, double *im);

/**
 * Validates and copies a Hermitian observable. `im` may be null.
 */
MkeStatus mke_observable_new(size_t dim,
                             const double *re,
                             const double *im,
                             MkeObservable **out_obs);

void mke_observable_free(MkeObservable *obs);

MkeStatus mke_estimate_single_mean(const MkeDensityMatrix *prior,
                                   const MkeObservable *obs,
                                   double mean,
                                   double tol,
                                   MkeEstimate **out_est);

/**
 * Estimate from outcome probabilities in the prior's computational basis.
 */
MkeStatus mke_estimate_from_distribution(const MkeDensityMatrix *prior,
                                         const double *p,
                                         size_t len,
                                         MkeEstimate **out_est);

void mke_estimate_free(MkeEstimate *est);

/**
 * New handle holding a copy of the posterior.
 */
MkeStatus mke_estimate_posterior(const MkeEstimate *est, MkeDensityMatrix **out_rho);

/**
 * Number of Lagrange multipliers, or 0 for a null handle.
 */
size_t mke_estimate_lambda_count(const MkeEstimate *est);

MkeStatus mke_estimate_lambda(const MkeEstimate *est, size_t index, double *value);

/**
 * Partition function, relative entropy to the prior (may be +inf) and
 * constraint residual. Any output pointer may be null.
 */
MkeStatus mke_estimate_summary(const MkeEstimate *est,
                               double *partition,
                               double *relative_entropy,
                               double *residual);

/**
 * Posterior Bloch vector for a qubit prior and one spin-mean constraint.
 * `direction` must be a unit vector.
 */
MkeStatus mke_qubit_mke_mean(const double *prior_bloch,
                             const double *direction,
                             double mean,
                             double *out_bloch);

/**
 * Effective `h t` from one spin measurement after weak evolution.
 */
MkeStatus mke_qubit_weak_hamiltonian(const double *prior_bloch,
                                     const double *direction,
                                     double mean,
                                     double *out_ht);

/**
 * Coherent prior with amplitude `alpha_re + i alpha_im` constrained to mean
 * photon number `nbar`. `partition` may be null.
 */
MkeStatus mke_coherent_mean(double alpha_re,
                            double alpha_im,
                            double nbar,
                            double *beta_re,
                            double *beta_im,
                            double *lambda,
                            double *partition);

/**
 * Real displacement of a coherent prior `alpha` from photon-number
 * probabilities. `method` is an [`MkeDisplacementMethod`] value; `spread`
 * may be null.
 */
MkeStatus mke_estimate_displacement(double alpha,
                                    const double *p,
                                    size_t len,
                                    size_t cutoff,
                                    uint32_t method,
                                    double *beta,
                                    double *spread);

/**
 * Quantum relative entropy `K(rho|sigma)`; may be +inf.
 */
MkeStatus mke_quantum_kullback(const MkeDensityMatrix *rho,
                               const MkeDensityMatrix *sigma,
                               double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MKE_H */
