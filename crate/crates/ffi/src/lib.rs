// SPDX-License-Identifier: Apache-2.0

//! C ABI over `mke-core`.
//!
//! Objects are opaque heap handles released with the matching `_free`
//! function. Every fallible call returns an [`MkeStatus`]; on failure the
//! message is kept per thread and read with [`mke_last_error_message`].
//! Matrices cross the boundary row-major as separate real and imaginary
//! arrays of `dim * dim` doubles.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use mke::entropy::{quantum_kullback, ClassicalDistribution};
use mke::linalg::{ComplexMatrix, HermitianOperator};
use mke::oscillator::{coherent_mke_mean, estimate_displacement_direct, estimate_displacement_mke, CoherentAmplitude, FockCutoff, PhotonDistribution};
use mke::quantum::{mke_from_distribution, mke_single_mean, DistributionConstraint, EstimationResult, MeanConstraint};
use mke::qubit::{qubit_mke_mean, qubit_weak_hamiltonian_single, BlochVector, SpinDirection};
use mke::state::{DensityMatrix, Observable};
use mke::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkeStatus {
    Ok = 0,
    /// Constraints cannot be met or the data carry no information.
    Infeasible = 2,
    /// Malformed or out-of-domain input.
    Invalid = 3,
    NonConvergence = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Displacement estimator selector, passed as its integer value.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkeDisplacementMethod {
    /// Consensus over all ordered outcome pairs.
    Pairwise = 0,
    /// One determination per outcome.
    Direct = 1,
}

/// Opaque density matrix.
pub struct MkeDensityMatrix(DensityMatrix);

/// Opaque Hermitian observable.
pub struct MkeObservable(Observable);

/// Opaque estimation result.
pub struct MkeEstimate(EstimationResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MkeStatus {
    match e.exit_code() {
        2 => MkeStatus::Infeasible,
        4 => MkeStatus::NonConvergence,
        _ => MkeStatus::Invalid,
    }
}

enum Failure {
    Core(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MkeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MkeStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            MkeStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic".into());
            MkeStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn input<'a, T>(p: *const T, n: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn vec3(p: *const f64, what: &'static str) -> Result<[f64; 3], Failure> {
    let s = input(p, 3, what)?;
    Ok([s[0], s[1], s[2]])
}

unsafe fn read_matrix(dim: usize, re: *const f64, im: *const f64) -> Result<ComplexMatrix, Failure> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()).into());
    }
    let re = input(re, dim * dim, "re")?;
    // a null imaginary part means a real matrix
    let im = if im.is_null() { None } else { Some(slice::from_raw_parts(im, dim * dim)) };
    Ok(ComplexMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(re[i * dim + j], im.map_or(0.0, |v| v[i * dim + j]))
    }))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mke_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// --- density matrices -------------------------------------------------------

/// Validates and copies a density matrix. `im` may be null.
#[no_mangle]
pub unsafe extern "C" fn mke_density_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out_rho: *mut *mut MkeDensityMatrix,
) -> MkeStatus {
    guard(|| {
        let slot = out(out_rho, "out_rho")?;
        let rho = DensityMatrix::new(read_matrix(dim, re, im)?)?;
        *slot = boxed(MkeDensityMatrix(rho));
        Ok(())
    })
}

/// Diagonal density matrix from a probability vector.
#[no_mangle]
pub unsafe extern "C" fn mke_density_from_diagonal(
    dim: usize,
    p: *const f64,
    out_rho: *mut *mut MkeDensityMatrix,
) -> MkeStatus {
    guard(|| {
        let slot = out(out_rho, "out_rho")?;
        let rho = DensityMatrix::from_diagonal(input(p, dim, "p")?)?;
        *slot = boxed(MkeDensityMatrix(rho));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mke_density_free(rho: *mut MkeDensityMatrix) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// Dimension, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mke_density_dim(rho: *const MkeDensityMatrix) -> usize {
    rho.as_ref().map_or(0, |r| r.0.dim())
}

/// Copies the matrix into caller buffers of `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn mke_density_entries(rho: *const MkeDensityMatrix, re: *mut f64, im: *mut f64) -> MkeStatus {
    guard(|| {
        let rho = as_ref(rho, "rho")?;
        let d = rho.0.dim();
        if re.is_null() || im.is_null() {
            return Err(Failure::Null("re/im"));
        }
        let (re, im) = (slice::from_raw_parts_mut(re, d * d), slice::from_raw_parts_mut(im, d * d));
        let m = rho.0.matrix();
        for i in 0..d {
            for j in 0..d {
                re[i * d + j] = m[(i, j)].re;
                im[i * d + j] = m[(i, j)].im;
            }
        }
        Ok(())
    })
}

// --- observables ------------------------------------------------------------

/// Validates and copies a Hermitian observable. `im` may be null.
#[no_mangle]
pub unsafe extern "C" fn mke_observable_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out_obs: *mut *mut MkeObservable,
) -> MkeStatus {
    guard(|| {
        let slot = out(out_obs, "out_obs")?;
        let op = HermitianOperator::new(read_matrix(dim, re, im)?)?;
        *slot = boxed(MkeObservable(Observable::new(op)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mke_observable_free(obs: *mut MkeObservable) {
    if !obs.is_null() {
        drop(Box::from_raw(obs));
    }
}

// --- estimation -------------------------------------------------------------

#[no_mangle]
pub unsafe extern "C" fn mke_estimate_single_mean(
    prior: *const MkeDensityMatrix,
    obs: *const MkeObservable,
    mean: f64,
    tol: f64,
    out_est: *mut *mut MkeEstimate,
) -> MkeStatus {
    guard(|| {
        let slot = out(out_est, "out_est")?;
        let tau = as_ref(prior, "prior")?;
        let obs = as_ref(obs, "obs")?;
        let c = MeanConstraint::new(obs.0.clone(), mean)?;
        *slot = boxed(MkeEstimate(mke_single_mean(&tau.0, &c, tol)?));
        Ok(())
    })
}

/// Estimate from outcome probabilities in the prior's computational basis.
#[no_mangle]
pub unsafe extern "C" fn mke_estimate_from_distribution(
    prior: *const MkeDensityMatrix,
    p: *const f64,
    len: usize,
    out_est: *mut *mut MkeEstimate,
) -> MkeStatus {
    guard(|| {
        let slot = out(out_est, "out_est")?;
        let tau = as_ref(prior, "prior")?;
        let p = ClassicalDistribution::new(input(p, len, "p")?.to_vec())?;
        let est = mke_from_distribution(&tau.0, &DistributionConstraint::standard(p))?;
        *slot = boxed(MkeEstimate(est));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn mke_estimate_free(est: *mut MkeEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// New handle holding a copy of the posterior.
#[no_mangle]
pub unsafe extern "C" fn mke_estimate_posterior(est: *const MkeEstimate, out_rho: *mut *mut MkeDensityMatrix) -> MkeStatus {
    guard(|| {
        let slot = out(out_rho, "out_rho")?;
        *slot = boxed(MkeDensityMatrix(as_ref(est, "est")?.0.posterior.clone()));
        Ok(())
    })
}

/// Number of Lagrange multipliers, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mke_estimate_lambda_count(est: *const MkeEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.0.lambdas.len())
}

#[no_mangle]
pub unsafe extern "C" fn mke_estimate_lambda(est: *const MkeEstimate, index: usize, value: *mut f64) -> MkeStatus {
    guard(|| {
        let slot = out(value, "value")?;
        let e = as_ref(est, "est")?;
        *slot = *e
            .0
            .lambdas
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("multiplier index {index} out of range")))?;
        Ok(())
    })
}

/// Partition function, relative entropy to the prior (may be +inf) and
/// constraint residual. Any output pointer may be null.
#[no_mangle]
pub unsafe extern "C" fn mke_estimate_summary(
    est: *const MkeEstimate,
    partition: *mut f64,
    relative_entropy: *mut f64,
    residual: *mut f64,
) -> MkeStatus {
    guard(|| {
        let e = &as_ref(est, "est")?.0;
        for (p, v) in [(partition, e.partition), (relative_entropy, e.relative_entropy), (residual, e.residual)] {
            if let Some(slot) = p.as_mut() {
                *slot = v;
            }
        }
        Ok(())
    })
}

// --- closed forms -----------------------------------------------------------

/// Posterior Bloch vector for a qubit prior and one spin-mean constraint.
/// `direction` must be a unit vector.
#[no_mangle]
pub unsafe extern "C" fn mke_qubit_mke_mean(
    prior_bloch: *const f64,
    direction: *const f64,
    mean: f64,
    out_bloch: *mut f64,
) -> MkeStatus {
    guard(|| {
        let tau = BlochVector::new(vec3(prior_bloch, "prior_bloch")?)?;
        let n = SpinDirection::new(vec3(direction, "direction")?)?;
        if out_bloch.is_null() {
            return Err(Failure::Null("out_bloch"));
        }
        let v = qubit_mke_mean(&tau, &n, mean)?;
        slice::from_raw_parts_mut(out_bloch, 3).copy_from_slice(&v.0);
        Ok(())
    })
}

/// Effective `h t` from one spin measurement after weak evolution.
#[no_mangle]
pub unsafe extern "C" fn mke_qubit_weak_hamiltonian(
    prior_bloch: *const f64,
    direction: *const f64,
    mean: f64,
    out_ht: *mut f64,
) -> MkeStatus {
    guard(|| {
        let tau = BlochVector::new(vec3(prior_bloch, "prior_bloch")?)?;
        let n = SpinDirection::new(vec3(direction, "direction")?)?;
        if out_ht.is_null() {
            return Err(Failure::Null("out_ht"));
        }
        let h = qubit_weak_hamiltonian_single(&tau, &n, mean)?;
        slice::from_raw_parts_mut(out_ht, 3).copy_from_slice(&h.h_eff);
        Ok(())
    })
}

/// Coherent prior with amplitude `alpha_re + i alpha_im` constrained to mean
/// photon number `nbar`. `partition` may be null.
#[no_mangle]
pub unsafe extern "C" fn mke_coherent_mean(
    alpha_re: f64,
    alpha_im: f64,
    nbar: f64,
    beta_re: *mut f64,
    beta_im: *mut f64,
    lambda: *mut f64,
    partition: *mut f64,
) -> MkeStatus {
    guard(|| {
        let (br, bi, l) = (out(beta_re, "beta_re")?, out(beta_im, "beta_im")?, out(lambda, "lambda")?);
        let r = coherent_mke_mean(CoherentAmplitude::new(alpha_re, alpha_im), nbar)?;
        *br = r.beta.re;
        *bi = r.beta.im;
        *l = r.lambda;
        if let Some(z) = partition.as_mut() {
            *z = r.partition;
        }
        Ok(())
    })
}

/// Real displacement of a coherent prior `alpha` from photon-number
/// probabilities. `method` is an [`MkeDisplacementMethod`] value; `spread`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn mke_estimate_displacement(
    alpha: f64,
    p: *const f64,
    len: usize,
    cutoff: usize,
    method: u32,
    beta: *mut f64,
    spread: *mut f64,
) -> MkeStatus {
    guard(|| {
        let slot = out(beta, "beta")?;
        let p = PhotonDistribution::new(input(p, len, "p")?.to_vec())?;
        let fc = FockCutoff::new(cutoff)?;
        let est = match method {
            m if m == MkeDisplacementMethod::Pairwise as u32 => estimate_displacement_mke(alpha, &p, fc)?,
            m if m == MkeDisplacementMethod::Direct as u32 => estimate_displacement_direct(alpha, &p, fc)?,
            m => return Err(Error::InvalidInput(format!("unknown displacement method {m}")).into()),
        };
        *slot = est.beta;
        if let Some(s) = spread.as_mut() {
            *s = est.spread;
        }
        Ok(())
    })
}

/// Quantum relative entropy `K(rho|sigma)`; may be +inf.
#[no_mangle]
pub unsafe extern "C" fn mke_quantum_kullback(
    rho: *const MkeDensityMatrix,
    sigma: *const MkeDensityMatrix,
    value: *mut f64,
) -> MkeStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = quantum_kullback(&as_ref(rho, "rho")?.0, &as_ref(sigma, "sigma")?.0)?;
        Ok(())
    })
}
