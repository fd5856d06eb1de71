// SPDX-License-Identifier: Apache-2.0

//! Closed-form qubit results in the Bloch representation `ρ = ½(I + v·σ)`.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{Complex, ComplexMatrix, HermitianOperator};
use crate::state::DensityMatrix;
use crate::{Error, Result};

pub const BLOCH_TOL: f64 = 1e-10;
const PARALLEL_EPS: f64 = 1e-12;

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm3(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Bloch vector with `|v| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub Vec3);

impl BlochVector {
    pub fn new(v: Vec3) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) || norm3(v) > 1.0 + BLOCH_TOL {
            return Err(Error::InvalidState(format!("Bloch vector {v:?} outside the unit ball")));
        }
        Ok(Self(v))
    }

    pub fn norm(&self) -> f64 {
        norm3(self.0)
    }
}

/// Unit measurement direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDirection(pub Vec3);

impl SpinDirection {
    pub fn new(n: Vec3) -> Result<Self> {
        if n.iter().any(|x| !x.is_finite()) || (norm3(n) - 1.0).abs() > BLOCH_TOL {
            return Err(Error::InvalidInput(format!("direction {n:?} is not a unit vector")));
        }
        Ok(Self(n))
    }

    pub fn normalized(n: Vec3) -> Result<Self> {
        let l = norm3(n);
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidInput("zero direction".into()));
        }
        Ok(Self(scale(1.0 / l, n)))
    }

    pub fn observable(&self) -> HermitianOperator {
        HermitianOperator::spin_along(self.0)
    }
}

/// Effective Hamiltonian vector `h·t` (time absorbed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitHamiltonianEstimate {
    pub h_eff: Vec3,
    /// Unit vector along `τ × n`.
    pub direction: Vec3,
}

pub fn bloch_to_density(v: &BlochVector) -> DensityMatrix {
    let [x, y, z] = v.0;
    let m = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(0.5 * (1.0 + z), 0.0),
            Complex::new(0.5 * x, -0.5 * y),
            Complex::new(0.5 * x, 0.5 * y),
            Complex::new(0.5 * (1.0 - z), 0.0),
        ],
    );
    DensityMatrix::from_matrix_trusted(m)
}

pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimMismatch(rho.dim(), 2));
    }
    let m = rho.matrix();
    let v = [2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re];
    Ok(BlochVector(v))
}

fn kappa(tau: &BlochVector, n: &SpinDirection, mean: f64) -> Result<f64> {
    let c = dot(tau.0, n.0);
    let infeasible = Error::InfeasibleMean { mean, lo: -1.0, hi: 1.0 };
    if !(mean.abs() < 1.0) {
        if mean == c {
            return Ok(0.0);
        }
        return Err(infeasible);
    }
    let k = (c - mean) / (1.0 - mean * c);
    if !(k.abs() < 1.0) {
        return Err(infeasible);
    }
    Ok(k)
}

/// `λ = artanh[(τ·n − m)/(1 − m τ·n)]`.
pub fn qubit_lambda(tau: &BlochVector, n: &SpinDirection, mean: f64) -> Result<f64> {
    Ok(kappa(tau, n, mean)?.atanh())
}

/// Posterior Bloch vector from the mean `m` of `n·σ`: the component along
/// `n` becomes `m`, the orthogonal part of `τ` is shrunk by
/// `√[(1 − m²)/(1 − (τ·n)²)]`.
pub fn qubit_mke_mean(tau: &BlochVector, n: &SpinDirection, mean: f64) -> Result<BlochVector> {
    let k = kappa(tau, n, mean)?;
    if k == 0.0 {
        return Ok(*tau);
    }
    let c = dot(tau.0, n.0);
    let perp = add(tau.0, scale(-c, n.0));
    let shrink = ((1.0 - mean * mean) / (1.0 - c * c)).sqrt();
    Ok(BlochVector(add(scale(mean, n.0), scale(shrink, perp))))
}

/// Weak-Hamiltonian estimate from one spin measurement on the evolved state:
///
/// `h t = [(1 − √(1−κ²)) τ·n − κ] / [2|τ|² (1 − κ τ·n)] · (τ × n)`.
pub fn qubit_weak_hamiltonian_single(tau: &BlochVector, n: &SpinDirection, mean: f64) -> Result<QubitHamiltonianEstimate> {
    let axis = cross(tau.0, n.0);
    let axis_len = norm3(axis);
    if axis_len <= PARALLEL_EPS {
        return Err(Error::NoInformation);
    }
    let k = kappa(tau, n, mean)?;
    let c = dot(tau.0, n.0);
    let t2 = dot(tau.0, tau.0);
    let coeff = ((1.0 - (1.0 - k * k).sqrt()) * c - k) / (2.0 * t2 * (1.0 - c * k));
    Ok(QubitHamiltonianEstimate {
        h_eff: scale(coeff, axis),
        direction: scale(1.0 / axis_len, axis),
    })
}

/// Least-squares weak-Hamiltonian estimate from several directions, using
/// the first-order relation `m_i − τ·n_i = 2 (h t)·(τ × n_i)`.
///
/// Returns `h t`, or `h` when `time` is given. The component along `τ` is
/// unobservable and comes out zero (minimum-norm solution).
pub fn qubit_weak_hamiltonian_multi(
    tau: &BlochVector,
    data: &[(SpinDirection, f64)],
    time: Option<f64>,
) -> Result<Vec3> {
    if let Some(t) = time {
        if !(t > 0.0) {
            return Err(Error::InvalidInput("time must be positive".into()));
        }
    }
    let rows = data.len();
    let mut a = DMatrix::<f64>::zeros(rows.max(1), 3);
    let mut b = DVector::<f64>::zeros(rows.max(1));
    for (i, (n, m)) in data.iter().enumerate() {
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite mean".into()));
        }
        let r = cross(tau.0, n.0);
        for j in 0..3 {
            a[(i, j)] = r[j];
        }
        b[i] = 0.5 * (m - dot(tau.0, n.0));
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = (1e-12 * smax).max(PARALLEL_EPS);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    if rank < 2 {
        return Err(Error::RankDeficient { rank });
    }
    let h = svd.solve(&b, cutoff).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut h = [h[0], h[1], h[2]];
    // Remove the residual component along τ left by rounding.
    let t2 = dot(tau.0, tau.0);
    if t2 > 0.0 {
        h = add(h, scale(-dot(h, tau.0) / t2, tau.0));
    }
    Ok(match time {
        Some(t) => scale(1.0 / t, h),
        None => h,
    })
}
