// SPDX-License-Identifier: Apache-2.0

//! Shannon, Kullback–Leibler, von Neumann and quantum Kullback entropies.
//!
//! All logarithms are natural. A divergence whose support condition fails
//! is `f64::INFINITY`; that is a regular return value, not an error.

use crate::linalg::{eigh, SUPPORT_EPS};
use crate::state::DensityMatrix;
use crate::{Error, Result};

pub const DISTRIBUTION_TOL: f64 = 1e-10;

/// Finite probability vector summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution("weights must have positive finite sum".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on `k`.
    pub fn delta(n: usize, k: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[k] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mean(&self, values: &[f64]) -> f64 {
        self.probs.iter().zip(values).map(|(p, a)| p * a).sum()
    }
}

pub fn shannon_entropy(p: &ClassicalDistribution) -> f64 {
    -p.probs().iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// `Σ p_k ln(p_k / q_k)`; infinite when some `p_k > 0` meets `q_k = 0`.
pub fn kl_divergence(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch(p.len(), q.len()));
    }
    let mut acc = 0.0;
    for (&pk, &qk) in p.probs().iter().zip(q.probs()) {
        if pk == 0.0 {
            continue;
        }
        if qk == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pk * (pk / qk).ln();
    }
    Ok(acc)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let vals = rho.eigenvalues();
    let cut = SUPPORT_EPS * vals.last().copied().unwrap_or(0.0);
    -vals.iter().filter(|&&r| r > cut).map(|&r| r * r.ln()).sum::<f64>()
}

/// `Tr[ρ(ln ρ − ln τ)]` through both spectral decompositions.
///
/// Returns `f64::INFINITY` when `ρ` puts more than `SUPPORT_EPS` of its
/// weight outside the numerical support of `τ`.
pub fn quantum_kullback(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(Error::DimMismatch(rho.dim(), tau.dim()));
    }
    let sr = eigh(rho.operator());
    let st = eigh(tau.operator());
    let rcut = SUPPORT_EPS * sr.values.last().copied().unwrap_or(0.0);
    let tcut = SUPPORT_EPS * st.values.last().copied().unwrap_or(0.0);
    let d = rho.dim();

    // overlap[i][j] = |⟨u_i|v_j⟩|² between eigenvectors of ρ and τ
    let cross = sr.vectors.adjoint() * &st.vectors;
    let mut outside = 0.0;
    let mut cross_term = 0.0;
    let mut self_term = 0.0;
    for i in 0..d {
        let r = sr.values[i];
        if r <= rcut {
            continue;
        }
        self_term += r * r.ln();
        for j in 0..d {
            let w = cross[(i, j)].norm_sqr();
            let t = st.values[j];
            if t > tcut {
                cross_term += r * w * t.ln();
            } else {
                outside += r * w;
            }
        }
    }
    if outside > SUPPORT_EPS {
        return Ok(f64::INFINITY);
    }
    Ok(self_term - cross_term)
}
