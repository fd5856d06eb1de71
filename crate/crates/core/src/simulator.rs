// SPDX-License-Identifier: Apache-2.0

//! Ground-truth data: exact means and distributions, seeded finite-shot
//! samples and unitary evolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::entropy::ClassicalDistribution;
use crate::linalg::{commutator, eigh, is_orthonormal, Complex, ComplexMatrix, HermitianOperator};
use crate::quantum::BASIS_TOL;
use crate::state::DensityMatrix;
use crate::{Error, Result};

/// Multinomial counts drawn with an explicit seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotSample {
    pub counts: Vec<u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotSample {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.shots as f64).collect()
    }

    pub fn empirical_distribution(&self) -> ClassicalDistribution {
        // Counts sum to `shots`, so this is a valid distribution.
        ClassicalDistribution::from_weights(&self.frequencies()).expect("nonempty sample")
    }
}

pub fn exact_mean(rho: &DensityMatrix, obs: &HermitianOperator) -> Result<f64> {
    rho.expectation(obs)
}

/// `p_k = ⟨φ_k|ρ|φ_k⟩` for the columns `φ_k` of `basis`.
pub fn exact_distribution(rho: &DensityMatrix, basis: &ComplexMatrix) -> Result<ClassicalDistribution> {
    let d = rho.dim();
    if basis.nrows() != d || basis.ncols() != d || !is_orthonormal(basis, BASIS_TOL) {
        return Err(Error::IncompleteBasis);
    }
    let rot = basis.adjoint() * rho.matrix() * basis;
    let p: Vec<f64> = (0..d).map(|k| rot[(k, k)].re.max(0.0)).collect();
    ClassicalDistribution::from_weights(&p)
}

/// Multinomial draw by sequential conditional binomials on a ChaCha8
/// stream seeded with `seed`.
pub fn sample_outcomes(p: &ClassicalDistribution, shots: u64, seed: u64) -> Result<ShotSample> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = p.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0f64;
    for (k, &pk) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let cond = if mass > 0.0 { (pk / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if cond >= 1.0 {
            remaining
        } else if cond <= 0.0 {
            0
        } else {
            Binomial::new(remaining, cond)
                .map_err(|e| Error::InvalidInput(e.to_string()))?
                .sample(&mut rng)
        };
        counts[k] = c;
        remaining -= c;
        mass -= pk;
    }
    Ok(ShotSample { counts, shots, seed })
}

/// `e^{−iHt} τ e^{iHt}` through the spectral decomposition of `H`.
pub fn evolve_unitary(tau: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<DensityMatrix> {
    if tau.dim() != h.dim() {
        return Err(Error::DimMismatch(tau.dim(), h.dim()));
    }
    let spec = eigh(h);
    let phases: Vec<Complex> = spec.values.iter().map(|&e| Complex::from_polar(1.0, -e * t)).collect();
    let u = spec.weighted_sum_complex(&phases);
    Ok(DensityMatrix::from_matrix_trusted(&u * tau.matrix() * u.adjoint()))
}

/// Linearization `τ + it[τ, H]`.
pub fn first_order_state(tau: &DensityMatrix, h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    if tau.dim() != h.dim() {
        return Err(Error::DimMismatch(tau.dim(), h.dim()));
    }
    Ok(tau.matrix() + commutator(tau.matrix(), h.matrix()) * Complex::new(0.0, t))
}
