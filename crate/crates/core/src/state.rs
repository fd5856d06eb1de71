// SPDX-License-Identifier: Apache-2.0

//! Density matrices and observables.

use crate::linalg::{eigh, trace, trace_product, Complex, ComplexMatrix, HermitianOperator, SpectralDecomposition, SUPPORT_EPS};
use crate::{Error, Result};

pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// Unit-trace positive-semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    /// Validates trace and positivity. Eigenvalues in `[-1e-10, 0)` are
    /// clipped and the matrix renormalized; otherwise the entries are kept
    /// exactly as given.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let op = HermitianOperator::new(matrix)?;
        Self::from_operator(op)
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        if op.dim() == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        let tr = trace(op.matrix()).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let spec = eigh(&op);
        let min = spec.values[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        if min < 0.0 {
            let clipped = spec.weighted_sum(|x| x.max(0.0));
            let t = trace(&clipped).re;
            let op = HermitianOperator::hermitize(clipped * Complex::new(1.0 / t, 0.0));
            return Ok(Self { op });
        }
        Ok(Self { op })
    }

    /// Only for matrices that are valid states by construction.
    pub(crate) fn from_matrix_trusted(m: ComplexMatrix) -> Self {
        Self {
            op: HermitianOperator::hermitize(m),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::from_real_diagonal(&vec![1.0 / dim as f64; dim]),
        }
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::from_operator(HermitianOperator::from_real_diagonal(p))
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &[Complex]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(Self::from_matrix_trusted(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> SpectralDecomposition {
        eigh(&self.op)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().values
    }

    /// `Tr[ρ A]`; the imaginary part vanishes for Hermitian `A`.
    pub fn expectation(&self, a: &HermitianOperator) -> Result<f64> {
        if a.dim() != self.dim() {
            return Err(Error::DimMismatch(self.dim(), a.dim()));
        }
        Ok(trace_product(self.matrix(), a.matrix()).re)
    }

    /// Diagonal entries in the standard basis.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix()[(k, k)].re).collect()
    }

    /// Number of eigenvalues above the support threshold.
    pub fn rank(&self) -> usize {
        let vals = self.eigenvalues();
        let cut = SUPPORT_EPS * vals.last().copied().unwrap_or(0.0);
        vals.iter().filter(|&&x| x > cut).count()
    }

    /// Fidelity `⟨ψ|ρ|ψ⟩` with a pure state.
    pub fn fidelity_with_pure(&self, psi: &[Complex]) -> Result<f64> {
        if psi.len() != self.dim() {
            return Err(Error::DimMismatch(self.dim(), psi.len()));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok((v.adjoint() * self.matrix() * &v)[(0, 0)].re)
    }
}

/// Hermitian observable together with its cached spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    op: HermitianOperator,
    spectrum: SpectralDecomposition,
}

impl Observable {
    pub fn new(op: HermitianOperator) -> Self {
        let spectrum = eigh(&op);
        Self { op, spectrum }
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Ok(Self::new(HermitianOperator::new(m)?))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Photon-number operator `diag(0, 1, …, dim−1)`.
    pub fn number(dim: usize) -> Self {
        let diag: Vec<f64> = (0..dim).map(|n| n as f64).collect();
        Self::new(HermitianOperator::from_real_diagonal(&diag))
    }
}

impl From<HermitianOperator> for Observable {
    fn from(op: HermitianOperator) -> Self {
        Self::new(op)
    }
}
