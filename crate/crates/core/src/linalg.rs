// SPDX-License-Identifier: Apache-2.0

//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small dense matrices (a few hundred rows at
//! most). The eigensolver is nalgebra's Householder + implicit QR routine;
//! on top of it we impose a deterministic ordering and phase convention so
//! that downstream reconstructions are reproducible bit-for-bit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type Complex = Complex64;
pub type ComplexMatrix = DMatrix<Complex>;

/// Relative threshold below which eigenvalues of a density matrix count as zero.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Tolerance for the Hermiticity check, relative to `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;
const PHASE_EPS: f64 = 1e-12;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    /// Checks symmetry and finiteness, then symmetrizes away the residual
    /// rounding asymmetry.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch(matrix.nrows(), matrix.ncols()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let asym = hermitian_defect(&matrix);
        let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if asym > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianInput(asym));
        }
        Ok(Self::hermitize(matrix))
    }

    /// Builds from a matrix known to be Hermitian up to rounding.
    pub(crate) fn hermitize(matrix: ComplexMatrix) -> Self {
        if hermitian_defect(&matrix) == 0.0 {
            return Self { matrix };
        }
        let adj = matrix.adjoint();
        let matrix = (matrix + adj) * Complex::new(0.5, 0.0);
        Self { matrix }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = Complex::new(v, 0.0);
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    /// Pauli matrix σ_k for k = 0 (identity), 1, 2, 3, with σ₃|0⟩ = +|0⟩.
    pub fn pauli(k: usize) -> Self {
        let (o, z, i) = (Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::i());
        let entries = match k {
            0 => [o, z, z, o],
            1 => [z, o, o, z],
            2 => [z, -i, i, z],
            3 => [o, z, z, -o],
            _ => panic!("pauli index must be 0..=3, got {k}"),
        };
        Self {
            matrix: ComplexMatrix::from_row_slice(2, 2, &entries),
        }
    }

    /// Spin component along `n`, i.e. `n · σ`.
    pub fn spin_along(n: [f64; 3]) -> Self {
        let m = (1..=3).fold(ComplexMatrix::zeros(2, 2), |acc, k| {
            acc + Self::pauli(k).matrix * Complex::new(n[k - 1], 0.0)
        });
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        eigh(self)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            matrix: &self.matrix * Complex::new(s, 0.0),
        }
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.weighted_sum(|x| x)
    }

    /// `Σ_k f(α_k) |φ_k⟩⟨φ_k|` without checking `f`.
    pub fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let weights: Vec<Complex> = self.values.iter().map(|&x| Complex::new(f(x), 0.0)).collect();
        self.weighted_sum_complex(&weights)
    }

    pub(crate) fn weighted_sum_complex(&self, weights: &[Complex]) -> ComplexMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (k, w) in weights.iter().enumerate() {
            for r in 0..d {
                scaled[(r, k)] *= *w;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `V† M V`: expresses `m` in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// `V M V†`: maps a matrix given in the eigenbasis back.
    pub fn from_eigenbasis(&self, m: &ComplexMatrix) -> ComplexMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &x| a.max(x.abs()))
    }
}

fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let d = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Hermitian eigendecomposition, ascending, with the first component of
/// each eigenvector whose magnitude exceeds 1e-12 made real positive.
pub fn eigh(op: &HermitianOperator) -> SpectralDecomposition {
    let d = op.dim();
    if d == 0 {
        return SpectralDecomposition {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    // Diagonal input is common (number operators, thermal states); keep it exact.
    if is_diagonal(&op.matrix) {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&a, &b| op.matrix[(a, a)].re.total_cmp(&op.matrix[(b, b)].re).then(a.cmp(&b)));
        let mut vectors = ComplexMatrix::zeros(d, d);
        for (col, &k) in idx.iter().enumerate() {
            vectors[(k, col)] = Complex::new(1.0, 0.0);
        }
        return SpectralDecomposition {
            values: idx.iter().map(|&k| op.matrix[(k, k)].re).collect(),
            vectors,
        };
    }
    let eig = SymmetricEigen::try_new(op.matrix.clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .expect("symmetric eigen iteration failed to converge");
    let raw: &DVector<f64> = &eig.eigenvalues;
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]).then(a.cmp(&b)));
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (col, &k) in idx.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let norm = v.norm();
        let pivot = v.iter().find(|z| z.norm() > PHASE_EPS).copied().unwrap_or(Complex::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm() / norm;
        for r in 0..d {
            vectors[(r, col)] = v[r] * phase;
        }
        // The pivot component is real by construction; drop its rounding residue.
        if let Some(r) = (0..d).find(|&r| vectors[(r, col)].norm() > PHASE_EPS) {
            vectors[(r, col)].im = 0.0;
        }
    }
    SpectralDecomposition {
        values: idx.iter().map(|&k| raw[k]).collect(),
        vectors,
    }
}

fn is_diagonal(m: &ComplexMatrix) -> bool {
    let d = m.nrows();
    (0..d).all(|r| (0..d).all(|c| r == c || m[(r, c)] == Complex::new(0.0, 0.0)))
}

/// Applies a real scalar map on the spectrum: `Σ_k f(α_k) |φ_k⟩⟨φ_k|`.
pub fn matrix_function(op: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    let spec = eigh(op);
    for &x in &spec.values {
        if !f(x).is_finite() {
            return Err(Error::DomainError(x));
        }
    }
    Ok(HermitianOperator::hermitize(spec.weighted_sum(f)))
}

/// Like [`matrix_function`] but only over eigenvalues above
/// `SUPPORT_EPS · max|α|`; the rest contribute zero.
pub fn matrix_function_on_support(
    op: &HermitianOperator,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    let spec = eigh(op);
    let cut = SUPPORT_EPS * spec.max_abs_eigenvalue();
    for &x in spec.values.iter().filter(|&&x| x > cut) {
        if !f(x).is_finite() {
            return Err(Error::DomainError(x));
        }
    }
    let m = spec.weighted_sum(|x| if x > cut { f(x) } else { 0.0 });
    Ok(HermitianOperator::hermitize(m))
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimMismatch(a.nrows(), b.nrows()));
    }
    Ok((a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

pub fn frobenius_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn trace(a: &ComplexMatrix) -> Complex {
    a.diagonal().iter().sum()
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex {
    let d = a.nrows();
    let mut acc = Complex::new(0.0, 0.0);
    for r in 0..d {
        for c in 0..d {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// True when the columns of `basis` are orthonormal to within `tol` (max entry error of V†V − I).
pub fn is_orthonormal(basis: &ComplexMatrix, tol: f64) -> bool {
    let g = basis.adjoint() * basis;
    let n = g.nrows();
    (0..n).all(|r| {
        (0..n).all(|c| {
            let target = if r == c { 1.0 } else { 0.0 };
            (g[(r, c)] - Complex::new(target, 0.0)).norm() <= tol
        })
    })
}

pub fn is_identity(m: &ComplexMatrix) -> bool {
    m.is_square()
        && (0..m.nrows()).all(|r| {
            (0..m.ncols()).all(|c| {
                let target = if r == c { 1.0 } else { 0.0 };
                m[(r, c)] == Complex::new(target, 0.0)
            })
        })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    pub(crate) fn random_hermitian(rng: &mut impl Rng, d: usize) -> HermitianOperator {
        let mut m = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for col in 0..d {
                m[(r, col)] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        HermitianOperator::hermitize(&m + m.adjoint())
    }

    #[test]
    fn diagonal_spectrum() {
        let op = HermitianOperator::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let s = eigh(&op);
        assert_eq!(s.values, vec![1.0, 2.0, 3.0]);
        assert!(is_identity(&s.vectors));
    }

    #[test]
    fn diagonal_spectrum_is_sorted() {
        let op = HermitianOperator::from_real_diagonal(&[3.0, 1.0]);
        let s = eigh(&op);
        assert_eq!(s.values, vec![1.0, 3.0]);
        assert_eq!(s.vectors[(1, 0)], c(1.0, 0.0));
    }

    #[test]
    fn pauli_x_spectrum() {
        let s = eigh(&HermitianOperator::pauli(1));
        assert!((s.values[0] + 1.0).abs() < 1e-14);
        assert!((s.values[1] - 1.0).abs() < 1e-14);
        for k in 0..2 {
            let first = s.vectors[(0, k)];
            assert!(first.re > 0.0 && first.im == 0.0);
        }
    }

    #[test]
    fn random_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_hermitian(&mut rng, 6);
        let s = eigh(&a);
        let res = frobenius_distance(&s.reconstruct(), a.matrix()).unwrap();
        assert!(res <= 1e-10 * frobenius_norm(a.matrix()), "residual {res}");
        assert!(is_orthonormal(&s.vectors, 1e-10));
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigh_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_hermitian(&mut rng, 5);
        assert_eq!(eigh(&a), eigh(&a.clone()));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianOperator::new(m), Err(Error::NonHermitianInput(_))));
    }

    #[test]
    fn rejects_non_square() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(m), Err(Error::DimMismatch(2, 3))));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = matrix_function(&HermitianOperator::zeros(3), f64::exp).unwrap();
        assert!(is_identity(e.matrix()));
    }

    #[test]
    fn exp_of_log_diagonal() {
        let op = HermitianOperator::from_real_diagonal(&[2f64.ln(), 3f64.ln()]);
        let e = matrix_function(&op, f64::exp).unwrap();
        assert!((e.matrix()[(0, 0)].re - 2.0).abs() < 1e-15);
        assert!((e.matrix()[(1, 1)].re - 3.0).abs() < 1e-15);
    }

    #[test]
    fn half_exponential_of_sigma_z() {
        let e = matrix_function(&HermitianOperator::pauli(3), |x| (-x / 2.0).exp()).unwrap();
        assert!((e.matrix()[(0, 0)].re - (-0.5f64).exp()).abs() < 1e-15);
        assert!((e.matrix()[(1, 1)].re - 0.5f64.exp()).abs() < 1e-15);
        assert_eq!(e.matrix()[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn log_outside_domain_is_rejected() {
        let op = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]);
        assert!(matches!(matrix_function(&op, f64::ln), Err(Error::DomainError(_))));
        // restricted to the support the negative eigenvalue is skipped
        assert!(matrix_function_on_support(&op, f64::ln).is_ok());
    }

    #[test]
    fn frobenius_examples() {
        let id = ComplexMatrix::identity(2, 2);
        let z = ComplexMatrix::zeros(2, 2);
        assert_eq!(frobenius_distance(&id, &id).unwrap(), 0.0);
        assert!((frobenius_distance(&z, &id).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let d = frobenius_distance(HermitianOperator::pauli(1).matrix(), HermitianOperator::pauli(3).matrix());
        // |0-1|² + |1-0|² + |1-0|² + |0+1|² = 4
        assert!((d.unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(frobenius_distance(&z, &ComplexMatrix::zeros(3, 3)), Err(Error::DimMismatch(2, 3))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn reconstruction_and_orthonormality(seed in any::<u64>(), d in 1usize..=16) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_hermitian(&mut rng, d);
                let s = eigh(&a);
                let res = frobenius_distance(&s.reconstruct(), a.matrix()).unwrap();
                prop_assert!(res <= 1e-10 * frobenius_norm(a.matrix()).max(1e-300));
                prop_assert!(is_orthonormal(&s.vectors, 1e-10));
            }

            #[test]
            fn identity_map_and_positive_exp(seed in any::<u64>(), d in 1usize..=8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_hermitian(&mut rng, d);
                let same = matrix_function(&a, |x| x).unwrap();
                prop_assert!(frobenius_distance(same.matrix(), a.matrix()).unwrap() <= 1e-12 * frobenius_norm(a.matrix()).max(1.0));
                let e = matrix_function(&a, f64::exp).unwrap();
                prop_assert!(eigh(&e).values.iter().all(|&x| x > 0.0));
            }
        }
    }
}
