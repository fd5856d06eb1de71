// SPDX-License-Identifier: Apache-2.0

//! Truncated Fock-space specializations: coherent priors, photon-number
//! constraints, reconstruction from photon statistics, displacement
//! estimation and the weak-Hamiltonian matrix-element hierarchy.

use crate::entropy::{ClassicalDistribution, DISTRIBUTION_TOL};
use crate::linalg::{eigh, Complex, ComplexMatrix, HermitianOperator, SUPPORT_EPS};
use crate::quantum::{mke_single_mean, EstimationResult, MeanConstraint};
use crate::state::{DensityMatrix, Observable};
use crate::{Error, Result};

/// Largest admissible truncated Poisson tail for coherent constructions.
pub const TAIL_TOL: f64 = 1e-12;
/// Relative eigenvalue gap below which prior levels count as degenerate.
pub const GAP_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude(pub Complex);

impl CoherentAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex::new(re, im))
    }

    pub fn phase(&self) -> f64 {
        self.0.arg()
    }

    pub fn mean_photons(&self) -> f64 {
        self.0.norm_sqr()
    }
}

/// Fock-space dimension `D`, covering `|0⟩ … |D−1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("Fock cutoff must be at least 2, got {dim}")));
        }
        Ok(Self(dim))
    }

    /// Smallest cutoff whose Poisson tail for mean `nbar` is at most `tol`.
    pub fn for_mean(nbar: f64, tol: f64) -> Self {
        let mut d = 2;
        while poisson_tail(nbar, d) > tol {
            d += 1;
        }
        Self(d)
    }

    pub fn dim(&self) -> usize {
        self.0
    }
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `Σ_{n≥d} e^{−N} N^n / n!`, summed term by term.
pub fn poisson_tail(nbar: f64, d: usize) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    let mut term = (-nbar + d as f64 * nbar.ln() - ln_factorial(d)).exp();
    let mut total = 0.0;
    let mut n = d;
    loop {
        total += term;
        n += 1;
        term *= nbar / n as f64;
        if (n as f64 > nbar && term <= total * 1e-17) || term == 0.0 {
            break;
        }
    }
    total
}

/// Fock amplitudes `e^{−|α|²/2} αⁿ/√n!` for `n < dim`.
pub fn coherent_amplitudes(alpha: CoherentAmplitude, dim: usize) -> Vec<Complex> {
    let a = alpha.0;
    let mut out = Vec::with_capacity(dim);
    let mut c = Complex::new((-0.5 * a.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        out.push(c);
        c = c * a / ((n + 1) as f64).sqrt();
    }
    out
}

/// `⟨n|τ|m⟩ = αⁿ ᾱᵐ e^{−|α|²}/√(n!m!)`, renormalized after truncation.
pub fn coherent_density(alpha: CoherentAmplitude, cutoff: FockCutoff) -> Result<DensityMatrix> {
    let d = cutoff.dim();
    let tail = poisson_tail(alpha.mean_photons(), d);
    if tail > TAIL_TOL {
        return Err(Error::CutoffTooSmall { tail, dim: d });
    }
    let mut psi = coherent_amplitudes(alpha, d);
    let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in psi.iter_mut() {
        *c /= norm;
    }
    let v = nalgebra::DVector::from_vec(psi);
    Ok(DensityMatrix::from_matrix_trusted(&v * v.adjoint()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentMeanEstimate {
    pub beta: Complex,
    pub lambda: f64,
    /// Normalization of the tilted Glauber series `Σ|α|²ⁿe^{−λn}/n!`.
    pub partition: f64,
}

/// Closed-form estimate for a coherent prior and a mean photon number.
pub fn coherent_mke_mean(alpha: CoherentAmplitude, nbar: f64) -> Result<CoherentMeanEstimate> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidMean(nbar));
    }
    let a2 = alpha.mean_photons();
    if !(a2 > 0.0 && a2.is_finite()) {
        return Err(Error::InvalidInput("coherent amplitude must be nonzero".into()));
    }
    let lambda = (a2 / nbar).ln();
    Ok(CoherentMeanEstimate {
        beta: Complex::from_polar(nbar.sqrt(), alpha.phase()),
        lambda,
        partition: nbar.exp(),
    })
}

/// Numerical counterpart of [`coherent_mke_mean`] on the truncated space.
pub fn fock_mke_mean(alpha: CoherentAmplitude, nbar: f64, cutoff: FockCutoff, tol: f64) -> Result<EstimationResult> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidMean(nbar));
    }
    let tau = coherent_density(alpha, cutoff)?;
    let c = MeanConstraint::new(Observable::number(cutoff.dim()), nbar)?;
    mke_single_mean(&tau, &c, tol)
}

/// `ρ_nm = √(p_n p_m) e^{iφ(n−m)}`: the photon-number reconstruction
/// for any coherent prior of phase `φ`.
pub fn reconstruct_from_photon_distribution(phi: f64, p: &ClassicalDistribution) -> DensityMatrix {
    let probs = p.probs();
    let d = probs.len();
    let amp: Vec<f64> = probs.iter().map(|x| x.sqrt()).collect();
    let m = ComplexMatrix::from_fn(d, d, |n, k| {
        if n == k {
            Complex::new(probs[n], 0.0)
        } else {
            Complex::from_polar(amp[n] * amp[k], phi * (n as f64 - k as f64))
        }
    });
    DensityMatrix::from_matrix_trusted(m)
}

/// Photon-number probabilities of `|0⟩ … |len−1⟩`.
///
/// Mass beyond the last level may be absent, so the entries sum to at
/// most one; exact data for a state truncated at the cutoff stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    probs: Vec<f64>,
}

impl PhotonDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0) || total > 1.0 + DISTRIBUTION_TOL {
            return Err(Error::InvalidDistribution(format!("sums to {total}")));
        }
        Ok(Self { probs })
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
}

impl From<ClassicalDistribution> for PhotonDistribution {
    fn from(p: ClassicalDistribution) -> Self {
        Self { probs: p.probs().to_vec() }
    }
}

/// One per-equation determination of the displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determination {
    pub n: usize,
    pub m: usize,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEstimate {
    pub beta: f64,
    pub determinations: Vec<Determination>,
    /// `max − min` over the determinations.
    pub spread: f64,
    /// Pairs whose equation had no admissible root.
    pub unsolved: Vec<(usize, usize)>,
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    // f(lo) and f(hi) have opposite signs; iterate to float resolution
    let flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Positive roots of `−x² + s·ln x = rhs` on `(0, x_max]`.
fn pair_roots(s: usize, rhs: f64, x_max: f64) -> Vec<f64> {
    if s == 0 {
        return if rhs < 0.0 { vec![(-rhs).sqrt()] } else { vec![] };
    }
    let s = s as f64;
    let f = |x: f64| -x * x + s * x.ln() - rhs;
    let peak = (0.5 * s).sqrt();
    let fp = f(peak);
    let tol = 1e-10 * rhs.abs().max(1.0);
    if fp < -tol {
        return vec![];
    }
    if fp <= tol {
        return vec![peak];
    }
    let mut roots = Vec::with_capacity(2);
    let mut lo = 0.5 * peak;
    while f(lo) > 0.0 {
        lo *= 0.5;
    }
    roots.push(bisect(&f, lo, peak));
    if f(x_max) < 0.0 {
        roots.push(bisect(&f, peak, x_max));
    }
    roots
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn retained_outcomes(alpha: f64, p: &PhotonDistribution, cutoff: FockCutoff) -> Result<Vec<(usize, f64)>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!("amplitude must be real positive, got {alpha}")));
    }
    if p.len() > cutoff.dim() {
        return Err(Error::DimMismatch(p.len(), cutoff.dim()));
    }
    let kept: Vec<(usize, f64)> = p
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &pn)| pn > SUPPORT_EPS)
        .map(|(n, &pn)| (n, pn))
        .collect();
    if kept.is_empty() {
        return Err(Error::InsufficientData);
    }
    Ok(kept)
}

/// Solves every listed pair and aggregates by consensus.
///
/// Each equation has up to two roots. The reference point is the
/// candidate root closest, in total, to some root of every other pair
/// (ties go to the one nearest `α`); each pair then contributes its root
/// nearest that reference.
fn aggregate(alpha: f64, pairs: &[(usize, usize, f64)], x_max: f64) -> Result<DisplacementEstimate> {
    let mut solved: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    let mut unsolved = Vec::new();
    for &(n, m, rhs) in pairs {
        let r = pair_roots(n + m, rhs, x_max);
        if r.is_empty() {
            unsolved.push((n, m));
        } else {
            solved.push((n, m, r));
        }
    }
    if solved.is_empty() {
        let (n, m) = unsolved[0];
        return Err(Error::NoRoot(n, m));
    }
    let nearest = |roots: &[f64], c: f64| {
        roots.iter().copied().min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs())).unwrap()
    };
    let mut best: Option<(f64, f64)> = None;
    for (_, _, roots) in &solved {
        for &c in roots {
            let score: f64 = solved.iter().map(|(_, _, r)| (nearest(r, c) - c).abs()).sum();
            let better = match best {
                None => true,
                Some((bs, bc)) => {
                    let slack = 1e-12 * (1.0 + bs);
                    score < bs - slack || (score <= bs + slack && (c - alpha).abs() < (bc - alpha).abs())
                }
            };
            if better {
                best = Some((score, c));
            }
        }
    }
    let reference = best.unwrap().1;
    let mut xs = Vec::with_capacity(solved.len());
    let determinations: Vec<Determination> = solved
        .iter()
        .map(|(n, m, r)| {
            let x = nearest(r, reference);
            xs.push(x);
            Determination { n: *n, m: *m, beta: x - alpha }
        })
        .collect();
    let beta = median(&mut xs) - alpha;
    let lo = determinations.iter().map(|d| d.beta).fold(f64::INFINITY, f64::min);
    let hi = determinations.iter().map(|d| d.beta).fold(f64::NEG_INFINITY, f64::max);
    Ok(DisplacementEstimate {
        beta,
        determinations,
        spread: hi - lo,
        unsolved,
    })
}

/// Displacement `β` from all `D′²` pair equations
/// `−x² + (n+m) ln x = ln√(n!m!p_n p_m)`, `x = α + β`.
pub fn estimate_displacement_mke(alpha: f64, p: &PhotonDistribution, cutoff: FockCutoff) -> Result<DisplacementEstimate> {
    let kept = retained_outcomes(alpha, p, cutoff)?;
    let lf: Vec<f64> = kept.iter().map(|&(n, pn)| ln_factorial(n) + pn.ln()).collect();
    let mut pairs = Vec::with_capacity(kept.len() * kept.len());
    for (i, &(n, _)) in kept.iter().enumerate() {
        for (j, &(m, _)) in kept.iter().enumerate() {
            pairs.push((n, m, 0.5 * (lf[i] + lf[j])));
        }
    }
    aggregate(alpha, &pairs, (2.0 * cutoff.dim() as f64).sqrt())
}

/// Baseline using only the `D′` diagonal equations `−x² + 2n ln x = ln(n!p_n)`.
pub fn estimate_displacement_direct(alpha: f64, p: &PhotonDistribution, cutoff: FockCutoff) -> Result<DisplacementEstimate> {
    let kept = retained_outcomes(alpha, p, cutoff)?;
    let pairs: Vec<(usize, usize, f64)> = kept.iter().map(|&(n, pn)| (n, n, ln_factorial(n) + pn.ln())).collect();
    aggregate(alpha, &pairs, (2.0 * cutoff.dim() as f64).sqrt())
}

#[derive(Debug, Clone)]
pub struct HierarchySolution {
    pub hamiltonian: HermitianOperator,
    /// Index groups (into the ascending prior spectrum) of size ≥ 2 whose
    /// mutual components were set to zero.
    pub unresolved_clusters: Vec<Vec<usize>>,
}

/// Min-norm solution of `τH − Hτ = C` in the eigenbasis of `τ`.
pub(crate) fn invert_commutator(tau: &DensityMatrix, c: &ComplexMatrix) -> HierarchySolution {
    let spec = eigh(tau.operator());
    let d = spec.dim();
    let t = &spec.values;
    let gap = GAP_EPS * t.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let ct = spec.to_eigenbasis(c);
    let ht = ComplexMatrix::from_fn(d, d, |a, b| {
        let diff = t[a] - t[b];
        if diff.abs() > gap {
            ct[(a, b)] / diff
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let mut clusters = Vec::new();
    let mut current = vec![0];
    for k in 1..d {
        if (t[k] - t[k - 1]).abs() <= gap {
            current.push(k);
        } else {
            if current.len() > 1 {
                clusters.push(std::mem::take(&mut current));
            }
            current = vec![k];
        }
    }
    if current.len() > 1 {
        clusters.push(current);
    }
    HierarchySolution {
        hamiltonian: HermitianOperator::hermitize(spec.from_eigenbasis(&ht)),
        unresolved_clusters: clusters,
    }
}

/// First-order hierarchy solve that also reports degenerate clusters
/// instead of failing on them.
pub fn solve_weak_hamiltonian_fock(
    tau: &DensityMatrix,
    p: &ClassicalDistribution,
    t: f64,
    cutoff: FockCutoff,
) -> Result<HierarchySolution> {
    let d = cutoff.dim();
    if tau.dim() != d {
        return Err(Error::DimMismatch(tau.dim(), d));
    }
    if p.len() != d {
        return Err(Error::DimMismatch(p.len(), d));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be positive, got {t}")));
    }
    let diag = tau.diagonal();
    let mut ratio = vec![0.0; d];
    for n in 0..d {
        let pn = p.probs()[n];
        if pn <= SUPPORT_EPS {
            continue;
        }
        if diag[n] <= SUPPORT_EPS {
            return Err(Error::NoSupport(n));
        }
        ratio[n] = (pn / diag[n]).sqrt();
    }
    let tm = tau.matrix();
    let factor = Complex::new(0.0, 1.0 / t);
    let c = ComplexMatrix::from_fn(d, d, |m, n| factor * tm[(m, n)] * (1.0 - ratio[m] * ratio[n]));
    Ok(invert_commutator(tau, &c))
}

/// As [`solve_weak_hamiltonian_fock`], failing with `DegeneratePrior` when
/// any eigenvalue cluster left components undetermined.
pub fn estimate_weak_hamiltonian_fock(
    tau: &DensityMatrix,
    p: &ClassicalDistribution,
    t: f64,
    cutoff: FockCutoff,
) -> Result<HermitianOperator> {
    let sol = solve_weak_hamiltonian_fock(tau, p, t, cutoff)?;
    if !sol.unresolved_clusters.is_empty() {
        return Err(Error::DegeneratePrior {
            clusters: sol.unresolved_clusters,
        });
    }
    Ok(sol.hamiltonian)
}
