// SPDX-License-Identifier: Apache-2.0

//! Quantum minimum-Kullback-entropy estimators.
//!
//! Posteriors have the form `ρ = e^{−Gλ/2} τ e^{−Gλ/2} / Z` with
//! `Z = Tr[τ e^{−Gλ}]`, where `G` is the measured observable (or the
//! multiplier-weighted sum of several). Multipliers follow the sign of that
//! exponent throughout the crate.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{TiltError, TiltFamily};
use crate::entropy::{quantum_kullback, ClassicalDistribution};
use crate::linalg::{
    anticommutator, eigh, is_identity, is_orthonormal, trace, trace_product, Complex, ComplexMatrix, HermitianOperator,
    SUPPORT_EPS,
};
use crate::state::{DensityMatrix, Observable};
use crate::{Error, Result};

pub const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MeanConstraint {
    pub observable: Observable,
    pub mean: f64,
}

impl MeanConstraint {
    pub fn new(observable: impl Into<Observable>, mean: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::InvalidInput("constraint mean must be finite".into()));
        }
        Ok(Self {
            observable: observable.into(),
            mean,
        })
    }
}

/// Measured probabilities of a complete orthonormal basis (columns of `basis`).
#[derive(Debug, Clone)]
pub struct DistributionConstraint {
    basis: ComplexMatrix,
    probabilities: ClassicalDistribution,
}

impl DistributionConstraint {
    pub fn new(basis: ComplexMatrix, probabilities: ClassicalDistribution) -> Result<Self> {
        if !basis.is_square() || basis.ncols() != probabilities.len() {
            return Err(Error::IncompleteBasis);
        }
        if !is_orthonormal(&basis, BASIS_TOL) {
            return Err(Error::IncompleteBasis);
        }
        Ok(Self { basis, probabilities })
    }

    /// Measurement in the standard (Fock) basis.
    pub fn standard(probabilities: ClassicalDistribution) -> Self {
        let d = probabilities.len();
        Self {
            basis: ComplexMatrix::identity(d, d),
            probabilities,
        }
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn probabilities(&self) -> &ClassicalDistribution {
        &self.probabilities
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub posterior: DensityMatrix,
    pub lambdas: Vec<f64>,
    pub partition: f64,
    /// `K(ρ̂|τ)`, possibly `f64::INFINITY`.
    pub relative_entropy: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn check_dim(tau: &DensityMatrix, d: usize) -> Result<()> {
    if tau.dim() != d {
        return Err(Error::DimMismatch(tau.dim(), d));
    }
    Ok(())
}

/// Estimate from the mean of a single observable.
///
/// In the eigenbasis `{α_k, |φ_k⟩}` of `A` the posterior is
/// `⟨φ_m|ρ|φ_n⟩ = e^{−(α_m+α_n)λ/2} ⟨φ_m|τ|φ_n⟩ / Z`, so `λ` solves a
/// scalar tilt problem over the prior diagonal `w_k = ⟨φ_k|τ|φ_k⟩`.
pub fn mke_single_mean(tau: &DensityMatrix, c: &MeanConstraint, tol: f64) -> Result<EstimationResult> {
    let spec = c.observable.spectrum();
    check_dim(tau, spec.dim())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let diagonal_basis = is_identity(&spec.vectors);
    let tau_e = if diagonal_basis {
        tau.matrix().clone()
    } else {
        spec.to_eigenbasis(tau.matrix())
    };
    let d = spec.dim();
    let w: Vec<f64> = (0..d).map(|k| tau_e[(k, k)].re.max(0.0)).collect();
    let family = TiltFamily::new(&w, &spec.values);
    let mean = c.mean;
    let tilt = family.solve(mean, tol, SUPPORT_EPS).map_err(|e| match e {
        TiltError::Infeasible { lo, hi } => Error::InfeasibleMean { mean, lo, hi },
        TiltError::Degenerate { value } => Error::DegenerateSupport { value, mean },
        TiltError::NotConverged { residual, iterations } => Error::NonConvergence { residual, iterations },
    })?;

    if tilt.lambda == 0.0 {
        return Ok(EstimationResult {
            posterior: tau.clone(),
            lambdas: vec![0.0],
            partition: 1.0,
            relative_entropy: 0.0,
            residual: tilt.residual,
            iterations: 0,
        });
    }

    // Half factors e_k = exp((−α_k λ − c)/2) with c the largest log-weight,
    // so w_k e_k² ≤ 1 and |τ_mk e_m e_k| ≤ 1.
    let lambda = tilt.lambda;
    let (shift, _) = family.shifted_weights(lambda);
    let half: Vec<f64> = (0..d)
        .map(|k| {
            if w[k] > 0.0 {
                ((-spec.values[k] * lambda - shift) / 2.0).exp()
            } else {
                0.0
            }
        })
        .collect();
    let z_shifted: f64 = (0..d).map(|k| w[k] * half[k] * half[k]).sum();
    let mut rho_e = ComplexMatrix::zeros(d, d);
    for m in 0..d {
        for n in 0..d {
            rho_e[(m, n)] = tau_e[(m, n)] * (half[m] * half[n] / z_shifted);
        }
    }
    let achieved: f64 = (0..d).map(|k| rho_e[(k, k)].re * spec.values[k]).sum();
    let rho = if diagonal_basis { rho_e } else { spec.from_eigenbasis(&rho_e) };
    let posterior = DensityMatrix::from_matrix_trusted(rho);
    let relative_entropy = quantum_kullback(&posterior, tau)?;
    Ok(EstimationResult {
        posterior,
        lambdas: vec![lambda],
        partition: tilt.log_partition.exp(),
        relative_entropy,
        residual: (achieved - mean).abs(),
        iterations: tilt.iterations,
    })
}

// ---------------------------------------------------------------------------
// Several mean values: damped Newton on the multiplier vector.

const FD_STEP: f64 = 1e-6;
const MIN_DAMPING: f64 = 1.0 / (1u64 << 20) as f64;
const RESTARTS: usize = 5;
const INFEASIBLE_FACTOR: f64 = 1e3;
const RESTART_SEED: u64 = 0x6d6b_655f_6e65_7774;

struct MultiProblem<'a> {
    tau: &'a DensityMatrix,
    constraints: &'a [MeanConstraint],
}

struct MultiPoint {
    rho: ComplexMatrix,
    log_partition: f64,
    residuals: Vec<f64>,
}

impl MultiProblem<'_> {
    fn evaluate(&self, lambdas: &[f64]) -> MultiPoint {
        let d = self.tau.dim();
        let mut g = ComplexMatrix::zeros(d, d);
        for (c, &l) in self.constraints.iter().zip(lambdas) {
            g += c.observable.operator().matrix() * Complex::new(l, 0.0);
        }
        let spec = eigh(&HermitianOperator::hermitize(g));
        let g_min = spec.values[0];
        let e = spec.weighted_sum(|x| (-(x - g_min) / 2.0).exp());
        let num = &e * self.tau.matrix() * &e;
        let z = trace(&num).re;
        let rho = num * Complex::new(1.0 / z, 0.0);
        let residuals = self
            .constraints
            .iter()
            .map(|c| trace_product(&rho, c.observable.operator().matrix()).re - c.mean)
            .collect();
        MultiPoint {
            rho,
            log_partition: z.ln() - g_min,
            residuals,
        }
    }

    fn jacobian(&self, lambdas: &[f64]) -> DMatrix<f64> {
        let k = lambdas.len();
        let mut jac = DMatrix::zeros(k, k);
        for j in 0..k {
            let h = FD_STEP * lambdas[j].abs().max(1.0);
            let mut plus = lambdas.to_vec();
            let mut minus = lambdas.to_vec();
            plus[j] += h;
            minus[j] -= h;
            let rp = self.evaluate(&plus).residuals;
            let rm = self.evaluate(&minus).residuals;
            for i in 0..k {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        jac
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

enum NewtonOutcome {
    Converged { lambdas: Vec<f64>, point: MultiPoint, iterations: usize },
    Stalled { residual: f64, iterations: usize },
}

fn newton(problem: &MultiProblem<'_>, start: Vec<f64>, tol: f64, max_iter: usize) -> NewtonOutcome {
    let mut lambdas = start;
    let mut point = problem.evaluate(&lambdas);
    let mut best = max_abs(&point.residuals);
    for it in 0..max_iter {
        let r = &point.residuals;
        let res = max_abs(r);
        if !res.is_finite() {
            return NewtonOutcome::Stalled { residual: best, iterations: it };
        }
        best = best.min(res);
        if res <= tol {
            return NewtonOutcome::Converged { lambdas, point, iterations: it };
        }
        let jac = problem.jacobian(&lambdas);
        let rhs = DVector::from_iterator(r.len(), r.iter().map(|x| -x));
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max();
        let step = match svd.solve(&rhs, cutoff) {
            Ok(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => return NewtonOutcome::Stalled { residual: best, iterations: it },
        };
        let current = norm(r);
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = lambdas.iter().zip(step.iter()).map(|(l, s)| l + damping * s).collect();
            let tp = problem.evaluate(&trial);
            let tn = norm(&tp.residuals);
            if tn.is_finite() && tn < current {
                lambdas = trial;
                point = tp;
                break;
            }
            damping /= 2.0;
            if damping < MIN_DAMPING {
                return NewtonOutcome::Stalled { residual: best, iterations: it + 1 };
            }
        }
    }
    let res = max_abs(&point.residuals);
    if res <= tol {
        return NewtonOutcome::Converged { lambdas, point, iterations: max_iter };
    }
    NewtonOutcome::Stalled {
        residual: best.min(res),
        iterations: max_iter,
    }
}

/// Estimate from several mean values at once.
///
/// Newton iteration on the residual vector `Tr[ρ(λ)A_k] − ⟨A_k⟩` with a
/// central-difference Jacobian, starting from `λ = 0` and halving the step
/// until the residual norm decreases. When the first run stalls, up to five
/// restarts from random small multipliers are tried; if all of them stay
/// above `1e3·tol` the constraints are declared infeasible.
pub fn mke_multi_mean(
    tau: &DensityMatrix,
    constraints: &[MeanConstraint],
    tol: f64,
    max_iter: usize,
) -> Result<EstimationResult> {
    if constraints.is_empty() {
        return Err(Error::InvalidInput("at least one constraint is required".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    for c in constraints {
        check_dim(tau, c.observable.dim())?;
        let vals = &c.observable.spectrum().values;
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        // Outside the spectrum no state can reproduce the mean.
        if c.mean < lo - tol || c.mean > hi + tol {
            return Err(Error::InfeasibleConstraints {
                residual: (c.mean - c.mean.clamp(lo, hi)).abs(),
            });
        }
    }
    let problem = MultiProblem { tau, constraints };
    let k = constraints.len();
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    let mut best_residual = f64::INFINITY;
    let mut total_iterations = 0;
    for attempt in 0..=RESTARTS {
        let start = if attempt == 0 {
            vec![0.0; k]
        } else {
            (0..k).map(|_| rng.random_range(-0.1..0.1)).collect()
        };
        match newton(&problem, start, tol, max_iter) {
            NewtonOutcome::Converged { lambdas, point, iterations } => {
                total_iterations += iterations;
                let posterior = DensityMatrix::from_matrix_trusted(point.rho);
                let relative_entropy = quantum_kullback(&posterior, tau)?;
                return Ok(EstimationResult {
                    posterior,
                    lambdas,
                    partition: point.log_partition.exp(),
                    relative_entropy,
                    residual: max_abs(&point.residuals),
                    iterations: total_iterations,
                });
            }
            NewtonOutcome::Stalled { residual, iterations } => {
                total_iterations += iterations;
                best_residual = best_residual.min(residual);
            }
        }
    }
    if best_residual > INFEASIBLE_FACTOR * tol {
        Err(Error::InfeasibleConstraints { residual: best_residual })
    } else {
        Err(Error::NonConvergence {
            residual: best_residual,
            iterations: total_iterations,
        })
    }
}

// ---------------------------------------------------------------------------

/// Reconstruction from a full measured distribution.
///
/// With `τ_mn = ⟨φ_m|τ|φ_n⟩` the posterior in the measurement basis is
/// `ρ_mn = τ_mn √(p_m p_n / (τ_mm τ_nn))`; its diagonal is set to `p`
/// exactly. Multipliers are reported in the gauge `Z = 1`, i.e.
/// `λ_k = ln(τ_kk / p_k)`, and are `+∞` for outcomes with `p_k = 0`.
pub fn mke_from_distribution(tau: &DensityMatrix, c: &DistributionConstraint) -> Result<EstimationResult> {
    let d = c.basis.ncols();
    check_dim(tau, d)?;
    let standard = is_identity(&c.basis);
    let tau_b = if standard {
        tau.matrix().clone()
    } else {
        c.basis.adjoint() * tau.matrix() * &c.basis
    };
    let p = c.probabilities.probs();
    let w: Vec<f64> = (0..d).map(|k| tau_b[(k, k)].re).collect();
    if let Some(k) = (0..d).find(|&k| p[k] > SUPPORT_EPS && w[k] <= SUPPORT_EPS) {
        return Err(Error::UnsupportedOutcome(k));
    }
    let scale: Vec<f64> = (0..d)
        .map(|k| if p[k] > 0.0 && w[k] > 0.0 { (p[k] / w[k]).sqrt() } else { 0.0 })
        .collect();
    let mut rho_b = ComplexMatrix::zeros(d, d);
    for m in 0..d {
        for n in 0..d {
            rho_b[(m, n)] = if m == n {
                Complex::new(p[m], 0.0)
            } else {
                tau_b[(m, n)] * (scale[m] * scale[n])
            };
        }
    }
    let rho = if standard {
        rho_b
    } else {
        &c.basis * rho_b * c.basis.adjoint()
    };
    let posterior = DensityMatrix::from_matrix_trusted(rho);
    let lambdas = (0..d)
        .map(|k| if p[k] > 0.0 { (w[k] / p[k]).ln() } else { f64::INFINITY })
        .collect();
    let residual = if standard {
        0.0
    } else {
        let back = c.basis.adjoint() * posterior.matrix() * &c.basis;
        (0..d).map(|k| (back[(k, k)].re - p[k]).abs()).fold(0.0, f64::max)
    };
    let relative_entropy = quantum_kullback(&posterior, tau)?;
    Ok(EstimationResult {
        posterior,
        lambdas,
        partition: 1.0,
        relative_entropy,
        residual,
        iterations: 0,
    })
}

// ---------------------------------------------------------------------------

/// Closed-form point on the trajectory: `e^{−Aλ/2} τ e^{−Aλ/2} / Tr[τ e^{−Aλ}]`.
pub fn tilted_state(tau: &DensityMatrix, obs: &Observable, lambda: f64) -> Result<DensityMatrix> {
    let spec = obs.spectrum();
    check_dim(tau, spec.dim())?;
    let g_min = spec.values.iter().map(|a| a * lambda).fold(f64::INFINITY, f64::min);
    let e = spec.weighted_sum(|a| (-(a * lambda - g_min) / 2.0).exp());
    let num = &e * tau.matrix() * &e;
    let z = trace(&num).re;
    Ok(DensityMatrix::from_matrix_trusted(num * Complex::new(1.0 / z, 0.0)))
}

#[derive(Debug, Clone)]
pub struct QuantumTrajectory {
    pub endpoint: DensityMatrix,
    /// `(λ, ρ(λ))` after every integration step, starting at `λ = 0`.
    pub path: Vec<(f64, ComplexMatrix)>,
}

fn trajectory_rhs(rho: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.nrows();
    let mean = trace_product(rho, a).re;
    let shifted = a - ComplexMatrix::identity(d, d) * Complex::new(mean, 0.0);
    anticommutator(rho, &shifted) * Complex::new(-0.5, 0.0)
}

/// Integrates `dρ/dλ = −½{ρ, A − ⟨A⟩_ρ}` from `ρ(0) = τ` to `lambda_target`
/// with fixed-step RK4 (step size at most `step`).
pub fn quantum_trajectory(tau: &DensityMatrix, obs: &Observable, lambda_target: f64, step: f64) -> Result<QuantumTrajectory> {
    check_dim(tau, obs.dim())?;
    if !(step > 0.0) || !lambda_target.is_finite() {
        return Err(Error::InvalidInput("step must be positive and target finite".into()));
    }
    let n = (lambda_target.abs() / step).ceil() as usize;
    let a = obs.operator().matrix();
    let mut rho = tau.matrix().clone();
    let mut path = vec![(0.0, rho.clone())];
    if n == 0 {
        return Ok(QuantumTrajectory {
            endpoint: tau.clone(),
            path,
        });
    }
    let h = lambda_target / n as f64;
    let hc = |s: f64| Complex::new(s, 0.0);
    for i in 1..=n {
        let k1 = trajectory_rhs(&rho, a);
        let k2 = trajectory_rhs(&(&rho + &k1 * hc(h / 2.0)), a);
        let k3 = trajectory_rhs(&(&rho + &k2 * hc(h / 2.0)), a);
        let k4 = trajectory_rhs(&(&rho + &k3 * hc(h)), a);
        rho += (k1 + k2 * hc(2.0) + k3 * hc(2.0) + k4) * hc(h / 6.0);
        path.push((h * i as f64, rho.clone()));
    }
    Ok(QuantumTrajectory {
        endpoint: DensityMatrix::from_matrix_trusted(rho),
        path,
    })
}
