// SPDX-License-Identifier: Apache-2.0

//! Classical minimum-relative-entropy inference from a first moment.
//!
//! The posterior is the exponential tilt `p_k = q_k e^{−A_k λ} / Z`. Its
//! mean is strictly decreasing in `λ` (the derivative is minus the tilted
//! variance), so the multiplier is found by doubling a bracket outward from
//! zero and bisecting to full precision.

use crate::entropy::ClassicalDistribution;
use crate::{Error, Result};

/// Prior entries below this are outside the support.
pub const PRIOR_ZERO: f64 = 1e-15;

const BRACKET_LIMIT: f64 = 1e300;
const MAX_BISECTIONS: usize = 4000;

/// Values `A_k` of a classical random variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalObservable {
    values: Vec<f64>,
}

impl ClassicalObservable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("observable values must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEstimate {
    pub posterior: ClassicalDistribution,
    pub lambda: f64,
    pub partition: f64,
    pub residual: f64,
    pub iterations: usize,
}

// ---------------------------------------------------------------------------
// Shared exponential-tilt solver (also drives the single-mean quantum case).

#[derive(Debug, Clone)]
pub(crate) struct Tilt {
    pub lambda: f64,
    /// `ln Σ w_k e^{−α_k λ}`
    pub log_partition: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum TiltError {
    Infeasible { lo: f64, hi: f64 },
    Degenerate { value: f64 },
    NotConverged { residual: f64, iterations: usize },
}

/// Log-sum-exp evaluation of the tilted family; weights `<= 0` are absent.
pub(crate) struct TiltFamily<'a> {
    weights: &'a [f64],
    values: &'a [f64],
}

impl<'a> TiltFamily<'a> {
    pub fn new(weights: &'a [f64], values: &'a [f64]) -> Self {
        debug_assert_eq!(weights.len(), values.len());
        Self { weights, values }
    }

    fn max_log_weight(&self, lambda: f64) -> f64 {
        self.weights
            .iter()
            .zip(self.values)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, a)| w.ln() - a * lambda)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Shift `c` and unnormalized factors `e_k = w_k e^{−α_k λ − c}`.
    pub fn shifted_weights(&self, lambda: f64) -> (f64, Vec<f64>) {
        let c = self.max_log_weight(lambda);
        let e = self
            .weights
            .iter()
            .zip(self.values)
            .map(|(w, a)| if *w > 0.0 { (w.ln() - a * lambda - c).exp() } else { 0.0 })
            .collect();
        (c, e)
    }

    pub fn mean(&self, lambda: f64) -> f64 {
        let (_, e) = self.shifted_weights(lambda);
        let z: f64 = e.iter().sum();
        e.iter().zip(self.values).map(|(e, a)| e * a).sum::<f64>() / z
    }

    pub fn log_partition(&self, lambda: f64) -> f64 {
        let (c, e) = self.shifted_weights(lambda);
        c + e.iter().sum::<f64>().ln()
    }

    pub fn posterior(&self, lambda: f64) -> Vec<f64> {
        let (_, e) = self.shifted_weights(lambda);
        let z: f64 = e.iter().sum();
        e.into_iter().map(|x| x / z).collect()
    }

    /// Range of values over entries with weight above `support_eps`.
    pub fn support_range(&self, support_eps: f64) -> (f64, f64) {
        self.weights
            .iter()
            .zip(self.values)
            .filter(|(w, _)| **w > support_eps)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &a)| (lo.min(a), hi.max(a)))
    }

    pub fn solve(&self, target: f64, tol: f64, support_eps: f64) -> Result<Tilt, TiltError> {
        let g = |l: f64| self.mean(l) - target;
        let g0 = g(0.0);
        if g0.abs() <= tol {
            return Ok(Tilt {
                lambda: 0.0,
                log_partition: self.log_partition(0.0),
                iterations: 0,
                residual: g0.abs(),
            });
        }
        let (lo, hi) = self.support_range(support_eps);
        if hi <= lo {
            return Err(TiltError::Degenerate { value: lo });
        }
        if !(lo < target && target < hi) {
            return Err(TiltError::Infeasible { lo, hi });
        }

        // g is decreasing: keep g(a) > 0 > g(b) with a < b.
        let (mut a, mut b);
        let mut iterations = 0;
        if g0 > 0.0 {
            a = 0.0;
            b = 1.0;
            while g(b) > 0.0 {
                a = b;
                b *= 2.0;
                iterations += 1;
                if b > BRACKET_LIMIT {
                    return Err(TiltError::Infeasible { lo, hi });
                }
            }
        } else {
            b = 0.0;
            a = -1.0;
            while g(a) < 0.0 {
                b = a;
                a *= 2.0;
                iterations += 1;
                if a < -BRACKET_LIMIT {
                    return Err(TiltError::Infeasible { lo, hi });
                }
            }
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            iterations += 1;
            let gm = g(mid);
            if gm == 0.0 {
                a = mid;
                b = mid;
                break;
            }
            if gm > 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let (ga, gb) = (g(a).abs(), g(b).abs());
        let lambda = if ga <= gb { a } else { b };
        let residual = ga.min(gb);
        if !(residual <= tol) {
            return Err(TiltError::NotConverged { residual, iterations });
        }
        Ok(Tilt {
            lambda,
            log_partition: self.log_partition(lambda),
            iterations,
            residual,
        })
    }
}

// ---------------------------------------------------------------------------

fn check_lengths(q: &ClassicalDistribution, obs: &ClassicalObservable) -> Result<()> {
    if q.len() != obs.len() {
        return Err(Error::DimMismatch(q.len(), obs.len()));
    }
    Ok(())
}

fn support_weights(q: &ClassicalDistribution) -> Vec<f64> {
    q.probs().iter().map(|&p| if p < PRIOR_ZERO { 0.0 } else { p }).collect()
}

/// Minimum-Kullback posterior `q_k e^{−A_k λ}/Z` with `Σ p_k A_k = mean`.
pub fn classical_mke_estimate(
    q: &ClassicalDistribution,
    obs: &ClassicalObservable,
    mean: f64,
    tol: f64,
) -> Result<ClassicalEstimate> {
    check_lengths(q, obs)?;
    if !(tol > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidInput("tolerance must be positive and mean finite".into()));
    }
    let w = support_weights(q);
    let family = TiltFamily::new(&w, obs.values());
    let tilt = family.solve(mean, tol, PRIOR_ZERO).map_err(|e| match e {
        TiltError::Infeasible { lo, hi } => Error::InfeasibleMean { mean, lo, hi },
        TiltError::Degenerate { value } => Error::DegenerateObservable { value, mean },
        TiltError::NotConverged { residual, iterations } => Error::NonConvergence { residual, iterations },
    })?;
    let posterior = if tilt.lambda == 0.0 {
        q.clone()
    } else {
        ClassicalDistribution::new(family.posterior(tilt.lambda))?
    };
    Ok(ClassicalEstimate {
        posterior,
        lambda: tilt.lambda,
        partition: tilt.log_partition.exp(),
        residual: tilt.residual,
        iterations: tilt.iterations,
    })
}

/// Endpoint of the tilt trajectory together with the visited points.
#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub endpoint: ClassicalDistribution,
    pub lambda: f64,
    /// `(λ, p(λ))` after every full integration step, starting at `λ = 0`.
    pub path: Vec<(f64, Vec<f64>)>,
}

fn tilt_rhs(p: &[f64], a: &[f64]) -> Vec<f64> {
    let mean: f64 = p.iter().zip(a).map(|(p, a)| p * a).sum();
    p.iter().zip(a).map(|(p, a)| -(a - mean) * p).collect()
}

fn rk4_step(p: &[f64], a: &[f64], h: f64) -> Vec<f64> {
    let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + s * k).collect() };
    let k1 = tilt_rhs(p, a);
    let k2 = tilt_rhs(&axpy(p, &k1, h / 2.0), a);
    let k3 = tilt_rhs(&axpy(p, &k2, h / 2.0), a);
    let k4 = tilt_rhs(&axpy(p, &k3, h), a);
    (0..p.len())
        .map(|i| p[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates `dp_k/dλ = −(A_k − ⟨A⟩_p) p_k` from `p(0) = q` with fixed-step
/// RK4 until the surface `Σ p_k A_k = mean` is crossed. The crossing inside
/// the last step is located by bisecting the length of a partial step.
pub fn classical_trajectory(
    q: &ClassicalDistribution,
    obs: &ClassicalObservable,
    mean: f64,
    lambda_max: f64,
    step: f64,
) -> Result<ClassicalTrajectory> {
    check_lengths(q, obs)?;
    if !(step > 0.0) || !(lambda_max >= 0.0) {
        return Err(Error::InvalidInput("step must be positive and lambda_max nonnegative".into()));
    }
    let a = obs.values();
    let gap = |p: &[f64]| p.iter().zip(a).map(|(p, a)| p * a).sum::<f64>() - mean;
    let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut p = q.probs().to_vec();
    let g0 = gap(&p);
    let mut path = vec![(0.0, p.clone())];
    if g0.abs() <= 4.0 * f64::EPSILON * scale {
        return Ok(ClassicalTrajectory {
            endpoint: q.clone(),
            lambda: 0.0,
            path,
        });
    }
    // Mean decreases with λ, so move toward positive λ when above target.
    let dir = g0.signum();
    let h = dir * step;
    let mut lambda = 0.0f64;
    loop {
        if lambda.abs() >= lambda_max {
            return Err(Error::SurfaceNotReached { lambda_max });
        }
        let next = rk4_step(&p, a, h);
        let g_next = gap(&next);
        if g_next == 0.0 || g_next.signum() != dir {
            // Bracket the crossing in a partial step of length s ∈ [0, step].
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let g = gap(&rk4_step(&p, a, dir * mid));
                if g.signum() == dir {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let s = 0.5 * (lo + hi);
            let end = rk4_step(&p, a, dir * s);
            lambda += dir * s;
            path.push((lambda, end.clone()));
            let total: f64 = end.iter().sum();
            let endpoint = ClassicalDistribution::new(end.iter().map(|x| x.max(0.0) / total).collect())?;
            return Ok(ClassicalTrajectory { endpoint, lambda, path });
        }
        p = next;
        lambda += h;
        path.push((lambda, p.clone()));
    }
}

/// Closed-form tilt `q_k e^{−A_k λ}/Z` at a given multiplier.
pub fn tilted_distribution(q: &ClassicalDistribution, obs: &ClassicalObservable, lambda: f64) -> Result<ClassicalDistribution> {
    check_lengths(q, obs)?;
    let w = support_weights(q);
    ClassicalDistribution::new(TiltFamily::new(&w, obs.values()).posterior(lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::kl_divergence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(p: &[f64]) -> ClassicalDistribution {
        ClassicalDistribution::new(p.to_vec()).unwrap()
    }

    fn obs(a: &[f64]) -> ClassicalObservable {
        ClassicalObservable::new(a.to_vec()).unwrap()
    }

    #[test]
    fn prior_already_satisfies_constraint() {
        let est = classical_mke_estimate(&dist(&[0.5, 0.5]), &obs(&[1.0, -1.0]), 0.0, 1e-12).unwrap();
        assert_eq!(est.lambda, 0.0);
        assert_eq!(est.posterior.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn unit_multiplier_two_level() {
        let mean = -(1f64).tanh();
        let est = classical_mke_estimate(&dist(&[0.5, 0.5]), &obs(&[1.0, -1.0]), mean, 1e-12).unwrap();
        assert!((est.lambda - 1.0).abs() < 1e-12, "lambda {}", est.lambda);
        let e = std::f64::consts::E;
        let z = e + 1.0 / e;
        assert!((est.posterior.probs()[0] - (1.0 / e) / z).abs() < 1e-13);
        assert!((est.posterior.probs()[1] - e / z).abs() < 1e-13);
    }

    #[test]
    fn point_prior() {
        let est = classical_mke_estimate(&dist(&[1.0, 0.0]), &obs(&[0.0, 1.0]), 0.0, 1e-12).unwrap();
        assert_eq!(est.lambda, 0.0);
        assert_eq!(est.posterior.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn infeasible_and_degenerate() {
        let q = dist(&[0.5, 0.5]);
        assert!(matches!(
            classical_mke_estimate(&q, &obs(&[1.0, -1.0]), 1.0, 1e-9),
            Err(Error::InfeasibleMean { .. })
        ));
        assert!(matches!(
            classical_mke_estimate(&q, &obs(&[2.0, 2.0]), 1.0, 1e-9),
            Err(Error::DegenerateObservable { .. })
        ));
        // mean outside the support of the prior even if inside the value range
        assert!(matches!(
            classical_mke_estimate(&dist(&[0.5, 0.5, 0.0]), &obs(&[0.0, 1.0, 2.0]), 1.5, 1e-9),
            Err(Error::InfeasibleMean { .. })
        ));
        assert!(matches!(
            classical_mke_estimate(&q, &obs(&[1.0, 2.0, 3.0]), 1.5, 1e-9),
            Err(Error::DimMismatch(2, 3))
        ));
    }

    #[test]
    fn trajectory_returns_prior_when_satisfied() {
        let q = dist(&[0.5, 0.5]);
        let tr = classical_trajectory(&q, &obs(&[1.0, -1.0]), 0.0, 0.0, 0.01).unwrap();
        assert_eq!(tr.lambda, 0.0);
        assert_eq!(tr.endpoint, q);
    }

    #[test]
    fn trajectory_crosses_at_unit_multiplier() {
        let q = dist(&[0.5, 0.5]);
        let a = obs(&[1.0, -1.0]);
        let tr = classical_trajectory(&q, &a, -(1f64).tanh(), 5.0, 0.01).unwrap();
        assert!((tr.lambda - 1.0).abs() < 1e-6);
        let closed = tilted_distribution(&q, &a, tr.lambda).unwrap();
        for (x, y) in tr.endpoint.probs().iter().zip(closed.probs()) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn trajectory_matches_estimator() {
        let q = dist(&[0.2, 0.8]);
        let a = obs(&[0.0, 1.0]);
        let tr = classical_trajectory(&q, &a, 0.5, 10.0, 0.01).unwrap();
        let est = classical_mke_estimate(&q, &a, 0.5, 1e-12).unwrap();
        for (x, y) in tr.endpoint.probs().iter().zip(est.posterior.probs()) {
            assert!((x - y).abs() < 1e-6);
        }
        assert!(tr.path.iter().all(|(_, p)| (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9));
    }

    #[test]
    fn trajectory_surface_not_reached() {
        let q = dist(&[0.2, 0.8]);
        let r = classical_trajectory(&q, &obs(&[0.0, 1.0]), 0.1, 0.5, 0.01);
        assert!(matches!(r, Err(Error::SurfaceNotReached { .. })));
    }

    #[test]
    fn tilted_mean_is_strictly_decreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(2..8);
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let q = ClassicalDistribution::from_weights(&w).unwrap();
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let fam = TiltFamily::new(q.probs(), &a);
            let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
            for pair in grid.windows(2) {
                assert!(fam.mean(pair[1]) < fam.mean(pair[0]));
            }
        }
    }

    #[test]
    fn posterior_minimizes_divergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let q = dist(&[0.1, 0.2, 0.3, 0.4]);
        let a = [0.0, 1.0, 2.0, 3.0];
        let mean = 1.2;
        let est = classical_mke_estimate(&q, &obs(&a), mean, 1e-13).unwrap();
        let k_best = kl_divergence(&est.posterior, &q).unwrap();
        let mut checked = 0;
        while checked < 200 {
            // random point of the constraint polytope: perturb along the
            // two-dimensional null space of [1,…,1] and A
            let u = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let null1 = [1.0, -2.0, 1.0, 0.0];
            let null2 = [0.0, 1.0, -2.0, 1.0];
            let s = rng.random_range(0.0..0.2);
            let p: Vec<f64> = (0..4)
                .map(|k| est.posterior.probs()[k] + s * (u[0] * null1[k] + u[1] * null2[k]))
                .collect();
            if p.iter().any(|&x| x < 0.0) {
                continue;
            }
            let p = ClassicalDistribution::from_weights(&p).unwrap();
            assert!((p.mean(&a) - mean).abs() < 1e-10);
            assert!(k_best <= kl_divergence(&p, &q).unwrap() + 1e-9);
            checked += 1;
        }
    }
}
