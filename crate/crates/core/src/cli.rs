// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the exit code with the rendered report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::entropy::{kl_divergence, quantum_kullback, ClassicalDistribution};
use crate::io;
use crate::linalg::{Complex, ComplexMatrix};
use crate::oscillator::{
    coherent_amplitudes, coherent_mke_mean, estimate_displacement_direct, estimate_displacement_mke,
    estimate_weak_hamiltonian_fock, fock_mke_mean, CoherentAmplitude, FockCutoff, PhotonDistribution,
};
use crate::quantum::{mke_from_distribution, mke_multi_mean, mke_single_mean, DistributionConstraint, EstimationResult, MeanConstraint};
use crate::qubit::{
    bloch_to_density, qubit_lambda, qubit_mke_mean, qubit_weak_hamiltonian_multi, qubit_weak_hamiltonian_single,
    BlochVector, SpinDirection, Vec3,
};
use crate::report::{complex, matrix, num, nums, ErrorInfo, InputDigest, RunReport};
use crate::simulator::{evolve_unitary, exact_distribution, exact_mean, sample_outcomes};
use crate::state::{DensityMatrix, Observable};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_CUTOFF: usize = 32;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "mke", version, about = "Minimum Kullback entropy state and weak-process estimation")]
struct Cli {
    /// Emit the report as one JSON document.
    #[arg(long, global = true)]
    json: bool,
    /// Leave the wall-time field out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a density matrix from a prior and measured data.
    #[command(subcommand)]
    Estimate(EstimateCmd),
    /// Closed-form qubit estimates.
    #[command(subcommand)]
    Qubit(QubitCmd),
    /// Truncated-oscillator estimates.
    #[command(subcommand)]
    Oscillator(OscillatorCmd),
    /// Produce exact or sampled measurement data.
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Relative entropies between files.
    #[command(subcommand)]
    Entropy(EntropyCmd),
}

#[derive(Debug, Subcommand)]
enum EstimateCmd {
    /// Single mean value of one observable.
    Mean {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        observable: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        mean: f64,
        #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Several mean values at once.
    Multi {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Full outcome distribution in an orthonormal basis.
    Dist {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        probs: PathBuf,
        /// Defaults to the standard (Fock) basis.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum QubitCmd {
    /// Bloch vector of the estimate for one spin mean.
    Estimate {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        prior_bloch: Vec3,
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        dir: Vec3,
        #[arg(long, allow_hyphen_values = true)]
        mean: f64,
    },
    /// Weak Hamiltonian from one or more spin means.
    Hamiltonian {
        #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
        prior_bloch: Vec3,
        #[arg(long = "dir", value_parser = parse_vec3, allow_hyphen_values = true, required = true)]
        dirs: Vec<Vec3>,
        #[arg(long = "mean", allow_hyphen_values = true, required = true)]
        means: Vec<f64>,
        /// Divide out the evolution time.
        #[arg(long, allow_hyphen_values = true)]
        time: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Mke,
    Direct,
}

#[derive(Debug, Subcommand)]
enum OscillatorCmd {
    /// Coherent prior with a mean-photon-number constraint.
    Mean {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        alpha: Complex,
        #[arg(long, allow_hyphen_values = true)]
        nbar: f64,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
        #[arg(long, default_value_t = DEFAULT_TOL, allow_hyphen_values = true)]
        tol: f64,
    },
    /// Real displacement from a photon-number distribution.
    Displacement {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Mke)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_CUTOFF)]
        cutoff: usize,
    },
    /// Weak Hamiltonian from the photon-number distribution of the evolved state.
    Hamiltonian {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
        /// Defaults to the prior's dimension.
        #[arg(long)]
        cutoff: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct Output {
    /// Also write the result to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum SimulateCmd {
    /// Exact mean of an observable.
    Mean {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        observable: PathBuf,
    },
    /// Exact outcome distribution.
    Dist {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Seeded finite-shot counts.
    Sample {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        basis: Option<PathBuf>,
        #[arg(long)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Unitary evolution `e^{−iHt} ρ e^{iHt}`.
    Evolve {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        hamiltonian: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Debug, Subcommand)]
enum EntropyCmd {
    /// Classical divergence between two probability files.
    Kl {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Quantum divergence between two state files.
    Quantum {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected x,y,z, got {s:?}"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|e| format!("{p:?}: {e}"))?;
    }
    Ok(v)
}

fn parse_complex(s: &str) -> std::result::Result<Complex, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let f = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex::new(f(re)?, 0.0)),
        [re, im] => Ok(Complex::new(f(re)?, f(im)?)),
        _ => Err(format!("expected RE[,IM], got {s:?}")),
    }
}

struct Ctx {
    digest: InputDigest,
    report: RunReport,
}

impl Ctx {
    fn load(&mut self, path: &Path) -> Result<Value> {
        let l = io::load(path)?;
        self.digest.update(&l.bytes);
        Ok(l.json)
    }

    fn density(&mut self, path: &Path) -> Result<DensityMatrix> {
        io::parse_density(&self.load(path)?)
    }

    fn observable(&mut self, path: &Path) -> Result<Observable> {
        Ok(Observable::new(io::parse_operator(&self.load(path)?)?))
    }

    fn probs(&mut self, path: &Path) -> Result<Vec<f64>> {
        io::parse_probabilities(&self.load(path)?)
    }

    fn basis(&mut self, path: &Option<PathBuf>, dim: usize) -> Result<ComplexMatrix> {
        match path {
            Some(p) => io::parse_basis(&self.load(p)?),
            None => Ok(ComplexMatrix::identity(dim, dim)),
        }
    }

    fn out(&mut self, key: &str, v: Value) {
        self.report.output(key, v);
    }

    fn diag(&mut self, key: &str, v: Value) {
        self.report.diagnostic(key, v);
    }

    fn estimation(&mut self, r: &EstimationResult) {
        self.out("posterior", matrix(r.posterior.matrix()));
        self.out("lambdas", nums(&r.lambdas));
        self.out("partition", num(r.partition));
        self.out("relative_entropy", num(r.relative_entropy));
        self.out("residual", num(r.residual));
        self.diag("iterations", Value::from(r.iterations));
    }
}

/// Parses `argv` (program name first) and executes the subcommand.
pub fn run(argv: &[String]) -> (i32, String) {
    let start = Instant::now();
    let wants_json = argv.iter().skip(1).any(|a| a == "--json");
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
                && e.exit_code() == 0
            {
                return (0, e.to_string());
            }
            let mut report = RunReport {
                command: argv.iter().skip(1).cloned().collect(),
                ..Default::default()
            };
            report.inputs_sha256 = InputDigest::default().hex();
            report.error = Some(ErrorInfo {
                kind: "Usage".into(),
                message: e.render().to_string().trim_end().to_string(),
                exit_code: 3,
            });
            let out = if wants_json { report.render_json() } else { report.render_text() };
            return (3, out);
        }
    };

    let mut ctx = Ctx {
        digest: InputDigest::default(),
        report: RunReport {
            command: argv.iter().skip(1).cloned().collect(),
            ..Default::default()
        },
    };
    for a in argv.iter().skip(1) {
        ctx.digest.update(a.as_bytes());
    }
    if let Err(e) = dispatch(&mut ctx, &cli.command) {
        ctx.report.error = Some(ErrorInfo::from(&e));
    }
    ctx.report.inputs_sha256 = ctx.digest.hex();
    if !cli.no_timing {
        ctx.report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let out = if cli.json { ctx.report.render_json() } else { ctx.report.render_text() };
    (ctx.report.exit_code(), out)
}

fn dispatch(ctx: &mut Ctx, cmd: &Command) -> Result<()> {
    match cmd {
        Command::Estimate(c) => estimate(ctx, c),
        Command::Qubit(c) => qubit(ctx, c),
        Command::Oscillator(c) => oscillator(ctx, c),
        Command::Simulate(c) => simulate(ctx, c),
        Command::Entropy(c) => entropy(ctx, c),
    }
}

fn estimate(ctx: &mut Ctx, cmd: &EstimateCmd) -> Result<()> {
    match cmd {
        EstimateCmd::Mean { prior, observable, mean, tol } => {
            let tau = ctx.density(prior)?;
            let obs = ctx.observable(observable)?;
            let r = mke_single_mean(&tau, &MeanConstraint::new(obs, *mean)?, *tol)?;
            ctx.estimation(&r);
        }
        EstimateCmd::Multi { prior, constraints, tol, max_iter } => {
            let tau = ctx.density(prior)?;
            let (list, loaded) = io::load_constraints(constraints)?;
            for l in &loaded {
                ctx.digest.update(&l.bytes);
            }
            let cs = list
                .into_iter()
                .map(|(o, m)| MeanConstraint::new(o, m))
                .collect::<Result<Vec<_>>>()?;
            let r = mke_multi_mean(&tau, &cs, *tol, *max_iter)?;
            ctx.estimation(&r);
        }
        EstimateCmd::Dist { prior, probs, basis } => {
            let tau = ctx.density(prior)?;
            let p = ClassicalDistribution::new(ctx.probs(probs)?)?;
            let b = ctx.basis(basis, tau.dim())?;
            let r = mke_from_distribution(&tau, &DistributionConstraint::new(b, p)?)?;
            ctx.estimation(&r);
        }
    }
    Ok(())
}

fn qubit(ctx: &mut Ctx, cmd: &QubitCmd) -> Result<()> {
    match cmd {
        QubitCmd::Estimate { prior_bloch, dir, mean } => {
            let tau = BlochVector::new(*prior_bloch)?;
            let n = SpinDirection::normalized(*dir)?;
            let lambda = qubit_lambda(&tau, &n, *mean)?;
            let v = qubit_mke_mean(&tau, &n, *mean)?;
            ctx.out("bloch", nums(&v.0));
            ctx.out("lambda", num(lambda));
            ctx.out("posterior", matrix(bloch_to_density(&v).matrix()));
            ctx.diag("direction", nums(&n.0));
        }
        QubitCmd::Hamiltonian { prior_bloch, dirs, means, time } => {
            if dirs.len() != means.len() {
                return Err(Error::InvalidInput(format!("{} directions but {} means", dirs.len(), means.len())));
            }
            let tau = BlochVector::new(*prior_bloch)?;
            let ns = dirs.iter().map(|d| SpinDirection::normalized(*d)).collect::<Result<Vec<_>>>()?;
            // global phase: the identity component never enters the data
            ctx.out("h0", Value::from("indeterminate"));
            if ns.len() == 1 {
                let e = qubit_weak_hamiltonian_single(&tau, &ns[0], means[0])?;
                ctx.out("h_t", nums(&e.h_eff));
                ctx.out("direction", nums(&e.direction));
                if let Some(t) = time {
                    if !(*t > 0.0) {
                        return Err(Error::InvalidInput("time must be positive".into()));
                    }
                    ctx.out("h", nums(&e.h_eff.map(|x| x / t)));
                }
                ctx.diag("method", Value::from("single"));
            } else {
                let data: Vec<(SpinDirection, f64)> = ns.into_iter().zip(means.iter().copied()).collect();
                let h = qubit_weak_hamiltonian_multi(&tau, &data, *time)?;
                ctx.out(if time.is_some() { "h" } else { "h_t" }, nums(&h));
                ctx.diag("method", Value::from("least_squares"));
            }
        }
    }
    Ok(())
}

fn oscillator(ctx: &mut Ctx, cmd: &OscillatorCmd) -> Result<()> {
    match cmd {
        OscillatorCmd::Mean { alpha, nbar, cutoff, tol } => {
            let a = CoherentAmplitude(*alpha);
            let closed = coherent_mke_mean(a, *nbar)?;
            ctx.out("beta", complex(closed.beta));
            ctx.out("lambda", num(closed.lambda));
            ctx.out("partition", num(closed.partition));
            let fc = FockCutoff::new(*cutoff)?;
            let r = fock_mke_mean(a, *nbar, fc, *tol)?;
            let mut target = coherent_amplitudes(CoherentAmplitude(closed.beta), fc.dim());
            let norm = target.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            target.iter_mut().for_each(|c| *c /= norm);
            ctx.out("numerical_lambda", num(r.lambdas[0]));
            ctx.out("numerical_fidelity", num(r.posterior.fidelity_with_pure(&target)?));
            ctx.out("numerical_residual", num(r.residual));
            ctx.diag("cutoff", Value::from(fc.dim()));
            ctx.diag("iterations", Value::from(r.iterations));
        }
        OscillatorCmd::Displacement { alpha, probs, method, cutoff } => {
            let p = PhotonDistribution::new(ctx.probs(probs)?)?;
            let fc = FockCutoff::new(*cutoff)?;
            let e = match method {
                Method::Mke => estimate_displacement_mke(*alpha, &p, fc)?,
                Method::Direct => estimate_displacement_direct(*alpha, &p, fc)?,
            };
            ctx.out("beta", num(e.beta));
            ctx.out("spread", num(e.spread));
            ctx.out("determination_count", Value::from(e.determinations.len()));
            ctx.out(
                "determinations",
                Value::Array(
                    e.determinations
                        .iter()
                        .map(|d| Value::Array(vec![Value::from(d.n), Value::from(d.m), num(d.beta)]))
                        .collect(),
                ),
            );
            ctx.out(
                "unsolved",
                Value::Array(e.unsolved.iter().map(|&(n, m)| Value::Array(vec![n.into(), m.into()])).collect()),
            );
            ctx.diag("method", Value::from(if *method == Method::Mke { "mke" } else { "direct" }));
        }
        OscillatorCmd::Hamiltonian { prior, probs, time, cutoff } => {
            let tau = ctx.density(prior)?;
            let p = ClassicalDistribution::new(ctx.probs(probs)?)?;
            let fc = FockCutoff::new(cutoff.unwrap_or(tau.dim()))?;
            let h = estimate_weak_hamiltonian_fock(&tau, &p, *time, fc)?;
            ctx.out("hamiltonian", matrix(h.matrix()));
        }
    }
    Ok(())
}

fn simulate(ctx: &mut Ctx, cmd: &SimulateCmd) -> Result<()> {
    match cmd {
        SimulateCmd::Mean { state, observable } => {
            let rho = ctx.density(state)?;
            let obs = ctx.observable(observable)?;
            ctx.out("mean", num(exact_mean(&rho, obs.operator())?));
        }
        SimulateCmd::Dist { state, basis, out } => {
            let rho = ctx.density(state)?;
            let b = ctx.basis(basis, rho.dim())?;
            let p = exact_distribution(&rho, &b)?;
            ctx.out("probabilities", nums(p.probs()));
            if let Some(path) = &out.output {
                io::write_probabilities(path, p.probs())?;
            }
        }
        SimulateCmd::Sample { state, basis, shots, seed, out } => {
            let rho = ctx.density(state)?;
            let b = ctx.basis(basis, rho.dim())?;
            let p = exact_distribution(&rho, &b)?;
            let s = sample_outcomes(&p, *shots, *seed)?;
            ctx.out("counts", Value::Array(s.counts.iter().map(|&c| Value::from(c)).collect()));
            ctx.out("frequencies", nums(&s.frequencies()));
            ctx.diag("shots", Value::from(s.shots));
            ctx.diag("seed", Value::from(s.seed));
            if let Some(path) = &out.output {
                io::write_probabilities(path, &s.frequencies())?;
            }
        }
        SimulateCmd::Evolve { state, hamiltonian, time, out } => {
            let rho = ctx.density(state)?;
            let h = io::parse_operator(&ctx.load(hamiltonian)?)?;
            let r = evolve_unitary(&rho, &h, *time)?;
            ctx.out("state", matrix(r.matrix()));
            if let Some(path) = &out.output {
                io::write_matrix(path, r.matrix(), None)?;
            }
        }
    }
    Ok(())
}

fn entropy(ctx: &mut Ctx, cmd: &EntropyCmd) -> Result<()> {
    match cmd {
        EntropyCmd::Kl { a, b } => {
            let p = ClassicalDistribution::new(ctx.probs(a)?)?;
            let q = ClassicalDistribution::new(ctx.probs(b)?)?;
            ctx.out("divergence", num(kl_divergence(&p, &q)?));
        }
        EntropyCmd::Quantum { a, b } => {
            let rho = ctx.density(a)?;
            let tau = ctx.density(b)?;
            ctx.out("divergence", num(quantum_kullback(&rho, &tau)?));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("mke").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn qubit_example() {
        let (code, out) = run(&argv("qubit estimate --prior-bloch 0,0,1 --dir 1,0,0 --mean 0.6 --json --no-timing"));
        assert_eq!(code, 0, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        let b = v["outputs"]["bloch"].as_array().unwrap();
        let b: Vec<f64> = b.iter().map(|x| x.as_f64().unwrap()).collect();
        assert!((b[0] - 0.6).abs() < 1e-12 && b[1].abs() < 1e-12 && (b[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn negative_values_parse() {
        let (code, out) = run(&argv("qubit estimate --prior-bloch -0.5,0,0.5 --dir 0,0,1 --mean -0.2"));
        assert_eq!(code, 0, "{out}");
    }

    #[test]
    fn usage_errors_exit_3() {
        let (code, out) = run(&argv("qubit estimate --prior-bloch 0,0"));
        assert_eq!(code, 3);
        assert!(out.contains("Usage"));
        let (code, _) = run(&argv("--help"));
        assert_eq!(code, 0);
    }

    #[test]
    fn parsers() {
        assert_eq!(parse_vec3("1, -2,3").unwrap(), [1.0, -2.0, 3.0]);
        assert!(parse_vec3("1,2").is_err());
        assert_eq!(parse_complex("2").unwrap(), Complex::new(2.0, 0.0));
        assert_eq!(parse_complex("1,-1").unwrap(), Complex::new(1.0, -1.0));
        assert!(parse_complex("a").is_err());
    }
}
