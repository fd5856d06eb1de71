// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Everything an estimator, simulator or file reader can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max asymmetry {0:e})")]
    NonHermitianInput(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("scalar function undefined at eigenvalue {0}")]
    DomainError(f64),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("mean {mean} outside the attainable interval ({lo}, {hi})")]
    InfeasibleMean { mean: f64, lo: f64, hi: f64 },

    #[error("observable takes the single value {value} on the prior support; mean {mean} unreachable")]
    DegenerateObservable { value: f64, mean: f64 },

    #[error("prior is concentrated on eigenvalue {value}; mean {mean} unreachable")]
    DegenerateSupport { value: f64, mean: f64 },

    #[error("constraint surface not reached within |lambda| <= {lambda_max}")]
    SurfaceNotReached { lambda_max: f64 },

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("constraints are jointly infeasible (best residual {residual:e})")]
    InfeasibleConstraints { residual: f64 },

    #[error("outcome {0} has positive probability but zero prior weight")]
    UnsupportedOutcome(usize),

    #[error("prior Bloch vector is parallel to the measurement direction; no information")]
    NoInformation,

    #[error("linear system has rank {rank}, need at least 2")]
    RankDeficient { rank: usize },

    #[error("Fock cutoff {dim} too small: truncated tail mass {tail:e}")]
    CutoffTooSmall { tail: f64, dim: usize },

    #[error("mean photon number must be positive, got {0}")]
    InvalidMean(f64),

    #[error("no positive root for outcome pair ({0}, {1})")]
    NoRoot(usize, usize),

    #[error("no outcomes with positive probability")]
    InsufficientData,

    #[error("prior has degenerate eigenvalue clusters {clusters:?}; their components are unobservable")]
    DegeneratePrior { clusters: Vec<Vec<usize>> },

    #[error("outcome {0} observed but the prior has no weight there")]
    NoSupport(usize),

    #[error("measurement basis is not a complete orthonormal set")]
    IncompleteBasis,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InfeasibleMean { .. }
            | DegenerateObservable { .. }
            | DegenerateSupport { .. }
            | InfeasibleConstraints { .. }
            | UnsupportedOutcome(_)
            | NoInformation
            | RankDeficient { .. }
            | NoRoot(..)
            | InsufficientData
            | DegeneratePrior { .. }
            | NoSupport(_) => 2,
            NonConvergence { .. } | SurfaceNotReached { .. } => 4,
            NonHermitianInput(_) | DimMismatch(..) | DomainError(_) | InvalidState(_)
            | InvalidDistribution(_) | InvalidInput(_) | CutoffTooSmall { .. } | InvalidMean(_)
            | IncompleteBasis | Io(_) | Parse(_) => 3,
        }
    }

    /// Variant name, used as the machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            NonHermitianInput(_) => "NonHermitianInput",
            DimMismatch(..) => "DimMismatch",
            DomainError(_) => "DomainError",
            InvalidState(_) => "InvalidState",
            InvalidDistribution(_) => "InvalidDistribution",
            InvalidInput(_) => "InvalidInput",
            InfeasibleMean { .. } => "InfeasibleMean",
            DegenerateObservable { .. } => "DegenerateObservable",
            DegenerateSupport { .. } => "DegenerateSupport",
            SurfaceNotReached { .. } => "SurfaceNotReached",
            NonConvergence { .. } => "NonConvergence",
            InfeasibleConstraints { .. } => "InfeasibleConstraints",
            UnsupportedOutcome(_) => "UnsupportedOutcome",
            NoInformation => "NoInformation",
            RankDeficient { .. } => "RankDeficient",
            CutoffTooSmall { .. } => "CutoffTooSmall",
            InvalidMean(_) => "InvalidMean",
            NoRoot(..) => "NoRoot",
            InsufficientData => "InsufficientData",
            DegeneratePrior { .. } => "DegeneratePrior",
            NoSupport(_) => "NoSupport",
            IncompleteBasis => "IncompleteBasis",
            Io(_) => "Io",
            Parse(_) => "Parse",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
