use std::fmt;

use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Accuracy(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("assembly produced a non-finite entry at ({row}, {col})")]
    Assembly { row: usize, col: usize },
    #[error("feshbach: upper-left block is singular")]
    FeshbachL00Singular,
    #[error("feshbach: Schur complement is singular")]
    FeshbachSchurSingular,
    #[error("potential vanishes identically")]
    ZeroPotential,
    #[error("U + T(lambda) is near singular at lambda = {lambda} (condition {condition:e})")]
    NearSingular { lambda: f64, condition: f64 },
    #[error("spectral assumption violated: {0}")]
    SpectralAssumptionViolated(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("instability detected at step {step}")]
    Instability { step: usize },
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Non-fatal conditions collected into reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    GrazingCone { count: usize },
    TruncationBias { boundary_max: f64, field_max: f64 },
    Truncation { last_decade: f64, total: f64 },
    QuadratureSelfDifference { relative: f64 },
    NearSingular { lambda: f64, condition: f64 },
    PotentialShift { lambda0: f64 },
    ZeroSuspect { eigenvalue: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::GrazingCone { count } => {
                write!(f, "grazing light-cone evaluations: {count}")
            }
            Warning::TruncationBias { boundary_max, field_max } => write!(
                f,
                "data not small at grid boundary: {boundary_max:e} vs max {field_max:e}"
            ),
            Warning::Truncation { last_decade, total } => write!(
                f,
                "time-integral truncation: last decade {last_decade:e} of total {total:e}"
            ),
            Warning::QuadratureSelfDifference { relative } => {
                write!(f, "spectral quadrature n vs 2n differ by {relative:e}")
            }
            Warning::NearSingular { lambda, condition } => {
                write!(f, "ill-conditioned U + T at lambda = {lambda}: {condition:e}")
            }
            Warning::PotentialShift { lambda0 } => {
                write!(f, "spectral shift raised to lambda0 = {lambda0}")
            }
            Warning::ZeroSuspect { eigenvalue } => {
                write!(f, "eigenvalue {eigenvalue:e} inside the zero window")
            }
        }
    }
}
