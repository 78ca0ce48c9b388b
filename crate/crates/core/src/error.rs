use num_complex::Complex64;

use crate::ensembles::RandomSeed;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: matrices must have at least one row")]
    InvalidDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A partial product left the floating point range even after scalar balancing.
    #[error("product for sample {sample_index} overflowed (accumulated log scale {log_scale})")]
    NumericRange { sample_index: usize, log_scale: f64 },

    #[error("eigensolver did not converge{}", seed.map(|s| format!(" (seed root {}, stream {})", s.root, s.stream)).unwrap_or_default())]
    EigenSolver { seed: Option<RandomSeed> },

    /// `Λ^M = 1` for one of the transfer matrix eigenvalues: the cyclic matrix is singular.
    #[error("cyclic inverse is singular: transfer eigenvalue {lambda} has Λ^{m} = 1")]
    Resonance { lambda: Complex64, m: usize },

    #[error("singular point w = {0}: determinant vanishes")]
    SingularPoint(Complex64),

    #[error("{what} failed to converge: {detail}")]
    Solver { what: &'static str, detail: String },

    #[error("tau = {tau} is outside the phase where this quantity exists (critical value {critical})")]
    Phase { tau: f64, critical: f64 },
}

impl Error {
    pub(crate) fn solver(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Solver {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
