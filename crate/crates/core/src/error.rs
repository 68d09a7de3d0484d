//! Error taxonomy shared by every module in the crate.
//!
//! Three families matter to callers: validation errors (bad scenario or
//! configuration values, named by key), domain errors (arguments outside a
//! function's mathematical domain, with the offending entity identified), and
//! numerical failures (factorizations or iterations that break down at run
//! time). The CLI maps the families onto distinct exit codes.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// UAV and user occupy the same point, so the path-loss model is undefined.
    #[error("degenerate geometry: UAV index {uav} and user index {user} are co-located")]
    DegenerateGeometry { uav: usize, user: usize },

    /// Distance fed to the path-loss law must be strictly positive.
    #[error("path loss undefined for nonpositive distance {distance} m")]
    NonpositiveDistance { distance: f64 },

    /// Subset enumeration refused because 2^G - 1 would be too large.
    #[error("{users} users exceed the subset enumeration limit of {limit}")]
    SubsetLimit { users: usize, limit: usize },

    /// A matrix that must be Hermitian positive semidefinite failed factorization.
    #[error("matrix for subset {{{subset}}} is not positive definite")]
    NotPositiveDefinite { subset: String },

    /// Input violates a symmetry precondition beyond tolerance.
    #[error("{what} is not Hermitian (asymmetry {asymmetry:.3e})")]
    NonHermitian { what: &'static str, asymmetry: f64 },

    /// Controller gains fail the stability test.
    #[error(
        "unstable gains: need k1, k2, k3 > 0 and Routh margin k3*k2 - g*k1 > 0 (margin {margin:.6})"
    )]
    UnstableGains { margin: f64 },

    /// LQR synthesis did not produce a stabilizing solution.
    #[error("controller design failed: {reason}")]
    Design { reason: String },

    /// Argument outside a function's domain.
    #[error("{0}")]
    Domain(String),

    /// Scenario or configuration rejected before any computation ran.
    #[error("{0}")]
    Validation(String),

    /// Numerical breakdown at run time.
    #[error("{0}")]
    Numerical(String),

    /// Failure inside the simulation loop, tagged with the sample it occurred in.
    #[error("sample {sample} (t = {t:.3} s): {source}")]
    AtSample {
        sample: usize,
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the simulation sample it surfaced in.
    pub fn at_sample(self, sample: usize, t: f64) -> Error {
        Error::AtSample { sample, t, source: Box::new(self) }
    }

    /// True for errors the CLI reports as validation failures (exit code 1).
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Domain(_) | Error::SubsetLimit { .. }
        )
    }
}
