//! Slow reference computations used as oracles by the workspace test suites.
//!
//! Everything in this crate is written for clarity and independence, not speed:
//! determinants by Laplace expansion, subset searches by brute force, projections
//! by active-set enumeration. None of it calls into `flybs-core`, so agreement
//! between the two crates is evidence that both are right, not that one copied
//! the other.

pub mod det;
pub mod fd;
pub mod lyapunov;
pub mod minrate;
pub mod qp;
pub mod waterfill;

pub use det::cofactor_det;
pub use fd::central_diff;
pub use lyapunov::lyapunov_solve;
pub use minrate::{exhaustive_min_rate, ExhaustiveMinRate};
pub use qp::project_capped_simplex_qp;
pub use waterfill::water_filling_rate;
