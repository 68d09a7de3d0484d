//! Simulation library for steering a small fleet of receive-equipped UAVs so
//! the worst user of an uplink cell gets the best possible rate.
//!
//! The pieces, in dependency order:
//!
//! - [`channel`]: geometry, path loss, and frozen-phase channel synthesis;
//! - [`rate`]: subset sum-rate bounds and the max-min rate on the resulting
//!   multiple-access channel;
//! - [`covariance`]: projected-subgradient optimization of the users'
//!   transmit covariances at fixed UAV positions;
//! - [`gradient`]: analytic derivatives of the max-min rate with respect to
//!   UAV positions;
//! - [`dynamics`]: the per-axis closed-loop quadcopter model, exact ZOH
//!   discretization, and LQR gain synthesis;
//! - [`sim`]: the alternating optimization loop tying it all together, plus a
//!   kinematic gradient-ascent baseline for comparison.
//!
//! Runs are deterministic: one seed fixes the channel phases (ChaCha8), and
//! everything else is sequential floating-point arithmetic in a fixed order.

pub mod channel;
pub mod covariance;
pub mod dynamics;
pub mod error;
pub mod gradient;
pub mod rate;
pub mod scenario;
pub mod sim;

pub use channel::{CMatrix, ChannelParams, ChannelSet, PhaseField, Position3};
pub use error::{Error, Result};
pub use rate::{CovarianceSet, MinRateResult, RateOptions, RateUnits};
pub use scenario::{Method, Scenario};
pub use sim::SimLog;
