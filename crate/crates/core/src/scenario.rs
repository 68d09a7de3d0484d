//! Declarative description of one simulation run.

use crate::channel::ChannelParams;
use crate::covariance::SolverSettings;
use crate::dynamics::ControllerGains;
use crate::error::{Error, Result};
use crate::rate::RateOptions;

/// UAV steering law used by the simulation loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Closed-loop quadcopter dynamics tracking the rate gradient.
    Controlled,
    /// Idealized kinematic gradient ascent.
    GradientMethod,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Controlled => "controlled",
            Method::GradientMethod => "gradient",
        }
    }
}

/// One scheduled teleport of a user. Positions are piecewise constant: the
/// move takes effect at the first sampling instant `t >= at`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledMove {
    pub at: f64,
    pub x: f64,
    pub y: f64,
}

/// A ground user: initial position (z = 0), power budget, optional schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct UserSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub p_max: f64,
    pub schedule: Vec<ScheduledMove>,
}

/// A UAV's identity and horizontal start position; altitude is shared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavSpec {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// Simulation clocks: inner dynamics step, gradient/covariance resampling
/// interval, and total horizon. The sampling interval must be an integer
/// multiple of `dt`, and the horizon an integer multiple of the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub dt: f64,
    pub sample_interval: f64,
    pub duration: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { dt: 0.01, sample_interval: 0.1, duration: 60.0 }
    }
}

impl Timing {
    /// Inner steps per sample, validated to be a whole number.
    pub fn steps_per_sample(&self) -> Result<usize> {
        ratio_as_integer(self.sample_interval, self.dt)
            .ok_or_else(|| Error::Validation(
                "timing.sample_interval must be an integer multiple of timing.dt".into(),
            ))
    }

    /// Number of sampling intervals in the horizon (rows logged minus one).
    pub fn n_samples(&self) -> Result<usize> {
        ratio_as_integer(self.duration, self.sample_interval)
            .ok_or_else(|| Error::Validation(
                "timing.duration must be an integer multiple of timing.sample_interval".into(),
            ))
    }
}

/// `a / b` when it is a positive integer within floating tolerance.
fn ratio_as_integer(a: f64, b: f64) -> Option<usize> {
    if !(a > 0.0) || !(b > 0.0) {
        return None;
    }
    let ratio = a / b;
    let rounded = ratio.round();
    if rounded >= 1.0 && (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        Some(rounded as usize)
    } else {
        None
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub channel: ChannelParams,
    pub users: Vec<UserSpec>,
    pub uavs: Vec<UavSpec>,
    /// Shared flight altitude in meters, > 0.
    pub altitude: f64,
    pub gains: ControllerGains,
    pub gravity: f64,
    /// Accept non-Hurwitz gains anyway (divergence experiments).
    pub allow_unstable_gains: bool,
    pub timing: Timing,
    pub method: Method,
    /// Gradient-method step gain; `None` derives it from `v_ref` at t = 0.
    pub mu: Option<f64>,
    /// Initial speed, in m/s, the derived `mu` assigns to the fastest UAV.
    pub v_ref: f64,
    /// Seed of the frozen phase field and any scenario randomness.
    pub seed: u64,
    pub solver: SolverSettings,
    pub rate: RateOptions,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            users: Vec::new(),
            uavs: Vec::new(),
            altitude: 50.0,
            gains: ControllerGains::default(),
            gravity: crate::dynamics::GRAVITY,
            allow_unstable_gains: false,
            timing: Timing::default(),
            method: Method::Controlled,
            mu: None,
            v_ref: 5.0,
            seed: 0,
            solver: SolverSettings::default(),
            rate: RateOptions::default(),
        }
    }
}

impl Scenario {
    /// Rejects inconsistent descriptions with messages naming the bad field.
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        if self.users.is_empty() {
            return Err(Error::Validation("users: at least one user is required".into()));
        }
        if self.uavs.is_empty() {
            return Err(Error::Validation("uavs: at least one UAV is required".into()));
        }
        let mut user_ids: Vec<u32> = self.users.iter().map(|u| u.id).collect();
        user_ids.sort_unstable();
        if user_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("users: ids must be unique".into()));
        }
        let mut uav_ids: Vec<u32> = self.uavs.iter().map(|u| u.id).collect();
        uav_ids.sort_unstable();
        if uav_ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("uavs: ids must be unique".into()));
        }
        for user in &self.users {
            if !(user.p_max > 0.0) || !user.p_max.is_finite() {
                return Err(Error::Validation(format!(
                    "users: user {} p_max must be positive",
                    user.id
                )));
            }
            if !user.x.is_finite() || !user.y.is_finite() {
                return Err(Error::Validation(format!(
                    "users: user {} position must be finite",
                    user.id
                )));
            }
            for w in user.schedule.windows(2) {
                if !(w[0].at < w[1].at) {
                    return Err(Error::Validation(format!(
                        "users: user {} schedule times must be strictly increasing",
                        user.id
                    )));
                }
            }
            if user.schedule.iter().any(|m| !m.at.is_finite() || !m.x.is_finite() || !m.y.is_finite()) {
                return Err(Error::Validation(format!(
                    "users: user {} schedule entries must be finite",
                    user.id
                )));
            }
        }
        for uav in &self.uavs {
            if !uav.x.is_finite() || !uav.y.is_finite() {
                return Err(Error::Validation(format!(
                    "uavs: UAV {} position must be finite",
                    uav.id
                )));
            }
        }
        if !(self.altitude > 0.0) || !self.altitude.is_finite() {
            return Err(Error::Validation("uavs.altitude must be positive".into()));
        }
        if !(self.timing.dt > 0.0) || !self.timing.dt.is_finite() {
            return Err(Error::Validation("timing.dt must be positive".into()));
        }
        if !(self.timing.sample_interval > 0.0) || !self.timing.sample_interval.is_finite() {
            return Err(Error::Validation("timing.sample_interval must be positive".into()));
        }
        if !(self.timing.duration >= self.timing.sample_interval) {
            return Err(Error::Validation(
                "timing.duration must be at least one sample interval".into(),
            ));
        }
        self.timing.steps_per_sample()?;
        self.timing.n_samples()?;
        if let Some(mu) = self.mu {
            if !(mu > 0.0) || !mu.is_finite() {
                return Err(Error::Validation("mu must be positive when given".into()));
            }
        }
        if !(self.v_ref > 0.0) || !self.v_ref.is_finite() {
            return Err(Error::Validation("v_ref must be positive".into()));
        }
        if self.users.len() > self.rate.subset_limit {
            return Err(Error::SubsetLimit {
                users: self.users.len(),
                limit: self.rate.subset_limit,
            });
        }
        Ok(())
    }
}
