//! TOML scenario files and their mapping onto [`Scenario`].
//!
//! Every key has a documented default except the three structural sections:
//! `[timing]`, `[[users]]`, and `[uavs]` must be present. Unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use serde::{Deserialize, Serialize};

use flybs_core::channel::ChannelParams;
use flybs_core::covariance::SolverSettings;
use flybs_core::dynamics::{ControllerGains, GRAVITY};
use flybs_core::scenario::{Method, Scenario, ScheduledMove, Timing, UavSpec, UserSpec};

use crate::CliError;

/// Steering method name as written in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Controlled,
    Gradient,
}

impl From<MethodName> for Method {
    fn from(m: MethodName) -> Self {
        match m {
            MethodName::Controlled => Method::Controlled,
            MethodName::Gradient => Method::GradientMethod,
        }
    }
}

/// `[channel]` section; defaults follow [`ChannelParams::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub alpha: f64,
    pub d0: f64,
    pub pl_d0_db: f64,
    pub sigma_shadow_db: f64,
    pub n_rx: usize,
    pub n_tx: usize,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let p = ChannelParams::default();
        Self {
            alpha: p.alpha,
            d0: p.d0,
            pl_d0_db: p.pl_d0_db,
            sigma_shadow_db: p.sigma_shadow_db,
            n_rx: p.n_rx,
            n_tx: p.n_tx,
        }
    }
}

/// One `[[users]]` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub p_max: f64,
    /// Piecewise-constant teleports, strictly increasing in `at` seconds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<MoveEntry>,
}

/// One scheduled user move.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveEntry {
    pub at: f64,
    pub x: f64,
    pub y: f64,
}

/// `[uavs]` section: shared altitude plus one start entry per UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSection {
    #[serde(default = "default_altitude")]
    pub altitude: f64,
    pub start: Vec<UavEntry>,
}

fn default_altitude() -> f64 {
    50.0
}

/// One UAV start position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
}

/// `[control]` section; defaults follow [`ControllerGains::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlSection {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Reference prefilter; omitted means `p = k1` (unity velocity tracking).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub gravity: f64,
    pub allow_unstable: bool,
}

impl Default for ControlSection {
    fn default() -> Self {
        let g = ControllerGains::default();
        Self { k1: g.k1, k2: g.k2, k3: g.k3, p: None, gravity: GRAVITY, allow_unstable: false }
    }
}

/// `[timing]` section. Required: a scenario without clocks is meaningless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    /// Inner dynamics step in seconds.
    pub dt: f64,
    /// Gradient/covariance resampling interval; integer multiple of `dt`.
    pub sample_interval: f64,
    /// Horizon; integer multiple of `sample_interval`.
    pub duration: f64,
}

/// `[solver]` section; defaults follow [`SolverSettings::default`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub max_iters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step0: Option<f64>,
    pub tol_obj: f64,
    pub tol_feas: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self { max_iters: s.max_iters, step0: s.step0, tol_obj: s.tol_obj, tol_feas: s.tol_feas }
    }
}

/// `[output]` section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Output directory; the `--out` flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Emit trajectory.svg and rate.svg alongside the CSV.
    pub plot: bool,
}

/// A complete scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub method: MethodName,
    /// Gradient-method step gain; omitted derives it from `v_ref` at t = 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Initial speed assigned to the fastest UAV when `mu` is derived.
    #[serde(default = "default_v_ref")]
    pub v_ref: f64,
    #[serde(default)]
    pub channel: ChannelSection,
    pub users: Vec<UserEntry>,
    pub uavs: UavSection,
    #[serde(default)]
    pub control: ControlSection,
    pub timing: TimingSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_method() -> MethodName {
    MethodName::Controlled
}

fn default_v_ref() -> f64 {
    5.0
}

impl ConfigFile {
    /// Parses TOML text, rejecting unknown keys and missing sections.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Reads and parses a scenario file.
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    /// Canonical TOML emission; `parse(emit(c)) == c` for any valid config.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("a ConfigFile always serializes")
    }

    /// Builds and validates the simulation scenario this file describes.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let scenario = Scenario {
            channel: ChannelParams {
                alpha: self.channel.alpha,
                d0: self.channel.d0,
                pl_d0_db: self.channel.pl_d0_db,
                sigma_shadow_db: self.channel.sigma_shadow_db,
                n_rx: self.channel.n_rx,
                n_tx: self.channel.n_tx,
            },
            users: self
                .users
                .iter()
                .map(|u| UserSpec {
                    id: u.id,
                    x: u.x,
                    y: u.y,
                    p_max: u.p_max,
                    schedule: u
                        .schedule
                        .iter()
                        .map(|m| ScheduledMove { at: m.at, x: m.x, y: m.y })
                        .collect(),
                })
                .collect(),
            uavs: self
                .uavs
                .start
                .iter()
                .map(|u| UavSpec { id: u.id, x: u.x, y: u.y })
                .collect(),
            altitude: self.uavs.altitude,
            gains: match self.control.p {
                Some(p) => ControllerGains::new(self.control.k1, self.control.k2, self.control.k3, p),
                None => ControllerGains::with_unity_prefilter(
                    self.control.k1,
                    self.control.k2,
                    self.control.k3,
                ),
            },
            gravity: self.control.gravity,
            allow_unstable_gains: self.control.allow_unstable,
            timing: Timing {
                dt: self.timing.dt,
                sample_interval: self.timing.sample_interval,
                duration: self.timing.duration,
            },
            method: self.method.into(),
            mu: self.mu,
            v_ref: self.v_ref,
            seed: self.seed,
            solver: SolverSettings {
                max_iters: self.solver.max_iters,
                step0: self.solver.step0,
                tol_obj: self.solver.tol_obj,
                tol_feas: self.solver.tol_feas,
            },
            rate: Default::default(),
        };
        scenario.validate().map_err(CliError::from)?;
        Ok(scenario)
    }
}
