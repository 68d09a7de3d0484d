//! Closed-loop simulation of the alternating rate/trajectory optimization.
//!
//! Per sampling instant the loop (1) re-optimizes transmit covariances at the
//! current geometry, warm-started from the previous sample, (2) evaluates the
//! analytic max-min rate gradient there, (3) advances every UAV over one
//! sampling interval with the gradient held constant (either through the
//! exact ZOH closed loop at the inner step `dt`, or in one kinematic step for
//! the gradient-method baseline), and (4) looks up scheduled user positions
//! for the next instant. One row is logged per instant, including `t = 0`
//! before any motion and the final instant `t = duration`.

use nalgebra::Vector3;

use crate::channel::{build_channel_set, PhaseField, Position3};
use crate::covariance::optimize_covariances;
use crate::dynamics::{
    closed_loop, discretize_zoh, step_controlled, step_gradient_method, AxisState,
};
use crate::error::{Error, Result};
use crate::gradient::min_rate_gradient;
use crate::rate::CovarianceSet;
use crate::scenario::{Method, Scenario, UserSpec};

/// One UAV's logged quantities at a sampling instant.
#[derive(Debug, Clone, Copy)]
pub struct UavSample {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub grad_x: f64,
    pub grad_y: f64,
}

/// One logged sampling instant.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub t: f64,
    pub r_min: f64,
    /// Binding subset as user ids (not indices), ascending.
    pub s_min: Vec<u32>,
    /// Indexed like `Scenario::uavs`.
    pub uavs: Vec<UavSample>,
    /// `trace(Q_i)` per user, same order as `Scenario::users`.
    pub q_traces: Vec<f64>,
}

/// Complete record of one run.
#[derive(Debug, Clone)]
pub struct SimLog {
    pub method: Method,
    pub seed: u64,
    pub uav_ids: Vec<u32>,
    pub user_ids: Vec<u32>,
    pub rows: Vec<SampleRow>,
    /// Human-readable anomalies observed during the run (tilt outside the
    /// small-angle region, covariance solver hitting its iteration budget).
    pub warnings: Vec<String>,
    /// Step gain actually used by the gradient-method baseline, if that
    /// method ran.
    pub mu_used: Option<f64>,
}

impl SimLog {
    pub fn final_row(&self) -> &SampleRow {
        self.rows.last().expect("a run always logs at least one row")
    }
}

/// User positions at time `t` under their piecewise-constant schedules.
///
/// Every move takes effect at the first instant `t >= move.at`. The schedule
/// must be strictly increasing in time.
pub fn apply_user_schedule(users: &[UserSpec], t: f64) -> Result<Vec<Position3>> {
    let mut out = Vec::with_capacity(users.len());
    for user in users {
        for w in user.schedule.windows(2) {
            if !(w[0].at < w[1].at) {
                return Err(Error::Validation(format!(
                    "users: user {} schedule times must be strictly increasing",
                    user.id
                )));
            }
        }
        let mut x = user.x;
        let mut y = user.y;
        for mv in &user.schedule {
            if mv.at <= t {
                x = mv.x;
                y = mv.y;
            } else {
                break;
            }
        }
        out.push(Position3::new(x, y, 0.0));
    }
    Ok(out)
}

/// Runs one scenario to completion.
///
/// The log always contains `duration / sample_interval + 1` rows with strictly
/// increasing `t`. Any numerical failure aborts the run with the sample index
/// attached.
pub fn run(scenario: &Scenario) -> Result<SimLog> {
    scenario.validate()?;
    let n_uavs = scenario.uavs.len();
    let n_samples = scenario.timing.n_samples()?;
    let steps_per_sample = scenario.timing.steps_per_sample()?;
    let t_s = scenario.timing.sample_interval;

    let field = PhaseField::draw(n_uavs, scenario.users.len(), &scenario.channel, scenario.seed);
    let budgets: Vec<f64> = scenario.users.iter().map(|u| u.p_max).collect();

    // per-axis discretization is shared by every UAV (identical dynamics)
    let sys = closed_loop(&scenario.gains, scenario.gravity, scenario.allow_unstable_gains)?;
    let zoh = discretize_zoh(&sys, scenario.timing.dt)?;

    let mut axis_states: Vec<[AxisState; 2]> = scenario
        .uavs
        .iter()
        .map(|u| [AxisState::at_rest(u.x), AxisState::at_rest(u.y)])
        .collect();
    // gradient-method state: position only, velocity is mu * grad
    let mut kinematic_pos: Vec<Vector3<f64>> = scenario
        .uavs
        .iter()
        .map(|u| Vector3::new(u.x, u.y, scenario.altitude))
        .collect();

    let mut covs: Option<CovarianceSet> = None;
    let mut mu_used: Option<f64> = match scenario.method {
        Method::GradientMethod => scenario.mu,
        Method::Controlled => None,
    };
    let mut rows = Vec::with_capacity(n_samples + 1);
    let mut warnings = Vec::new();
    let mut tilt_warned = false;
    let mut unconverged_samples = 0usize;

    for sample in 0..=n_samples {
        let t = sample as f64 * t_s;
        let step = |err: Error| err.at_sample(sample, t);

        let user_pos = apply_user_schedule(&scenario.users, t)?;
        let uav_pos: Vec<Position3> = match scenario.method {
            Method::Controlled => axis_states
                .iter()
                .map(|ax| Position3::new(ax[0].x, ax[1].x, scenario.altitude))
                .collect(),
            Method::GradientMethod => kinematic_pos
                .iter()
                .map(|p| Position3::new(p.x, p.y, scenario.altitude))
                .collect(),
        };

        let channels =
            build_channel_set(&uav_pos, &user_pos, &scenario.channel, &field).map_err(step)?;
        let (new_covs, report) = optimize_covariances(
            &channels,
            &budgets,
            &scenario.solver,
            &scenario.rate,
            covs.as_ref(),
        )
        .map_err(step)?;
        if !report.converged {
            unconverged_samples += 1;
        }
        let covs = covs.insert(new_covs);

        let grad = min_rate_gradient(
            &uav_pos,
            &user_pos,
            &channels,
            covs,
            &scenario.channel,
            &scenario.rate,
        )
        .map_err(step)?;

        if scenario.method == Method::GradientMethod && mu_used.is_none() {
            // scale so the fastest UAV starts at v_ref; a zero initial
            // gradient leaves every UAV parked regardless of the gain
            let worst = grad.per_uav.iter().map(|g| g.norm()).fold(0.0_f64, f64::max);
            mu_used = Some(if worst > 1e-12 { scenario.v_ref / worst } else { scenario.v_ref });
        }

        let uav_samples: Vec<UavSample> = (0..n_uavs)
            .map(|k| {
                let g = &grad.per_uav[k];
                match scenario.method {
                    Method::Controlled => UavSample {
                        x: axis_states[k][0].x,
                        y: axis_states[k][1].x,
                        vx: axis_states[k][0].v,
                        vy: axis_states[k][1].v,
                        grad_x: g.x,
                        grad_y: g.y,
                    },
                    Method::GradientMethod => UavSample {
                        x: kinematic_pos[k].x,
                        y: kinematic_pos[k].y,
                        vx: mu_used.unwrap_or(0.0) * g.x,
                        vy: mu_used.unwrap_or(0.0) * g.y,
                        grad_x: g.x,
                        grad_y: g.y,
                    },
                }
            })
            .collect();

        rows.push(SampleRow {
            t,
            r_min: grad.min_rate.r_min,
            s_min: grad.min_rate.s_min.iter().map(|&i| scenario.users[i].id).collect(),
            uavs: uav_samples,
            q_traces: (0..scenario.users.len()).map(|i| covs.trace(i)).collect(),
        });

        if sample == n_samples {
            break;
        }
        match scenario.method {
            Method::Controlled => {
                for (k, axes) in axis_states.iter_mut().enumerate() {
                    let g = &grad.per_uav[k];
                    for _ in 0..steps_per_sample {
                        axes[0] = step_controlled(&axes[0], g.x, &zoh);
                        axes[1] = step_controlled(&axes[1], g.y, &zoh);
                    }
                    if !tilt_warned && !(axes[0].small_angle_ok() && axes[1].small_angle_ok()) {
                        tilt_warned = true;
                        warnings.push(format!(
                            "UAV {} tilt left the small-angle region after t = {t} s",
                            scenario.uavs[k].id
                        ));
                    }
                }
            }
            Method::GradientMethod => {
                let mu = mu_used.unwrap_or(0.0);
                for (k, pos) in kinematic_pos.iter_mut().enumerate() {
                    *pos = step_gradient_method(pos, &grad.per_uav[k], mu, t_s);
                }
            }
        }
    }

    if unconverged_samples > 0 {
        warnings.push(format!(
            "covariance solver hit its iteration budget in {unconverged_samples} of {} samples",
            n_samples + 1
        ));
    }

    Ok(SimLog {
        method: scenario.method,
        seed: scenario.seed,
        uav_ids: scenario.uavs.iter().map(|u| u.id).collect(),
        user_ids: scenario.users.iter().map(|u| u.id).collect(),
        rows,
        warnings,
        mu_used,
    })
}

/// Scalar summary of one run, used by the comparison front end.
#[derive(Debug, Clone)]
pub struct MethodSummary {
    pub method: Method,
    pub final_r_min: f64,
    /// First logged time at which the rate reaches 95% of its final value.
    pub t95: f64,
    /// Total traveled path length per UAV, in log order.
    pub arc_lengths: Vec<f64>,
}

pub fn summarize(log: &SimLog) -> MethodSummary {
    let final_r_min = log.final_row().r_min;
    let threshold = 0.95 * final_r_min;
    let t95 = log
        .rows
        .iter()
        .find(|row| row.r_min >= threshold)
        .map_or(f64::NAN, |row| row.t);
    let mut arc_lengths = vec![0.0; log.uav_ids.len()];
    for pair in log.rows.windows(2) {
        for (k, arc) in arc_lengths.iter_mut().enumerate() {
            let (a, b) = (&pair[0].uavs[k], &pair[1].uavs[k]);
            *arc += ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        }
    }
    MethodSummary { method: log.method, final_r_min, t95, arc_lengths }
}

/// Paired runs of both methods on one scenario (same seed, same phase field).
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub controlled: SimLog,
    pub gradient: SimLog,
}

impl CompareOutcome {
    pub fn summaries(&self) -> [MethodSummary; 2] {
        [summarize(&self.controlled), summarize(&self.gradient)]
    }
}

/// Runs the controlled system and the gradient-method baseline on identical
/// inputs. Both runs share the phase field, so their `t = 0` rows agree.
pub fn compare_methods(scenario: &Scenario) -> Result<CompareOutcome> {
    let mut controlled = scenario.clone();
    controlled.method = Method::Controlled;
    let mut gradient = scenario.clone();
    gradient.method = Method::GradientMethod;
    Ok(CompareOutcome { controlled: run(&controlled)?, gradient: run(&gradient)? })
}
