//! Subcommand bodies, shared by the binary and the integration tests.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flybs_core::channel::{build_channel_set, PhaseField, Position3};
use flybs_core::dynamics::{closed_loop, lqr_design, ControllerGains, GRAVITY};
use flybs_core::gradient::{min_rate_gradient, Axis};
use flybs_core::rate::{min_rate, CovarianceSet};
use flybs_core::sim::{compare_methods, run, summarize, MethodSummary, SimLog};

use crate::config::{ConfigFile, MethodName};
use crate::csv::{fmt_float, parse_trajectory_csv, trajectory_csv, COMPARE_HEADER};
use crate::svg::{rate_svg, trajectory_svg};
use crate::CliError;

/// Flags of `flybs run`.
#[derive(Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
    pub method: Option<MethodName>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub plot: bool,
}

/// Flags of `flybs compare`.
#[derive(Debug, Clone)]
pub struct CompareArgs {
    pub config: PathBuf,
    pub seeds: u64,
    pub out: Option<PathBuf>,
}

/// Flags of `flybs gradcheck`.
#[derive(Debug, Clone)]
pub struct GradcheckArgs {
    pub config: PathBuf,
    pub samples: usize,
    pub delta: f64,
    /// Check the config's literal geometry instead of random draws.
    pub keep_positions: bool,
}

/// Flags of `flybs design`.
#[derive(Debug, Clone)]
pub struct DesignArgs {
    pub weights: String,
    pub r: f64,
    pub default_gains: bool,
}

fn out_dir(flag: &Option<PathBuf>, cfg: &ConfigFile) -> PathBuf {
    flag.clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn summary_text(log: &SimLog, summary: &MethodSummary) -> String {
    let mut out = String::new();
    out.push_str(&format!("method: {}\n", log.method.name()));
    out.push_str(&format!("seed: {}\n", log.seed));
    out.push_str(&format!("rows: {}\n", log.rows.len()));
    out.push_str(&format!(
        "final_r_min: {} bits/channel-use\n",
        fmt_float(summary.final_r_min)
    ));
    out.push_str(&format!("t95: {} s\n", fmt_float(summary.t95)));
    if let Some(mu) = log.mu_used {
        out.push_str(&format!("mu: {}\n", fmt_float(mu)));
    }
    let last = log.final_row();
    for (k, id) in log.uav_ids.iter().enumerate() {
        let u = &last.uavs[k];
        let speed = (u.vx * u.vx + u.vy * u.vy).sqrt();
        out.push_str(&format!(
            "uav {id}: x = {} m, y = {} m, speed = {} m/s, arc = {} m\n",
            fmt_float(u.x),
            fmt_float(u.y),
            fmt_float(speed),
            fmt_float(summary.arc_lengths[k])
        ));
    }
    if log.warnings.is_empty() {
        out.push_str("warnings: none\n");
    } else {
        for w in &log.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
    }
    out
}

/// Writes the CSV plus summary, and the SVG pair when asked. The plots are
/// regenerated from the CSV text so they stay pure functions of it.
fn write_run_outputs(dir: &Path, log: &SimLog, plot: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let csv = trajectory_csv(log);
    write_file(&dir.join("trajectory.csv"), &csv)?;
    write_file(&dir.join("summary.txt"), &summary_text(log, &summarize(log)))?;
    if plot {
        let rows = parse_trajectory_csv(&csv)?;
        write_file(&dir.join("trajectory.svg"), &trajectory_svg(&rows))?;
        write_file(&dir.join("rate.svg"), &rate_svg(&rows))?;
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = ConfigFile::load(&args.config)?;
    let mut scenario = cfg.to_scenario()?;
    if let Some(m) = args.method {
        scenario.method = m.into();
    }
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let log = run(&scenario)?;
    let dir = out_dir(&args.out, &cfg);
    let plot = args.plot || cfg.output.plot;
    write_run_outputs(&dir, &log, plot)?;
    for w in &log.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "wrote {} ({} rows, final R_min {} bits/channel-use)",
        dir.join("trajectory.csv").display(),
        log.rows.len() * log.uav_ids.len(),
        fmt_float(log.final_row().r_min)
    );
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    if args.seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let cfg = ConfigFile::load(&args.config)?;
    let base = cfg.to_scenario()?;
    let dir = out_dir(&args.out, &cfg);
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;

    let mut table = String::from(COMPARE_HEADER);
    table.push('\n');
    for offset in 0..args.seeds {
        let mut scenario = base.clone();
        scenario.seed = cfg.seed.wrapping_add(offset);
        let outcome = compare_methods(&scenario)?;
        for log in [&outcome.controlled, &outcome.gradient] {
            let name = format!("seed{}_{}.csv", scenario.seed, log.method.name());
            write_file(&dir.join(name), &trajectory_csv(log))?;
            let s = summarize(log);
            let arc: f64 = s.arc_lengths.iter().sum();
            table.push_str(&format!(
                "{},{},{},{},{}\n",
                scenario.seed,
                log.method.name(),
                fmt_float(s.final_r_min),
                fmt_float(s.t95),
                fmt_float(arc)
            ));
        }
        let [c, g] = outcome.summaries();
        let gap = (c.final_r_min - g.final_r_min).abs()
            / c.final_r_min.max(g.final_r_min).max(1e-12);
        println!(
            "seed {}: controlled {} vs gradient {} bits/channel-use (gap {:.2}%)",
            scenario.seed,
            fmt_float(c.final_r_min),
            fmt_float(g.final_r_min),
            100.0 * gap
        );
    }
    let path = dir.join("compare.csv");
    write_file(&path, &table)?;
    println!("wrote {} ({} data rows)", path.display(), 2 * args.seeds);
    Ok(())
}

/// Relative error with an absolute floor: differences below the floor count
/// as zero so a genuinely vanishing gradient does not divide by noise.
fn gradient_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff <= 1e-9 {
        0.0
    } else {
        diff / analytic.abs().max(numeric.abs()).max(1e-9)
    }
}

pub fn cmd_gradcheck(args: &GradcheckArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(CliError::Config("--samples must be at least 1".into()));
    }
    if !(args.delta > 0.0) || !args.delta.is_finite() {
        return Err(CliError::Config("--delta must be positive".into()));
    }
    if args.delta > 1e-2 {
        println!(
            "warning: delta {} is coarse; truncation error dominates above 1e-2",
            args.delta
        );
    }
    let cfg = ConfigFile::load(&args.config)?;
    let scenario = cfg.to_scenario()?;
    let n_uavs = scenario.uavs.len();
    let n_users = scenario.users.len();
    let budgets: Vec<f64> = scenario.users.iter().map(|u| u.p_max).collect();
    let covs = CovarianceSet::isotropic_full_power(scenario.channel.n_tx, &budgets);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let mut worst = 0.0_f64;
    let mut worst_report = String::from("no comparison survived the subset-switch filter");
    let mut worst_abs = 0.0_f64;
    let mut compared = 0usize;
    let mut skipped = 0usize;

    for j in 0..args.samples {
        let (uavs, users): (Vec<Position3>, Vec<Position3>) = if args.keep_positions {
            (
                scenario
                    .uavs
                    .iter()
                    .map(|u| Position3::new(u.x, u.y, scenario.altitude))
                    .collect(),
                scenario.users.iter().map(|u| Position3::new(u.x, u.y, 0.0)).collect(),
            )
        } else {
            (
                (0..n_uavs)
                    .map(|_| {
                        Position3::new(
                            rng.random_range(-40.0..40.0),
                            rng.random_range(-40.0..40.0),
                            scenario.altitude,
                        )
                    })
                    .collect(),
                (0..n_users)
                    .map(|_| {
                        Position3::new(
                            rng.random_range(-50.0..50.0),
                            rng.random_range(-50.0..50.0),
                            0.0,
                        )
                    })
                    .collect(),
            )
        };
        let field =
            PhaseField::draw(n_uavs, n_users, &scenario.channel, scenario.seed + 1 + j as u64);
        let set = build_channel_set(&uavs, &users, &scenario.channel, &field)?;
        let grad = min_rate_gradient(&uavs, &users, &set, &covs, &scenario.channel, &scenario.rate)?;

        for k in 0..n_uavs {
            for axis in [Axis::X, Axis::Y] {
                let eval = |s: f64| -> Result<_, CliError> {
                    let mut moved = uavs.clone();
                    match axis {
                        Axis::X => moved[k].x += s,
                        Axis::Y => moved[k].y += s,
                    }
                    let ch = build_channel_set(&moved, &users, &scenario.channel, &field)?;
                    Ok(min_rate(&ch, &covs, &scenario.rate)?)
                };
                let (lo, hi) = (eval(-args.delta)?, eval(args.delta)?);
                if lo.s_min != grad.min_rate.s_min || hi.s_min != grad.min_rate.s_min {
                    skipped += 1;
                    continue;
                }
                let numeric = (hi.r_min - lo.r_min) / (2.0 * args.delta);
                let analytic = match axis {
                    Axis::X => grad.per_uav[k].x,
                    Axis::Y => grad.per_uav[k].y,
                };
                compared += 1;
                worst_abs = worst_abs.max((analytic - numeric).abs());
                let err = gradient_error(analytic, numeric);
                if err >= worst {
                    worst = err;
                    worst_report = format!(
                        "geometry {j}, UAV {k}, axis {axis:?}: analytic {} vs numeric {} \
                         (uavs {:?}, users {:?})",
                        fmt_float(analytic),
                        fmt_float(numeric),
                        uavs.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(),
                        users.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>()
                    );
                }
            }
        }
    }

    println!(
        "checked {} geometries: {} comparisons, {} skipped at subset switches",
        args.samples, compared, skipped
    );
    println!(
        "worst relative error {} (worst absolute difference {})",
        fmt_float(worst),
        fmt_float(worst_abs)
    );
    if worst >= 1e-4 {
        return Err(CliError::GradCheck(format!(
            "gradient check failed: worst relative error {} at {worst_report}",
            fmt_float(worst)
        )));
    }
    println!("gradient check passed at delta {}", args.delta);
    Ok(())
}

fn parse_weights(text: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(
            "--weights takes three comma-separated values: qv,qo,qod".into(),
        ));
    }
    let mut vals = [0.0_f64; 3];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("--weights: {e}")))?;
        if !(*slot >= 0.0) || !slot.is_finite() {
            return Err(CliError::Config("--weights entries must be nonnegative".into()));
        }
    }
    Ok((vals[0], vals[1], vals[2]))
}

pub fn cmd_design(args: &DesignArgs) -> Result<(), CliError> {
    let gains = if args.default_gains {
        ControllerGains::default()
    } else {
        let (qv, qo, qod) = parse_weights(&args.weights)?;
        let mut qw = Matrix4::zeros();
        qw[(1, 1)] = qv;
        qw[(2, 2)] = qo;
        qw[(3, 3)] = qod;
        let design =
            lqr_design(&qw, args.r, GRAVITY).map_err(|e| CliError::Config(e.to_string()))?;
        println!(
            "riccati residual {} after {} iterations",
            fmt_float(design.residual),
            design.iterations
        );
        design.gains
    };

    println!("k1 = {}", fmt_float(gains.k1));
    println!("k2 = {}", fmt_float(gains.k2));
    println!("k3 = {}", fmt_float(gains.k3));
    println!("p  = {}", fmt_float(gains.p));

    // exit 0 only for a Hurwitz closed loop
    let sys = closed_loop(&gains, GRAVITY, false).map_err(|e| CliError::Config(e.to_string()))?;
    let eigs = sys.velocity_subsystem().complex_eigenvalues();
    let text: Vec<String> = eigs
        .iter()
        .map(|l| {
            if l.im.abs() < 1e-12 {
                format!("{:.6}", l.re)
            } else {
                format!("{:.6} {} {:.6}i", l.re, if l.im < 0.0 { "-" } else { "+" }, l.im.abs())
            }
        })
        .collect();
    println!("eigenvalues: {}", text.join(", "));
    Ok(())
}
