//! Trajectory logs as CSV, plus the parser the plot emitters consume.
//!
//! Schema is fixed: the exact header below, one row per (sampling instant,
//! UAV) pair, comma separators, '\n' line endings, floats with 9 significant
//! digits, and the binding subset as dash-joined ascending user ids.

use flybs_core::sim::SimLog;

use crate::CliError;

/// Exact header line, without the trailing newline.
pub const TRAJECTORY_HEADER: &str = "t,uav_id,x,y,vx,vy,grad_x,grad_y,r_min,s_min";

/// Header of the cross-seed comparison summary.
pub const COMPARE_HEADER: &str = "seed,method,final_r_min,t95,arc_length";

/// 9 significant digits, locale-independent.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.8e}")
}

/// Serializes one run; `rows = uavs * (duration / sample_interval + 1)`.
pub fn trajectory_csv(log: &SimLog) -> String {
    let mut out = String::with_capacity(64 * log.rows.len() * log.uav_ids.len() + 64);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in &log.rows {
        let s_min = row
            .s_min
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join("-");
        for (k, id) in log.uav_ids.iter().enumerate() {
            let u = &row.uavs[k];
            out.push_str(&fmt_float(row.t));
            out.push(',');
            out.push_str(&id.to_string());
            out.push(',');
            out.push_str(&fmt_float(u.x));
            out.push(',');
            out.push_str(&fmt_float(u.y));
            out.push(',');
            out.push_str(&fmt_float(u.vx));
            out.push(',');
            out.push_str(&fmt_float(u.vy));
            out.push(',');
            out.push_str(&fmt_float(u.grad_x));
            out.push(',');
            out.push_str(&fmt_float(u.grad_y));
            out.push(',');
            out.push_str(&fmt_float(row.r_min));
            out.push(',');
            out.push_str(&s_min);
            out.push('\n');
        }
    }
    out
}

/// One parsed trajectory row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub uav_id: u32,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub grad_x: f64,
    pub grad_y: f64,
    pub r_min: f64,
    pub s_min: Vec<u32>,
}

/// Parses trajectory CSV text back into rows; the plot emitters run on this,
/// so a plot is a pure function of the CSV bytes.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRAJECTORY_HEADER => {}
        other => {
            return Err(CliError::Config(format!(
                "trajectory CSV header mismatch: {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(CliError::Config(format!(
                "trajectory CSV line {}: expected 10 fields, got {}",
                n + 2,
                fields.len()
            )));
        }
        let num = |j: usize| -> Result<f64, CliError> {
            fields[j].parse().map_err(|e| {
                CliError::Config(format!("trajectory CSV line {}: {e}", n + 2))
            })
        };
        let s_min = fields[9]
            .split('-')
            .map(|p| p.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("trajectory CSV line {}: {e}", n + 2)))?;
        rows.push(TrajectoryRow {
            t: num(0)?,
            uav_id: fields[1]
                .parse()
                .map_err(|e| CliError::Config(format!("trajectory CSV line {}: {e}", n + 2)))?,
            x: num(2)?,
            y: num(3)?,
            vx: num(4)?,
            vy: num(5)?,
            grad_x: num(6)?,
            grad_y: num(7)?,
            r_min: num(8)?,
            s_min,
        });
    }
    Ok(rows)
}
