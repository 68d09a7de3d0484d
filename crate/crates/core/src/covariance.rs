//! Transmit covariance optimization at fixed UAV positions.
//!
//! Maximizes the max-min objective `min_S f(S)/|S|` over the feasible set
//! `{Q_i >= 0, tr Q_i <= P_i}` with projected subgradient ascent. The
//! objective is concave (a minimum of concave log-dets) but not smooth, so
//! the solver uses a diminishing step, direction-normalized so the nominal
//! step length `step0 / sqrt(t)` is measured in power units, and returns the
//! best iterate seen. Feasibility is restored after every step by projecting
//! each covariance in its eigenbasis: clip eigenvalues at zero, then pull the
//! eigenvalue vector back onto `{x >= 0, sum x <= P}` (the Frobenius-nearest
//! feasible matrix, by unitary invariance).

use nalgebra::{Complex, SymmetricEigen};

use crate::channel::{ChannelSet, CMatrix};
use crate::error::{Error, Result};
use crate::rate::{gram_matrix, min_rate, CovarianceSet, RateOptions};

/// Stopping rules for [`optimize_covariances`].
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    /// Iteration budget per solve.
    pub max_iters: usize,
    /// Nominal first-step length in power units; `None` selects
    /// `max_i(P_i) / 10`.
    pub step0: Option<f64>,
    /// Relative objective-improvement threshold that counts as progress.
    pub tol_obj: f64,
    /// Iterate-movement threshold (Frobenius, relative) treated as a fixed
    /// point of the projected update.
    pub tol_feas: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iters: 200, step0: None, tol_obj: 1e-7, tol_feas: 1e-9 }
    }
}

/// What the solver did, alongside the returned covariances.
#[derive(Debug, Clone, Copy)]
pub struct SolverReport {
    pub iterations: usize,
    /// False when the iteration budget ran out before any stopping rule fired;
    /// the caller still gets the best iterate.
    pub converged: bool,
    /// Objective value of the returned covariances.
    pub objective: f64,
}

/// Iterations without meaningful objective progress before the solver stops.
const STALL_WINDOW: usize = 25;

/// Projected subgradient ascent on the max-min rate.
///
/// `warm` seeds the iteration (covariances from the previous geometry sample);
/// otherwise the isotropic full-power point is used. The returned set is
/// always feasible and never scores below the seed.
pub fn optimize_covariances(
    channels: &ChannelSet,
    budgets: &[f64],
    settings: &SolverSettings,
    opts: &RateOptions,
    warm: Option<&CovarianceSet>,
) -> Result<(CovarianceSet, SolverReport)> {
    let g = channels.n_users();
    if budgets.len() != g || g == 0 {
        return Err(Error::Domain(format!("{} budgets for {} users", budgets.len(), g)));
    }
    for (i, &p) in budgets.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("user {i}: power budget must be positive")));
        }
    }

    let mut q = match warm {
        Some(w) if w.len() == g && w.q[0].nrows() == channels.n_tx => {
            // re-project: a warm start from another geometry is already
            // feasible, but guard against drift
            let mut w = w.clone();
            w.p_max = budgets.to_vec();
            for (qi, &p) in w.q.iter_mut().zip(budgets) {
                *qi = project_psd_trace(qi, p)?;
            }
            w
        }
        _ => CovarianceSet::isotropic_full_power(channels.n_tx, budgets),
    };

    let step0 = settings.step0.unwrap_or_else(|| {
        budgets.iter().copied().fold(0.0_f64, f64::max) / 10.0
    });

    let mut cur = min_rate(channels, &q, opts)?;
    let mut best_q = q.clone();
    let mut best_val = cur.r_min;
    let mut stall = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for t in 1..=settings.max_iters {
        iterations = t;

        // subgradient of the binding subset at the current iterate
        let m = gram_matrix(&cur.s_min, channels, &q);
        let chol = m.cholesky().ok_or_else(|| {
            Error::Numerical("gram matrix lost positive definiteness".into())
        })?;
        let coeff = 0.5 * opts.units.from_nats() / cur.s_min.len() as f64;
        let mut directions: Vec<Option<CMatrix>> = vec![None; g];
        let mut norm_sq = 0.0;
        for &i in &cur.s_min {
            let h = &channels.aggregates[i];
            let gi = h.adjoint() * chol.solve(h) * Complex::new(coeff, 0.0);
            let gi = (&gi + gi.adjoint()) * Complex::new(0.5, 0.0);
            norm_sq += gi.norm_squared();
            directions[i] = Some(gi);
        }
        let norm = norm_sq.sqrt();
        if norm <= 1e-14 {
            // all binding channels are numerically zero; any feasible point is
            // optimal, so the current (full-power by initialization) one stands
            converged = true;
            break;
        }

        let eta = step0 / (t as f64).sqrt() / norm;
        let mut moved_sq = 0.0;
        let mut scale_sq = 0.0;
        for i in 0..g {
            if let Some(dir) = &directions[i] {
                let stepped = &q.q[i] + dir * Complex::new(eta, 0.0);
                let projected = project_psd_trace(&stepped, budgets[i])?;
                moved_sq += (&projected - &q.q[i]).norm_squared();
                q.q[i] = projected;
            }
            scale_sq += q.q[i].norm_squared();
        }

        cur = min_rate(channels, &q, opts)?;
        if cur.r_min > best_val + settings.tol_obj * best_val.abs().max(1e-12) {
            stall = 0;
        } else {
            stall += 1;
        }
        if cur.r_min > best_val {
            best_val = cur.r_min;
            best_q = q.clone();
        }

        if moved_sq.sqrt() <= settings.tol_feas * (1.0 + scale_sq.sqrt()) {
            // projected step returned the same point: fixed point of the update
            converged = true;
            break;
        }
        if stall >= STALL_WINDOW {
            converged = true;
            break;
        }
    }

    Ok((best_q, SolverReport { iterations, converged, objective: best_val }))
}

/// Frobenius projection of a Hermitian matrix onto `{Q >= 0, tr Q <= p_max}`.
///
/// Works in the eigenbasis: eigenvalues are clipped at zero and, if their sum
/// still exceeds the budget, moved to the Euclidean projection onto the
/// simplex `{x >= 0, sum x = p_max}`.
pub fn project_psd_trace(q: &CMatrix, p_max: f64) -> Result<CMatrix> {
    if !(p_max > 0.0) || !p_max.is_finite() {
        return Err(Error::Domain(format!("projection budget {p_max} must be positive")));
    }
    if q.nrows() != q.ncols() {
        return Err(Error::Domain("projection input must be square".into()));
    }
    let asym = (q - q.adjoint()).norm();
    if asym > 1e-8 * (1.0 + q.norm()) {
        return Err(Error::NonHermitian { what: "projection input", asymmetry: asym });
    }

    let herm = (q + q.adjoint()) * Complex::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    project_capped_simplex(&mut vals, p_max);

    let n = q.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (j, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let u = eig.eigenvectors.column(j);
            out += (u * u.adjoint()) * Complex::new(v, 0.0);
        }
    }
    let out_h = out.adjoint();
    Ok((out + out_h) * Complex::new(0.5, 0.0))
}

/// In-place Euclidean projection of a real vector onto `{x >= 0, sum x <= cap}`.
///
/// Sort-based simplex projection: when the clipped mass exceeds the cap, find
/// the water level `theta` with `sum_i max(x_i - theta, 0) = cap`.
pub(crate) fn project_capped_simplex(vals: &mut [f64], cap: f64) {
    let clipped_sum: f64 = vals.iter().map(|v| v.max(0.0)).sum();
    if clipped_sum <= cap {
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        return;
    }
    let mut sorted: Vec<f64> = vals.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut prefix = 0.0;
    let mut theta = 0.0;
    for (j, &v) in sorted.iter().enumerate() {
        prefix += v;
        let candidate = (prefix - cap) / (j + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in vals.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}
