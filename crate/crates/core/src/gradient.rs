//! Analytic derivatives of the max-min rate with respect to UAV positions.
//!
//! The chain starts at one channel block. With frozen phases, moving UAV `k`
//! along axis `gamma` only rescales amplitudes:
//!
//! ```text
//! dH[k][i]/dx = (alpha/2) (x_i - x_k) / ||p_i - p_k||^2 * H[k][i]
//! ```
//!
//! Embedding that block at UAV `k`'s rows of the aggregate (zeros elsewhere)
//! and applying the product rule inside the log-det gives, for subset `S`,
//!
//! ```text
//! d f(S)/dx = 1/2 tr{ (I + sum_S H Q H^H)^-1 sum_S d(H Q H^H)/dx } / ln 2
//! ```
//!
//! (the `1/ln 2` only in bit units). The max-min gradient evaluates this on
//! the binding subset and divides by its cardinality. Altitude is fixed by
//! policy, so the z component is identically zero, and the inverse is never
//! formed: the trace goes through Cholesky solves.

use nalgebra::{Complex, Vector3};

use crate::channel::{ChannelParams, ChannelSet, CMatrix, Position3};
use crate::error::{Error, Result};
use crate::rate::{gram_matrix, min_rate, CovarianceSet, MinRateResult, RateOptions};

/// Horizontal axis selector for position derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Gradient of the max-min rate at one geometry snapshot.
#[derive(Debug, Clone)]
pub struct RateGradient {
    /// Per-UAV gradient vectors; the z component is always exactly zero.
    pub per_uav: Vec<Vector3<f64>>,
    /// Rate evaluation the gradient belongs to (binding subset included).
    pub min_rate: MinRateResult,
}

/// `dH[k][i]/dx_{k,gamma}` for the current geometry.
pub fn channel_pos_derivative(
    k: usize,
    i: usize,
    axis: Axis,
    uav_positions: &[Position3],
    user_positions: &[Position3],
    channels: &ChannelSet,
    params: &ChannelParams,
) -> Result<CMatrix> {
    if k >= uav_positions.len() || i >= user_positions.len() {
        return Err(Error::Domain(format!("no channel block for UAV {k}, user {i}")));
    }
    let uav = &uav_positions[k];
    let user = &user_positions[i];
    let d = crate::channel::distance(uav, user)
        .map_err(|_| Error::DegenerateGeometry { uav: k, user: i })?;
    let g = axis.index();
    let factor = 0.5 * params.alpha * (user.coord(g) - uav.coord(g)) / (d * d);
    Ok(&channels.blocks[k][i] * Complex::new(factor, 0.0))
}

/// Derivative of `sum_{i in S} H_i Q_i H_i^H` with respect to UAV `k`'s
/// position along `axis`. Hermitian by construction.
pub fn hqh_derivative_sum(
    subset: &[usize],
    k: usize,
    axis: Axis,
    uav_positions: &[Position3],
    user_positions: &[Position3],
    channels: &ChannelSet,
    covs: &CovarianceSet,
    params: &ChannelParams,
) -> Result<CMatrix> {
    let n = channels.aggregate_rows();
    let n_rx = channels.n_rx;
    let mut sum = CMatrix::zeros(n, n);
    for &i in subset {
        let dh = channel_pos_derivative(k, i, axis, uav_positions, user_positions, channels, params)?;
        // embed the block derivative at UAV k's rows of the aggregate
        let mut e = CMatrix::zeros(n, channels.n_tx);
        e.view_mut((k * n_rx, 0), (n_rx, channels.n_tx)).copy_from(&dh);
        let h = &channels.aggregates[i];
        let cross = &e * covs.q(i) * h.adjoint();
        let cross_h = cross.adjoint();
        sum += cross + cross_h;
    }
    Ok(sum)
}

/// Maximum imaginary residue tolerated in the (mathematically real) trace,
/// relative to its magnitude.
const TRACE_IMAG_TOL: f64 = 1e-10;

/// `d f(S) / dx_{k,gamma}`: derivative of one subset's sum-rate bound.
pub fn subset_rate_derivative(
    subset: &[usize],
    k: usize,
    axis: Axis,
    uav_positions: &[Position3],
    user_positions: &[Position3],
    channels: &ChannelSet,
    covs: &CovarianceSet,
    params: &ChannelParams,
    opts: &RateOptions,
) -> Result<f64> {
    let m = gram_matrix(subset, channels, covs);
    let chol = m.cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        subset: subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
    })?;
    let d = hqh_derivative_sum(subset, k, axis, uav_positions, user_positions, channels, covs, params)?;
    // tr(M^-1 D) through a multi-column solve; M^-1 itself is never formed
    let solved = chol.solve(&d);
    let trace: Complex<f64> = solved.diagonal().iter().sum();
    if trace.im.abs() > TRACE_IMAG_TOL * trace.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "rate-derivative trace has imaginary residue {:.3e}",
            trace.im
        )));
    }
    Ok(0.5 * opts.units.from_nats() * trace.re)
}

/// Gradient of the max-min rate with respect to every UAV position.
///
/// Evaluates `min_rate` once, then differentiates the binding subset's bound.
/// At an exact tie the subset chosen by the tie rule provides the
/// (sub)gradient, so the result is deterministic everywhere.
pub fn min_rate_gradient(
    uav_positions: &[Position3],
    user_positions: &[Position3],
    channels: &ChannelSet,
    covs: &CovarianceSet,
    params: &ChannelParams,
    opts: &RateOptions,
) -> Result<RateGradient> {
    let result = min_rate(channels, covs, opts)?;
    let card = result.s_min.len() as f64;
    let mut per_uav = Vec::with_capacity(uav_positions.len());
    for k in 0..uav_positions.len() {
        let gx = subset_rate_derivative(
            &result.s_min, k, Axis::X, uav_positions, user_positions, channels, covs, params, opts,
        )? / card;
        let gy = subset_rate_derivative(
            &result.s_min, k, Axis::Y, uav_positions, user_positions, channels, covs, params, opts,
        )? / card;
        per_uav.push(Vector3::new(gx, gy, 0.0));
    }
    Ok(RateGradient { per_uav, min_rate: result })
}
