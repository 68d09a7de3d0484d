//! Shared builders for the integration tests.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flybs_core::channel::{build_channel_set, ChannelParams, ChannelSet, PhaseField, Position3};
use flybs_core::rate::CovarianceSet;
use flybs_core::CMatrix;

/// Power budget making mid-field signal-to-noise ratios order one under the
/// default 40 dB reference loss and tens-of-meters distances.
pub const P_MAX: f64 = 5.0e7;

pub fn params(n_rx: usize, n_tx: usize) -> ChannelParams {
    ChannelParams { n_rx, n_tx, ..ChannelParams::default() }
}

/// Phase field with every phase zero: all channel entries real and positive.
pub fn zero_phases(n_uavs: usize, n_users: usize, p: &ChannelParams) -> PhaseField {
    PhaseField {
        phases: vec![vec![DMatrix::zeros(p.n_rx, p.n_tx); n_users]; n_uavs],
        shadow_db: vec![vec![0.0; n_users]; n_uavs],
        seed: 0,
    }
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random scene: UAVs over an 80 m square at 50 m altitude, users on the
/// ground inside a 100 m square.
pub fn random_scene(
    rng: &mut ChaCha8Rng,
    n_uavs: usize,
    n_users: usize,
) -> (Vec<Position3>, Vec<Position3>) {
    let uavs = (0..n_uavs)
        .map(|_| Position3::new(uniform(rng, -40.0, 40.0), uniform(rng, -40.0, 40.0), 50.0))
        .collect();
    let users = (0..n_users)
        .map(|_| Position3::new(uniform(rng, -50.0, 50.0), uniform(rng, -50.0, 50.0), 0.0))
        .collect();
    (uavs, users)
}

/// Random Hermitian PSD matrix scaled to the given trace.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, trace: f64) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| {
        Complex::new(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0))
    });
    let q = &a * a.adjoint();
    let t: f64 = q.diagonal().iter().map(|z| z.re).sum();
    q * Complex::new(trace / t, 0.0)
}

/// Random feasible covariances spending between 30% and 100% of each budget.
pub fn random_covs(rng: &mut ChaCha8Rng, g: usize, n_tx: usize, p_max: f64) -> CovarianceSet {
    let q = (0..g)
        .map(|_| {
            let spend = uniform(rng, 0.3, 1.0) * p_max;
            random_psd(rng, n_tx, spend)
        })
        .collect();
    CovarianceSet::new(q, vec![p_max; g]).expect("construction is feasible")
}

pub fn build(
    uavs: &[Position3],
    users: &[Position3],
    p: &ChannelParams,
    field: &PhaseField,
) -> ChannelSet {
    build_channel_set(uavs, users, p, field).expect("geometry is valid")
}
