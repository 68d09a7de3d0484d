//! Geometry and uplink channel synthesis.
//!
//! Each user `i` transmits with `n_tx` antennas; each UAV `k` receives with
//! `n_rx`. The block `H[k][i]` follows a free-space amplitude law derived from
//! the log-distance path loss
//!
//! ```text
//! PL(d) = 10 alpha log10(d / d0) + PL(d0) + w   [dB]
//! ```
//!
//! so that `|H_mn|^2 = beta d^-alpha 10^(-w/10)` with
//! `beta = 10^(-PL(d0)/10) d0^alpha`. Entry phases are i.i.d. uniform on
//! `[0, 2pi)`, drawn once per run and frozen per `(k, i, m, n)`: moving a UAV
//! rescales amplitudes but never re-rolls phases, which keeps the rate field
//! differentiable in the UAV positions. The processing unit stacks the per-UAV
//! blocks of user `i` vertically, in UAV index order, into the aggregate
//! receive matrix used by all rate computations.

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Complex channel block or aggregate.
pub type CMatrix = DMatrix<Complex<f64>>;

/// Point in meters. Users sit at `z = 0`; UAVs fly at a fixed `z = h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Coordinate along an axis index: 0 = x, 1 = y, 2 = z.
    pub fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis index out of range"),
        }
    }
}

/// Euclidean distance in meters. Zero distance is rejected because the
/// path-loss law diverges there.
pub fn distance(a: &Position3, b: &Position3) -> Result<f64> {
    let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
    if d == 0.0 {
        return Err(Error::Domain("zero distance between positions".into()));
    }
    Ok(d)
}

/// Propagation constants and antenna counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Path-loss exponent, > 0. Free space is 2.
    pub alpha: f64,
    /// Reference distance in meters, > 0.
    pub d0: f64,
    /// Path loss at the reference distance, in dB.
    pub pl_d0_db: f64,
    /// Log-normal shadowing standard deviation in dB; 0 disables shadowing.
    pub sigma_shadow_db: f64,
    /// Receive antennas per UAV.
    pub n_rx: usize,
    /// Transmit antennas per user.
    pub n_tx: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            d0: 1.0,
            pl_d0_db: 40.0,
            sigma_shadow_db: 0.0,
            n_rx: 8,
            n_tx: 1,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::Validation("channel.alpha must be positive".into()));
        }
        if !(self.d0 > 0.0) || !self.d0.is_finite() {
            return Err(Error::Validation("channel.d0 must be positive".into()));
        }
        if !self.pl_d0_db.is_finite() {
            return Err(Error::Validation("channel.pl_d0_db must be finite".into()));
        }
        if !(self.sigma_shadow_db >= 0.0) || !self.sigma_shadow_db.is_finite() {
            return Err(Error::Validation(
                "channel.sigma_shadow_db must be nonnegative".into(),
            ));
        }
        if self.n_rx < 1 {
            return Err(Error::Validation("channel.n_rx must be at least 1".into()));
        }
        if self.n_tx < 1 {
            return Err(Error::Validation("channel.n_tx must be at least 1".into()));
        }
        Ok(())
    }

    /// Reference gain `beta = 10^(-PL(d0)/10) d0^alpha`, so that
    /// `beta d^-alpha` is the linear power gain at distance `d`.
    pub fn beta(&self) -> f64 {
        10f64.powf(-self.pl_d0_db / 10.0) * self.d0.powf(self.alpha)
    }
}

/// Log-distance path loss in dB at distance `d`, including a shadowing term
/// already expressed in dB (pass 0 when shadowing is off).
pub fn path_loss_db(d: f64, params: &ChannelParams, shadow_db: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonpositiveDistance { distance: d });
    }
    Ok(10.0 * params.alpha * (d / params.d0).log10() + params.pl_d0_db + shadow_db)
}

/// Frozen small-scale state of a run: one phase per `(uav, user, rx, tx)`
/// antenna pair and one shadowing draw per `(uav, user)` link.
///
/// Draw order is fixed (uav-major, then user, then row-major within the
/// block; shadowing after all phases) so a seed pins every value across
/// platforms. The generator is ChaCha8 seeded with the scenario seed.
#[derive(Debug, Clone)]
pub struct PhaseField {
    /// `phases[k][i]` holds the `n_rx x n_tx` phase block in radians.
    pub phases: Vec<Vec<DMatrix<f64>>>,
    /// `shadow_db[k][i]` in dB; all zero when shadowing is disabled.
    pub shadow_db: Vec<Vec<f64>>,
    /// Seed the field was drawn from.
    pub seed: u64,
}

impl PhaseField {
    pub fn draw(n_uavs: usize, n_users: usize, params: &ChannelParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = std::f64::consts::TAU;
        let mut phases = Vec::with_capacity(n_uavs);
        for _ in 0..n_uavs {
            let mut row = Vec::with_capacity(n_users);
            for _ in 0..n_users {
                let mut block = DMatrix::zeros(params.n_rx, params.n_tx);
                for m in 0..params.n_rx {
                    for n in 0..params.n_tx {
                        block[(m, n)] = tau * rng.random::<f64>();
                    }
                }
                row.push(block);
            }
            phases.push(row);
        }
        let mut shadow_db = vec![vec![0.0; n_users]; n_uavs];
        if params.sigma_shadow_db > 0.0 {
            let normal = Normal::new(0.0, params.sigma_shadow_db)
                .expect("validated sigma is finite and nonnegative");
            for row in shadow_db.iter_mut() {
                for w in row.iter_mut() {
                    *w = normal.sample(&mut rng);
                }
            }
        }
        Self { phases, shadow_db, seed }
    }

    pub fn n_uavs(&self) -> usize {
        self.phases.len()
    }

    pub fn n_users(&self) -> usize {
        self.phases.first().map_or(0, Vec::len)
    }
}

/// One channel block `H[k][i]` from the stored phase block and the current
/// geometry: entry `(m, n)` is `sqrt(beta d^-alpha 10^(-w/10)) e^(j phi_mn)`.
pub fn channel_matrix(
    uav: &Position3,
    user: &Position3,
    params: &ChannelParams,
    phase: &DMatrix<f64>,
    shadow_db: f64,
) -> Result<CMatrix> {
    let d = distance(uav, user)?;
    let amplitude =
        (params.beta() * d.powf(-params.alpha) * 10f64.powf(-shadow_db / 10.0)).sqrt();
    Ok(CMatrix::from_fn(phase.nrows(), phase.ncols(), |m, n| {
        Complex::from_polar(amplitude, phase[(m, n)])
    }))
}

/// Vertical stack of one user's per-UAV blocks, in UAV index order.
pub fn aggregate_channel(blocks: &[CMatrix]) -> CMatrix {
    assert!(!blocks.is_empty(), "aggregate of zero blocks");
    let n_rx = blocks[0].nrows();
    let n_tx = blocks[0].ncols();
    let mut out = CMatrix::zeros(n_rx * blocks.len(), n_tx);
    for (k, block) in blocks.iter().enumerate() {
        assert_eq!((block.nrows(), block.ncols()), (n_rx, n_tx));
        out.view_mut((k * n_rx, 0), (n_rx, n_tx)).copy_from(block);
    }
    out
}

/// All channel blocks and aggregates for one geometry snapshot.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `blocks[k][i]`: the `n_rx x n_tx` link from user `i` to UAV `k`.
    pub blocks: Vec<Vec<CMatrix>>,
    /// `aggregates[i]`: the `(K n_rx) x n_tx` stacked receive matrix of user `i`.
    pub aggregates: Vec<CMatrix>,
    pub n_rx: usize,
    pub n_tx: usize,
}

impl ChannelSet {
    pub fn n_uavs(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_users(&self) -> usize {
        self.aggregates.len()
    }

    /// Rows of the aggregate matrices, `K * n_rx`.
    pub fn aggregate_rows(&self) -> usize {
        self.n_uavs() * self.n_rx
    }
}

/// Builds every block from the current positions and the frozen phase field.
///
/// Errors identify the first co-located (UAV, user) pair by index.
pub fn build_channel_set(
    uav_positions: &[Position3],
    user_positions: &[Position3],
    params: &ChannelParams,
    field: &PhaseField,
) -> Result<ChannelSet> {
    let n_uavs = uav_positions.len();
    let n_users = user_positions.len();
    if n_uavs == 0 || n_users == 0 {
        return Err(Error::Validation(
            "channel set needs at least one UAV and one user".into(),
        ));
    }
    if field.n_uavs() != n_uavs || field.n_users() != n_users {
        return Err(Error::Domain(format!(
            "phase field shaped {}x{} does not match {} UAVs and {} users",
            field.n_uavs(),
            field.n_users(),
            n_uavs,
            n_users
        )));
    }

    let mut blocks = Vec::with_capacity(n_uavs);
    for (k, uav) in uav_positions.iter().enumerate() {
        let mut row = Vec::with_capacity(n_users);
        for (i, user) in user_positions.iter().enumerate() {
            if distance(uav, user).is_err() {
                return Err(Error::DegenerateGeometry { uav: k, user: i });
            }
            row.push(channel_matrix(
                uav,
                user,
                params,
                &field.phases[k][i],
                field.shadow_db[k][i],
            )?);
        }
        blocks.push(row);
    }

    let aggregates = (0..n_users)
        .map(|i| {
            let per_uav: Vec<CMatrix> = (0..n_uavs).map(|k| blocks[k][i].clone()).collect();
            aggregate_channel(&per_uav)
        })
        .collect();

    Ok(ChannelSet { blocks, aggregates, n_rx: params.n_rx, n_tx: params.n_tx })
}
