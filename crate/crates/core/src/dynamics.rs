//! Per-axis closed-loop UAV model.
//!
//! Horizontal motion decouples per axis under small tilt angles. With state
//! `s = (x, v, o, od)` (position, velocity, tilt, tilt rate) the inner control
//! law `u = p r - k1 v - k2 o - k3 od` applied to the double-integrator-
//! through-attitude plant gives
//!
//! ```text
//!     | 0   1    0    0  |       | 0 |
//! A = | 0   0    g    0  |   b = | 0 |
//!     | 0   0    0    1  |       | 0 |
//!     | 0  -k1  -k2  -k3 |       | p |
//! ```
//!
//! driven by the commanded reference `r` (here: a rate-gradient component).
//! The velocity subsystem `(v, o, od)` has characteristic polynomial
//! `l^3 + k3 l^2 + k2 l + g k1`, Hurwitz iff all gains are positive and
//! `k3 k2 > g k1`; the prefilter `p = k1` makes the steady-state velocity
//! track `r` with unit gain. Discretization is exact zero-order hold via the
//! exponential of the augmented 5x5 matrix, never an Euler or Runge-Kutta
//! approximation, so halving the step cannot move sampled states.

use nalgebra::{DMatrix, Matrix3, Matrix4, Matrix5, Vector3, Vector4};

use crate::error::{Error, Result};

/// Gravitational acceleration in m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Tilt magnitude in radians beyond which the small-angle model is suspect.
pub const SMALL_ANGLE_LIMIT: f64 = 0.5;

/// Feedback gains of the inner loop plus the reference prefilter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerGains {
    /// Velocity feedback, m*s units.
    pub k1: f64,
    /// Tilt feedback, s^-2 units.
    pub k2: f64,
    /// Tilt-rate feedback, s^-1 units.
    pub k3: f64,
    /// Reference prefilter.
    pub p: f64,
}

impl Default for ControllerGains {
    /// Default gain set used throughout: `k = (0.5477, 23.9683, 6.9308)` with
    /// the unity-tracking prefilter.
    fn default() -> Self {
        let k1 = 0.5477;
        Self { k1, k2: 23.9683, k3: 6.9308, p: prefilter_for_unity_tracking(k1) }
    }
}

impl ControllerGains {
    pub fn new(k1: f64, k2: f64, k3: f64, p: f64) -> Self {
        Self { k1, k2, k3, p }
    }

    /// Gains with the prefilter chosen for unit steady-state velocity gain.
    pub fn with_unity_prefilter(k1: f64, k2: f64, k3: f64) -> Self {
        Self { k1, k2, k3, p: prefilter_for_unity_tracking(k1) }
    }
}

/// Prefilter making the DC gain from reference to velocity exactly one:
/// at equilibrium `0 = p r - k1 v`, so `p = k1`.
pub fn prefilter_for_unity_tracking(k1: f64) -> f64 {
    k1
}

/// Routh margin `k3 k2 - g k1` of the velocity subsystem; positive together
/// with positive gains means Hurwitz.
pub fn routh_margin(gains: &ControllerGains, gravity: f64) -> f64 {
    gains.k3 * gains.k2 - gravity * gains.k1
}

/// Continuous-time closed loop of one axis.
#[derive(Debug, Clone, Copy)]
pub struct ClosedLoopSystem {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub gains: ControllerGains,
    pub gravity: f64,
}

/// Assembles the closed-loop matrices, rejecting non-Hurwitz gain sets unless
/// `allow_unstable` is set (useful for demonstrating divergence).
pub fn closed_loop(
    gains: &ControllerGains,
    gravity: f64,
    allow_unstable: bool,
) -> Result<ClosedLoopSystem> {
    if !(gravity > 0.0) || !gravity.is_finite() {
        return Err(Error::Validation("gravity must be positive".into()));
    }
    for (name, v) in [("k1", gains.k1), ("k2", gains.k2), ("k3", gains.k3), ("p", gains.p)] {
        if !v.is_finite() {
            return Err(Error::Validation(format!("gain {name} must be finite")));
        }
    }
    let margin = routh_margin(gains, gravity);
    let hurwitz = gains.k1 > 0.0 && gains.k2 > 0.0 && gains.k3 > 0.0 && margin > 0.0;
    if !hurwitz && !allow_unstable {
        return Err(Error::UnstableGains { margin });
    }
    let a = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, gravity, 0.0,
        0.0, 0.0, 0.0, 1.0,
        0.0, -gains.k1, -gains.k2, -gains.k3,
    );
    let b = Vector4::new(0.0, 0.0, 0.0, gains.p);
    Ok(ClosedLoopSystem { a, b, gains: *gains, gravity })
}

impl ClosedLoopSystem {
    /// The self-contained `(v, o, od)` subsystem; position is its integral.
    pub fn velocity_subsystem(&self) -> Matrix3<f64> {
        Matrix3::new(
            0.0, self.gravity, 0.0,
            0.0, 0.0, 1.0,
            -self.gains.k1, -self.gains.k2, -self.gains.k3,
        )
    }
}

/// Exact discretization of one axis at a fixed step.
#[derive(Debug, Clone, Copy)]
pub struct ZohAxis {
    pub ad: Matrix4<f64>,
    pub bd: Vector4<f64>,
    pub dt: f64,
}

/// Zero-order-hold discretization: the exponential of `[[A, b], [0, 0]] dt`
/// carries `Ad` in its top-left block and `bd` in its last column.
pub fn discretize_zoh(sys: &ClosedLoopSystem, dt: f64) -> Result<ZohAxis> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Validation(format!("time step {dt} must be positive")));
    }
    let mut aug = Matrix5::<f64>::zeros();
    aug.fixed_view_mut::<4, 4>(0, 0).copy_from(&(sys.a * dt));
    aug.fixed_view_mut::<4, 1>(0, 4).copy_from(&(sys.b * dt));
    let e = aug.exp();
    Ok(ZohAxis {
        ad: e.fixed_view::<4, 4>(0, 0).into_owned(),
        bd: e.fixed_view::<4, 1>(0, 4).into_owned(),
        dt,
    })
}

/// State of one axis: position, velocity, tilt, tilt rate.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxisState {
    pub x: f64,
    pub v: f64,
    pub o: f64,
    pub od: f64,
}

impl AxisState {
    pub fn at_rest(x: f64) -> Self {
        Self { x, ..Self::default() }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.x, self.v, self.o, self.od)
    }

    pub fn from_vector(s: &Vector4<f64>) -> Self {
        Self { x: s[0], v: s[1], o: s[2], od: s[3] }
    }

    /// Whether the tilt stays inside the linearization's validity region.
    pub fn small_angle_ok(&self) -> bool {
        self.o.abs() < SMALL_ANGLE_LIMIT
    }
}

/// One ZOH step with the reference (gradient component) held over `dt`.
pub fn step_controlled(state: &AxisState, grad: f64, zoh: &ZohAxis) -> AxisState {
    AxisState::from_vector(&(zoh.ad * state.as_vector() + zoh.bd * grad))
}

/// Idealized kinematic baseline: the position moves along the gradient with
/// velocity `mu * grad`, integrated over `dt`.
pub fn step_gradient_method(pos: &Vector3<f64>, grad: &Vector3<f64>, mu: f64, dt: f64) -> Vector3<f64> {
    pos + grad * (mu * dt)
}

/// Result of an LQR synthesis.
#[derive(Debug, Clone)]
pub struct LqrDesign {
    pub gains: ControllerGains,
    /// Stabilizing Riccati solution, embedded in the full state order
    /// (position row and column are zero).
    pub riccati: Matrix4<f64>,
    /// Frobenius norm of the Riccati residual at the solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Newton-Kleinman iterations allowed before the design is declared failed.
const LQR_MAX_ITERS: usize = 60;

/// LQR state feedback for the open-loop plant
/// `x. = v, v. = g o, o. = od, od. = u` with cost `int x^T Qw x + r u^2`.
///
/// Position must carry zero weight (its row and column of `q_weights` are
/// required to vanish): the feedback law uses only `(v, o, od)`, and position
/// is steered through the velocity reference instead. Solved by
/// Newton-Kleinman iteration on the reduced 3-state Riccati equation from a
/// stabilizing seed, with a Lyapunov equation solved exactly per step.
pub fn lqr_design(q_weights: &Matrix4<f64>, r: f64, gravity: f64) -> Result<LqrDesign> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Validation("control weight r must be positive".into()));
    }
    if !(gravity > 0.0) || !gravity.is_finite() {
        return Err(Error::Validation("gravity must be positive".into()));
    }
    if (q_weights - q_weights.transpose()).norm() > 1e-9 * (1.0 + q_weights.norm()) {
        return Err(Error::Domain("state weight matrix must be symmetric".into()));
    }
    for j in 0..4 {
        if q_weights[(0, j)] != 0.0 || q_weights[(j, 0)] != 0.0 {
            return Err(Error::Domain(
                "position carries no weight: first row and column of the state \
                 weight matrix must be zero"
                    .into(),
            ));
        }
    }
    let q3 = q_weights.fixed_view::<3, 3>(1, 1).into_owned();
    let eig = nalgebra::SymmetricEigen::new(q3);
    if eig.eigenvalues.iter().any(|l| *l < -1e-12) {
        return Err(Error::Domain("state weight matrix must be positive semidefinite".into()));
    }

    // reduced plant: (v, o, od) with input on the tilt-rate derivative
    let a3 = Matrix3::new(
        0.0, gravity, 0.0,
        0.0, 0.0, 1.0,
        0.0, 0.0, 0.0,
    );
    let b3 = Vector3::new(0.0, 0.0, 1.0);

    // seed gains place all three closed-loop poles at -1 for any gravity
    let mut k = Vector3::new(1.0 / gravity, 3.0, 3.0);
    let mut p3 = Matrix3::zeros();
    let mut iterations = 0;
    let mut settled = false;
    for it in 1..=LQR_MAX_ITERS {
        iterations = it;
        let a_cl = a3 - b3 * k.transpose();
        let w = q3 + k * k.transpose() * r;
        p3 = lyapunov_3(&a_cl, &w).ok_or_else(|| Error::Design {
            reason: "Lyapunov operator became singular during Newton-Kleinman".into(),
        })?;
        let k_next: Vector3<f64> = p3.row(2).transpose() / r;
        let delta = (k_next - k).norm();
        k = k_next;
        if delta <= 1e-13 * (1.0 + k.norm()) {
            settled = true;
            break;
        }
    }

    // Riccati residual on the reduced equation
    let res3 = a3.transpose() * p3 + p3 * a3 - p3 * b3 * b3.transpose() * p3 / r + q3;
    let residual = res3.norm();
    if !settled || residual > 1e-8 * (1.0 + p3.norm()) {
        return Err(Error::Design {
            reason: format!("Riccati iteration did not converge (residual {residual:.3e})"),
        });
    }

    let gains = ControllerGains::with_unity_prefilter(k[0], k[1], k[2]);
    let margin = routh_margin(&gains, gravity);
    if !(gains.k1 > 0.0 && gains.k2 > 0.0 && gains.k3 > 0.0 && margin > 0.0) {
        return Err(Error::Design {
            reason: format!(
                "weights produced a non-Hurwitz closed loop (Routh margin {margin:.3e}); \
                 the velocity weight must be positive"
            ),
        });
    }

    let mut riccati = Matrix4::zeros();
    riccati.fixed_view_mut::<3, 3>(1, 1).copy_from(&p3);
    Ok(LqrDesign { gains, riccati, residual, iterations })
}

/// Solves `A^T P + P A = -W` for a 3x3 `P` by LU on the vectorized system.
fn lyapunov_3(a: &Matrix3<f64>, w: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let at = DMatrix::from_fn(3, 3, |i, j| a[(j, i)]);
    let eye = DMatrix::<f64>::identity(3, 3);
    let big = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = DMatrix::from_iterator(9, 1, w.iter().map(|v| -v));
    let sol = big.lu().solve(&rhs)?;
    let p = Matrix3::from_iterator(sol.iter().copied());
    Some((p + p.transpose()) * 0.5)
}
