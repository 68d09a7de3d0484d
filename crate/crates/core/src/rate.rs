//! Achievable-rate bounds on the uplink multiple-access channel.
//!
//! With every user decoded jointly at the processing unit, the sum rate of a
//! nonempty user subset `S` is bounded by
//!
//! ```text
//! f(S) = 1/2 log2 det(I + sum_{i in S} H_i Q_i H_i^H)
//! ```
//!
//! and the fairness figure of merit is the worst per-user bound
//! `R_min = min_S f(S) / |S|`. The factor 1/2 reflects real signaling per
//! complex dimension and is kept so printed rates match the analytical model
//! exactly; a switch selects natural-log units for cross-checks.

use nalgebra::Complex;

use crate::channel::{ChannelSet, CMatrix};
use crate::error::{Error, Result};

/// Logarithm base used for all reported rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateUnits {
    /// log2: bits per channel use.
    #[default]
    Bits,
    /// ln: nats per channel use.
    Nats,
}

impl RateUnits {
    /// Multiplier converting a natural log to the selected units.
    pub fn from_nats(&self) -> f64 {
        match self {
            RateUnits::Bits => 1.0 / std::f64::consts::LN_2,
            RateUnits::Nats => 1.0,
        }
    }
}

/// Knobs of the rate computation shared by every caller.
#[derive(Debug, Clone, Copy)]
pub struct RateOptions {
    pub units: RateUnits,
    /// Hard cap on the number of users before subset enumeration is refused.
    pub subset_limit: usize,
    /// Absolute window within which subset bounds count as tied.
    pub tie_tol: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self { units: RateUnits::Bits, subset_limit: 16, tie_tol: 1e-9 }
    }
}

/// Transmit covariances `Q_i` with their power budgets.
///
/// Construction checks the feasibility contract once; the optimizer keeps the
/// invariant by only writing projected matrices.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub(crate) q: Vec<CMatrix>,
    pub(crate) p_max: Vec<f64>,
}

impl CovarianceSet {
    /// Feasibility slack used by [`CovarianceSet::new`].
    pub const FEAS_TOL: f64 = 1e-9;

    /// Validates Hermitian symmetry, positive semidefiniteness, and the trace
    /// budget of every matrix.
    pub fn new(q: Vec<CMatrix>, p_max: Vec<f64>) -> Result<Self> {
        if q.len() != p_max.len() || q.is_empty() {
            return Err(Error::Domain(
                "covariance list and budget list must be nonempty and equal length".into(),
            ));
        }
        for (i, (qi, &p)) in q.iter().zip(&p_max).enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::Domain(format!("user {i}: power budget must be positive")));
            }
            if qi.nrows() != qi.ncols() {
                return Err(Error::Domain(format!("user {i}: covariance must be square")));
            }
            let asym = (qi - qi.adjoint()).norm();
            if asym > 1e-8 * (1.0 + qi.norm()) {
                return Err(Error::NonHermitian { what: "covariance", asymmetry: asym });
            }
            let eig = nalgebra::SymmetricEigen::new(qi.clone());
            let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min_eig < -Self::FEAS_TOL * (1.0 + p) {
                return Err(Error::Domain(format!(
                    "user {i}: covariance has negative eigenvalue {min_eig:.3e}"
                )));
            }
            let trace = qi.diagonal().iter().map(|z| z.re).sum::<f64>();
            if trace > p + Self::FEAS_TOL * (1.0 + p) {
                return Err(Error::Domain(format!(
                    "user {i}: trace {trace:.6e} exceeds budget {p:.6e}"
                )));
            }
        }
        Ok(Self { q, p_max })
    }

    /// The conventional starting point: `Q_i = (P_i / n_tx) I`.
    pub fn isotropic_full_power(n_tx: usize, p_max: &[f64]) -> Self {
        let q = p_max
            .iter()
            .map(|&p| CMatrix::identity(n_tx, n_tx) * Complex::new(p / n_tx as f64, 0.0))
            .collect();
        Self { q, p_max: p_max.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self, i: usize) -> &CMatrix {
        &self.q[i]
    }

    pub fn p_max(&self, i: usize) -> f64 {
        self.p_max[i]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.p_max
    }

    /// `trace(Q_i)`, real by the Hermitian invariant.
    pub fn trace(&self, i: usize) -> f64 {
        self.q[i].diagonal().iter().map(|z| z.re).sum()
    }
}

/// Iterator over all nonempty subsets of `{0, .., g-1}`, ordered by cardinality
/// and lexicographically within a cardinality. `g = 3` yields
/// `{0} {1} {2} {0,1} {0,2} {1,2} {0,1,2}`.
pub fn subsets_iter(g: usize) -> Subsets {
    Subsets { g, current: if g == 0 { None } else { Some(vec![0]) } }
}

#[derive(Debug, Clone)]
pub struct Subsets {
    g: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        // standard next-combination: bump the rightmost index that has room
        let mut pos = k;
        loop {
            if pos == 0 {
                // cardinality exhausted; restart with k+1 leading indices
                if k == self.g {
                    self.current = None;
                } else {
                    self.current = Some((0..=k).collect());
                }
                return Some(out);
            }
            pos -= 1;
            if next[pos] < self.g - (k - pos) {
                next[pos] += 1;
                for j in (pos + 1)..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
    }
}

/// `I + sum_{i in S} H_i Q_i H_i^H`, Hermitized against rounding asymmetry.
pub fn gram_matrix(subset: &[usize], channels: &ChannelSet, covs: &CovarianceSet) -> CMatrix {
    let n = channels.aggregate_rows();
    let mut m = CMatrix::identity(n, n);
    for &i in subset {
        let h = &channels.aggregates[i];
        m += h * covs.q(i) * h.adjoint();
    }
    let mh = m.adjoint();
    (m + mh) * Complex::new(0.5, 0.0)
}

fn check_subset(subset: &[usize], g: usize) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::Domain("rate bound of an empty subset".into()));
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) || *subset.last().unwrap() >= g {
        return Err(Error::Domain(format!(
            "subset {subset:?} must be strictly increasing user indices below {g}"
        )));
    }
    Ok(())
}

fn subset_label(subset: &[usize]) -> String {
    subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Log-det of a Hermitian positive definite matrix via Cholesky, in nats.
fn log_det_hpd(m: CMatrix, subset: &[usize]) -> Result<f64> {
    match m.cholesky() {
        Some(chol) => Ok(chol.l().diagonal().iter().map(|z| 2.0 * z.re.ln()).sum()),
        None => Err(Error::NotPositiveDefinite { subset: subset_label(subset) }),
    }
}

/// Sum-rate bound `1/2 log det(I + sum_{i in S} H_i Q_i H_i^H)` of one subset,
/// in the units selected.
pub fn sum_rate_bound(
    subset: &[usize],
    channels: &ChannelSet,
    covs: &CovarianceSet,
    units: RateUnits,
) -> Result<f64> {
    check_subset(subset, channels.n_users())?;
    let ld = log_det_hpd(gram_matrix(subset, channels, covs), subset)?;
    Ok(0.5 * ld * units.from_nats())
}

/// Outcome of the max-min search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinRateResult {
    /// `min_S f(S) / |S|` in the units selected; nonnegative.
    pub r_min: f64,
    /// Minimizing subset under the tie rule, as sorted user indices.
    pub s_min: Vec<usize>,
}

/// Minimum per-user rate over every nonempty subset.
///
/// When several subsets come within `tie_tol` of the minimum, the reported
/// `s_min` is the first in (cardinality, lexicographic) order, which makes the
/// downstream gradient deterministic at crossing points.
pub fn min_rate(
    channels: &ChannelSet,
    covs: &CovarianceSet,
    opts: &RateOptions,
) -> Result<MinRateResult> {
    let g = channels.n_users();
    if g == 0 || covs.len() != g {
        return Err(Error::Domain(format!(
            "{} covariance matrices for {} users",
            covs.len(),
            g
        )));
    }
    if g > opts.subset_limit {
        return Err(Error::SubsetLimit { users: g, limit: opts.subset_limit });
    }

    // per-user receive-side terms H_i Q_i H_i^H, reused across subsets
    let n = channels.aggregate_rows();
    let terms: Vec<CMatrix> = (0..g)
        .map(|i| {
            let h = &channels.aggregates[i];
            h * covs.q(i) * h.adjoint()
        })
        .collect();

    let scale = 0.5 * opts.units.from_nats();
    let mut values = Vec::with_capacity((1usize << g) - 1);
    let mut r_min = f64::INFINITY;
    for subset in subsets_iter(g) {
        let mut m = CMatrix::identity(n, n);
        for &i in &subset {
            m += &terms[i];
        }
        let mh = m.adjoint();
        let ld = log_det_hpd((m + mh) * Complex::new(0.5, 0.0), &subset)?;
        let value = scale * ld / subset.len() as f64;
        values.push(value);
        if value < r_min {
            r_min = value;
        }
    }

    // first subset in canonical order inside the tie window
    let s_min = subsets_iter(g)
        .zip(&values)
        .find(|(_, &v)| v <= r_min + opts.tie_tol)
        .map(|(s, _)| s)
        .expect("at least one subset was scored");

    Ok(MinRateResult { r_min, s_min })
}
