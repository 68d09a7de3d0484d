//! Brute-force max-min rate evaluation over a MIMO multiple-access channel.
//!
//! Enumerates every nonempty user subset by bitmask, scores each with the
//! half-log-det bound computed through [`crate::cofactor_det`], and applies the
//! tie rule (smallest cardinality first, then lexicographic index order) by
//! explicit comparison. Written without reference to the production code paths.

use nalgebra::{Complex, DMatrix};

use crate::det::cofactor_det;

type C64 = Complex<f64>;

/// Result of the exhaustive search.
#[derive(Debug, Clone)]
pub struct ExhaustiveMinRate {
    /// Minimum per-user sum-rate bound over all nonempty subsets.
    pub r_min: f64,
    /// Subset attaining the minimum under the tie rule, as sorted user indices.
    pub s_min: Vec<usize>,
    /// Bound value for every subset, indexed by bitmask (index 0 unused).
    pub per_subset: Vec<f64>,
}

/// Exhaustively computes min over nonempty subsets S of
/// `1/(2|S|) * log2 det(I + sum_{i in S} H_i Q_i H_i^H)`.
///
/// `channels[i]` is the aggregate receive matrix of user `i` and `covariances[i]`
/// its transmit covariance. `tie_tol` is the absolute window within which subset
/// values count as tied. Set `nats` to score with the natural log instead of log2.
pub fn exhaustive_min_rate(
    channels: &[DMatrix<C64>],
    covariances: &[DMatrix<C64>],
    tie_tol: f64,
    nats: bool,
) -> ExhaustiveMinRate {
    let g = channels.len();
    assert!(g >= 1 && g == covariances.len());
    assert!(g <= 16, "exhaustive enumeration capped at 16 users");
    let n = channels[0].nrows();

    let mut per_subset = vec![f64::NAN; 1usize << g];
    let mut best_value = f64::INFINITY;
    for mask in 1usize..(1usize << g) {
        let mut m = DMatrix::<C64>::identity(n, n);
        for i in 0..g {
            if mask & (1 << i) != 0 {
                m += &channels[i] * &covariances[i] * channels[i].adjoint();
            }
        }
        let det = cofactor_det(&m);
        assert!(
            det.im.abs() <= 1e-9 * det.re.abs().max(1.0),
            "determinant of a Hermitian matrix should be real"
        );
        let log_det = if nats { det.re.ln() } else { det.re.log2() };
        let value = 0.5 * log_det / mask.count_ones() as f64;
        per_subset[mask] = value;
        if value < best_value {
            best_value = value;
        }
    }

    // Tie rule applied after the fact: among all subsets within tie_tol of the
    // minimum, pick the smallest cardinality, breaking remaining ties by
    // lexicographic comparison of the sorted index lists.
    let mut s_min: Option<Vec<usize>> = None;
    for mask in 1usize..(1usize << g) {
        if per_subset[mask] > best_value + tie_tol {
            continue;
        }
        let indices: Vec<usize> = (0..g).filter(|i| mask & (1 << i) != 0).collect();
        let better = match &s_min {
            None => true,
            Some(cur) => {
                indices.len() < cur.len() || (indices.len() == cur.len() && indices < *cur)
            }
        };
        if better {
            s_min = Some(indices);
        }
    }

    ExhaustiveMinRate {
        r_min: best_value,
        s_min: s_min.expect("at least one nonempty subset"),
        per_subset,
    }
}
