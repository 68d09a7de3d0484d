//! Euclidean projection onto `{x >= 0, sum x <= cap}` by active-set enumeration.
//!
//! Solves `min ||x - y||^2` exactly by trying every combination of active
//! constraints and keeping the best feasible KKT-free candidate. Exponential in
//! the dimension, which is fine for the matrix sizes the tests use.

/// Projects `y` onto the capped simplex `{x : x_i >= 0, sum x <= cap}`.
///
/// Panics on dimensions above 12 (2^n candidate sets) or a negative cap.
pub fn project_capped_simplex_qp(y: &[f64], cap: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n <= 12, "active-set enumeration capped at 12 variables");
    assert!(cap >= 0.0, "cap must be nonnegative");

    let feas_tol = 1e-10;
    let mut best: Option<(f64, Vec<f64>)> = None;
    // zero_mask selects coordinates pinned at zero; the sum constraint is tried
    // both slack and tight for every mask.
    for zero_mask in 0usize..(1usize << n) {
        for sum_tight in [false, true] {
            let free: Vec<usize> = (0..n).filter(|i| zero_mask & (1 << i) == 0).collect();
            let mut x = vec![0.0; n];
            if sum_tight {
                if free.is_empty() {
                    continue;
                }
                // equality-constrained least squares: x_i = y_i - theta on free set
                let theta =
                    (free.iter().map(|&i| y[i]).sum::<f64>() - cap) / free.len() as f64;
                for &i in &free {
                    x[i] = y[i] - theta;
                }
            } else {
                for &i in &free {
                    x[i] = y[i];
                }
            }
            if x.iter().any(|v| *v < -feas_tol) {
                continue;
            }
            if x.iter().sum::<f64>() > cap + feas_tol {
                continue;
            }
            for v in &mut x {
                *v = v.max(0.0);
            }
            let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, x));
            }
        }
    }
    best.expect("x = 0 is always feasible").1
}
