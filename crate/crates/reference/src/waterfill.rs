//! Closed-form single-user MIMO capacity via water-filling.

use nalgebra::{Complex, DMatrix};

type C64 = Complex<f64>;

/// Water-filling solution for one user: optimal rate and per-mode powers.
#[derive(Debug, Clone)]
pub struct WaterFilling {
    /// Capacity 0.5 * sum_j log2(1 + sigma_j^2 p_j) at the optimal allocation.
    pub rate: f64,
    /// Optimal power per singular mode, ordered like the singular values.
    pub powers: Vec<f64>,
    /// Singular values of the channel, descending.
    pub sigmas: Vec<f64>,
}

/// Computes the capacity of `0.5 * log2 det(I + H Q H^H)` over `Q >= 0`,
/// `tr Q <= p_total`, by pouring power over the singular modes of `H`.
pub fn water_filling_rate(h: &DMatrix<C64>, p_total: f64) -> WaterFilling {
    assert!(p_total > 0.0, "power budget must be positive");
    let svd = nalgebra::SVD::new(h.clone(), false, false);
    let mut sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // inverse gains in ascending order correspond to descending sigmas
    let floor = 1e-12 * sigmas.first().copied().unwrap_or(0.0).max(1.0);
    let inv_gains: Vec<f64> = sigmas
        .iter()
        .filter(|s| **s > floor)
        .map(|s| 1.0 / (s * s))
        .collect();

    let mut powers = vec![0.0; sigmas.len()];
    let mut rate = 0.0;
    if !inv_gains.is_empty() {
        // Try water levels using the r strongest modes until the level sits
        // below the next inverse gain; with ascending inv_gains the first
        // consistent r is the answer.
        let mut level = 0.0;
        let mut active = 0;
        for r in 1..=inv_gains.len() {
            let candidate = (p_total + inv_gains[..r].iter().sum::<f64>()) / r as f64;
            if candidate > inv_gains[r - 1] && (r == inv_gains.len() || candidate <= inv_gains[r]) {
                level = candidate;
                active = r;
                break;
            }
        }
        assert!(active > 0, "water level search must terminate");
        for j in 0..active {
            powers[j] = level - inv_gains[j];
            rate += 0.5 * (sigmas[j] * sigmas[j] * level).log2();
        }
    }

    WaterFilling { rate, powers, sigmas }
}
