//! Central finite differences.

/// Central difference `(f(+delta) - f(-delta)) / (2 delta)` of a scalar map
/// expressed as a function of the displacement from the expansion point.
pub fn central_diff<F: FnMut(f64) -> f64>(mut f: F, delta: f64) -> f64 {
    assert!(delta > 0.0);
    (f(delta) - f(-delta)) / (2.0 * delta)
}

#[cfg(test)]
mod tests {
    use super::central_diff;

    #[test]
    fn quadratic_is_differentiated_exactly() {
        // central differences are exact on quadratics up to rounding
        let x0 = 1.7;
        let d = central_diff(|h| 3.0 * (x0 + h) * (x0 + h), 1e-4);
        assert!((d - 6.0 * x0).abs() < 1e-9);
    }

    #[test]
    fn transcendental_matches_to_delta_squared() {
        let x0 = 0.9;
        let d = central_diff(|h| (x0 + h).sin(), 1e-5);
        assert!((d - x0.cos()).abs() < 1e-9);
    }
}
