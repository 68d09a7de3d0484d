//! Analytic position derivatives against central finite differences.

mod common;

use nalgebra::{Complex, Rotation2, Vector2, Vector3};

use flybs_core::channel::{channel_matrix, PhaseField, Position3};
use flybs_core::gradient::{
    channel_pos_derivative, hqh_derivative_sum, min_rate_gradient, subset_rate_derivative, Axis,
};
use flybs_core::rate::{min_rate, sum_rate_bound, CovarianceSet, RateOptions, RateUnits};
use flybs_core::CMatrix;
use flybs_reference::central_diff;

use common::{build, params, random_covs, random_scene, rng, zero_phases, P_MAX};

const DELTA: f64 = 1e-4;

fn opts() -> RateOptions {
    RateOptions::default()
}

/// Positions with UAV `k` displaced by `s` along `axis`.
fn displaced(uavs: &[Position3], k: usize, axis: Axis, s: f64) -> Vec<Position3> {
    let mut moved = uavs.to_vec();
    match axis {
        Axis::X => moved[k].x += s,
        Axis::Y => moved[k].y += s,
    }
    moved
}

#[test]
fn overhead_uav_has_zero_gradient() {
    let p = params(2, 1);
    let field = PhaseField::draw(1, 1, &p, 2);
    let uavs = [Position3::new(3.0, -2.0, 50.0)];
    let users = [Position3::new(3.0, -2.0, 0.0)];
    let set = build(&uavs, &users, &p, &field);
    let covs = CovarianceSet::isotropic_full_power(1, &[P_MAX]);
    for axis in [Axis::X, Axis::Y] {
        let dh = channel_pos_derivative(0, 0, axis, &uavs, &users, &set, &p).unwrap();
        assert!(dh.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    }
    let g = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
    assert_eq!(g.per_uav[0], Vector3::zeros());
}

#[test]
fn scalar_chain_rule_has_the_inverse_distance_form() {
    // beta = 1, alpha = 2, aligned flat geometry: dH/dx = -H/d exactly
    let mut p = params(1, 1);
    p.pl_d0_db = 0.0;
    let field = zero_phases(1, 1, &p);
    let d = 20.0;
    let uavs = [Position3::new(d, 0.0, 0.0)];
    let users = [Position3::new(0.0, 0.0, 0.0)];
    let set = build(&uavs, &users, &p, &field);
    let h = set.blocks[0][0][(0, 0)];
    let dh = channel_pos_derivative(0, 0, Axis::X, &uavs, &users, &set, &p).unwrap();
    assert!((dh[(0, 0)].re - (-h.re / d)).abs() < 1e-15);
    assert_eq!(dh[(0, 0)].im, 0.0);
}

#[test]
fn channel_derivative_matches_finite_differences() {
    let p = params(3, 2);
    let field = PhaseField::draw(2, 2, &p, 10);
    let mut r = rng(10);
    let (uavs, users) = random_scene(&mut r, 2, 2);
    let set = build(&uavs, &users, &p, &field);
    for (k, i) in [(0usize, 0usize), (1, 1), (0, 1)] {
        for axis in [Axis::X, Axis::Y] {
            let analytic = channel_pos_derivative(k, i, axis, &uavs, &users, &set, &p).unwrap();
            for m in 0..p.n_rx {
                for n in 0..p.n_tx {
                    let at = |s: f64, im: bool| {
                        let moved = displaced(&uavs, k, axis, s);
                        let h = channel_matrix(&moved[k], &users[i], &p, &field.phases[k][i], 0.0)
                            .unwrap();
                        if im { h[(m, n)].im } else { h[(m, n)].re }
                    };
                    let num_re = central_diff(|s| at(s, false), DELTA);
                    let num_im = central_diff(|s| at(s, true), DELTA);
                    let scale = analytic[(m, n)].norm().max(1e-12);
                    assert!(
                        (analytic[(m, n)].re - num_re).abs() < 1e-6 * scale,
                        "re k={k} i={i} ({m},{n})"
                    );
                    assert!(
                        (analytic[(m, n)].im - num_im).abs() < 1e-6 * scale,
                        "im k={k} i={i} ({m},{n})"
                    );
                }
            }
        }
    }
}

#[test]
fn hqh_derivative_is_hermitian_and_matches_differences() {
    let p = params(2, 2);
    let field = PhaseField::draw(2, 2, &p, 20);
    let mut r = rng(20);
    let (uavs, users) = random_scene(&mut r, 2, 2);
    let set = build(&uavs, &users, &p, &field);
    let covs = random_covs(&mut r, 2, 2, P_MAX);
    let subset = [0usize, 1];
    for k in 0..2 {
        for axis in [Axis::X, Axis::Y] {
            let analytic =
                hqh_derivative_sum(&subset, k, axis, &uavs, &users, &set, &covs, &p).unwrap();
            assert!((&analytic - analytic.adjoint()).norm() < 1e-12 * (1.0 + analytic.norm()));

            let total = |s: f64| -> CMatrix {
                let moved = displaced(&uavs, k, axis, s);
                let ch = build(&moved, &users, &p, &field);
                let n = ch.aggregate_rows();
                let mut m = CMatrix::zeros(n, n);
                for &i in &subset {
                    let h = &ch.aggregates[i];
                    m += h * covs.q(i) * h.adjoint();
                }
                m
            };
            let scale = analytic.norm().max(1e-12);
            for row in 0..analytic.nrows() {
                for col in 0..analytic.ncols() {
                    let num_re = central_diff(|s| total(s)[(row, col)].re, DELTA);
                    let num_im = central_diff(|s| total(s)[(row, col)].im, DELTA);
                    let a = analytic[(row, col)];
                    assert!((a.re - num_re).abs() < 1e-6 * scale, "re k={k} ({row},{col})");
                    assert!((a.im - num_im).abs() < 1e-6 * scale, "im k={k} ({row},{col})");
                }
            }
        }
    }
}

#[test]
fn subset_rate_derivative_matches_finite_differences() {
    let p = params(2, 1);
    let field = PhaseField::draw(2, 3, &p, 30);
    let mut r = rng(30);
    let (uavs, users) = random_scene(&mut r, 2, 3);
    let set = build(&uavs, &users, &p, &field);
    let covs = random_covs(&mut r, 3, 1, P_MAX);
    for subset in [vec![0usize], vec![0, 2], vec![0, 1, 2]] {
        for k in 0..2 {
            for axis in [Axis::X, Axis::Y] {
                let analytic = subset_rate_derivative(
                    &subset, k, axis, &uavs, &users, &set, &covs, &p, &opts(),
                )
                .unwrap();
                let numeric = central_diff(
                    |s| {
                        let ch = build(&displaced(&uavs, k, axis, s), &users, &p, &field);
                        sum_rate_bound(&subset, &ch, &covs, RateUnits::Bits).unwrap()
                    },
                    DELTA,
                );
                let tol = 1e-5 * analytic.abs().max(1e-9);
                assert!(
                    (analytic - numeric).abs() < tol,
                    "subset {subset:?} k={k}: {analytic} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn min_rate_gradient_matches_finite_differences() {
    let mut checked = 0usize;
    for seed in 0..6u64 {
        let p = params(2, 1);
        let field = PhaseField::draw(2, 4, &p, 500 + seed);
        let mut r = rng(500 + seed);
        let (uavs, users) = random_scene(&mut r, 2, 4);
        let set = build(&uavs, &users, &p, &field);
        let covs = random_covs(&mut r, 4, 1, P_MAX);
        let grad = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
        for k in 0..2 {
            for axis in [Axis::X, Axis::Y] {
                let eval = |s: f64| {
                    let ch = build(&displaced(&uavs, k, axis, s), &users, &p, &field);
                    min_rate(&ch, &covs, &opts()).unwrap()
                };
                // a subset switch inside the stencil invalidates the
                // comparison; skip those points
                let (lo, hi) = (eval(-DELTA), eval(DELTA));
                if lo.s_min != grad.min_rate.s_min || hi.s_min != grad.min_rate.s_min {
                    continue;
                }
                let numeric = (hi.r_min - lo.r_min) / (2.0 * DELTA);
                let analytic = match axis {
                    Axis::X => grad.per_uav[k].x,
                    Axis::Y => grad.per_uav[k].y,
                };
                let tol = 1e-5 * analytic.abs().max(1e-9);
                assert!(
                    (analytic - numeric).abs() < tol,
                    "seed {seed} k={k}: {analytic} vs {numeric}"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 12, "only {checked} comparisons survived the switch filter");
}

#[test]
fn zero_covariances_zero_everything() {
    let p = params(2, 1);
    let field = PhaseField::draw(1, 2, &p, 40);
    let (uavs, users) = random_scene(&mut rng(40), 1, 2);
    let set = build(&uavs, &users, &p, &field);
    let covs = CovarianceSet::new(
        vec![CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)],
        vec![P_MAX, P_MAX],
    )
    .unwrap();
    let d = hqh_derivative_sum(&[0, 1], 0, Axis::X, &uavs, &users, &set, &covs, &p).unwrap();
    assert!(d.iter().all(|z| z.re == 0.0 && z.im == 0.0));
    let rho =
        subset_rate_derivative(&[0, 1], 0, Axis::X, &uavs, &users, &set, &covs, &p, &opts())
            .unwrap();
    assert_eq!(rho, 0.0);
}

#[test]
fn translating_the_whole_scene_changes_nothing() {
    let p = params(2, 1);
    let field = PhaseField::draw(2, 3, &p, 50);
    let mut r = rng(50);
    let (uavs, users) = random_scene(&mut r, 2, 3);
    let covs = random_covs(&mut r, 3, 1, P_MAX);
    let set = build(&uavs, &users, &p, &field);
    let base = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();

    let (dx, dy) = (13.25, -7.5);
    let shift = |v: &[Position3]| -> Vec<Position3> {
        v.iter().map(|q| Position3::new(q.x + dx, q.y + dy, q.z)).collect()
    };
    let (uavs2, users2) = (shift(&uavs), shift(&users));
    let set2 = build(&uavs2, &users2, &p, &field);
    let moved = min_rate_gradient(&uavs2, &users2, &set2, &covs, &p, &opts()).unwrap();

    assert_eq!(base.min_rate.s_min, moved.min_rate.s_min);
    for (a, b) in base.per_uav.iter().zip(&moved.per_uav) {
        assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
    }
}

#[test]
fn rotating_the_scene_rotates_gradients() {
    let p = params(2, 1);
    let field = PhaseField::draw(2, 3, &p, 60);
    let mut r = rng(60);
    let (uavs, users) = random_scene(&mut r, 2, 3);
    let covs = random_covs(&mut r, 3, 1, P_MAX);
    let set = build(&uavs, &users, &p, &field);
    let base = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();

    let rot = Rotation2::new(0.7);
    let spin = |v: &[Position3]| -> Vec<Position3> {
        v.iter()
            .map(|q| {
                let xy = rot * Vector2::new(q.x, q.y);
                Position3::new(xy.x, xy.y, q.z)
            })
            .collect()
    };
    let (uavs2, users2) = (spin(&uavs), spin(&users));
    let set2 = build(&uavs2, &users2, &p, &field);
    let spun = min_rate_gradient(&uavs2, &users2, &set2, &covs, &p, &opts()).unwrap();

    for (a, b) in base.per_uav.iter().zip(&spun.per_uav) {
        let expected = rot * Vector2::new(a.x, a.y);
        let got = Vector2::new(b.x, b.y);
        assert!((expected - got).norm() < 1e-8 * (1.0 + expected.norm()));
    }
}

#[test]
fn symmetric_pair_cancels_both_components() {
    // equal real channels mirrored about the UAV: contributions negate exactly
    let p = params(2, 1);
    let field = zero_phases(1, 2, &p);
    let uavs = [Position3::new(0.0, 0.0, 50.0)];
    let users = [Position3::new(-25.0, 0.0, 0.0), Position3::new(25.0, 0.0, 0.0)];
    let set = build(&uavs, &users, &p, &field);
    let covs = CovarianceSet::new(
        vec![
            CMatrix::from_element(1, 1, Complex::new(0.6 * P_MAX, 0.0)),
            CMatrix::from_element(1, 1, Complex::new(0.6 * P_MAX, 0.0)),
        ],
        vec![P_MAX, P_MAX],
    )
    .unwrap();
    let g = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
    assert_eq!(g.min_rate.s_min, vec![0, 1], "identical channels bind as a pair");
    assert_eq!(g.per_uav[0].x, 0.0);
    assert_eq!(g.per_uav[0].y, 0.0);
}

#[test]
fn z_component_is_exactly_zero() {
    let p = params(2, 2);
    let field = PhaseField::draw(3, 2, &p, 70);
    let mut r = rng(70);
    let (uavs, users) = random_scene(&mut r, 3, 2);
    let set = build(&uavs, &users, &p, &field);
    let covs = random_covs(&mut r, 2, 2, P_MAX);
    let g = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
    assert_eq!(g.per_uav.len(), 3);
    for v in &g.per_uav {
        assert_eq!(v.z, 0.0);
        assert!(v.x.is_finite() && v.y.is_finite());
    }
}

#[test]
fn gradient_is_deterministic() {
    let p = params(2, 1);
    let field = PhaseField::draw(2, 3, &p, 80);
    let mut r = rng(80);
    let (uavs, users) = random_scene(&mut r, 2, 3);
    let set = build(&uavs, &users, &p, &field);
    let covs = random_covs(&mut r, 3, 1, P_MAX);
    let a = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
    let b = min_rate_gradient(&uavs, &users, &set, &covs, &p, &opts()).unwrap();
    for (x, y) in a.per_uav.iter().zip(&b.per_uav) {
        assert_eq!(x.x.to_bits(), y.x.to_bits());
        assert_eq!(x.y.to_bits(), y.y.to_bits());
    }
}
