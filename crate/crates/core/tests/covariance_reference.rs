//! Covariance solver checked against closed forms and a small QP oracle.

mod common;

use nalgebra::Complex;

use flybs_core::channel::{ChannelSet, PhaseField};
use flybs_core::covariance::{optimize_covariances, project_psd_trace, SolverSettings};
use flybs_core::rate::{min_rate, CovarianceSet, RateOptions};
use flybs_core::CMatrix;
use flybs_reference::{project_capped_simplex_qp, water_filling_rate};

use common::{build, params, random_covs, random_psd, random_scene, rng, P_MAX};

fn opts() -> RateOptions {
    RateOptions::default()
}

fn scalar(v: f64) -> CMatrix {
    CMatrix::from_element(1, 1, Complex::new(v, 0.0))
}

fn frobenius_ip(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[test]
fn scalar_users_take_full_power() {
    let p = params(2, 1);
    let g = 3;
    let field = PhaseField::draw(2, g, &p, 1);
    let (uavs, users) = random_scene(&mut rng(1), 2, g);
    let set = build(&uavs, &users, &p, &field);
    let budgets = vec![P_MAX, 0.5 * P_MAX, 2.0 * P_MAX];
    let (covs, report) =
        optimize_covariances(&set, &budgets, &SolverSettings::default(), &opts(), None).unwrap();
    assert!(report.converged);
    for (i, &b) in budgets.iter().enumerate() {
        assert!((covs.trace(i) - b).abs() <= 1e-9 * b, "user {i}");
    }
}

#[test]
fn grid_search_confirms_full_power_for_scalar_users() {
    // the max-min objective is non-decreasing in each scalar power, so the
    // grid maximum sits at the full-power corner the solver returns
    let p = params(2, 1);
    let field = PhaseField::draw(1, 2, &p, 5);
    let (uavs, users) = random_scene(&mut rng(5), 1, 2);
    let set = build(&uavs, &users, &p, &field);
    let value = |f1: f64, f2: f64| {
        let covs = CovarianceSet::new(
            vec![scalar(f1 * P_MAX), scalar(f2 * P_MAX)],
            vec![P_MAX, P_MAX],
        )
        .unwrap();
        min_rate(&set, &covs, &opts()).unwrap().r_min
    };
    let steps = 10;
    for i in 0..=steps {
        for j in 0..=steps {
            let (f1, f2) = (i as f64 / steps as f64, j as f64 / steps as f64);
            if i < steps {
                assert!(value(f1 + 0.1, f2) >= value(f1, f2) - 1e-12);
            }
            if j < steps {
                assert!(value(f1, f2 + 0.1) >= value(f1, f2) - 1e-12);
            }
        }
    }
    let (covs, _) = optimize_covariances(
        &set,
        &[P_MAX, P_MAX],
        &SolverSettings::default(),
        &opts(),
        None,
    )
    .unwrap();
    assert!((covs.trace(0) - P_MAX).abs() <= 1e-9 * P_MAX);
    assert!((covs.trace(1) - P_MAX).abs() <= 1e-9 * P_MAX);
}

#[test]
fn single_user_two_antennas_matches_water_filling() {
    for seed in 0..4u64 {
        let p = params(2, 2);
        let field = PhaseField::draw(1, 1, &p, 40 + seed);
        let (uavs, users) = random_scene(&mut rng(40 + seed), 1, 1);
        let set = build(&uavs, &users, &p, &field);
        let settings = SolverSettings { max_iters: 2000, ..SolverSettings::default() };
        let (covs, report) =
            optimize_covariances(&set, &[P_MAX], &settings, &opts(), None).unwrap();
        let closed = water_filling_rate(&set.aggregates[0], P_MAX);
        assert!(
            (report.objective - closed.rate).abs() < 1e-4,
            "seed {seed}: solver {} vs closed form {}",
            report.objective,
            closed.rate
        );
        // the returned matrices reproduce the reported objective
        let check = min_rate(&set, &covs, &opts()).unwrap().r_min;
        assert!((check - report.objective).abs() < 1e-12);
    }
}

#[test]
fn zero_channels_keep_the_full_power_convention() {
    let set = ChannelSet {
        blocks: vec![vec![CMatrix::zeros(2, 1), CMatrix::zeros(2, 1)]],
        aggregates: vec![CMatrix::zeros(2, 1), CMatrix::zeros(2, 1)],
        n_rx: 2,
        n_tx: 1,
    };
    let budgets = [P_MAX, 3.0];
    let (covs, report) =
        optimize_covariances(&set, &budgets, &SolverSettings::default(), &opts(), None).unwrap();
    assert!(report.converged);
    assert_eq!(report.objective, 0.0);
    assert_eq!(covs.trace(0), P_MAX);
    assert_eq!(covs.trace(1), 3.0);
}

#[test]
fn feasible_matrices_are_projection_fixed_points() {
    let mut r = rng(9);
    for n in [1usize, 2, 3] {
        let q = random_psd(&mut r, n, 0.8);
        let out = project_psd_trace(&q, 1.0).unwrap();
        assert!((&out - &q).norm() < 1e-12 * (1.0 + q.norm()), "n = {n}");
    }
}

#[test]
fn projection_clips_then_caps() {
    let q = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex::new(2.0, 0.0),
        Complex::new(-1.0, 0.0),
    ]));
    let out = project_psd_trace(&q, 1.0).unwrap();
    assert!((out[(0, 0)].re - 1.0).abs() < 1e-12);
    assert!(out[(1, 1)].re.abs() < 1e-12);
    assert!(out[(0, 1)].norm() < 1e-12);
}

#[test]
fn diagonal_projection_matches_the_qp_oracle() {
    let cases = [
        (vec![2.0, -1.0, 0.4], 1.0),
        (vec![0.3, 0.2, 0.1], 1.0),
        (vec![5.0, 4.0, 3.0], 2.5),
        (vec![-1.0, -2.0, -3.0], 1.0),
    ];
    for (vals, cap) in cases {
        let q = CMatrix::from_fn(3, 3, |i, j| {
            if i == j { Complex::new(vals[i], 0.0) } else { Complex::new(0.0, 0.0) }
        });
        let out = project_psd_trace(&q, cap).unwrap();
        let oracle = project_capped_simplex_qp(&vals, cap);
        for i in 0..3 {
            assert!(
                (out[(i, i)].re - oracle[i]).abs() < 1e-9,
                "vals {vals:?} cap {cap}: diag {i}"
            );
            for j in 0..3 {
                if i != j {
                    assert!(out[(i, j)].norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn projection_satisfies_the_variational_inequality() {
    // P = proj(X) onto a convex set C satisfies <X - P, Z - P> <= 0 for Z in C
    let mut r = rng(31);
    for case in 0..6 {
        let x_raw = random_psd(&mut r, 3, 2.0);
        let shift = random_psd(&mut r, 3, 1.0);
        let x = &x_raw - &shift * Complex::new(1.5, 0.0);
        let cap = 1.0;
        let proj = project_psd_trace(&x, cap).unwrap();
        for _ in 0..20 {
            let spend = common::uniform(&mut r, 0.1, 1.0) * cap;
            let z = random_psd(&mut r, 3, spend);
            let ip = frobenius_ip(&(&x - &proj), &(&z - &proj));
            assert!(ip <= 1e-8, "case {case}: inner product {ip}");
        }
    }
}

#[test]
fn projection_is_idempotent_and_nonexpansive() {
    let mut r = rng(47);
    for _ in 0..6 {
        let x = &random_psd(&mut r, 3, 3.0) - &random_psd(&mut r, 3, 1.2);
        let y = &random_psd(&mut r, 3, 2.0) - &random_psd(&mut r, 3, 0.7);
        let px = project_psd_trace(&x, 1.0).unwrap();
        let py = project_psd_trace(&y, 1.0).unwrap();
        let ppx = project_psd_trace(&px, 1.0).unwrap();
        assert!((&ppx - &px).norm() < 1e-10);
        assert!((&px - &py).norm() <= (&x - &y).norm() * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn solver_output_is_feasible() {
    let p = params(2, 2);
    let g = 2;
    let field = PhaseField::draw(2, g, &p, 61);
    let (uavs, users) = random_scene(&mut rng(61), 2, g);
    let set = build(&uavs, &users, &p, &field);
    let budgets = vec![P_MAX, 0.3 * P_MAX];
    let (covs, _) =
        optimize_covariances(&set, &budgets, &SolverSettings::default(), &opts(), None).unwrap();
    for (i, &b) in budgets.iter().enumerate() {
        assert!(covs.trace(i) <= b * (1.0 + 1e-9));
        let eig = nalgebra::SymmetricEigen::new(covs.q(i).clone());
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min_eig >= -1e-9 * (1.0 + b));
    }
}

#[test]
fn solver_never_scores_below_the_isotropic_start() {
    let p = params(2, 2);
    let g = 3;
    let field = PhaseField::draw(1, g, &p, 71);
    let (uavs, users) = random_scene(&mut rng(71), 1, g);
    let set = build(&uavs, &users, &p, &field);
    let budgets = vec![P_MAX; g];
    let start = CovarianceSet::isotropic_full_power(2, &budgets);
    let start_val = min_rate(&set, &start, &opts()).unwrap().r_min;
    let (_, report) =
        optimize_covariances(&set, &budgets, &SolverSettings::default(), &opts(), None).unwrap();
    assert!(report.objective >= start_val - 1e-15);
}

#[test]
fn objective_is_concave_along_feasible_segments() {
    let p = params(2, 2);
    let g = 2;
    let field = PhaseField::draw(2, g, &p, 83);
    let mut r = rng(83);
    let (uavs, users) = random_scene(&mut r, 2, g);
    let set = build(&uavs, &users, &p, &field);
    for _ in 0..5 {
        let a = random_covs(&mut r, g, 2, P_MAX);
        let b = random_covs(&mut r, g, 2, P_MAX);
        let mix = |lambda: f64| {
            let q = (0..g)
                .map(|i| {
                    a.q(i) * Complex::new(1.0 - lambda, 0.0) + b.q(i) * Complex::new(lambda, 0.0)
                })
                .collect();
            let covs = CovarianceSet::new(q, vec![P_MAX; g]).unwrap();
            min_rate(&set, &covs, &opts()).unwrap().r_min
        };
        let (j0, j1, jm) = (mix(0.0), mix(1.0), mix(0.5));
        assert!(jm >= 0.5 * (j0 + j1) - 1e-9);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let p = params(2, 2);
    let g = 2;
    let field = PhaseField::draw(2, g, &p, 91);
    let (uavs, users) = random_scene(&mut rng(91), 2, g);
    let set = build(&uavs, &users, &p, &field);
    let budgets = vec![P_MAX; g];
    let run = || {
        optimize_covariances(&set, &budgets, &SolverSettings::default(), &opts(), None).unwrap()
    };
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(ra.iterations, rb.iterations);
    assert_eq!(ra.objective.to_bits(), rb.objective.to_bits());
    for i in 0..g {
        for (x, y) in a.q(i).iter().zip(b.q(i).iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }
}

#[test]
fn warm_start_holds_the_reached_objective() {
    let p = params(2, 2);
    let g = 2;
    let field = PhaseField::draw(1, g, &p, 97);
    let (uavs, users) = random_scene(&mut rng(97), 1, g);
    let set = build(&uavs, &users, &p, &field);
    let budgets = vec![P_MAX; g];
    // two transmit antennas need a longer tail than the 200-iteration default
    // before the stall rule fires
    let settings = SolverSettings { max_iters: 3000, ..SolverSettings::default() };
    let (cold, cold_report) =
        optimize_covariances(&set, &budgets, &settings, &opts(), None).unwrap();
    assert!(cold_report.converged);
    let (_, warm_report) =
        optimize_covariances(&set, &budgets, &settings, &opts(), Some(&cold)).unwrap();
    assert!(warm_report.converged);
    assert!(warm_report.iterations < cold_report.iterations);
    assert!(warm_report.objective >= cold_report.objective - 1e-9 * cold_report.objective.abs());
}

#[test]
fn nonpositive_budget_is_rejected() {
    let p = params(2, 1);
    let field = PhaseField::draw(1, 1, &p, 3);
    let (uavs, users) = random_scene(&mut rng(3), 1, 1);
    let set = build(&uavs, &users, &p, &field);
    for bad in [0.0, -1.0, f64::NAN] {
        let err =
            optimize_covariances(&set, &[bad], &SolverSettings::default(), &opts(), None)
                .unwrap_err();
        assert!(err.to_string().contains("power budget"), "{err}");
    }
}
